#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mssrk/error.hpp"
#include "mssrk/noise.hpp"
#include "mssrk/scheme.hpp"
#include "mssrk/system.hpp"
#include "mssrk/tableau.hpp"

namespace mssrk {

struct GridSpec {
  int cells = 0;
  double h = 0;
  int steps = 0;
  double tau = 0;

  double length() const { return cells * h; }

  void validate() const {
    if (cells < 2) throw ConfigError("grid: at least two cells required");
    if (!(h > 0)) throw ConfigError("grid: h must be positive");
    if (!(tau > 0)) throw ConfigError("grid: tau must be positive");
    if (steps < 0) throw ConfigError("grid: steps must be nonnegative");
  }
};

/// Line values z_{m,i}^p: cell i, spatial stage m, n components, cell-major.
struct StepState {
  Vector line;
  int level = 0;
};

using Scheme1d = SpaceTimeScheme<1>;
using StageBlock = Scheme1d::Stages;

struct StepResult {
  StepState state;
  StageBlock stages;
};

/// Two tangent fields over the line layout. `faces_u`/`faces_v` hold the
/// tangent stage unknowns (including face values) of the step that produced
/// the pair; they are empty for an initial pair.
struct TangentPair {
  StepState u;
  StepState v;
  Vector faces_u;
  Vector faces_v;
};

inline Scheme1d make_scheme(SystemSpec const& spec, GridSpec const& grid, Tableau const& t_tab,
                            Tableau const& x_tab) {
  grid.validate();
  if (auto const violations = validate(spec); !violations.empty()) {
    throw ConfigError("system failed validation: " + violations.front().message());
  }
  return Scheme1d(spec, t_tab, {x_tab}, SchemeGeometry<1>{{grid.cells}, {grid.h}, grid.tau});
}

/// x_i + c_m h for every cell i and spatial stage m.
inline std::vector<double> stage_points(GridSpec const& grid, Tableau const& x_tab) {
  Vector const c = x_tab.c();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid.cells) * x_tab.stages());
  for (int i = 0; i < grid.cells; ++i) {
    for (int m = 0; m < x_tab.stages(); ++m) out.push_back((i + c(m)) * grid.h);
  }
  return out;
}

/// Line values of z(x, 0) at the spatial stage abscissae.
inline StepState initial_state(GridSpec const& grid, Tableau const& x_tab, int n,
                               std::function<Vector(double)> const& z0) {
  auto const pts = stage_points(grid, x_tab);
  StepState st;
  st.line.resize(static_cast<Eigen::Index>(pts.size()) * n);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    Vector const z = z0(pts[p]);
    if (z.size() != n) throw ConfigError("initial_state: initial function returned wrong size");
    st.line.segment(static_cast<Eigen::Index>(p) * n, n) = z;
  }
  return st;
}

inline NoisePath sample_grid_noise(QWienerSpec const& spec, GridSpec const& grid,
                                   Tableau const& x_tab) {
  return sample_path(spec, grid.steps, grid.tau, stage_points(grid, x_tab));
}

namespace detail {

inline Vector step_increments(NoisePath const& noise, int level, int expected_points,
                              std::vector<double> const& points) {
  if (noise.num_points() != expected_points) {
    throw ConfigError("noise path has " + std::to_string(noise.num_points()) +
                      " points; the grid has " + std::to_string(expected_points) + " stage points");
  }
  int const dim = noise.dim();
  for (int m = 0; m < expected_points; ++m) {
    auto const p = noise.point(m);
    for (int d = 0; d < dim; ++d) {
      if (std::abs(p[d] - points[static_cast<std::size_t>(m) * dim + d]) > 1e-12 * (1 + std::abs(p[d]))) {
        throw ConfigError("noise was sampled at points that differ from the stage abscissae");
      }
    }
  }
  return noise.step_increments(level);
}

}  // namespace detail

inline StepResult step(Scheme1d const& scheme, StepState const& state, NoisePath const& noise,
                       SolverConfig const& solver) {
  auto const pts = scheme.stage_points();
  Vector const dw = detail::step_increments(noise, state.level, static_cast<int>(pts.size()), pts);
  auto out = scheme.step(state.line, dw, solver);
  return {{std::move(out.line), state.level + 1}, std::move(out.stages)};
}

inline StepResult step(SystemSpec const& spec, GridSpec const& grid, Tableau const& t_tab,
                       Tableau const& x_tab, StepState const& state, NoisePath const& noise,
                       SolverConfig const& solver) {
  return step(make_scheme(spec, grid, t_tab, x_tab), state, noise, solver);
}

struct MidpointResult {
  StepState state;
  Vector half_step_edges;  // z_i^{p+1/2}, one n-block per edge i
  int iterations = 0;
};

/// Box scheme written directly in midpoint form:
///   K (w_c - z_c)/tau + L (e_{c+1} - e_c)/h
///     = grad S1(m_c) + grad S2(m_c) dW_c / tau,   m_c = (z_c + w_c)/2,
///   (z_c + w_c)/2 = (e_c + e_{c+1})/2,
/// with new cell values w, half-step edge values e and periodic edges.
/// Solved by dense Newton; independent of the general stage machinery.
inline MidpointResult midpoint_step(SystemSpec const& spec, GridSpec const& grid,
                                    StepState const& state, NoisePath const& noise,
                                    SolverConfig const& solver) {
  grid.validate();
  if (spec.spatial_dims() != 1) throw ConfigError("midpoint_step: one spatial dimension required");
  int const n = spec.n;
  int const I = grid.cells;
  if (state.line.size() != static_cast<Eigen::Index>(n) * I) {
    throw ConfigError("midpoint_step: state is not on the one-stage layout");
  }
  std::vector<double> centers(I);
  for (int i = 0; i < I; ++i) centers[i] = (i + 0.5) * grid.h;
  Vector const dw = detail::step_increments(noise, state.level, I, centers);

  double const tau = grid.tau;
  double const h = grid.h;
  Matrix const& K = spec.K;
  Matrix const& L = spec.L[0];
  Vector const& z = state.line;
  int const N = 2 * n * I;
  auto w_at = [&](int c) { return c * n; };
  auto e_at = [&](int i) { return n * I + ((i % I + I) % I) * n; };

  Vector u(N);
  for (int c = 0; c < I; ++c) {
    u.segment(w_at(c), n) = z.segment(c * n, n);
    u.segment(e_at(c), n) = 0.5 * (z.segment(((c + I - 1) % I) * n, n) + z.segment(c * n, n));
  }

  // Residual rows are scaled by tau so they are comparable with the
  // stage-equation residual of the general scheme.
  auto residual = [&](Vector const& x) {
    Vector f(N);
    for (int c = 0; c < I; ++c) {
      Vector const w = x.segment(w_at(c), n);
      Vector const zc = z.segment(c * n, n);
      Vector const mid = 0.5 * (zc + w);
      Vector const el = x.segment(e_at(c), n);
      Vector const er = x.segment(e_at(c + 1), n);
      f.segment(w_at(c), n) = K * (w - zc) + (tau / h) * (L * (er - el)) - tau * spec.grad_s1(mid) -
                              spec.grad_s2(mid) * dw(c);
      f.segment(e_at(c), n) = 0.5 * (zc + w) - 0.5 * (el + er);
    }
    return f;
  };
  auto jacobian = [&](Vector const& x) {
    Matrix jac = Matrix::Zero(N, N);
    Matrix const id = Matrix::Identity(n, n);
    for (int c = 0; c < I; ++c) {
      Vector const mid = 0.5 * (z.segment(c * n, n) + x.segment(w_at(c), n));
      jac.block(w_at(c), w_at(c), n, n) = K - 0.5 * (tau * spec.hess_s1(mid) + dw(c) * spec.hess_s2(mid));
      jac.block(w_at(c), e_at(c + 1), n, n) += (tau / h) * L;
      jac.block(w_at(c), e_at(c), n, n) -= (tau / h) * L;
      jac.block(e_at(c), w_at(c), n, n) = 0.5 * id;
      jac.block(e_at(c), e_at(c), n, n) -= 0.5 * id;
      jac.block(e_at(c), e_at(c + 1), n, n) -= 0.5 * id;
    }
    return jac;
  };

  double prev = std::numeric_limits<double>::infinity();
  int stalls = 0;
  Eigen::FullPivLU<Matrix> lu;
  for (int iter = 0;; ++iter) {
    Vector const f = residual(u);
    double const res = f.allFinite() ? f.cwiseAbs().maxCoeff() : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(res)) throw SolverError("midpoint_step: non-finite value", res, iter);
    if (res <= solver.tol) {
      MidpointResult out;
      out.state = {u.head(n * I), state.level + 1};
      out.half_step_edges = u.tail(n * I);
      out.iterations = iter;
      return out;
    }
    if (iter >= solver.max_iter) throw SolverError("midpoint_step did not converge", res, iter);
    stalls = res >= prev ? stalls + 1 : 0;
    if (stalls >= 3) throw SolverError("midpoint_step stagnated", res, iter);
    prev = res;
    if (iter == 0 || !spec.linear) {
      lu.compute(jacobian(u));
      if (!lu.isInvertible()) throw SolverError("midpoint_step: singular system", res, iter);
    }
    u -= lu.solve(f);
  }
}

/// Propagates both tangent fields through the linearized step around
/// `primal`.
inline TangentPair tangent_step(Scheme1d const& scheme, StageBlock const& primal,
                                TangentPair const& pair, SolverConfig const& solver) {
  auto tu = scheme.tangent(primal, pair.u.line, solver);
  auto tv = scheme.tangent(primal, pair.v.line, solver);
  TangentPair out;
  out.u = {std::move(tu.line), pair.u.level + 1};
  out.v = {std::move(tv.line), pair.v.level + 1};
  out.faces_u = std::move(tu.unknowns);
  out.faces_v = std::move(tv.unknowns);
  return out;
}

inline TangentPair tangent_step(SystemSpec const& spec, GridSpec const& grid, Tableau const& t_tab,
                                Tableau const& x_tab, StageBlock const& primal,
                                TangentPair const& pair, NoisePath const& noise,
                                SolverConfig const& solver) {
  auto const scheme = make_scheme(spec, grid, t_tab, x_tab);
  auto const pts = scheme.stage_points();
  Vector const dw = detail::step_increments(noise, pair.u.level, static_cast<int>(pts.size()), pts);
  if ((dw - primal.increments).cwiseAbs().maxCoeff() != 0.0) {
    throw ConfigError("tangent_step: noise path differs from the one used by the primal step");
  }
  return tangent_step(scheme, primal, pair, solver);
}

/// u^T K v, the value of (1/2) dz ^ K dz on the pair (u, v).
inline double wedge(Vector const& u, Vector const& v, Matrix const& K) { return u.dot(K * v); }

/// Per-cell defect (omega_i^{p+1} - omega_i^p)/tau + (kappa_{i+1} - kappa_i)/h.
inline Vector ms_residual(Tableau const& t_tab, Tableau const& x_tab, Matrix const& K,
                          Matrix const& L, TangentPair const& before, TangentPair const& after,
                          GridSpec const& grid) {
  SystemSpec forms;
  forms.n = static_cast<int>(K.rows());
  forms.K = K;
  forms.L = {L};
  forms.grad_s1 = forms.grad_s2 = [](Vector const& z) -> Vector { return Vector::Zero(z.size()); };
  forms.hess_s1 = forms.hess_s2 = [](Vector const& z) -> Matrix { return Matrix::Zero(z.size(), z.size()); };
  Scheme1d const scheme(forms, t_tab, {x_tab}, SchemeGeometry<1>{{grid.cells}, {grid.h}, grid.tau});
  if (after.faces_u.size() != scheme.num_unknowns() || after.faces_v.size() != scheme.num_unknowns()) {
    throw ConfigError("ms_residual: the 'after' pair carries no stage data for this layout");
  }
  return scheme.multisymplectic_residual(before.u.line, before.v.line, after.u.line, after.v.line,
                                         after.faces_u, after.faces_v);
}

/// sum_i sum_m b~_m |z_{m,i}|^2.
inline double quadratic_invariant(Tableau const& x_tab, StepState const& state, GridSpec const& grid) {
  int const s = x_tab.stages();
  auto const blocks = static_cast<Eigen::Index>(grid.cells) * s;
  if (blocks == 0 || state.line.size() % blocks != 0) {
    throw ConfigError("quadratic_invariant: state does not match grid and tableau");
  }
  auto const n = state.line.size() / blocks;
  double sum = 0;
  for (Eigen::Index p = 0; p < blocks; ++p) {
    sum += x_tab.b(static_cast<int>(p % s)) * state.line.segment(p * n, n).squaredNorm();
  }
  return sum;
}

struct Diagnostics {
  bool ms_residual = false;
  bool quadratic_invariant = false;
};

struct RunOptions {
  Diagnostics diagnostics;
  int snapshot_stride = 0;  // 0: no snapshots
  std::uint64_t tangent_seed = 1;
};

struct Row1d {
  int step = 0;
  double time = 0;
  double ms_residual_max = std::numeric_limits<double>::quiet_NaN();
  double quadratic_invariant = std::numeric_limits<double>::quiet_NaN();
  int solver_iterations = 0;
};

struct TrajectoryRecord {
  std::vector<Row1d> rows;
  std::vector<StepState> snapshots;
  bool failed = false;
  std::string failure;
};

/// Random tangent pair with standard normal entries.
inline TangentPair random_tangent_pair(Eigen::Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TangentPair pair;
  pair.u.line.resize(size);
  pair.v.line.resize(size);
  for (Eigen::Index i = 0; i < size; ++i) pair.u.line(i) = normal(rng);
  for (Eigen::Index i = 0; i < size; ++i) pair.v.line(i) = normal(rng);
  return pair;
}

/// Advances `grid.steps` steps from `initial`, recording the selected
/// diagnostics after every step. A solver failure ends the run early with
/// `failed` set; the rows recorded so far are kept.
inline TrajectoryRecord run(SystemSpec const& spec, GridSpec const& grid, Tableau const& t_tab,
                            Tableau const& x_tab, NoisePath const& noise, SolverConfig const& solver,
                            RunOptions const& options, StepState const& initial) {
  auto const scheme = make_scheme(spec, grid, t_tab, x_tab);
  if (options.diagnostics.quadratic_invariant) {
    Eigen::FullPivLU<Matrix> lu(spec.K);
    if (!lu.isInvertible()) {
      throw ConfigError("quadratic invariant diagnostic requires a nonsingular K");
    }
  }
  TrajectoryRecord rec;
  StepState state = initial;
  TangentPair pair;
  if (options.diagnostics.ms_residual) pair = random_tangent_pair(initial.line.size(), options.tangent_seed);

  Row1d row0;
  row0.step = 0;
  row0.time = 0;
  if (options.diagnostics.ms_residual) row0.ms_residual_max = 0;
  if (options.diagnostics.quadratic_invariant) row0.quadratic_invariant = quadratic_invariant(x_tab, state, grid);
  rec.rows.push_back(row0);
  if (options.snapshot_stride > 0) rec.snapshots.push_back(state);

  for (int p = 0; p < grid.steps; ++p) {
    try {
      auto res = step(scheme, state, noise, solver);
      Row1d row;
      row.step = p + 1;
      row.time = (p + 1) * grid.tau;
      row.solver_iterations = res.stages.iterations;
      if (options.diagnostics.ms_residual) {
        TangentPair next = tangent_step(scheme, res.stages, pair, solver);
        Vector const r = scheme.multisymplectic_residual(pair.u.line, pair.v.line, next.u.line,
                                                         next.v.line, next.faces_u, next.faces_v);
        row.ms_residual_max = r.cwiseAbs().maxCoeff();
        pair = std::move(next);
      }
      state = std::move(res.state);
      if (options.diagnostics.quadratic_invariant) row.quadratic_invariant = quadratic_invariant(x_tab, state, grid);
      rec.rows.push_back(row);
      if (options.snapshot_stride > 0 && (p + 1) % options.snapshot_stride == 0) rec.snapshots.push_back(state);
    } catch (SolverError const& e) {
      rec.failed = true;
      rec.failure = e.what();
      break;
    }
  }
  return rec;
}

}  // namespace mssrk
