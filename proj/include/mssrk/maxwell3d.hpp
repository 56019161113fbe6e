#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mssrk/error.hpp"
#include "mssrk/integrator1d.hpp"
#include "mssrk/noise.hpp"
#include "mssrk/scheme.hpp"
#include "mssrk/system.hpp"
#include "mssrk/tableau.hpp"

namespace mssrk {

struct MaxwellGrid {
  std::array<int, 3> cells{};
  std::array<double, 3> spacing{};
  double tau = 0;
  int steps = 0;

  std::vector<double> lengths() const {
    return {cells[0] * spacing[0], cells[1] * spacing[1], cells[2] * spacing[2]};
  }
};

/// Tableaux are ordered time, x, y, z.
struct MaxwellSpec {
  double lambda = 0;
  MaxwellGrid grid;
  std::array<Tableau, 4> tableaux;
  QWienerSpec noise;
};

/// Field (H, E) at every spatial stage triple of every cell, cell-major.
struct MaxwellState {
  Vector line;
  int level = 0;
};

using Scheme3d = SpaceTimeScheme<3>;

/// n = 6 system for the state (H1, H2, H3, E1, E2, E3):
///   K = [[0, -I], [I, 0]],  L_i = diag(D_i, D_i),
///   S1 = 0,  S2 = lambda/2 (|E|^2 + |H|^2).
inline SystemSpec maxwell_system(double lambda) {
  Matrix K = Matrix::Zero(6, 6);
  K.block(0, 3, 3, 3) = -Matrix::Identity(3, 3);
  K.block(3, 0, 3, 3) = Matrix::Identity(3, 3);
  std::array<Matrix, 3> D;
  for (auto& m : D) m = Matrix::Zero(3, 3);
  D[0](1, 2) = -1;
  D[0](2, 1) = 1;
  D[1](0, 2) = 1;
  D[1](2, 0) = -1;
  D[2](0, 1) = -1;
  D[2](1, 0) = 1;
  std::vector<Matrix> L;
  for (auto const& d : D) {
    Matrix l = Matrix::Zero(6, 6);
    l.block(0, 0, 3, 3) = d;
    l.block(3, 3, 3, 3) = d;
    L.push_back(std::move(l));
  }
  return make_quadratic_system(std::move(K), std::move(L),
                               {Matrix::Zero(6, 6), lambda * Matrix::Identity(6, 6)});
}

inline Scheme3d maxwell_scheme(MaxwellSpec const& spec) {
  auto const& g = spec.grid;
  if (g.steps < 0) throw ConfigError("maxwell: steps must be nonnegative");
  return Scheme3d(maxwell_system(spec.lambda), spec.tableaux[0],
                  {spec.tableaux[1], spec.tableaux[2], spec.tableaux[3]},
                  SchemeGeometry<3>{g.cells, g.spacing, g.tau});
}

/// Noise sampled at the 3D stage points (x_i + c_m dx, y_j + c_p dy, z_k + c_l dz).
inline NoisePath sample_maxwell_noise(MaxwellSpec const& spec) {
  return sample_path(spec.noise, spec.grid.steps, spec.grid.tau, maxwell_scheme(spec).stage_points());
}

inline MaxwellState maxwell_initial_state(Scheme3d const& scheme,
                                          std::function<Vector(std::array<double, 3> const&)> const& f) {
  auto const pts = scheme.stage_points();
  MaxwellState st;
  st.line.resize(scheme.line_size());
  for (std::size_t p = 0; p < pts.size() / 3; ++p) {
    Vector const v = f({pts[3 * p], pts[3 * p + 1], pts[3 * p + 2]});
    if (v.size() != 6) throw ConfigError("maxwell initial field must have 6 components");
    st.line.segment(static_cast<Eigen::Index>(p) * 6, 6) = v;
  }
  return st;
}

struct MaxwellStepResult {
  MaxwellState state;
  Scheme3d::Stages stages;
};

inline MaxwellStepResult maxwell_step(Scheme3d const& scheme, MaxwellState const& state,
                                      NoisePath const& noise, SolverConfig const& solver) {
  auto const pts = scheme.stage_points();
  Vector const dw = detail::step_increments(noise, state.level, static_cast<int>(pts.size() / 3), pts);
  auto out = scheme.step(state.line, dw, solver);
  return {{std::move(out.line), state.level + 1}, std::move(out.stages)};
}

inline MaxwellStepResult maxwell_step(MaxwellSpec const& spec, MaxwellState const& state,
                                      NoisePath const& noise, SolverConfig const& solver) {
  return maxwell_step(maxwell_scheme(spec), state, noise, solver);
}

/// sum over cells and stage triples of b~_m b-_p b^_l (|E|^2 + |H|^2).
inline double discrete_energy(MaxwellState const& state, std::array<Tableau, 4> const& tableaux) {
  int const sx = tableaux[1].stages(), sy = tableaux[2].stages(), sz = tableaux[3].stages();
  Eigen::Index const per_cell = static_cast<Eigen::Index>(sx) * sy * sz * 6;
  if (state.line.size() % per_cell != 0) throw ConfigError("discrete_energy: layout mismatch");
  double sum = 0;
  Eigen::Index pos = 0;
  for (Eigen::Index c = 0; c < state.line.size() / per_cell; ++c) {
    for (int m = 0; m < sx; ++m) {
      for (int p = 0; p < sy; ++p) {
        for (int l = 0; l < sz; ++l) {
          sum += tableaux[1].b(m) * tableaux[2].b(p) * tableaux[3].b(l) *
                 state.line.segment(pos, 6).squaredNorm();
          pos += 6;
        }
      }
    }
  }
  return sum;
}

struct MaxwellTangentPair {
  MaxwellState u;
  MaxwellState v;
  Vector stages_u;
  Vector stages_v;
};

inline MaxwellTangentPair maxwell_tangent_step(Scheme3d const& scheme, Scheme3d::Stages const& primal,
                                               MaxwellTangentPair const& pair,
                                               SolverConfig const& solver) {
  auto tu = scheme.tangent(primal, pair.u.line, solver);
  auto tv = scheme.tangent(primal, pair.v.line, solver);
  return {{std::move(tu.line), pair.u.level + 1},
          {std::move(tv.line), pair.v.level + 1},
          std::move(tu.unknowns),
          std::move(tv.unknowns)};
}

/// Per-cell defect of the 3D discrete multi-symplectic conservation law.
inline Vector maxwell_ms_residual(MaxwellTangentPair const& before, MaxwellTangentPair const& after,
                                  std::array<Tableau, 4> const& tableaux, MaxwellGrid const& grid) {
  Scheme3d const scheme(maxwell_system(0.0), tableaux[0], {tableaux[1], tableaux[2], tableaux[3]},
                        SchemeGeometry<3>{grid.cells, grid.spacing, grid.tau});
  if (after.stages_u.size() != scheme.num_unknowns() || after.stages_v.size() != scheme.num_unknowns()) {
    throw ConfigError("maxwell_ms_residual: the 'after' pair carries no stage data for this layout");
  }
  return scheme.multisymplectic_residual(before.u.line, before.v.line, after.u.line, after.v.line,
                                         after.stages_u, after.stages_v);
}

struct MaxwellRow {
  int step = 0;
  double time = 0;
  double energy = 0;
  double energy_rel_drift = 0;
  double ms_residual_max = std::numeric_limits<double>::quiet_NaN();
  int solver_iterations = 0;
};

struct MaxwellRecord {
  std::vector<MaxwellRow> rows;
  bool failed = false;
  std::string failure;
};

/// |E - E0| / E0, or |E - E0| when E0 vanishes.
inline double relative_drift(double e, double e0) {
  double const diff = std::abs(e - e0);
  return e0 != 0.0 ? diff / std::abs(e0) : diff;
}

inline MaxwellRecord run_maxwell(MaxwellSpec const& spec, MaxwellState const& initial,
                                 NoisePath const& noise, SolverConfig const& solver,
                                 bool ms_residual, std::uint64_t tangent_seed = 1) {
  auto const scheme = maxwell_scheme(spec);
  MaxwellRecord rec;
  MaxwellState state = initial;
  double const e0 = discrete_energy(state, spec.tableaux);
  MaxwellTangentPair pair;
  if (ms_residual) {
    auto const tp = random_tangent_pair(initial.line.size(), tangent_seed);
    pair.u = {tp.u.line, initial.level};
    pair.v = {tp.v.line, initial.level};
  }
  MaxwellRow row0;
  row0.energy = e0;
  if (ms_residual) row0.ms_residual_max = 0;
  rec.rows.push_back(row0);
  for (int p = 0; p < spec.grid.steps; ++p) {
    try {
      auto res = maxwell_step(scheme, state, noise, solver);
      MaxwellRow row;
      row.step = p + 1;
      row.time = (p + 1) * spec.grid.tau;
      row.solver_iterations = res.stages.iterations;
      if (ms_residual) {
        auto next = maxwell_tangent_step(scheme, res.stages, pair, solver);
        Vector const r = scheme.multisymplectic_residual(pair.u.line, pair.v.line, next.u.line,
                                                         next.v.line, next.stages_u, next.stages_v);
        row.ms_residual_max = r.cwiseAbs().maxCoeff();
        pair = std::move(next);
      }
      state = std::move(res.state);
      row.energy = discrete_energy(state, spec.tableaux);
      row.energy_rel_drift = relative_drift(row.energy, e0);
      rec.rows.push_back(row);
    } catch (SolverError const& e) {
      rec.failed = true;
      rec.failure = e.what();
      break;
    }
  }
  return rec;
}

}  // namespace mssrk
