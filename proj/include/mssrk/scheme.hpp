#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include "mssrk/error.hpp"
#include "mssrk/system.hpp"
#include "mssrk/tableau.hpp"

namespace mssrk {

struct SolverConfig {
  enum class Method {
    // Newton iteration on the assembled sparse stage system. A linear system
    // converges after one solve plus at most a few refinement sweeps.
    direct,
    // Chord iteration: the Jacobian holds K, L_d and D_zz S1 frozen at the
    // start of the step; the noise term is lagged one iteration.
    fixed_point,
  };
  Method method = Method::direct;
  double tol = 1e-13;
  int max_iter = 500;
};

/// Uniform periodic space-time grid for `Dim` spatial directions.
template <int Dim>
struct SchemeGeometry {
  std::array<int, Dim> cells{};
  std::array<double, Dim> spacing{};
  double tau = 0;
};

/// Maximum-norm residual of each equation group of a converged step.
struct ResidualReport {
  double internal_time = 0;   // Y - z^p - tau sum a dtY
  double internal_space = 0;  // Y - z_face - h sum a~ dxY
  double face_update = 0;     // z_face(i+1) - z_face(i) - h sum b~ dxY
  double stage_equation = 0;  // tau K dtY + tau sum L dxY - tau grad S1 - grad S2 dW

  double max() const {
    return std::max(std::max(internal_time, internal_space), std::max(face_update, stage_equation));
  }
};

/// Space-time stochastic Runge-Kutta scheme on a periodic box.
///
/// Per cell the unknowns are the stage derivatives dtY[j,k] and dxY_d[j,k]
/// for every spatial stage combination j and temporal stage k, plus the
/// face values z_d[jf,k] on the left face of the cell in each direction d
/// (jf enumerates the spatial stage combinations with the d-th index
/// dropped). Stage values follow from
///   Y[j,k] = z^p[j] + tau sum_l a_kl dtY[j,l].
/// All cells are solved together because the face relations couple each
/// cell to its periodic neighbours.
///
/// Vectors over the "line" layout store z[c,j] (cell c, spatial stage
/// combination j) as contiguous n-blocks, cell-major.
template <int Dim>
class SpaceTimeScheme {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double>;

  struct Stages {
    Vector line_start;  // z^p
    Vector unknowns;    // dtY, dxY_d, face values
    Vector increments;  // dW per (cell, spatial stage combination)
    int iterations = 0;
    double residual = 0;
  };

  struct StepOutput {
    Vector line;
    Stages stages;
  };

  struct TangentOutput {
    Vector line;
    Vector unknowns;
    int iterations = 0;
  };

  SpaceTimeScheme(SystemSpec system, Tableau time, std::array<Tableau, Dim> space,
                  SchemeGeometry<Dim> geometry)
      : system_(std::move(system)),
        time_(std::move(time)),
        space_(std::move(space)),
        geometry_(geometry) {
    if (system_.spatial_dims() != Dim) {
      throw ConfigError("scheme: system has " + std::to_string(system_.spatial_dims()) +
                        " spatial matrices, scheme needs " + std::to_string(Dim));
    }
    if (!(geometry_.tau > 0)) throw ConfigError("scheme: tau must be positive");
    for (int d = 0; d < Dim; ++d) {
      if (geometry_.cells[d] < 2) throw ConfigError("scheme: at least two cells per direction");
      if (!(geometry_.spacing[d] > 0)) throw ConfigError("scheme: spacing must be positive");
    }
    build_tables();
  }

  SystemSpec const& system() const { return system_; }
  Tableau const& time_tableau() const { return time_; }
  Tableau const& space_tableau(int d) const { return space_[d]; }
  SchemeGeometry<Dim> const& geometry() const { return geometry_; }

  int n() const { return system_.n; }
  int time_stages() const { return time_.stages(); }
  int stage_combos() const { return num_combos_; }
  int face_combos(int d) const { return num_face_combos_[d]; }
  int num_cells() const { return num_cells_; }
  int line_size() const { return num_cells_ * num_combos_ * n(); }
  int num_unknowns() const { return num_cells_ * block_ * n(); }

  /// Stage weight prod_d b~_d[j_d] of spatial stage combination j.
  double combo_weight(int j) const { return combo_weight_[j]; }

  int cell_index(std::array<int, Dim> const& i) const {
    int c = 0;
    for (int d = 0; d < Dim; ++d) c = c * geometry_.cells[d] + i[d];
    return c;
  }

  std::array<int, Dim> cell_multi_index(int c) const {
    std::array<int, Dim> i{};
    for (int d = Dim - 1; d >= 0; --d) {
      i[d] = c % geometry_.cells[d];
      c /= geometry_.cells[d];
    }
    return i;
  }

  int neighbor(int c, int d) const { return neighbor_[c * Dim + d]; }

  /// Spatial stage abscissae x_i + c_m h in line order, Dim coordinates each.
  std::vector<double> stage_points() const {
    std::array<Vector, Dim> abscissae;
    for (int d = 0; d < Dim; ++d) abscissae[d] = space_[d].c();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(num_cells_) * num_combos_ * Dim);
    for (int c = 0; c < num_cells_; ++c) {
      auto const i = cell_multi_index(c);
      for (int j = 0; j < num_combos_; ++j) {
        for (int d = 0; d < Dim; ++d) {
          out.push_back((i[d] + abscissae[d](combo_index_[j][d])) * geometry_.spacing[d]);
        }
      }
    }
    return out;
  }

  // Views into the unknown vector.
  auto dt(Vector const& x, int c, int j, int k) const { return x.segment(dt_pos(c, j, k), n()); }
  auto dx(Vector const& x, int d, int c, int j, int k) const {
    return x.segment(dx_pos(d, c, j, k), n());
  }
  auto face(Vector const& x, int d, int c, int jf, int k) const {
    return x.segment(face_pos(d, c, jf, k), n());
  }
  auto line_at(Vector const& line, int c, int j) const { return line.segment(line_pos(c, j), n()); }

  Vector stage_value(Vector const& x, Vector const& line, int c, int j, int k) const {
    Vector y = line_at(line, c, j);
    for (int l = 0; l < time_stages(); ++l) y += geometry_.tau * time_.a(k, l) * dt(x, c, j, l);
    return y;
  }

  /// Residual of the stage equations; zero at a solution.
  Vector residual(Vector const& x, Vector const& line, Vector const& increments) const {
    Vector f(num_unknowns());
    double const tau = geometry_.tau;
    int const r = time_stages();
    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) {
        double const dw = increments(c * num_combos_ + j);
        for (int k = 0; k < r; ++k) {
          Vector const y = stage_value(x, line, c, j, k);
          Vector e = tau * (system_.K * dt(x, c, j, k)) - tau * system_.grad_s1(y) -
                     system_.grad_s2(y) * dw;
          for (int d = 0; d < Dim; ++d) e += tau * (system_.L[d] * dx(x, d, c, j, k));
          f.segment(dt_pos(c, j, k), n()) = e;
          for (int d = 0; d < Dim; ++d) {
            Tableau const& sp = space_[d];
            int const jd = combo_index_[j][d];
            Vector g = y - face(x, d, c, face_of_[d][j], k);
            for (int m = 0; m < sp.stages(); ++m) {
              g -= geometry_.spacing[d] * sp.a(jd, m) * dx(x, d, c, combo_of_[d][face_of_[d][j]][m], k);
            }
            f.segment(dx_pos(d, c, j, k), n()) = g;
          }
        }
      }
      for (int d = 0; d < Dim; ++d) {
        Tableau const& sp = space_[d];
        int const cn = neighbor(c, d);
        for (int jf = 0; jf < num_face_combos_[d]; ++jf) {
          for (int k = 0; k < r; ++k) {
            Vector g = face(x, d, cn, jf, k) - face(x, d, c, jf, k);
            for (int m = 0; m < sp.stages(); ++m) {
              g -= geometry_.spacing[d] * sp.b(m) * dx(x, d, c, combo_of_[d][jf][m], k);
            }
            f.segment(face_pos(d, c, jf, k), n()) = g;
          }
        }
      }
    }
    return f;
  }

  ResidualReport residual_report(Stages const& st) const {
    Vector const f = residual(st.unknowns, st.line_start, st.increments);
    ResidualReport rep;
    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) {
        for (int k = 0; k < time_stages(); ++k) {
          rep.stage_equation =
              std::max(rep.stage_equation, f.segment(dt_pos(c, j, k), n()).cwiseAbs().maxCoeff());
          for (int d = 0; d < Dim; ++d) {
            rep.internal_space = std::max(
                rep.internal_space, f.segment(dx_pos(d, c, j, k), n()).cwiseAbs().maxCoeff());
          }
        }
      }
      for (int d = 0; d < Dim; ++d) {
        for (int jf = 0; jf < num_face_combos_[d]; ++jf) {
          for (int k = 0; k < time_stages(); ++k) {
            rep.face_update = std::max(rep.face_update,
                                       f.segment(face_pos(d, c, jf, k), n()).cwiseAbs().maxCoeff());
          }
        }
      }
    }
    // Stage values are formed from dtY, so the internal time relation holds
    // by construction; report its roundoff for completeness.
    rep.internal_time = 0;
    return rep;
  }

  /// Advances the line values by one time step.
  StepOutput step(Vector const& line, Vector const& increments, SolverConfig const& cfg) const {
    check_line(line);
    if (increments.size() != num_cells_ * num_combos_) {
      throw ConfigError("step: expected one increment per cell and spatial stage");
    }
    Stages st;
    st.line_start = line;
    st.increments = increments;
    st.unknowns = initial_guess(line);

    LinearSolver lu;
    bool factored = false;
    double prev = std::numeric_limits<double>::infinity();
    int stalls = 0;
    for (int iter = 0;; ++iter) {
      Vector const f = residual(st.unknowns, line, increments);
      double const res = f.allFinite() ? f.cwiseAbs().maxCoeff() : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(res)) throw SolverError("non-finite stage value", res, iter);
      if (res <= cfg.tol) {
        st.iterations = iter;
        st.residual = res;
        break;
      }
      if (iter >= cfg.max_iter) throw SolverError("stage solve did not converge", res, iter);
      stalls = res >= prev ? stalls + 1 : 0;
      if (stalls >= 3) {
        throw SolverError(lu.use_qr ? "stage solve stagnated: the stage system is singular and inconsistent"
                                    : "stage solve stagnated",
                          res, iter);
      }
      prev = res;

      bool const refactor = !factored || (cfg.method == SolverConfig::Method::direct && !system_.linear);
      if (refactor) {
        SparseMatrix const jac = cfg.method == SolverConfig::Method::direct
                                     ? jacobian(st.unknowns, line, increments, JacobianKind::exact)
                                     : jacobian(initial_guess(line), line, increments, JacobianKind::chord);
        factorize(lu, jac, res, iter);
        factored = true;
      }
      st.unknowns -= lu.solve(f, res, iter);
    }

    StepOutput out;
    out.line = advance_line(line, st.unknowns);
    if (!out.line.allFinite()) throw SolverError("non-finite state after update", st.residual, st.iterations);
    out.stages = std::move(st);
    return out;
  }

  /// Propagates a tangent vector through the linearization of the step
  /// around the converged primal stages.
  TangentOutput tangent(Stages const& primal, Vector const& dline, SolverConfig const& cfg) const {
    check_line(dline);
    SparseMatrix const jac =
        jacobian(primal.unknowns, primal.line_start, primal.increments, JacobianKind::exact);
    LinearSolver lu;
    factorize(lu, jac, 0.0, 0);
    Vector const rhs = line_derivative_apply(primal, dline);
    TangentOutput out;
    out.unknowns = Vector::Zero(num_unknowns());
    double prev = std::numeric_limits<double>::infinity();
    int stalls = 0;
    for (int iter = 0;; ++iter) {
      Vector const f = jac * out.unknowns + rhs;
      double const res = f.allFinite() ? f.cwiseAbs().maxCoeff() : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(res)) throw SolverError("non-finite tangent stage value", res, iter);
      if (res <= cfg.tol) {
        out.iterations = iter;
        break;
      }
      if (iter >= cfg.max_iter) throw SolverError("tangent solve did not converge", res, iter);
      stalls = res >= prev ? stalls + 1 : 0;
      if (stalls >= 3) {
        throw SolverError(lu.use_qr ? "tangent solve stagnated: the stage system is singular and inconsistent"
                                    : "tangent solve stagnated",
                          res, iter);
      }
      prev = res;
      out.unknowns -= lu.solve(f, res, iter);
    }
    out.line = advance_line(dline, out.unknowns);
    return out;
  }

  /// Stage-weighted sum of |z|^2 over all cells.
  double quadratic_invariant(Vector const& line) const {
    check_line(line);
    double sum = 0;
    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) sum += combo_weight_[j] * line_at(line, c, j).squaredNorm();
    }
    return sum;
  }

  /// sum_j w_j u[c,j]^T K v[c,j] for every cell.
  Vector temporal_form(Vector const& u, Vector const& v) const {
    Vector omega = Vector::Zero(num_cells_);
    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) {
        omega(c) += combo_weight_[j] * line_at(u, c, j).dot(system_.K * line_at(v, c, j));
      }
    }
    return omega;
  }

  /// sum_{k,jf} b_k w_jf u_face^T L_d v_face on the left face of every cell.
  Vector spatial_form(int d, Vector const& du, Vector const& dv) const {
    Vector kappa = Vector::Zero(num_cells_);
    for (int c = 0; c < num_cells_; ++c) {
      for (int jf = 0; jf < num_face_combos_[d]; ++jf) {
        for (int k = 0; k < time_stages(); ++k) {
          kappa(c) += time_.b(k) * face_weight_[d][jf] *
                      face(du, d, c, jf, k).dot(system_.L[d] * face(dv, d, c, jf, k));
        }
      }
    }
    return kappa;
  }

  /// Per-cell defect of the discrete multi-symplectic conservation law
  ///   (omega^{p+1} - omega^p)/tau + sum_d (kappa_d(i+e_d) - kappa_d(i))/h_d
  /// for a tangent pair (u, v) propagated through one step.
  Vector multisymplectic_residual(Vector const& u0, Vector const& v0, Vector const& u1,
                                  Vector const& v1, Vector const& du, Vector const& dv) const {
    Vector res = (temporal_form(u1, v1) - temporal_form(u0, v0)) / geometry_.tau;
    for (int d = 0; d < Dim; ++d) {
      Vector const kappa = spatial_form(d, du, dv);
      for (int c = 0; c < num_cells_; ++c) {
        res(c) += (kappa(neighbor(c, d)) - kappa(c)) / geometry_.spacing[d];
      }
    }
    return res;
  }

 private:
  enum class JacobianKind { exact, chord };

  void build_tables() {
    num_cells_ = 1;
    num_combos_ = 1;
    for (int d = 0; d < Dim; ++d) {
      num_cells_ *= geometry_.cells[d];
      num_combos_ *= space_[d].stages();
    }
    int const r = time_stages();
    combo_index_.assign(num_combos_, {});
    combo_weight_.assign(num_combos_, 1.0);
    for (int j = 0; j < num_combos_; ++j) {
      int rem = j;
      for (int d = Dim - 1; d >= 0; --d) {
        combo_index_[j][d] = rem % space_[d].stages();
        rem /= space_[d].stages();
      }
      for (int d = 0; d < Dim; ++d) combo_weight_[j] *= space_[d].b(combo_index_[j][d]);
    }
    block_ = num_combos_ * r * (1 + Dim);
    for (int d = 0; d < Dim; ++d) {
      num_face_combos_[d] = num_combos_ / space_[d].stages();
      face_base_[d] = block_;
      block_ += num_face_combos_[d] * r;
      face_of_[d].assign(num_combos_, 0);
      combo_of_[d].assign(num_face_combos_[d], std::vector<int>(space_[d].stages(), 0));
      face_weight_[d].assign(num_face_combos_[d], 1.0);
      for (int j = 0; j < num_combos_; ++j) {
        int jf = 0;
        double w = 1.0;
        for (int e = 0; e < Dim; ++e) {
          if (e == d) continue;
          jf = jf * space_[e].stages() + combo_index_[j][e];
          w *= space_[e].b(combo_index_[j][e]);
        }
        face_of_[d][j] = jf;
        combo_of_[d][jf][combo_index_[j][d]] = j;
        face_weight_[d][jf] = w;
      }
    }
    neighbor_.resize(static_cast<std::size_t>(num_cells_) * Dim);
    for (int c = 0; c < num_cells_; ++c) {
      auto const i = cell_multi_index(c);
      for (int d = 0; d < Dim; ++d) {
        auto ip = i;
        ip[d] = (ip[d] + 1) % geometry_.cells[d];
        neighbor_[c * Dim + d] = cell_index(ip);
      }
    }
  }

  int line_pos(int c, int j) const { return (c * num_combos_ + j) * n(); }
  int dt_pos(int c, int j, int k) const { return (c * block_ + j * time_stages() + k) * n(); }
  int dx_pos(int d, int c, int j, int k) const {
    return (c * block_ + num_combos_ * time_stages() * (1 + d) + j * time_stages() + k) * n();
  }
  int face_pos(int d, int c, int jf, int k) const {
    return (c * block_ + face_base_[d] + jf * time_stages() + k) * n();
  }

  void check_line(Vector const& line) const {
    if (line.size() != line_size()) {
      throw ConfigError("line vector has " + std::to_string(line.size()) + " entries, expected " +
                        std::to_string(line_size()));
    }
  }

  Vector initial_guess(Vector const& line) const {
    Vector x = Vector::Zero(num_unknowns());
    for (int c = 0; c < num_cells_; ++c) {
      for (int d = 0; d < Dim; ++d) {
        for (int jf = 0; jf < num_face_combos_[d]; ++jf) {
          for (int k = 0; k < time_stages(); ++k) {
            x.segment(face_pos(d, c, jf, k), n()) = line_at(line, c, combo_of_[d][jf][0]);
          }
        }
      }
    }
    return x;
  }

  Vector advance_line(Vector const& line, Vector const& x) const {
    Vector out = line;
    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) {
        for (int k = 0; k < time_stages(); ++k) {
          out.segment(line_pos(c, j), n()) += geometry_.tau * time_.b(k) * dt(x, c, j, k);
        }
      }
    }
    return out;
  }

  /// Jacobian of `residual` with respect to the unknowns. `chord` freezes
  /// D_zz S1 at the line values and omits the noise term.
  SparseMatrix jacobian(Vector const& x, Vector const& line, Vector const& increments,
                        JacobianKind kind) const {
    int const nn = n();
    int const r = time_stages();
    double const tau = geometry_.tau;
    std::vector<Eigen::Triplet<double>> trip;
    auto add_block = [&](int row, int col, Matrix const& m) {
      for (int a = 0; a < nn; ++a) {
        for (int b = 0; b < nn; ++b) {
          if (m(a, b) != 0.0) trip.emplace_back(row + a, col + b, m(a, b));
        }
      }
    };
    auto add_diag = [&](int row, int col, double v) {
      if (v == 0.0) return;
      for (int a = 0; a < nn; ++a) trip.emplace_back(row + a, col + a, v);
    };

    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) {
        double const dw = increments(c * num_combos_ + j);
        for (int k = 0; k < r; ++k) {
          int const row_e = dt_pos(c, j, k);
          Matrix h;
          if (kind == JacobianKind::exact) {
            Vector const y = stage_value(x, line, c, j, k);
            h = tau * system_.hess_s1(y) + dw * system_.hess_s2(y);
          } else {
            h = tau * system_.hess_s1(line_at(line, c, j));
          }
          for (int l = 0; l < r; ++l) {
            Matrix blk = -tau * time_.a(k, l) * h;
            if (l == k) blk += tau * system_.K;
            add_block(row_e, dt_pos(c, j, l), blk);
          }
          for (int d = 0; d < Dim; ++d) {
            add_block(row_e, dx_pos(d, c, j, k), tau * system_.L[d]);
            Tableau const& sp = space_[d];
            int const row_c = dx_pos(d, c, j, k);
            int const jf = face_of_[d][j];
            for (int l = 0; l < r; ++l) add_diag(row_c, dt_pos(c, j, l), tau * time_.a(k, l));
            add_diag(row_c, face_pos(d, c, jf, k), -1.0);
            for (int m = 0; m < sp.stages(); ++m) {
              add_diag(row_c, dx_pos(d, c, combo_of_[d][jf][m], k),
                       -geometry_.spacing[d] * sp.a(combo_index_[j][d], m));
            }
          }
        }
      }
      for (int d = 0; d < Dim; ++d) {
        Tableau const& sp = space_[d];
        int const cn = neighbor(c, d);
        for (int jf = 0; jf < num_face_combos_[d]; ++jf) {
          for (int k = 0; k < r; ++k) {
            int const row_d = face_pos(d, c, jf, k);
            add_diag(row_d, face_pos(d, cn, jf, k), 1.0);
            add_diag(row_d, face_pos(d, c, jf, k), -1.0);
            for (int m = 0; m < sp.stages(); ++m) {
              add_diag(row_d, dx_pos(d, c, combo_of_[d][jf][m], k), -geometry_.spacing[d] * sp.b(m));
            }
          }
        }
      }
    }
    SparseMatrix jac(num_unknowns(), num_unknowns());
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
  }

  /// (d residual / d line) applied to dline.
  Vector line_derivative_apply(Stages const& primal, Vector const& dline) const {
    Vector out = Vector::Zero(num_unknowns());
    double const tau = geometry_.tau;
    for (int c = 0; c < num_cells_; ++c) {
      for (int j = 0; j < num_combos_; ++j) {
        double const dw = primal.increments(c * num_combos_ + j);
        auto const dz = line_at(dline, c, j);
        for (int k = 0; k < time_stages(); ++k) {
          Vector const y = stage_value(primal.unknowns, primal.line_start, c, j, k);
          out.segment(dt_pos(c, j, k), n()) =
              -(tau * system_.hess_s1(y) + dw * system_.hess_s2(y)) * dz;
          for (int d = 0; d < Dim; ++d) out.segment(dx_pos(d, c, j, k), n()) = dz;
        }
      }
    }
    return out;
  }

  // Sparse LU, with a rank-revealing QR fallback. Box schemes on even
  // periodic grids have checkerboard face modes in the kernel of the stage
  // system; the system stays consistent and those modes do not enter the
  // line update, so any solution of the singular system serves.
  struct LinearSolver {
    Eigen::SparseLU<SparseMatrix> lu;
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
    bool use_qr = false;

    Vector solve(Vector const& f, double res, int iter) {
      Vector x = use_qr ? Vector(qr.solve(f)) : Vector(lu.solve(f));
      bool const ok = use_qr ? qr.info() == Eigen::Success : lu.info() == Eigen::Success;
      if (!ok || !x.allFinite()) throw SolverError("stage linear solve failed", res, iter);
      return x;
    }
  };

  void factorize(LinearSolver& s, SparseMatrix const& jac, double res, int iter) const {
    s.use_qr = false;
    s.lu.analyzePattern(jac);
    s.lu.factorize(jac);
    if (s.lu.info() == Eigen::Success) return;
    std::string const lu_message = s.lu.lastErrorMessage();
    SparseMatrix compressed = jac;
    compressed.makeCompressed();
    s.qr.compute(compressed);
    if (s.qr.info() != Eigen::Success) {
      throw SolverError("singular stage system: " + lu_message, res, iter);
    }
    s.use_qr = true;
  }

  SystemSpec system_;
  Tableau time_;
  std::array<Tableau, Dim> space_;
  SchemeGeometry<Dim> geometry_;

  int num_cells_ = 0;
  int num_combos_ = 0;
  int block_ = 0;  // n-blocks of unknowns per cell
  std::array<int, Dim> num_face_combos_{};
  std::array<int, Dim> face_base_{};
  std::vector<std::array<int, Dim>> combo_index_;
  std::vector<double> combo_weight_;
  std::array<std::vector<int>, Dim> face_of_;
  std::array<std::vector<std::vector<int>>, Dim> combo_of_;
  std::array<std::vector<double>, Dim> face_weight_;
  std::vector<int> neighbor_;
};

}  // namespace mssrk
