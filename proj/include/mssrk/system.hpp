#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mssrk/error.hpp"

namespace mssrk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using GradientFn = std::function<Vector(Vector const&)>;
using HessianFn = std::function<Matrix(Vector const&)>;

/// S1 = 1/2 z^T A z, S2 = 1/2 z^T B z.
struct QuadraticSpec {
  Matrix A;
  Matrix B;
};

/// A stochastic Hamiltonian PDE
///   K dz + sum_d L_d z_{x_d} dt = grad S1(z) dt + grad S2(z) o dW.
/// Immutable after construction; the evaluators must be pure.
struct SystemSpec {
  int n = 0;
  Matrix K;
  std::vector<Matrix> L;
  GradientFn grad_s1;
  GradientFn grad_s2;
  HessianFn hess_s1;
  HessianFn hess_s2;
  bool linear = false;
  std::optional<QuadraticSpec> quadratic;

  int spatial_dims() const { return static_cast<int>(L.size()); }
};

struct Violation {
  std::string check;
  double residual;

  std::string message() const { return check + ", residual " + std::to_string(residual); }
};

namespace detail {

inline double skew_residual(Matrix const& m) { return (m + m.transpose()).cwiseAbs().maxCoeff(); }

inline double symmetry_residual(Matrix const& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace detail

inline constexpr int kValidationProbes = 10;
inline constexpr double kHessianFdStep = 1e-5;
inline constexpr double kHessianFdTolerance = 1e-6;
inline constexpr double kStructureTolerance = 1e-12;

/// Structural checks on a system. An empty result means every check passed.
inline std::vector<Violation> validate(SystemSpec const& spec) {
  std::vector<Violation> out;
  if (spec.n < 2) out.push_back({"state dimension n must be >= 2", static_cast<double>(spec.n)});
  if (spec.K.rows() != spec.n || spec.K.cols() != spec.n) {
    out.push_back({"K has wrong shape", static_cast<double>(spec.K.rows())});
    return out;
  }
  if (spec.L.empty()) out.push_back({"at least one spatial matrix L is required", 0.0});
  for (std::size_t d = 0; d < spec.L.size(); ++d) {
    if (spec.L[d].rows() != spec.n || spec.L[d].cols() != spec.n) {
      out.push_back({"L" + std::to_string(d + 1) + " has wrong shape", 0.0});
      return out;
    }
  }
  if (!spec.grad_s1 || !spec.grad_s2 || !spec.hess_s1 || !spec.hess_s2) {
    out.push_back({"gradient and Hessian evaluators are required", 0.0});
    return out;
  }
  if (!out.empty()) return out;

  if (double r = detail::skew_residual(spec.K); r > kStructureTolerance) {
    out.push_back({"K not skew-symmetric", r});
  }
  for (std::size_t d = 0; d < spec.L.size(); ++d) {
    if (double r = detail::skew_residual(spec.L[d]); r > kStructureTolerance) {
      out.push_back({"L" + std::to_string(d + 1) + " not skew-symmetric", r});
    }
  }

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  double sym1 = 0, sym2 = 0, fd1 = 0, fd2 = 0;
  for (int probe = 0; probe < kValidationProbes; ++probe) {
    Vector z(spec.n);
    for (int i = 0; i < spec.n; ++i) z(i) = normal(rng);
    Matrix const h1 = spec.hess_s1(z);
    Matrix const h2 = spec.hess_s2(z);
    if (h1.rows() != spec.n || h1.cols() != spec.n || h2.rows() != spec.n ||
        h2.cols() != spec.n) {
      out.push_back({"Hessian evaluator returned wrong shape", 0.0});
      return out;
    }
    sym1 = std::max(sym1, detail::symmetry_residual(h1));
    sym2 = std::max(sym2, detail::symmetry_residual(h2));
    for (int i = 0; i < spec.n; ++i) {
      Vector zp = z, zm = z;
      zp(i) += kHessianFdStep;
      zm(i) -= kHessianFdStep;
      Vector const col1 = (spec.grad_s1(zp) - spec.grad_s1(zm)) / (2 * kHessianFdStep);
      Vector const col2 = (spec.grad_s2(zp) - spec.grad_s2(zm)) / (2 * kHessianFdStep);
      fd1 = std::max(fd1, (col1 - h1.col(i)).cwiseAbs().maxCoeff());
      fd2 = std::max(fd2, (col2 - h2.col(i)).cwiseAbs().maxCoeff());
    }
  }
  if (sym1 > kStructureTolerance) out.push_back({"hess_s1 not symmetric", sym1});
  if (sym2 > kStructureTolerance) out.push_back({"hess_s2 not symmetric", sym2});
  if (!(fd1 <= kHessianFdTolerance)) out.push_back({"hess_s1 disagrees with grad_s1 finite differences", fd1});
  if (!(fd2 <= kHessianFdTolerance)) out.push_back({"hess_s2 disagrees with grad_s2 finite differences", fd2});
  return out;
}

inline SystemSpec make_quadratic_system(Matrix K, std::vector<Matrix> L, QuadraticSpec q) {
  auto const n = K.rows();
  if (K.cols() != n || q.A.rows() != n || q.A.cols() != n || q.B.rows() != n || q.B.cols() != n) {
    throw ConfigError("make_quadratic_system: dimension mismatch");
  }
  for (auto const& l : L) {
    if (l.rows() != n || l.cols() != n) throw ConfigError("make_quadratic_system: dimension mismatch in L");
  }
  SystemSpec spec;
  spec.n = static_cast<int>(n);
  spec.K = std::move(K);
  spec.L = std::move(L);
  spec.grad_s1 = [A = q.A](Vector const& z) -> Vector { return A * z; };
  spec.grad_s2 = [B = q.B](Vector const& z) -> Vector { return B * z; };
  spec.hess_s1 = [A = q.A](Vector const&) -> Matrix { return A; };
  spec.hess_s2 = [B = q.B](Vector const&) -> Matrix { return B; };
  spec.linear = true;
  spec.quadratic = std::move(q);
  return spec;
}

/// Checks the hypotheses under which the stage-weighted quadratic invariant
/// is conserved: K nonsingular, K^-1 A and K^-1 B skew-symmetric.
inline std::vector<Violation> quadratic_invariant_preconditions(SystemSpec const& spec) {
  std::vector<Violation> out;
  if (!spec.quadratic) {
    out.push_back({"system is not quadratic", 0.0});
    return out;
  }
  Eigen::FullPivLU<Matrix> lu(spec.K);
  if (!lu.isInvertible()) {
    out.push_back({"K is singular", 0.0});
    return out;
  }
  Matrix const kinv = lu.inverse();
  if (double r = detail::skew_residual(kinv * spec.quadratic->A); r > kStructureTolerance) {
    out.push_back({"K^-1 A not skew-symmetric", r});
  }
  if (double r = detail::skew_residual(kinv * spec.quadratic->B); r > kStructureTolerance) {
    out.push_back({"K^-1 B not skew-symmetric", r});
  }
  return out;
}

/// Two-component test system with K = [[0,-1],[1,0]], L = -K,
/// S1 = alpha/2 |z|^2 and S2 = lambda/2 |z|^2.
inline SystemSpec transport2(double alpha = 1.0, double lambda = 0.5) {
  Matrix K(2, 2);
  K << 0, -1, 1, 0;
  Matrix L(2, 2);
  L << 0, 1, -1, 0;
  Matrix const I = Matrix::Identity(2, 2);
  return make_quadratic_system(K, {L}, {alpha * I, lambda * I});
}

}  // namespace mssrk
