#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mssrk/error.hpp"

namespace mssrk {

/// e_j(x), j >= 1, evaluated at a point with as many coordinates as the domain.
using EigenfunctionFamily = std::function<double(int j, std::span<double const> x)>;

/// Truncated spectral description of a Q-Wiener process on a box
/// [0, l_1] x ... x [0, l_D].
struct QWienerSpec {
  std::vector<double> eta;             // eta_1 >= eta_2 >= ... >= 0, size J
  std::vector<double> domain_length;   // one entry per spatial dimension
  EigenfunctionFamily eigenfunction;   // empty: tensor-product sine basis
  std::uint64_t seed = 0;

  int truncation() const { return static_cast<int>(eta.size()); }
  int dim() const { return static_cast<int>(domain_length.size()); }
};

/// (j_1, ..., j_D) for the j-th tensor-product mode (1-based), ordered by
/// total degree and then lexicographically.
inline std::vector<int> tensor_mode(int j, int dim) {
  if (dim == 1) return {j};
  std::vector<int> mode(dim, 1);
  int count = 0;
  for (int total = dim;; ++total) {
    // enumerate compositions of `total` into `dim` positive parts, lexicographic
    std::function<bool(int, int)> rec = [&](int pos, int remaining) -> bool {
      if (pos == dim - 1) {
        mode[pos] = remaining;
        return ++count == j;
      }
      for (int v = 1; v <= remaining - (dim - 1 - pos); ++v) {
        mode[pos] = v;
        if (rec(pos + 1, remaining - v)) return true;
      }
      return false;
    };
    if (rec(0, total)) return mode;
  }
}

/// e_j(x) = prod_d sqrt(2) sin(j_d pi x_d / l_d).
inline EigenfunctionFamily sine_basis(std::vector<double> domain_length) {
  return [l = std::move(domain_length)](int j, std::span<double const> x) {
    auto const mode = tensor_mode(j, static_cast<int>(l.size()));
    double v = 1.0;
    for (std::size_t d = 0; d < l.size(); ++d) {
      v *= std::numbers::sqrt2 * std::sin(mode[d] * std::numbers::pi * x[d] / l[d]);
    }
    return v;
  };
}

inline EigenfunctionFamily constant_basis() {
  return [](int, std::span<double const>) { return 1.0; };
}

/// Pre-sampled increments dW_m^k for steps k and points m. Immutable.
class NoisePath {
 public:
  NoisePath() = default;
  NoisePath(Eigen::MatrixXd increments, double tau, int dim, std::vector<double> coords)
      : increments_(std::move(increments)), tau_(tau), dim_(dim), coords_(std::move(coords)) {}

  int num_steps() const { return static_cast<int>(increments_.rows()); }
  int num_points() const { return static_cast<int>(increments_.cols()); }
  int dim() const { return dim_; }
  double tau() const { return tau_; }

  double increment_at(int k, int m) const {
    if (k < 0 || k >= num_steps() || m < 0 || m >= num_points()) {
      throw ConfigError("increment_at: index (" + std::to_string(k) + ", " + std::to_string(m) +
                        ") out of range");
    }
    return increments_(k, m);
  }

  /// Increments of one step for all points.
  Eigen::VectorXd step_increments(int k) const {
    if (k < 0 || k >= num_steps()) {
      throw ConfigError("noise path covers " + std::to_string(num_steps()) +
                        " steps; step " + std::to_string(k) + " requested");
    }
    return increments_.row(k).transpose();
  }

  std::span<double const> point(int m) const {
    return {coords_.data() + static_cast<std::size_t>(m) * dim_, static_cast<std::size_t>(dim_)};
  }

  Eigen::MatrixXd const& increments() const { return increments_; }

 private:
  Eigen::MatrixXd increments_;  // rows: steps, cols: points
  double tau_ = 0;
  int dim_ = 1;
  std::vector<double> coords_;  // point-major, dim_ per point
};

/// Standard normal draws xi_{j,k} for k = 0..num_steps-1. Stream j is keyed
/// on (seed, j) only, so the draws do not depend on the requested points.
inline std::vector<double> brownian_draws(std::uint64_t seed, int j, int num_steps) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(j), 0x51a7e5u};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xi(num_steps);
  for (auto& v : xi) v = normal(engine);
  return xi;
}

/// dW_m^k = sum_j sqrt(eta_j) e_j(x_m) xi_{j,k} sqrt(tau).
/// `coords` holds the points flattened, spec.dim() coordinates each.
inline NoisePath sample_path(QWienerSpec const& spec, int num_steps, double tau,
                             std::vector<double> coords) {
  int const J = spec.truncation();
  int const dim = spec.dim();
  if (J == 0) throw ConfigError("sample_path: truncation J must be positive");
  if (dim < 1) throw ConfigError("sample_path: domain_length is empty");
  if (!(tau > 0)) throw ConfigError("sample_path: tau must be positive");
  if (num_steps < 0) throw ConfigError("sample_path: negative step count");
  if (coords.size() % dim != 0) throw ConfigError("sample_path: coordinate count not a multiple of dim");
  for (int j = 0; j < J; ++j) {
    if (!(spec.eta[j] >= 0)) throw ConfigError("sample_path: eigenvalues must be nonnegative");
    if (j > 0 && spec.eta[j] > spec.eta[j - 1]) {
      throw ConfigError("sample_path: eigenvalues must be listed in nonincreasing order");
    }
  }
  int const M = static_cast<int>(coords.size()) / dim;
  for (int m = 0; m < M; ++m) {
    for (int d = 0; d < dim; ++d) {
      double const x = coords[static_cast<std::size_t>(m) * dim + d];
      if (!(x >= 0.0 && x <= spec.domain_length[d])) {
        throw ConfigError("sample_path: point " + std::to_string(m) + " lies outside the domain");
      }
    }
  }

  EigenfunctionFamily const e = spec.eigenfunction ? spec.eigenfunction : sine_basis(spec.domain_length);
  // weights(j, m) = sqrt(eta_j) e_j(x_m) sqrt(tau)
  Eigen::MatrixXd weights(J, M);
  for (int j = 0; j < J; ++j) {
    for (int m = 0; m < M; ++m) {
      std::span<double const> x(coords.data() + static_cast<std::size_t>(m) * dim, dim);
      weights(j, m) = std::sqrt(spec.eta[j]) * e(j + 1, x) * std::sqrt(tau);
    }
  }
  Eigen::MatrixXd xi(num_steps, J);
  for (int j = 0; j < J; ++j) {
    auto const draws = brownian_draws(spec.seed, j + 1, num_steps);
    for (int k = 0; k < num_steps; ++k) xi(k, j) = draws[k];
  }
  Eigen::MatrixXd increments = Eigen::MatrixXd::Zero(num_steps, M);
  if (num_steps > 0 && M > 0) increments.noalias() = xi * weights;
  return NoisePath(std::move(increments), tau, dim, std::move(coords));
}

inline double increment_at(NoisePath const& path, int k, int m) { return path.increment_at(k, m); }

/// Expected covariance tau * sum_j eta_j e_j(x_a) e_j(x_b).
inline double expected_covariance(QWienerSpec const& spec, double tau, std::span<double const> xa,
                                  std::span<double const> xb) {
  EigenfunctionFamily const e = spec.eigenfunction ? spec.eigenfunction : sine_basis(spec.domain_length);
  double sum = 0;
  for (int j = 0; j < spec.truncation(); ++j) sum += spec.eta[j] * e(j + 1, xa) * e(j + 1, xb);
  return tau * sum;
}

/// CSV with columns k, m, x, dW (first coordinate only for multi-dimensional paths).
inline void write_noise_csv(std::ostream& out, NoisePath const& path) {
  auto const old_precision = out.precision(17);
  out << "k,m,x,dW\n";
  for (int k = 0; k < path.num_steps(); ++k) {
    for (int m = 0; m < path.num_points(); ++m) {
      out << k << ',' << m << ',' << path.point(m)[0] << ',' << path.increment_at(k, m) << '\n';
    }
  }
  out.precision(old_precision);
}

/// Parses {"J": int, "eta": [...] | {"decay": "j^-p", "p": real},
///         "domain_length": real | [reals], "seed": int, "basis": "sine" | "constant"}.
/// `default_length` fills domain_length when the key is absent.
inline QWienerSpec qwiener_from_json(nlohmann::json const& j, std::vector<double> default_length = {}) {
  if (!j.is_object()) throw ConfigError("noise: expected a JSON object");
  for (auto const& [key, _] : j.items()) {
    if (key != "J" && key != "eta" && key != "domain_length" && key != "seed" && key != "basis") {
      throw ConfigError("noise: unknown key '" + key + "'");
    }
  }
  try {
    QWienerSpec spec;
    if (!j.contains("J")) throw ConfigError("noise: key 'J' is required");
    int const J = j.at("J").get<int>();
    if (J <= 0) throw ConfigError("noise: J must be positive");
    if (!j.contains("eta")) throw ConfigError("noise: key 'eta' is required");
    auto const& eta = j.at("eta");
    if (eta.is_array()) {
      spec.eta = eta.get<std::vector<double>>();
      if (static_cast<int>(spec.eta.size()) != J) throw ConfigError("noise: eta must have J entries");
    } else if (eta.is_object()) {
      for (auto const& [key, _] : eta.items()) {
        if (key != "decay" && key != "p") throw ConfigError("noise.eta: unknown key '" + key + "'");
      }
      if (eta.value("decay", std::string()) != "j^-p") {
        throw ConfigError("noise.eta: only {\"decay\": \"j^-p\"} is supported");
      }
      double const p = eta.at("p").get<double>();
      for (int i = 1; i <= J; ++i) spec.eta.push_back(std::pow(static_cast<double>(i), -p));
    } else {
      throw ConfigError("noise: eta must be an array or a decay object");
    }
    if (j.contains("domain_length")) {
      auto const& l = j.at("domain_length");
      spec.domain_length = l.is_array() ? l.get<std::vector<double>>()
                                        : std::vector<double>{l.get<double>()};
    } else {
      spec.domain_length = std::move(default_length);
    }
    if (spec.domain_length.empty()) throw ConfigError("noise: domain_length is required");
    for (double l : spec.domain_length) {
      if (!(l > 0)) throw ConfigError("noise: domain_length must be positive");
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    std::string const basis = j.value("basis", std::string("sine"));
    if (basis == "constant") {
      spec.eigenfunction = constant_basis();
    } else if (basis != "sine") {
      throw ConfigError("noise: basis must be 'sine' or 'constant'");
    }
    return spec;
  } catch (nlohmann::json::exception const& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
}

}  // namespace mssrk
