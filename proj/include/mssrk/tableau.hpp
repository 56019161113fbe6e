#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mssrk/error.hpp"

namespace mssrk {

/// Runge-Kutta coefficient set for one direction (time or one spatial axis).
/// The abscissae are always derived from `a`, never stored.
class Tableau {
 public:
  Tableau() = default;

  Tableau(Eigen::MatrixXd a, Eigen::VectorXd b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() < 1 || a_.rows() != a_.cols() || b_.size() != a_.rows()) {
      throw ConfigError("tableau: a must be stages x stages and b must have stages entries");
    }
    if (!a_.allFinite() || !b_.allFinite()) {
      throw ConfigError("tableau: non-finite coefficient");
    }
  }

  int stages() const { return static_cast<int>(b_.size()); }
  Eigen::MatrixXd const& a() const { return a_; }
  Eigen::VectorXd const& b() const { return b_; }
  double a(int k, int j) const { return a_(k, j); }
  double b(int k) const { return b_(k); }
  Eigen::VectorXd c() const { return a_.rowwise().sum(); }

  friend bool operator==(Tableau const& x, Tableau const& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

/// M_kj = b_k b_j - b_k a_kj - b_j a_jk. The tableau is stochastic
/// multi-symplectic iff M vanishes.
inline Eigen::MatrixXd condition_residual(Tableau const& t) {
  int const s = t.stages();
  Eigen::MatrixXd m(s, s);
  for (int k = 0; k < s; ++k) {
    for (int j = 0; j < s; ++j) {
      m(k, j) = t.b(k) * t.b(j) - t.b(k) * t.a(k, j) - t.b(j) * t.a(j, k);
    }
  }
  return m;
}

/// The same relation with the second coefficient index left untransposed,
/// b_l b_v - b_l a_lv - b_v a_lv. Reported next to the symmetric form for
/// the z-direction tableau; it is not used as a pass criterion.
inline Eigen::MatrixXd literal_z_relation_residual(Tableau const& t) {
  int const s = t.stages();
  Eigen::MatrixXd m(s, s);
  for (int l = 0; l < s; ++l) {
    for (int v = 0; v < s; ++v) {
      m(l, v) = t.b(l) * t.b(v) - t.b(l) * t.a(l, v) - t.b(v) * t.a(l, v);
    }
  }
  return m;
}

inline constexpr double kDefaultTableauTolerance = 1e-12;

inline bool is_multisymplectic(Tableau const& t, double tol = kDefaultTableauTolerance) {
  if (!(tol >= 0.0)) throw ConfigError("is_multisymplectic: tol must be >= 0");
  return condition_residual(t).cwiseAbs().maxCoeff() <= tol;
}

inline std::vector<std::string> const& builtin_tableau_names() {
  static std::vector<std::string> const names = {"midpoint", "gauss2", "gauss3",
                                                  "euler_explicit", "rk4"};
  return names;
}

inline Tableau builtin_tableau(std::string_view name) {
  auto mat = [](std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(rows.size(), rows.begin()->size());
    int i = 0;
    for (auto const& row : rows) {
      int j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  };
  auto vec = [](std::initializer_list<double> values) {
    Eigen::VectorXd v(values.size());
    int i = 0;
    for (double x : values) v(i++) = x;
    return v;
  };

  if (name == "midpoint") {
    return Tableau(mat({{0.5}}), vec({1.0}));
  }
  if (name == "euler_explicit") {
    return Tableau(mat({{0.0}}), vec({1.0}));
  }
  if (name == "gauss2") {
    // 1/4 -+ sqrt(3)/6
    return Tableau(mat({{0.25, -0.0386751345948128822546},
                        {0.538675134594812882255, 0.25}}),
                   vec({0.5, 0.5}));
  }
  if (name == "gauss3") {
    return Tableau(
        mat({{0.138888888888888888889, -0.0359766675249389034564, 0.00978944401530832604958},
             {0.300263194980864592438, 0.222222222222222222222, -0.0224854172030868146602},
             {0.267988333762469451728, 0.480421111969383347901, 0.138888888888888888889}}),
        vec({0.277777777777777777778, 0.444444444444444444444, 0.277777777777777777778}));
  }
  if (name == "rk4") {
    return Tableau(mat({{0.0, 0.0, 0.0, 0.0},
                        {0.5, 0.0, 0.0, 0.0},
                        {0.0, 0.5, 0.0, 0.0},
                        {0.0, 0.0, 1.0, 0.0}}),
                   vec({1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}));
  }
  std::string valid;
  for (auto const& n : builtin_tableau_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown tableau '" + std::string(name) + "'; valid names: " + valid);
}

// JSON form: {"stages": int, "a": [[...]], "b": [...]}

inline nlohmann::json tableau_to_json(Tableau const& t) {
  nlohmann::json a = nlohmann::json::array();
  for (int k = 0; k < t.stages(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < t.stages(); ++j) row.push_back(t.a(k, j));
    a.push_back(std::move(row));
  }
  nlohmann::json b = nlohmann::json::array();
  for (int k = 0; k < t.stages(); ++k) b.push_back(t.b(k));
  return {{"stages", t.stages()}, {"a", std::move(a)}, {"b", std::move(b)}};
}

inline Tableau tableau_from_json(nlohmann::json const& j) {
  if (!j.is_object()) throw ConfigError("tableau: expected a JSON object");
  for (auto const& [key, _] : j.items()) {
    if (key != "stages" && key != "a" && key != "b") {
      throw ConfigError("tableau: unknown key '" + key + "'");
    }
  }
  if (!j.contains("stages") || !j.contains("a") || !j.contains("b")) {
    throw ConfigError("tableau: keys 'stages', 'a' and 'b' are required");
  }
  try {
    int const s = j.at("stages").get<int>();
    if (s < 1) throw ConfigError("tableau: stages must be positive");
    auto const& ja = j.at("a");
    auto const& jb = j.at("b");
    if (!ja.is_array() || static_cast<int>(ja.size()) != s || !jb.is_array() ||
        static_cast<int>(jb.size()) != s) {
      throw ConfigError("tableau: a and b must have 'stages' rows/entries");
    }
    Eigen::MatrixXd a(s, s);
    Eigen::VectorXd b(s);
    for (int k = 0; k < s; ++k) {
      if (!ja[k].is_array() || static_cast<int>(ja[k].size()) != s) {
        throw ConfigError("tableau: row " + std::to_string(k) + " of a has wrong length");
      }
      for (int l = 0; l < s; ++l) a(k, l) = ja[k][l].get<double>();
      b(k) = jb[k].get<double>();
    }
    return Tableau(std::move(a), std::move(b));
  } catch (nlohmann::json::exception const& e) {
    throw ConfigError(std::string("tableau: ") + e.what());
  }
}

/// Accepts either a builtin name (JSON string) or an inline object.
inline Tableau tableau_from_config(nlohmann::json const& j) {
  if (j.is_string()) return builtin_tableau(j.get<std::string>());
  return tableau_from_json(j);
}

}  // namespace mssrk
