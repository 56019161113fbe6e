#pragma once

#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mssrk/error.hpp"
#include "mssrk/integrator1d.hpp"
#include "mssrk/maxwell3d.hpp"
#include "mssrk/noise.hpp"
#include "mssrk/system.hpp"
#include "mssrk/tableau.hpp"

namespace mssrk {

using nlohmann::json;

namespace detail {

inline void require_object(json const& j, std::string const& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

inline void reject_unknown_keys(json const& j, std::string const& where,
                                std::initializer_list<char const*> allowed) {
  std::set<std::string> const ok(allowed.begin(), allowed.end());
  for (auto const& [key, _] : j.items()) {
    if (!ok.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(json const& j, char const* key, std::string const& where) {
  if (!j.contains(key)) throw ConfigError(where + ": key '" + key + "' is required");
  try {
    return j.at(key).get<T>();
  } catch (json::exception const& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(json const& j, char const* key, T fallback, std::string const& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

inline Matrix matrix_from_json(json const& j, std::string const& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty matrix");
  auto const rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw ConfigError(where + ": expected a matrix");
  auto const cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw ConfigError(where + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(where + ": non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace detail

inline SolverConfig solver_from_json(json const& j) {
  std::string const where = "solver";
  detail::require_object(j, where);
  detail::reject_unknown_keys(j, where, {"method", "tol", "max_iter"});
  SolverConfig cfg;
  auto const method = detail::get_or<std::string>(j, "method", "direct", where);
  if (method == "direct") {
    cfg.method = SolverConfig::Method::direct;
  } else if (method == "fixed_point") {
    cfg.method = SolverConfig::Method::fixed_point;
  } else {
    throw ConfigError("solver.method must be 'direct' or 'fixed_point'");
  }
  cfg.tol = detail::get_or<double>(j, "tol", cfg.tol, where);
  cfg.max_iter = detail::get_or<int>(j, "max_iter", cfg.max_iter, where);
  if (!(cfg.tol > 0)) throw ConfigError("solver.tol must be positive");
  if (cfg.max_iter < 1) throw ConfigError("solver.max_iter must be positive");
  return cfg;
}

/// "transport2", {"name": "transport2", "alpha": a, "lambda": l}, or a
/// custom quadratic system {"K", "L", "A", "B", "lambda"} where lambda
/// scales B (default 1).
inline SystemSpec system_from_json(json const& j) {
  std::string const where = "system";
  if (j.is_string()) {
    auto const name = j.get<std::string>();
    if (name == "transport2") return transport2();
    if (name == "maxwell") throw ConfigError("system 'maxwell' is run with the run-maxwell subcommand");
    throw ConfigError("unknown system '" + name + "'; valid names: transport2, maxwell");
  }
  detail::require_object(j, where);
  if (j.contains("name")) {
    detail::reject_unknown_keys(j, where, {"name", "alpha", "lambda"});
    auto const name = detail::get<std::string>(j, "name", where);
    if (name != "transport2") throw ConfigError("system.name must be 'transport2'");
    return transport2(detail::get_or<double>(j, "alpha", 1.0, where),
                      detail::get_or<double>(j, "lambda", 0.5, where));
  }
  detail::reject_unknown_keys(j, where, {"K", "L", "A", "B", "lambda"});
  Matrix K = detail::matrix_from_json(detail::get<json>(j, "K", where), "system.K");
  auto const& jl = detail::get<json>(j, "L", where);
  if (!jl.is_array() || jl.empty()) throw ConfigError("system.L: expected a list of matrices");
  std::vector<Matrix> L;
  for (auto const& m : jl) L.push_back(detail::matrix_from_json(m, "system.L"));
  if (L.size() != 1) throw ConfigError("system.L: run-1d needs exactly one spatial matrix");
  Matrix A = detail::matrix_from_json(detail::get<json>(j, "A", where), "system.A");
  Matrix B = detail::matrix_from_json(detail::get<json>(j, "B", where), "system.B");
  B *= detail::get_or<double>(j, "lambda", 1.0, where);
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > kStructureTolerance ||
      (B - B.transpose()).cwiseAbs().maxCoeff() > kStructureTolerance) {
    throw ConfigError("system: A and B must be symmetric");
  }
  return make_quadratic_system(std::move(K), std::move(L), {std::move(A), std::move(B)});
}

/// Initial data: {"type": "sine", "amplitude": [...], "phase": [...],
/// "wavenumber": k | [k1,k2,k3]}, {"type": "constant", "value": [...]},
/// or {"type": "random", "seed": s} (independent standard normal line values).
struct InitialSpec {
  json config = json{{"type", "sine"}};
};

namespace detail {

inline std::vector<double> per_component(json const& j, char const* key, int n,
                                         std::vector<double> fallback, std::string const& where) {
  if (!j.contains(key)) return fallback;
  auto v = get<std::vector<double>>(j, key, where);
  if (static_cast<int>(v.size()) != n) {
    throw ConfigError(where + "." + key + ": expected " + std::to_string(n) + " entries");
  }
  return v;
}

/// Line values for `points` (dim coordinates each) on a domain of `lengths`.
inline Vector initial_line(json const& j, int n, int dim, std::vector<double> const& points,
                           std::vector<double> const& lengths) {
  std::string const where = "initial";
  require_object(j, where);
  auto const type = get_or<std::string>(j, "type", "sine", where);
  auto const num_points = static_cast<Eigen::Index>(points.size() / dim);
  Vector line(num_points * n);
  if (type == "random") {
    reject_unknown_keys(j, where, {"type", "seed"});
    std::mt19937_64 rng(get_or<std::uint64_t>(j, "seed", 0, where));
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < line.size(); ++i) line(i) = normal(rng);
    return line;
  }
  if (type == "constant") {
    reject_unknown_keys(j, where, {"type", "value"});
    auto const v = per_component(j, "value", n, std::vector<double>(n, 0.0), where);
    for (Eigen::Index p = 0; p < num_points; ++p) {
      for (int c = 0; c < n; ++c) line(p * n + c) = v[c];
    }
    return line;
  }
  if (type != "sine") throw ConfigError("initial.type must be 'sine', 'constant' or 'random'");
  reject_unknown_keys(j, where, {"type", "amplitude", "phase", "wavenumber"});
  std::vector<double> default_phase(n);
  for (int c = 0; c < n; ++c) default_phase[c] = c;
  auto const amp = per_component(j, "amplitude", n, std::vector<double>(n, 1.0), where);
  auto const phase = per_component(j, "phase", n, default_phase, where);
  std::vector<double> k(dim, 1.0);
  if (j.contains("wavenumber")) {
    auto const& jk = j.at("wavenumber");
    k = jk.is_array() ? get<std::vector<double>>(j, "wavenumber", where)
                      : std::vector<double>(dim, jk.get<double>());
    if (static_cast<int>(k.size()) != dim) throw ConfigError("initial.wavenumber: wrong size");
  }
  for (Eigen::Index p = 0; p < num_points; ++p) {
    double arg = 0;
    for (int d = 0; d < dim; ++d) arg += 2 * std::numbers::pi * k[d] * points[p * dim + d] / lengths[d];
    for (int c = 0; c < n; ++c) line(p * n + c) = amp[c] * std::sin(arg + phase[c]);
  }
  return line;
}

inline std::vector<std::uint64_t> seeds_from(json const& j, std::uint64_t noise_seed, std::string const& where) {
  if (!j.contains("seeds")) return {noise_seed};
  auto seeds = get<std::vector<std::uint64_t>>(j, "seeds", where);
  if (seeds.empty()) throw ConfigError(where + ".seeds must not be empty");
  return seeds;
}

}  // namespace detail

struct Run1dConfig {
  json echo;
  SystemSpec system;
  GridSpec grid;
  Tableau time;
  Tableau space;
  QWienerSpec noise;
  SolverConfig solver;
  RunOptions options;
  json initial = json{{"type", "sine"}};
  std::vector<std::uint64_t> seeds;
};

inline Run1dConfig run1d_config_from_json(json const& j) {
  std::string const where = "config";
  detail::require_object(j, where);
  detail::reject_unknown_keys(j, where, {"system", "grid", "tableaux", "noise", "solver", "diagnostics",
                                         "initial", "snapshot_stride", "seeds", "tangent_seed"});
  Run1dConfig cfg;
  cfg.echo = j;
  cfg.system = system_from_json(detail::get<json>(j, "system", where));

  auto const& jg = detail::get<json>(j, "grid", where);
  detail::require_object(jg, "grid");
  detail::reject_unknown_keys(jg, "grid", {"cells", "h", "steps", "tau"});
  cfg.grid.cells = detail::get<int>(jg, "cells", "grid");
  cfg.grid.h = detail::get_or<double>(jg, "h", 1.0 / std::max(cfg.grid.cells, 1), "grid");
  cfg.grid.steps = detail::get<int>(jg, "steps", "grid");
  cfg.grid.tau = detail::get<double>(jg, "tau", "grid");
  cfg.grid.validate();

  auto const& jt = detail::get<json>(j, "tableaux", where);
  if (jt.is_string()) {
    cfg.time = cfg.space = builtin_tableau(jt.get<std::string>());
  } else {
    detail::require_object(jt, "tableaux");
    detail::reject_unknown_keys(jt, "tableaux", {"time", "space"});
    cfg.time = tableau_from_config(detail::get<json>(jt, "time", "tableaux"));
    cfg.space = tableau_from_config(detail::get<json>(jt, "space", "tableaux"));
  }

  cfg.noise = qwiener_from_json(detail::get<json>(j, "noise", where), {cfg.grid.length()});
  if (cfg.noise.dim() != 1) throw ConfigError("noise.domain_length: run-1d needs a single length");
  cfg.solver = j.contains("solver") ? solver_from_json(j.at("solver")) : SolverConfig{};

  cfg.options.diagnostics = {true, true};
  if (j.contains("diagnostics")) {
    cfg.options.diagnostics = {false, false};
    for (auto const& name : detail::get<std::vector<std::string>>(j, "diagnostics", where)) {
      if (name == "ms_residual") {
        cfg.options.diagnostics.ms_residual = true;
      } else if (name == "quadratic_invariant") {
        cfg.options.diagnostics.quadratic_invariant = true;
      } else {
        throw ConfigError("diagnostics: unknown entry '" + name + "'");
      }
    }
  }
  cfg.options.snapshot_stride = detail::get_or<int>(j, "snapshot_stride", 0, where);
  cfg.options.tangent_seed = detail::get_or<std::uint64_t>(j, "tangent_seed", 1, where);
  if (j.contains("initial")) cfg.initial = j.at("initial");
  cfg.seeds = detail::seeds_from(j, cfg.noise.seed, where);
  // Surface errors in the initial-data block before any computation.
  (void)detail::initial_line(cfg.initial, cfg.system.n, 1, {0.0}, {cfg.grid.length()});
  return cfg;
}

inline StepState initial_state_1d(Run1dConfig const& cfg) {
  return {detail::initial_line(cfg.initial, cfg.system.n, 1, stage_points(cfg.grid, cfg.space),
                               {cfg.grid.length()}),
          0};
}

struct MaxwellConfig {
  json echo;
  MaxwellSpec spec;
  SolverConfig solver;
  bool ms_residual = false;
  std::uint64_t tangent_seed = 1;
  json initial = json{{"type", "sine"}};
  std::vector<std::uint64_t> seeds;
};

inline MaxwellConfig maxwell_config_from_json(json const& j) {
  std::string const where = "config";
  detail::require_object(j, where);
  detail::reject_unknown_keys(j, where, {"system", "lambda", "grid", "dx", "tau", "steps", "tableaux",
                                         "noise", "solver", "diagnostics", "initial", "seeds",
                                         "tangent_seed"});
  MaxwellConfig cfg;
  cfg.echo = j;
  if (j.contains("system") && detail::get<std::string>(j, "system", where) != "maxwell") {
    throw ConfigError("run-maxwell: system must be 'maxwell'");
  }
  auto& s = cfg.spec;
  s.lambda = detail::get<double>(j, "lambda", where);
  auto const cells = detail::get<std::vector<int>>(j, "grid", where);
  if (cells.size() != 3) throw ConfigError("grid: expected [I1, I2, I3]");
  std::vector<double> dx(3);
  for (int d = 0; d < 3; ++d) {
    s.grid.cells[d] = cells[d];
    dx[d] = cells[d] > 0 ? 1.0 / cells[d] : 0.0;
  }
  if (j.contains("dx")) {
    dx = detail::get<std::vector<double>>(j, "dx", where);
    if (dx.size() != 3) throw ConfigError("dx: expected three spacings");
  }
  for (int d = 0; d < 3; ++d) {
    if (s.grid.cells[d] < 2) throw ConfigError("grid: at least two cells per direction");
    if (!(dx[d] > 0)) throw ConfigError("dx: spacings must be positive");
    s.grid.spacing[d] = dx[d];
  }
  s.grid.tau = detail::get<double>(j, "tau", where);
  s.grid.steps = detail::get<int>(j, "steps", where);
  if (!(s.grid.tau > 0)) throw ConfigError("tau must be positive");
  if (s.grid.steps < 0) throw ConfigError("steps must be nonnegative");

  auto const& jt = detail::get<json>(j, "tableaux", where);
  if (jt.is_string()) {
    for (auto& t : s.tableaux) t = builtin_tableau(jt.get<std::string>());
  } else {
    detail::require_object(jt, "tableaux");
    detail::reject_unknown_keys(jt, "tableaux", {"time", "x", "y", "z"});
    char const* keys[] = {"time", "x", "y", "z"};
    for (int i = 0; i < 4; ++i) s.tableaux[i] = tableau_from_config(detail::get<json>(jt, keys[i], "tableaux"));
  }
  s.noise = qwiener_from_json(detail::get<json>(j, "noise", where), s.grid.lengths());
  if (s.noise.dim() != 3) throw ConfigError("noise.domain_length: run-maxwell needs three lengths");
  cfg.solver = j.contains("solver") ? solver_from_json(j.at("solver")) : SolverConfig{};
  cfg.ms_residual = false;
  if (j.contains("diagnostics")) {
    for (auto const& name : detail::get<std::vector<std::string>>(j, "diagnostics", where)) {
      if (name == "ms_residual") {
        cfg.ms_residual = true;
      } else if (name != "energy") {
        throw ConfigError("diagnostics: unknown entry '" + name + "'");
      }
    }
  }
  cfg.tangent_seed = detail::get_or<std::uint64_t>(j, "tangent_seed", 1, where);
  if (j.contains("initial")) cfg.initial = j.at("initial");
  cfg.seeds = detail::seeds_from(j, s.noise.seed, where);
  (void)detail::initial_line(cfg.initial, 6, 3, {0.0, 0.0, 0.0}, s.grid.lengths());
  return cfg;
}

inline MaxwellState initial_state_maxwell(MaxwellConfig const& cfg, Scheme3d const& scheme) {
  return {detail::initial_line(cfg.initial, 6, 3, scheme.stage_points(), cfg.spec.grid.lengths()), 0};
}

struct NoiseSampleConfig {
  QWienerSpec noise;
  int steps = 0;
  double tau = 0;
  std::vector<double> points;
};

/// {"noise": {...}, "steps": N, "tau": t, "points": [x, ...]}
inline NoiseSampleConfig noise_sample_config_from_json(json const& j) {
  std::string const where = "config";
  detail::require_object(j, where);
  detail::reject_unknown_keys(j, where, {"noise", "steps", "tau", "points"});
  NoiseSampleConfig cfg;
  cfg.noise = qwiener_from_json(detail::get<json>(j, "noise", where));
  if (cfg.noise.dim() != 1) throw ConfigError("sample-noise: one-dimensional domains only");
  cfg.steps = detail::get<int>(j, "steps", where);
  cfg.tau = detail::get<double>(j, "tau", where);
  cfg.points = detail::get<std::vector<double>>(j, "points", where);
  if (cfg.steps < 0) throw ConfigError("steps must be nonnegative");
  if (!(cfg.tau > 0)) throw ConfigError("tau must be positive");
  if (cfg.points.empty()) throw ConfigError("points must not be empty");
  return cfg;
}

// CSV output: 17 significant digits for every floating-point value.

inline void write_run1d_csv(std::ostream& out, TrajectoryRecord const& rec) {
  auto const old = out.precision(17);
  out << "step,time,ms_residual_max,quadratic_invariant,solver_iterations\n";
  for (auto const& r : rec.rows) {
    out << r.step << ',' << r.time << ',' << r.ms_residual_max << ',' << r.quadratic_invariant << ','
        << r.solver_iterations << '\n';
  }
  if (rec.failed) {
    Row1d const& last = rec.rows.back();
    out << last.step + 1 << ",nan,nan,nan,-1\n";
  }
  out.precision(old);
}

inline void write_maxwell_csv(std::ostream& out, MaxwellRecord const& rec) {
  auto const old = out.precision(17);
  out << "step,time,energy,energy_rel_drift,ms_residual_max,solver_iterations\n";
  for (auto const& r : rec.rows) {
    out << r.step << ',' << r.time << ',' << r.energy << ',' << r.energy_rel_drift << ','
        << r.ms_residual_max << ',' << r.solver_iterations << '\n';
  }
  if (rec.failed) {
    MaxwellRow const& last = rec.rows.back();
    out << last.step + 1 << ",nan,nan,nan,nan,-1\n";
  }
  out.precision(old);
}

}  // namespace mssrk
