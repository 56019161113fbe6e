// Command-line driver: check-tableau, run-1d, run-maxwell, sample-noise.
// Exit codes: 0 success, 1 tableau check failed, 2 config or parse error,
// 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mssrk/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

json read_json_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw mssrk::ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (json::parse_error const& e) {
    throw mssrk::ConfigError("'" + path + "': " + e.what());
  }
}

void write_text(fs::path const& path, std::string const& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mssrk::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (char const* env = std::getenv("MSSRK_THREADS")) {
    try {
      int const v = std::stoi(env);
      if (v > 0) cap = static_cast<unsigned>(v);
    } catch (std::exception const&) {
      throw mssrk::ConfigError("MSSRK_THREADS must be a positive integer");
    }
  }
  return cap;
}

/// Runs job(i) for i in [0, count) on at most MSSRK_THREADS threads.
template <typename Job>
void parallel_for(std::size_t count, Job job) {
  unsigned const workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto const& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SeedOptions {
  std::optional<std::uint64_t> seed;
  int sweep = 0;
};

std::vector<std::uint64_t> resolve_seeds(std::vector<std::uint64_t> config_seeds, SeedOptions const& opt) {
  if (opt.seed) config_seeds = {*opt.seed};
  if (opt.sweep > 0) {
    std::uint64_t const base = config_seeds.front();
    config_seeds.clear();
    for (int i = 0; i < opt.sweep; ++i) config_seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  return config_seeds;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::scientific << v;
  return s.str();
}

json metadata(json const& echo, std::uint64_t seed, double wall, int steps_done, bool failed,
              std::string const& failure) {
  json meta{{"config", echo}, {"seed", seed}, {"wall_time_seconds", wall}, {"steps_completed", steps_done},
            {"failed", failed}};
  if (failed) meta["failure"] = failure;
  return meta;
}

int cmd_check_tableau(std::string const& what, double tol) {
  mssrk::Tableau t = [&] {
    auto const& names = mssrk::builtin_tableau_names();
    if (std::find(names.begin(), names.end(), what) != names.end()) return mssrk::builtin_tableau(what);
    if (fs::exists(what)) return mssrk::tableau_from_json(read_json_file(what));
    return mssrk::builtin_tableau(what);  // throws, listing valid names
  }();
  if (tol < 0) throw mssrk::ConfigError("--tol must be nonnegative");
  Eigen::IOFormat const f(17, 0, ", ", "\n", "  [", "]");
  auto const m = mssrk::condition_residual(t);
  auto const lit = mssrk::literal_z_relation_residual(t);
  double const max_res = m.cwiseAbs().maxCoeff();
  std::cout << "stages: " << t.stages() << "\n";
  std::cout << "condition residual b_k b_j - b_k a_kj - b_j a_jk:\n" << m.format(f) << "\n";
  std::cout << "unsymmetrized variant b_k b_j - b_k a_kj - b_j a_kj (reported only):\n" << lit.format(f) << "\n";
  std::cout << std::setprecision(17) << "max residual: " << max_res << "\n";
  std::cout << "tolerance: " << tol << "\n";
  bool const pass = mssrk::is_multisymplectic(t, tol);
  std::cout << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

struct Outcome {
  std::uint64_t seed = 0;
  std::string summary;
  bool failed = false;
};

int report(std::vector<Outcome> const& outcomes) {
  bool any_failed = false;
  for (auto const& o : outcomes) {
    std::cout << o.summary << "\n";
    any_failed = any_failed || o.failed;
  }
  return any_failed ? kExitNumerical : kExitOk;
}

int cmd_run_1d(std::string const& config_path, SeedOptions const& opt, std::optional<double> tol,
               fs::path const& out) {
  auto cfg = mssrk::run1d_config_from_json(read_json_file(config_path));
  if (tol) cfg.solver.tol = *tol;
  auto const seeds = resolve_seeds(cfg.seeds, opt);
  fs::create_directories(out);
  // Surface system validation errors (exit 2) before spawning runs.
  (void)mssrk::make_scheme(cfg.system, cfg.grid, cfg.time, cfg.space);

  std::vector<Outcome> outcomes(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    auto const t0 = std::chrono::steady_clock::now();
    auto noise_spec = cfg.noise;
    noise_spec.seed = seeds[i];
    auto const noise = mssrk::sample_grid_noise(noise_spec, cfg.grid, cfg.space);
    auto const rec = mssrk::run(cfg.system, cfg.grid, cfg.time, cfg.space, noise, cfg.solver, cfg.options,
                                mssrk::initial_state_1d(cfg));
    double const wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string const stem = "run1d_seed" + std::to_string(seeds[i]);
    std::ostringstream csv;
    mssrk::write_run1d_csv(csv, rec);
    write_text(out / (stem + ".csv"), csv.str());
    int const done = rec.rows.back().step;
    write_text(out / (stem + ".json"),
               metadata(cfg.echo, seeds[i], wall, done, rec.failed, rec.failure).dump(2) + "\n");

    double ms_max = 0, q_drift = 0;
    double const q0 = rec.rows.front().quadratic_invariant;
    for (auto const& r : rec.rows) {
      if (cfg.options.diagnostics.ms_residual) ms_max = std::max(ms_max, r.ms_residual_max);
      if (cfg.options.diagnostics.quadratic_invariant) {
        q_drift = std::max(q_drift, mssrk::relative_drift(r.quadratic_invariant, q0));
      }
    }
    std::string s = "seed " + std::to_string(seeds[i]) + ": steps " + std::to_string(done);
    if (cfg.options.diagnostics.ms_residual) s += ", max ms residual " + fmt(ms_max);
    if (cfg.options.diagnostics.quadratic_invariant) s += ", max invariant drift " + fmt(q_drift);
    if (rec.failed) s += ", FAILED: " + rec.failure;
    outcomes[i] = {seeds[i], s, rec.failed};
  });
  return report(outcomes);
}

int cmd_run_maxwell(std::string const& config_path, SeedOptions const& opt, std::optional<double> tol,
                    fs::path const& out) {
  auto cfg = mssrk::maxwell_config_from_json(read_json_file(config_path));
  if (tol) cfg.solver.tol = *tol;
  auto const seeds = resolve_seeds(cfg.seeds, opt);
  fs::create_directories(out);

  std::vector<Outcome> outcomes(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    auto const t0 = std::chrono::steady_clock::now();
    auto spec = cfg.spec;
    spec.noise.seed = seeds[i];
    auto const scheme = mssrk::maxwell_scheme(spec);
    auto const noise = mssrk::sample_maxwell_noise(spec);
    auto const rec = mssrk::run_maxwell(spec, mssrk::initial_state_maxwell(cfg, scheme), noise, cfg.solver,
                                        cfg.ms_residual, cfg.tangent_seed);
    double const wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string const stem = "maxwell_seed" + std::to_string(seeds[i]);
    std::ostringstream csv;
    mssrk::write_maxwell_csv(csv, rec);
    write_text(out / (stem + ".csv"), csv.str());
    int const done = rec.rows.back().step;
    write_text(out / (stem + ".json"),
               metadata(cfg.echo, seeds[i], wall, done, rec.failed, rec.failure).dump(2) + "\n");

    double drift = 0, ms_max = 0;
    for (auto const& r : rec.rows) {
      drift = std::max(drift, r.energy_rel_drift);
      if (cfg.ms_residual) ms_max = std::max(ms_max, r.ms_residual_max);
    }
    std::string s = "seed " + std::to_string(seeds[i]) + ": steps " + std::to_string(done) +
                    ", max energy drift " + fmt(drift);
    if (cfg.ms_residual) s += ", max ms residual " + fmt(ms_max);
    if (rec.failed) s += ", FAILED: " + rec.failure;
    outcomes[i] = {seeds[i], s, rec.failed};
  });
  return report(outcomes);
}

int cmd_sample_noise(std::string const& config_path, SeedOptions const& opt, fs::path const& out) {
  auto cfg = mssrk::noise_sample_config_from_json(read_json_file(config_path));
  auto const seeds = resolve_seeds({cfg.noise.seed}, opt);
  fs::create_directories(out);
  for (auto const seed : seeds) {
    auto spec = cfg.noise;
    spec.seed = seed;
    auto const path = mssrk::sample_path(spec, cfg.steps, cfg.tau, cfg.points);
    std::ostringstream csv;
    mssrk::write_noise_csv(csv, path);
    write_text(out / ("noise_seed" + std::to_string(seed) + ".csv"), csv.str());

    std::cout << "seed " << seed << ": " << cfg.steps << " steps, " << cfg.points.size() << " points\n";
    if (cfg.steps < 2) continue;
    auto const& inc = path.increments();
    for (int m = 0; m < path.num_points(); ++m) {
      // Mean is known to be zero, so the second moment is the variance estimate.
      double const var = inc.col(m).squaredNorm() / cfg.steps;
      std::span<double const> x(&cfg.points[m], 1);
      double const expected = mssrk::expected_covariance(spec, cfg.tau, x, x);
      double const se = expected * std::sqrt(2.0 / cfg.steps);
      double const z = se > 0 ? (var - expected) / se : 0.0;
      std::cout << std::setprecision(6) << "  x = " << cfg.points[m] << ": variance " << var << ", expected "
                << expected << ", z = " << z << (std::abs(z) <= 3 ? " (within 3 sigma)" : " (OUTSIDE 3 sigma)")
                << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic multi-symplectic Runge-Kutta integrators"};
  app.require_subcommand(1);

  std::string tableau_arg;
  double check_tol = mssrk::kDefaultTableauTolerance;
  auto* check = app.add_subcommand("check-tableau", "Test the multi-symplecticity condition of a tableau");
  check->add_option("tableau", tableau_arg, "Built-in name or JSON file")->required();
  check->add_option("--tol", check_tol, "Tolerance on the condition residual");

  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  int sweep = 0;
  auto add_run_flags = [&](CLI::App* sub, bool with_tol) {
    sub->add_option("--config", config, "Run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "Noise seed, overrides the config");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--sweep", sweep, "Run N consecutive seeds starting at the base seed")
        ->check(CLI::NonNegativeNumber);
    if (with_tol) sub->add_option("--tol", tol, "Stage solver tolerance, overrides the config");
  };
  auto* run1d = app.add_subcommand("run-1d", "Integrate a 1D stochastic Hamiltonian PDE");
  add_run_flags(run1d, true);
  auto* maxwell = app.add_subcommand("run-maxwell", "Integrate 3D stochastic Maxwell equations");
  add_run_flags(maxwell, true);
  auto* noise = app.add_subcommand("sample-noise", "Sample a Q-Wiener increment table");
  add_run_flags(noise, false);

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int const code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    SeedOptions const opt{seed, sweep};
    if (*check) return cmd_check_tableau(tableau_arg, check_tol);
    if (*run1d) return cmd_run_1d(config, opt, tol, out_dir);
    if (*maxwell) return cmd_run_maxwell(config, opt, tol, out_dir);
    if (*noise) return cmd_sample_noise(config, opt, out_dir);
  } catch (mssrk::SolverError const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (mssrk::Error const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
