#include <gtest/gtest.h>

#include <complex>
#include <numbers>

#include "mssrk/integrator1d.hpp"

using namespace mssrk;

namespace {

QWienerSpec smooth_noise(std::uint64_t seed) {
  QWienerSpec s;
  s.eta = {1.0, 0.25, 1.0 / 9};
  s.seed = seed;
  return s;
}

struct Case {
  SystemSpec system = transport2();
  GridSpec grid;
  Tableau t = builtin_tableau("midpoint");
  Tableau x = builtin_tableau("midpoint");
  QWienerSpec noise = smooth_noise(1);

  Case(int cells, int steps, double tau) {
    grid = {cells, 1.0 / cells, steps, tau};
    noise.domain_length = {grid.length()};
  }
  NoisePath path() const { return sample_grid_noise(noise, grid, x); }
  StepState sine_state() const {
    return initial_state(grid, x, system.n, [](double xx) {
      Vector z(2);
      z << std::sin(2 * std::numbers::pi * xx), std::cos(2 * std::numbers::pi * xx) + 0.5;
      return z;
    });
  }
  StepState random_state(std::uint64_t seed) const {
    return {random_tangent_pair(static_cast<Eigen::Index>(grid.cells) * x.stages() * system.n, seed).u.line, 0};
  }
};

// S1 = sum z^4 / 4 (non-quadratic), S2 = lambda/2 |z|^2.
SystemSpec quartic(double lambda = 0.5) {
  SystemSpec s = transport2(1.0, lambda);
  s.linear = false;
  s.quadratic.reset();
  s.grad_s1 = [](Vector const& z) -> Vector { return z.array().cube().matrix(); };
  s.hess_s1 = [](Vector const& z) -> Matrix { return (3 * z.array().square()).matrix().asDiagonal(); };
  return s;
}

double max_abs(Vector const& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Integrator1d, ZeroHamiltonianKeepsConstantStateFixed) {
  Case s(8, 5, 0.1);
  s.system = make_quadratic_system(s.system.K, s.system.L, {Matrix::Zero(2, 2), Matrix::Zero(2, 2)});
  for (auto const& name : {"midpoint", "gauss2", "gauss3"}) {
    s.t = s.x = builtin_tableau(name);
    auto const noise = s.path();
    StepState state = initial_state(s.grid, s.x, 2, [](double) { return Vector::Constant(2, 0.7); });
    for (int p = 0; p < 5; ++p) state = step(s.system, s.grid, s.t, s.x, state, noise, SolverConfig{}).state;
    EXPECT_LT(max_abs(state.line.array() - 0.7), 1e-14) << name;
  }
}

TEST(Integrator1d, OneStageEngineMatchesDirectMidpointScheme) {
  Case s(16, 50, 0.01);
  auto const noise = s.path();
  StepState a = s.sine_state(), b = a;
  double diff = 0;
  for (int p = 0; p < 50; ++p) {
    a = step(s.system, s.grid, s.t, s.x, a, noise, SolverConfig{}).state;
    b = midpoint_step(s.system, s.grid, b, noise, SolverConfig{}).state;
    diff = std::max(diff, max_abs(a.line - b.line));
  }
  EXPECT_LE(diff, 1e-12);
}

TEST(Integrator1d, NonlinearEngineMatchesDirectMidpointScheme) {
  Case s(9, 10, 0.02);
  s.system = quartic();
  auto const noise = s.path();
  StepState a = s.sine_state(), b = a;
  for (int p = 0; p < 10; ++p) {
    a = step(s.system, s.grid, s.t, s.x, a, noise, SolverConfig{}).state;
    b = midpoint_step(s.system, s.grid, b, noise, SolverConfig{}).state;
  }
  EXPECT_LE(max_abs(a.line - b.line), 1e-12);
}

// With spatially constant noise the one-stage scheme is translation
// invariant, so each Fourier mode evolves by a 2x2 complex linear map:
//   (K/tau + (mu L - g I)/2) zhat+ = (K/tau - (mu L - g I)/2) zhat,
//   mu = (2i/h) tan(theta/2),  g = alpha + lambda dW / tau.
TEST(Integrator1d, BoxSchemeMatchesFourierOracle) {
  using C = std::complex<double>;
  int const I = 15;
  double const alpha = 1.0, lambda = 0.5, tau = 0.03;
  Case s(I, 12, tau);
  s.system = transport2(alpha, lambda);
  s.noise = QWienerSpec{{0.8}, {1.0}, constant_basis(), 4};
  auto const noise = s.path();
  StepState state = s.random_state(3);

  Eigen::MatrixXcd zhat(2, I);
  for (int q = 0; q < I; ++q) {
    for (int c = 0; c < 2; ++c) {
      C sum = 0;
      for (int i = 0; i < I; ++i) sum += state.line(i * 2 + c) * std::polar(1.0, -2 * std::numbers::pi * q * i / I);
      zhat(c, q) = sum;
    }
  }
  Eigen::Matrix2cd const K = s.system.K.cast<C>();
  Eigen::Matrix2cd const L = s.system.L[0].cast<C>();
  Eigen::Matrix2cd const Id = Eigen::Matrix2cd::Identity();
  for (int p = 0; p < 12; ++p) {
    state = step(s.system, s.grid, s.t, s.x, state, noise, SolverConfig{}).state;
    double const g = alpha + lambda * noise.increment_at(p, 0) / tau;
    for (int q = 0; q < I; ++q) {
      double const theta = 2 * std::numbers::pi * q / I;
      C const mu = C(0, 2.0 / s.grid.h) * std::tan(theta / 2);
      Eigen::Matrix2cd const M = mu * L - g * Id;
      zhat.col(q) = (K / tau + M / 2.0).partialPivLu().solve((K / tau - M / 2.0) * zhat.col(q));
    }
  }
  double diff = 0;
  for (int i = 0; i < I; ++i) {
    for (int c = 0; c < 2; ++c) {
      C sum = 0;
      for (int q = 0; q < I; ++q) sum += zhat(c, q) * std::polar(1.0, 2 * std::numbers::pi * q * i / I);
      diff = std::max(diff, std::abs(sum / static_cast<double>(I) - state.line(i * 2 + c)));
    }
  }
  EXPECT_LE(diff, 1e-12);
}

TEST(Integrator1d, TangentIsLinearInTheDirection) {
  Case s(10, 1, 0.02);
  s.system = quartic();
  s.t = s.x = builtin_tableau("gauss2");
  auto const noise = s.path();
  auto const z = s.sine_state();
  auto const primal = step(s.system, s.grid, s.t, s.x, z, noise, SolverConfig{});
  auto const pair = random_tangent_pair(z.line.size(), 5);
  TangentPair combo = pair;
  combo.u.line = 2.0 * pair.u.line - 3.0 * pair.v.line;
  auto const out = tangent_step(s.system, s.grid, s.t, s.x, primal.stages, pair, noise, SolverConfig{});
  auto const out2 = tangent_step(s.system, s.grid, s.t, s.x, primal.stages, combo, noise, SolverConfig{});
  EXPECT_LE(max_abs(out2.u.line - (2.0 * out.u.line - 3.0 * out.v.line)), 1e-11);
}

TEST(Integrator1d, TangentEqualsPrimalDifferenceForLinearSystems) {
  Case s(12, 1, 0.02);
  s.t = s.x = builtin_tableau("gauss2");
  auto const noise = s.path();
  auto const z = s.sine_state();
  auto const dz = s.random_state(8);
  StepState z2{z.line + dz.line, 0};
  auto const a = step(s.system, s.grid, s.t, s.x, z, noise, SolverConfig{});
  auto const b = step(s.system, s.grid, s.t, s.x, z2, noise, SolverConfig{});
  TangentPair pair{dz, dz, {}, {}};
  auto const t = tangent_step(s.system, s.grid, s.t, s.x, a.stages, pair, noise, SolverConfig{});
  EXPECT_LE(max_abs(t.u.line - (b.state.line - a.state.line)), 1e-11);
}

TEST(Integrator1d, TangentMatchesCentralFiniteDifferenceOnNonlinearSystem) {
  Case s(10, 1, 0.02);
  s.system = quartic();
  s.t = s.x = builtin_tableau("gauss2");
  auto const noise = s.path();
  auto const z = s.sine_state();
  auto const dz = s.random_state(9);
  double const eps = 1e-6;
  auto const plus = step(s.system, s.grid, s.t, s.x, {z.line + eps * dz.line, 0}, noise, SolverConfig{});
  auto const minus = step(s.system, s.grid, s.t, s.x, {z.line - eps * dz.line, 0}, noise, SolverConfig{});
  auto const base = step(s.system, s.grid, s.t, s.x, z, noise, SolverConfig{});
  TangentPair pair{dz, dz, {}, {}};
  auto const t = tangent_step(s.system, s.grid, s.t, s.x, base.stages, pair, noise, SolverConfig{});
  Vector const fd = (plus.state.line - minus.state.line) / (2 * eps);
  EXPECT_LE(max_abs(t.u.line - fd), 1e-5);
}

TEST(Integrator1d, FixedPointAndDirectSolversAgree) {
  Case s(10, 5, 0.01);
  s.system = quartic();
  s.t = s.x = builtin_tableau("gauss2");
  auto const noise = s.path();
  StepState a = s.sine_state(), b = a;
  SolverConfig fp;
  fp.method = SolverConfig::Method::fixed_point;
  int fp_iters = 0, newton_iters = 0;
  for (int p = 0; p < 5; ++p) {
    auto ra = step(s.system, s.grid, s.t, s.x, a, noise, SolverConfig{});
    auto rb = step(s.system, s.grid, s.t, s.x, b, noise, fp);
    newton_iters += ra.stages.iterations;
    fp_iters += rb.stages.iterations;
    a = ra.state;
    b = rb.state;
  }
  EXPECT_LE(max_abs(a.line - b.line), 1e-12);
  EXPECT_GE(fp_iters, newton_iters);
}

TEST(Integrator1d, ConvergedStagesSatisfyEveryEquationGroup) {
  Case s(8, 1, 0.02);
  s.system = quartic();
  s.t = s.x = builtin_tableau("gauss3");
  auto const noise = s.path();
  auto const scheme = make_scheme(s.system, s.grid, s.t, s.x);
  auto const r = step(scheme, s.sine_state(), noise, SolverConfig{});
  auto const rep = scheme.residual_report(r.stages);
  EXPECT_LE(rep.max(), 1e-13);
  EXPECT_LE(r.stages.residual, 1e-13);
}

TEST(Integrator1d, MultisymplecticResidualVanishesForGaussTableaux) {
  for (auto const& [tname, xname, sys] :
       std::vector<std::tuple<char const*, char const*, SystemSpec>>{{"midpoint", "midpoint", quartic()},
                                                                      {"gauss2", "gauss2", quartic()},
                                                                      {"gauss2", "midpoint", transport2()},
                                                                      {"gauss3", "gauss2", transport2()}}) {
    Case s(12, 10, 0.01);
    s.system = sys;
    s.t = builtin_tableau(tname);
    s.x = builtin_tableau(xname);
    RunOptions opt;
    opt.diagnostics.ms_residual = true;
    auto const rec = run(s.system, s.grid, s.t, s.x, s.path(), SolverConfig{}, opt, s.sine_state());
    ASSERT_FALSE(rec.failed) << rec.failure;
    ASSERT_EQ(rec.rows.size(), 11u);
    for (auto const& row : rec.rows) EXPECT_LE(row.ms_residual_max, 1e-9) << tname << "/" << xname;
  }
}

TEST(Integrator1d, ExplicitEulerBreaksTheConservationLaw) {
  Case s(32, 20, 0.01);
  s.t = s.x = builtin_tableau("euler_explicit");
  RunOptions opt;
  opt.diagnostics.ms_residual = true;
  auto const rec = run(s.system, s.grid, s.t, s.x, s.path(), SolverConfig{}, opt, s.sine_state());
  ASSERT_FALSE(rec.failed) << rec.failure;
  EXPECT_GT(rec.rows.back().ms_residual_max, 1e-4);
}

TEST(Integrator1d, ExternalResidualMatchesRecordedResidual) {
  Case s(8, 1, 0.02);
  s.t = s.x = builtin_tableau("gauss2");
  auto const noise = s.path();
  auto const z = s.sine_state();
  auto const primal = step(s.system, s.grid, s.t, s.x, z, noise, SolverConfig{});
  auto const before = random_tangent_pair(z.line.size(), 2);
  auto const after = tangent_step(s.system, s.grid, s.t, s.x, primal.stages, before, noise, SolverConfig{});
  Vector const r = ms_residual(s.t, s.x, s.system.K, s.system.L[0], before, after, s.grid);
  EXPECT_EQ(r.size(), 8);
  EXPECT_LE(max_abs(r), 1e-10);
  EXPECT_THROW(ms_residual(s.t, s.x, s.system.K, s.system.L[0], before, before, s.grid), ConfigError);
}

TEST(Integrator1d, WedgeIsSkewInItsArguments) {
  Vector u(2), v(2);
  u << 1.5, -2.0;
  v << 0.3, 4.0;
  Matrix const K = transport2().K;
  EXPECT_DOUBLE_EQ(wedge(u, v, K), -wedge(v, u, K));
  EXPECT_DOUBLE_EQ(wedge(u, u, K), 0.0);
  EXPECT_DOUBLE_EQ(wedge(u, v, K), u(0) * (-v(1)) + u(1) * v(0));
}

TEST(Integrator1d, QuadraticInvariantIsConservedWithGaussTableaux) {
  for (auto const& name : {"midpoint", "gauss2"}) {
    Case s(16, 30, 0.02);
    s.t = s.x = builtin_tableau(name);
    RunOptions opt;
    opt.diagnostics.quadratic_invariant = true;
    auto const rec = run(s.system, s.grid, s.t, s.x, s.path(), SolverConfig{}, opt, s.sine_state());
    double const q0 = rec.rows.front().quadratic_invariant;
    for (auto const& row : rec.rows) EXPECT_LE(std::abs(row.quadratic_invariant - q0) / q0, 1e-10) << name;
  }
}

TEST(Integrator1d, QuadraticInvariantWeightsStages) {
  GridSpec grid{2, 0.5, 0, 0.1};
  auto const x = builtin_tableau("gauss2");
  StepState st{Vector::LinSpaced(8, 1, 8), 0};
  // cells x stages x components, weights 1/2
  double const expected = 0.5 * (1 + 4 + 9 + 16 + 25 + 36 + 49 + 64);
  EXPECT_DOUBLE_EQ(quadratic_invariant(x, st, grid), expected);
  EXPECT_THROW(quadratic_invariant(x, StepState{Vector::Zero(7), 0}, grid), ConfigError);
}

TEST(Integrator1d, RunWithZeroStepsHasOnlyTheInitialRow) {
  Case s(8, 0, 0.01);
  RunOptions opt;
  opt.diagnostics = {true, true};
  auto const rec = run(s.system, s.grid, s.t, s.x, s.path(), SolverConfig{}, opt, s.sine_state());
  ASSERT_EQ(rec.rows.size(), 1u);
  EXPECT_EQ(rec.rows[0].step, 0);
  EXPECT_EQ(rec.rows[0].ms_residual_max, 0.0);
}

TEST(Integrator1d, RunsAreBitwiseDeterministic) {
  Case s(10, 10, 0.01);
  s.system = quartic();
  RunOptions opt;
  opt.diagnostics = {true, false};
  opt.snapshot_stride = 5;
  auto const a = run(s.system, s.grid, s.t, s.x, s.path(), SolverConfig{}, opt, s.sine_state());
  auto const b = run(s.system, s.grid, s.t, s.x, s.path(), SolverConfig{}, opt, s.sine_state());
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].ms_residual_max, b.rows[i].ms_residual_max);
    EXPECT_EQ(a.rows[i].solver_iterations, b.rows[i].solver_iterations);
  }
  ASSERT_EQ(a.snapshots.size(), 3u);
  EXPECT_EQ(a.snapshots.back().line, b.snapshots.back().line);
  EXPECT_EQ(a.snapshots.back().level, 10);
}

TEST(Integrator1d, SolverFailureEndsRunAndKeepsEarlierRows) {
  Case s(8, 5, 0.05);
  s.system = quartic();
  SolverConfig tight;
  tight.method = SolverConfig::Method::fixed_point;
  tight.max_iter = 1;
  RunOptions opt;
  auto const rec = run(s.system, s.grid, s.t, s.x, s.path(), tight, opt, s.sine_state());
  EXPECT_TRUE(rec.failed);
  EXPECT_EQ(rec.rows.size(), 1u);
  EXPECT_NE(rec.failure.find("converge"), std::string::npos);
  EXPECT_THROW(step(s.system, s.grid, s.t, s.x, s.sine_state(), s.path(), tight), SolverError);
}

TEST(Integrator1d, MisuseIsReported) {
  Case s(8, 2, 0.01);
  auto const noise = s.path();
  auto bad_grid = s.grid;
  bad_grid.cells = 6;
  bad_grid.h = 1.0 / 6;
  // noise sampled on a different grid
  EXPECT_THROW(step(s.system, bad_grid, s.t, s.x, StepState{Vector::Zero(12), 0}, noise, SolverConfig{}),
               ConfigError);
  // noise sampled at other abscissae (gauss2 points vs midpoints)
  auto const g2 = builtin_tableau("gauss2");
  auto const other = sample_grid_noise(s.noise, s.grid, g2);
  EXPECT_THROW(step(s.system, s.grid, s.t, s.x, s.sine_state(), other, SolverConfig{}), ConfigError);
  // past the end of the noise path
  EXPECT_THROW(step(s.system, s.grid, s.t, s.x, StepState{s.sine_state().line, 2}, noise, SolverConfig{}),
               ConfigError);
  // wrong state size
  EXPECT_THROW(step(s.system, s.grid, s.t, s.x, StepState{Vector::Zero(3), 0}, noise, SolverConfig{}),
               ConfigError);
  // invalid system
  auto broken = s.system;
  broken.K = Matrix::Identity(2, 2);
  EXPECT_THROW(make_scheme(broken, s.grid, s.t, s.x), ConfigError);
  // invariant diagnostic with singular K
  auto singular = make_quadratic_system(Matrix::Zero(2, 2), s.system.L, {Matrix::Identity(2, 2), Matrix::Zero(2, 2)});
  RunOptions opt;
  opt.diagnostics.quadratic_invariant = true;
  EXPECT_THROW(run(singular, s.grid, s.t, s.x, noise, SolverConfig{}, opt, s.sine_state()), ConfigError);
  // invalid grid
  GridSpec g = s.grid;
  g.tau = 0;
  EXPECT_THROW(g.validate(), ConfigError);
  g = s.grid;
  g.cells = 1;
  EXPECT_THROW(g.validate(), ConfigError);
}
