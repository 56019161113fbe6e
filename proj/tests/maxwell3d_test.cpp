#include <gtest/gtest.h>

#include <complex>
#include <numbers>

#include "mssrk/maxwell3d.hpp"

using namespace mssrk;

namespace {

MaxwellSpec spec_on(int cells, int steps, double lambda = 0.5, std::uint64_t seed = 1) {
  MaxwellSpec s;
  s.lambda = lambda;
  double const dx = 1.0 / cells;
  s.grid = {{cells, cells, cells}, {dx, dx, dx}, 0.01, steps};
  for (auto& t : s.tableaux) t = builtin_tableau("midpoint");
  s.noise.eta = {1.0, 0.25, 1.0 / 9, 1.0 / 16};
  s.noise.domain_length = s.grid.lengths();
  s.noise.seed = seed;
  return s;
}

Vector plane_wave(std::array<double, 3> const& p) {
  Vector v(6);
  double const arg = 2 * std::numbers::pi * (p[0] + p[1] + p[2]);
  for (int i = 0; i < 6; ++i) v(i) = std::sin(arg + i);
  return v;
}

double max_drift(MaxwellRecord const& rec) {
  double d = 0;
  for (auto const& r : rec.rows) d = std::max(d, r.energy_rel_drift);
  return d;
}

}  // namespace

TEST(Maxwell3d, SystemHasCurlStructure) {
  auto const sys = maxwell_system(0.5);
  EXPECT_TRUE(validate(sys).empty());
  EXPECT_EQ(sys.n, 6);
  EXPECT_EQ(sys.spatial_dims(), 3);
  // K = [[0, -I], [I, 0]]
  EXPECT_EQ(sys.K(0, 3), -1);
  EXPECT_EQ(sys.K(3, 0), 1);
  EXPECT_EQ(sys.K.cwiseAbs().sum(), 6);
  // L1 couples (H2, H3) and (E2, E3): D1 = [[0,0,0],[0,0,-1],[0,1,0]]
  EXPECT_EQ(sys.L[0](1, 2), -1);
  EXPECT_EQ(sys.L[0](2, 1), 1);
  EXPECT_EQ(sys.L[0](4, 5), -1);
  EXPECT_EQ(sys.L[0](5, 4), 1);
  EXPECT_EQ(sys.L[0].cwiseAbs().sum(), 4);
  EXPECT_EQ(sys.L[1](0, 2), 1);
  EXPECT_EQ(sys.L[2](0, 1), -1);
  Vector z = Vector::LinSpaced(6, 1, 6);
  EXPECT_LT((sys.grad_s2(z) - 0.5 * z).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(sys.grad_s1(z).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Maxwell3d, ZeroFieldWithZeroLambdaHasZeroEnergy) {
  auto const s = spec_on(3, 4, 0.0);
  auto const scheme = maxwell_scheme(s);
  MaxwellState zero{Vector::Zero(scheme.line_size()), 0};
  auto const rec = run_maxwell(s, zero, sample_maxwell_noise(s), SolverConfig{}, false);
  ASSERT_FALSE(rec.failed);
  ASSERT_EQ(rec.rows.size(), 5u);
  for (auto const& r : rec.rows) {
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.energy_rel_drift, 0.0);
  }
}

TEST(Maxwell3d, DiscreteEnergyWeightsStageTriples) {
  std::array<Tableau, 4> tabs{builtin_tableau("midpoint"), builtin_tableau("gauss2"), builtin_tableau("midpoint"),
                              builtin_tableau("gauss2")};
  // one cell, 2 x 1 x 2 stage triples, weights 1/4 each
  MaxwellState st{Vector::Constant(24, 2.0), 0};
  EXPECT_DOUBLE_EQ(discrete_energy(st, tabs), 4 * 0.25 * 6 * 4.0);
  EXPECT_THROW(discrete_energy(MaxwellState{Vector::Zero(25), 0}, tabs), ConfigError);
}

TEST(Maxwell3d, EnergyIsConservedOnOddGrids) {
  for (int cells : {3, 5}) {
    for (std::uint64_t seed : {1u, 2u}) {
      auto const s = spec_on(cells, 10, 0.5, seed);
      auto const scheme = maxwell_scheme(s);
      auto const rec = run_maxwell(s, maxwell_initial_state(scheme, plane_wave), sample_maxwell_noise(s),
                                   SolverConfig{}, false);
      ASSERT_FALSE(rec.failed) << rec.failure;
      EXPECT_LE(max_drift(rec), 1e-10) << cells << "^3 seed " << seed;
      EXPECT_GT(rec.rows.front().energy, 0.0);
    }
  }
}

TEST(Maxwell3d, FixedPointSolverConservesEnergyToo) {
  auto const s = spec_on(3, 5);
  auto const scheme = maxwell_scheme(s);
  SolverConfig fp;
  fp.method = SolverConfig::Method::fixed_point;
  auto const noise = sample_maxwell_noise(s);
  auto const init = maxwell_initial_state(scheme, plane_wave);
  auto const a = run_maxwell(s, init, noise, fp, false);
  auto const b = run_maxwell(s, init, noise, SolverConfig{}, false);
  ASSERT_FALSE(a.failed) << a.failure;
  EXPECT_LE(max_drift(a), 1e-10);
  EXPECT_NEAR(a.rows.back().energy, b.rows.back().energy, 1e-12);
}

TEST(Maxwell3d, MultisymplecticResidualVanishesOnOddGrid) {
  auto const s = spec_on(3, 6);
  auto const scheme = maxwell_scheme(s);
  auto const rec = run_maxwell(s, maxwell_initial_state(scheme, plane_wave), sample_maxwell_noise(s),
                               SolverConfig{}, true, 4);
  ASSERT_FALSE(rec.failed) << rec.failure;
  for (auto const& r : rec.rows) EXPECT_LE(r.ms_residual_max, 1e-9);
}

TEST(Maxwell3d, ExternalResidualAgreesWithRecordedOne) {
  auto const s = spec_on(3, 1);
  auto const scheme = maxwell_scheme(s);
  auto const noise = sample_maxwell_noise(s);
  auto const st = maxwell_initial_state(scheme, plane_wave);
  auto const primal = maxwell_step(scheme, st, noise, SolverConfig{});
  auto const tp = random_tangent_pair(st.line.size(), 6);
  MaxwellTangentPair before{{tp.u.line, 0}, {tp.v.line, 0}, {}, {}};
  auto const after = maxwell_tangent_step(scheme, primal.stages, before, SolverConfig{});
  Vector const r = maxwell_ms_residual(before, after, s.tableaux, s.grid);
  EXPECT_EQ(r.size(), 27);
  EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(maxwell_ms_residual(before, before, s.tableaux, s.grid), ConfigError);
}

// Spatially constant noise keeps the one-stage scheme translation invariant.
// On odd grids each Fourier mode then evolves by
//   (K/tau + (sum_d mu_d L_d - g I)/2) zhat+ = (K/tau - (sum_d mu_d L_d - g I)/2) zhat,
//   mu_d = (2i/h_d) tan(theta_d/2),  g = lambda dW / tau.
TEST(Maxwell3d, BoxSchemeMatchesFourierOracle) {
  using C = std::complex<double>;
  auto s = spec_on(3, 4, 0.7);
  s.noise = QWienerSpec{{0.6}, s.grid.lengths(), constant_basis(), 12};
  auto const scheme = maxwell_scheme(s);
  auto const noise = sample_maxwell_noise(s);
  MaxwellState st{random_tangent_pair(scheme.line_size(), 3).u.line, 0};
  int const I = 3, cells = 27;
  double const tau = s.grid.tau, h = s.grid.spacing[0];

  auto phase = [&](std::array<int, 3> const& q, std::array<int, 3> const& i, double sign) {
    double arg = 0;
    for (int d = 0; d < 3; ++d) arg += 2 * std::numbers::pi * q[d] * i[d] / I;
    return std::polar(1.0, sign * arg);
  };
  std::vector<std::array<int, 3>> modes;
  for (int a = 0; a < I; ++a)
    for (int b = 0; b < I; ++b)
      for (int c = 0; c < I; ++c) modes.push_back({a, b, c});

  std::vector<Eigen::Matrix<C, 6, 1>> zhat(cells, Eigen::Matrix<C, 6, 1>::Zero());
  for (std::size_t q = 0; q < modes.size(); ++q) {
    for (int c = 0; c < cells; ++c) {
      zhat[q] += st.line.segment(c * 6, 6).cast<C>() * phase(modes[q], scheme.cell_multi_index(c), -1);
    }
  }
  auto const sys = maxwell_system(s.lambda);
  Eigen::Matrix<C, 6, 6> const K = sys.K.cast<C>();
  for (int p = 0; p < 4; ++p) {
    st = maxwell_step(scheme, st, noise, SolverConfig{}).state;
    double const g = s.lambda * noise.increment_at(p, 0) / tau;
    for (std::size_t q = 0; q < modes.size(); ++q) {
      Eigen::Matrix<C, 6, 6> M = -g * Eigen::Matrix<C, 6, 6>::Identity();
      for (int d = 0; d < 3; ++d) {
        M += C(0, 2.0 / h) * std::tan(std::numbers::pi * modes[q][d] / I) * sys.L[d].cast<C>();
      }
      Eigen::Matrix<C, 6, 6> const lhs = K / tau + M / 2.0;
      Eigen::Matrix<C, 6, 6> const rhs = K / tau - M / 2.0;
      zhat[q] = lhs.partialPivLu().solve(rhs * zhat[q]);
    }
  }
  double diff = 0;
  for (int c = 0; c < cells; ++c) {
    Eigen::Matrix<C, 6, 1> v = Eigen::Matrix<C, 6, 1>::Zero();
    for (std::size_t q = 0; q < modes.size(); ++q) v += zhat[q] * phase(modes[q], scheme.cell_multi_index(c), 1);
    v /= static_cast<double>(cells);
    diff = std::max(diff, (v - st.line.segment(c * 6, 6).cast<C>()).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(diff, 1e-12);
}

// On even periodic grids the one-stage stage system is singular: the cell
// average kills checkerboard face modes and every L_d is singular.
TEST(Maxwell3d, EvenGridStageSystemIsSingularAndGenericallyInconsistent) {
  auto const s = spec_on(2, 3);
  auto const scheme = maxwell_scheme(s);
  auto const noise = sample_maxwell_noise(s);
  MaxwellState generic{random_tangent_pair(scheme.line_size(), 1).u.line, 0};
  try {
    (void)maxwell_step(scheme, generic, noise, SolverConfig{});
    FAIL() << "expected SolverError";
  } catch (SolverError const& e) {
    EXPECT_NE(std::string(e.what()).find("singular and inconsistent"), std::string::npos) << e.what();
  }
  auto const rec = run_maxwell(s, generic, noise, SolverConfig{}, false);
  EXPECT_TRUE(rec.failed);
  EXPECT_EQ(rec.rows.size(), 1u);
}

TEST(Maxwell3d, EvenGridConstantFieldUnderUniformNoiseIsSolvable) {
  auto s = spec_on(2, 5);
  s.noise = QWienerSpec{{1.0}, s.grid.lengths(), constant_basis(), 5};
  auto const scheme = maxwell_scheme(s);
  MaxwellState st{Vector::Zero(scheme.line_size()), 0};
  for (int c = 0; c < scheme.num_cells(); ++c) st.line.segment(c * 6, 6) = Vector::LinSpaced(6, 1, 6);
  auto const rec = run_maxwell(s, st, sample_maxwell_noise(s), SolverConfig{}, false);
  ASSERT_FALSE(rec.failed) << rec.failure;
  EXPECT_LE(max_drift(rec), 1e-10);
}

TEST(Maxwell3d, MisuseIsReported) {
  auto s = spec_on(3, 2);
  auto const scheme = maxwell_scheme(s);
  EXPECT_THROW(maxwell_initial_state(scheme, [](auto const&) { return Vector::Zero(5); }), ConfigError);
  auto other = spec_on(5, 2);
  EXPECT_THROW(maxwell_step(scheme, MaxwellState{Vector::Zero(scheme.line_size()), 0}, sample_maxwell_noise(other),
                            SolverConfig{}),
               ConfigError);
  s.grid.steps = -1;
  EXPECT_THROW(maxwell_scheme(s), ConfigError);
}

TEST(Maxwell3d, RelativeDriftFallsBackToAbsoluteAtZero) {
  EXPECT_DOUBLE_EQ(relative_drift(1.5, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_drift(0.25, 0.0), 0.25);
}

TEST(Maxwell3d, MultiStageTimeTableauConservesEnergy) {
  auto s = spec_on(3, 3);
  s.tableaux[0] = builtin_tableau("gauss2");
  auto const scheme = maxwell_scheme(s);
  EXPECT_EQ(scheme.time_stages(), 2);
  auto const rec = run_maxwell(s, maxwell_initial_state(scheme, plane_wave), sample_maxwell_noise(s),
                               SolverConfig{}, true, 3);
  ASSERT_FALSE(rec.failed) << rec.failure;
  EXPECT_LE(max_drift(rec), 1e-10);
  for (auto const& r : rec.rows) EXPECT_LE(r.ms_residual_max, 1e-9);
}
