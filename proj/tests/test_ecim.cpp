#include "itrust/ecim.hpp"
#include "itrust/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace itrust;

namespace {

QuadraticModel random_psd_model(Eigen::Index n, double delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix b(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) b(i, j) = normal(rng);
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = normal(rng);
  return QuadraticModel(b * b.transpose() / static_cast<double>(n), h, delta);
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(ProjectBox, InteriorFixedAndSignedClamp) {
  EXPECT_EQ(project_box(vec2(0.1, -0.2), 0.5), vec2(0.1, -0.2));
  EXPECT_EQ(project_box(vec2(1.0, -2.0), 0.5), vec2(0.5, -0.5));
}

TEST(ProjectBox, IdempotentAndFeasible) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector z(5);
    for (auto& x : z) x = normal(rng);
    const Vector p = project_box(z, 0.7);
    EXPECT_LE(p.cwiseAbs().maxCoeff(), 0.7);
    EXPECT_EQ(project_box(p, 0.7), p);
  }
}

TEST(ProjectBox, ProjectionInequalityAndContraction) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.1, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double delta = radius(rng);
    Vector z(4);
    for (auto& x : z) x = 2.0 * delta * normal(rng);
    const Vector x = random_box_point(4, delta, rng);
    const Vector pz = project_box(z, delta);
    EXPECT_LE((x - pz).dot(z - pz), 1e-12);
    EXPECT_LE((pz - x).norm(), (z - x).norm() + 1e-12);
  }
}

TEST(EcimStep, SpecCases) {
  QuadraticModel one(Matrix::Identity(1, 1), Vector::Zero(1), 1.0);
  EXPECT_NEAR(ecim_step(one, Vector::Constant(1, 0.4), 1.0, Vector::Zero(1))[0], 0.0, 1e-15);

  QuadraticModel two(Matrix::Identity(2, 2), vec2(-1, -1), 0.5);
  EXPECT_EQ(ecim_step(two, Vector::Zero(2), 1.0, Vector::Zero(2)), vec2(0.5, 0.5));
  // the same point is the box minimizer
  const OracleSolution grid = grid_minimize_box(two, 1e-3);
  EXPECT_NEAR((grid.s_star - vec2(0.5, 0.5)).norm(), 0.0, 1e-9);
}

TEST(EcimStep, StationaryInteriorPointUnchanged) {
  Matrix j(2, 2);
  j << 2, 0, 0, 1;
  const Vector s = vec2(0.1, -0.2);
  const Vector h = -j * s;
  QuadraticModel m(j, h, 1.0);
  EXPECT_TRUE(ecim_step(m, s, 0.3, Vector::Zero(2)).isApprox(s));
}

TEST(EcimStep, DimensionMismatchThrows) {
  QuadraticModel m(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  EXPECT_THROW(ecim_step(m, Vector::Zero(3), 0.1, Vector::Zero(3)), ArgumentError);
  EXPECT_THROW(ecim_step(m, Vector::Zero(2), 0.1, Vector::Zero(3)), ArgumentError);
}

TEST(GradientMapping, FixedPointAndInteriorReduction) {
  const Vector s = vec2(0.1, 0.2);
  EXPECT_EQ(gradient_mapping(s, s, 0.5), Vector::Zero(2));
  QuadraticModel m(Matrix::Identity(2, 2), vec2(0.01, -0.02), 10.0);
  const double beta = 0.1;
  const Vector next = ecim_step(m, s, beta, Vector::Zero(2));
  EXPECT_LT((gradient_mapping(s, next, beta) - energy_gradient(m, s)).norm(), 1e-12);
  EXPECT_THROW(gradient_mapping(s, s, 0.0), ArgumentError);
}

TEST(GradientMapping, DescentAndNormRelationsOnRandomInstances) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const QuadraticModel m = random_psd_model(3, 0.4, 100 + trial);
    const Vector s = random_box_point(3, 0.4, rng);
    const double beta = (0.1 + unit(rng)) / lipschitz_constant(m);
    const Vector next = ecim_step(m, s, beta, Vector::Zero(3));
    const Vector g = gradient_mapping(s, next, beta);
    const Vector grad = energy_gradient(m, s);
    EXPECT_LE(grad.dot(next - s), beta * g.squaredNorm() + 1e-10);
    EXPECT_LE(grad.dot(next - s), -beta * g.squaredNorm() + 1e-10);
    EXPECT_LE(g.squaredNorm(), grad.squaredNorm() + 1e-10);
  }
}

TEST(StepSize, Schedules) {
  EXPECT_EQ(step_size(StepSchedule::fixed(0.1), 7, 100), 0.1);
  for (std::size_t k : {0, 5, 99}) {
    EXPECT_DOUBLE_EQ(step_size(StepSchedule::fixed_horizon(1.0), k, 100), 0.1);
  }
  double sum = 0.0, sum_sq = 0.0;
  const StepSchedule dec = StepSchedule::decreasing(1.0);
  for (std::size_t k = 0; k < 100000; ++k) {
    const double b = step_size(dec, k, 100000);
    sum += b;
    sum_sq += b * b;
  }
  EXPECT_GT(sum, 12.0);
  EXPECT_LT(sum_sq, M_PI * M_PI / 6.0);
  EXPECT_THROW(step_size(StepSchedule::inverse_lipschitz(), 0, 1), ArgumentError);
}

TEST(StepSchedule, ValidationAndResolution) {
  EXPECT_THROW(StepSchedule::fixed(0.0).validate(), ArgumentError);
  EXPECT_THROW(StepSchedule::decreasing(1.0, 0.5).validate(), ArgumentError);
  EXPECT_THROW(StepSchedule::decreasing(1.0, 1.5).validate(), ArgumentError);
  Matrix j(2, 2);
  j << 4, 0, 0, -1;
  QuadraticModel m(j, Vector::Zero(2), 1.0);
  const StepSchedule r = StepSchedule::inverse_lipschitz(2.0).resolve(m);
  EXPECT_EQ(r.kind, ScheduleKind::Fixed);
  EXPECT_DOUBLE_EQ(r.value, 0.5);
}

TEST(LegacyPmim, ClipBranchAndIdentity) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix j(2, 2);
  j << 1, 2, 3, 4;
  const Vector s = vec2(0.5, 0.1);
  const Vector out = legacy_pmim_step(j, s, 0.7, 0.3, vec2(normal(rng), normal(rng)));
  EXPECT_EQ(out[0], 0.0);

  const Vector inside = vec2(0.3, -0.4);
  EXPECT_EQ(legacy_pmim_step(j, inside, 1.0, 0.0, Vector::Zero(2)), inside);
}

TEST(LegacyPmim, MatchesEcimInteriorUpdateWithUnitAlpha) {
  Matrix j(2, 2);
  j << 2, 0.5, 0.5, 1;
  QuadraticModel m(j, Vector::Zero(2), 10.0);
  const Vector s = vec2(0.2, -0.1);
  const double beta = 0.05;
  EXPECT_TRUE(legacy_pmim_step(j, s, 1.0, beta, Vector::Zero(2))
                  .isApprox(ecim_step(m, s, beta, Vector::Zero(2)), 1e-14));
}

TEST(RunEcim, ConvergesToOriginForIdentity) {
  QuadraticModel m(Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
  const EcimTrace t = run_ecim(m, {StepSchedule::fixed(0.5), 0.0, 60, 1, false}, vec2(0.9, -0.7));
  for (std::size_t k = 1; k < t.energies.size(); ++k) {
    EXPECT_LE(t.energies[k], t.energies[k - 1]);
  }
  EXPECT_LT(t.best_energy, 1e-30);
  EXPECT_LT(t.best_iterate.norm(), 1e-15);
}

TEST(RunEcim, TraceInvariants) {
  const QuadraticModel m = random_psd_model(3, 0.5, 7);
  const EcimTrace t = run_ecim(m, {StepSchedule::decreasing(1.0), 0.01, 200, 3, true});
  ASSERT_EQ(t.iterates.size(), 201u);
  ASSERT_EQ(t.energies.size(), 201u);
  ASSERT_EQ(t.betas.size(), 200u);
  ASSERT_EQ(t.gm_norms.size(), 200u);
  Vector weighted = Vector::Zero(3);
  double sum = 0.0;
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    EXPECT_LE(t.iterates[k].cwiseAbs().maxCoeff(), 0.5);
    EXPECT_LE(t.best_energy, t.energies[k]);
    EXPECT_NEAR(t.energies[k], energy(m, t.iterates[k]), 1e-15);
    if (k < t.betas.size()) {
      weighted += t.betas[k] * t.iterates[k];
      sum += t.betas[k];
    }
  }
  EXPECT_EQ(t.energies[t.best_index], t.best_energy);
  EXPECT_TRUE(t.averaged_iterate.isApprox(weighted / sum, 1e-12));
}

TEST(RunEcim, ProjectsInfeasibleStart) {
  QuadraticModel m(Matrix::Identity(2, 2), Vector::Zero(2), 0.5);
  const EcimTrace t = run_ecim(m, {StepSchedule::fixed(0.1), 0.0, 3, 0, false}, vec2(2.0, 0.0));
  EXPECT_TRUE(t.initial_projected);
  EXPECT_EQ(t.iterates[0], vec2(0.5, 0.0));
}

TEST(RunEcim, MatchesGridOracleWithinTolerance) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const QuadraticModel m = random_psd_model(2, 0.5, seed);
    const double beta = 1.0 / lipschitz_constant(m);
    const EcimTrace t = run_ecim(m, {StepSchedule::fixed(beta), 0.0, 2000, seed, false});
    GridOptions opt;
    opt.resolution = 1e-3;
    opt.polish_steps = 0;
    const double lattice = grid_minimize_box(m, opt).value;
    // the polish-free lattice value is within its own Lipschitz slack
    EXPECT_LE(t.best_energy, lattice + 1e-12);
    EXPECT_NEAR(t.best_energy, grid_minimize_box(m, 1e-3).value, 1e-6);
  }
}

TEST(RunEcim, AveragedGapDecreasesWithDecreasingSchedule) {
  const QuadraticModel m = random_psd_model(2, 0.5, 11);
  const double e_star = grid_minimize_box(m, 1e-3).value;
  const Vector s0 = Vector::Constant(2, 0.5);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k : {100u, 1000u, 10000u}) {
    const EcimTrace t = run_ecim(m, {StepSchedule::decreasing(1.0 / lipschitz_constant(m)), 0.0, k, 0, false}, s0);
    const double gap = energy(m, t.averaged_iterate) - e_star;
    EXPECT_LT(gap, previous);
    previous = gap;
  }
}

TEST(RunEcim, DeterministicForSeed) {
  const QuadraticModel m = random_psd_model(4, 0.5, 5);
  const EcimConfig c{StepSchedule::fixed(0.1), 0.05, 500, 42, true};
  const EcimTrace a = run_ecim(m, c);
  const EcimTrace b = run_ecim(m, c);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t k = 0; k < a.iterates.size(); ++k) EXPECT_EQ(a.iterates[k], b.iterates[k]);
  const EcimTrace other = run_ecim(m, {c.schedule, c.sigma2, c.iterations, 43, true});
  EXPECT_NE(a.iterates.back(), other.iterates.back());
}

TEST(RunEcim, DivergenceCarriesIteration) {
  Matrix j(1, 1);
  j << -1.0;
  QuadraticModel m(j, Vector::Zero(1), 1e9);
  try {
    run_ecim(m, {StepSchedule::fixed(1.0), 0.0, 200, 0, false}, Vector::Constant(1, 1.0));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.iteration(), 0u);
  }
}

TEST(NoiseSource, ReproducibleAndScaled) {
  NoiseSource a(9), b(9);
  EXPECT_EQ(a.sample(5, 0.3), b.sample(5, 0.3));
  NoiseSource c(10);
  double sq = 0.0;
  const int n = 200000;
  const Vector v = c.sample(n, 0.3);
  for (int i = 0; i < n; ++i) sq += v[i] * v[i];
  EXPECT_NEAR(sq / n, 0.09, 0.002);
}
