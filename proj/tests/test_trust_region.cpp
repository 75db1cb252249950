#include "itrust/objectives.hpp"
#include "itrust/oracles.hpp"
#include "itrust/trust_region.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace itrust;

namespace {

Objective constant_objective(Eigen::Index n) {
  Objective f;
  f.dim = n;
  f.value = [](const Vector&) { return 3.0; };
  f.gradient = [n](const Vector&) { return Vector::Zero(n); };
  f.hessian = [n](const Vector&) { return Matrix::Zero(n, n); };
  return f;
}

}  // namespace

TEST(ReductionRatio, ExactModelGivesOne) {
  const TestProblem p = random_quadratic_problem(3, 5);
  const Vector theta = Vector::Ones(3);
  const QuadraticModel m = build_subproblem(p.objective, theta, 1.0);
  const Vector step = Vector::Constant(3, -0.3);
  const auto rho = reduction_ratio(p.objective, theta, step, energy(m, step));
  ASSERT_TRUE(rho);
  EXPECT_NEAR(*rho, 1.0, 1e-12);
}

TEST(ReductionRatio, ZeroStepAndDegenerateModel) {
  const Objective f = rosenbrock(2);
  const auto rho = reduction_ratio(f, Vector::Zero(2), Vector::Zero(2), -0.5);
  ASSERT_TRUE(rho);
  EXPECT_EQ(*rho, 0.0);
  EXPECT_FALSE(reduction_ratio(f, Vector::Zero(2), Vector::Zero(2), 1e-15));
}

TEST(ReductionRatio, RosenbrockExactBallStepRecomputed) {
  const Objective f = rosenbrock(2);
  const Vector theta = Vector::Zero(2);
  const QuadraticModel m = build_subproblem(f, theta, 0.1);
  const OracleSolution sol = exact_ball_minimize(m.field(), m.symmetric_coupling(), 0.1);
  const auto rho = reduction_ratio(f, theta, sol.s_star, sol.value);
  ASSERT_TRUE(rho);
  // independent path: explicit formula for f and for the model
  auto rb = [](double x, double y) { return 100.0 * std::pow(y - x * x, 2) + std::pow(1.0 - x, 2); };
  const double px = sol.s_star[0], py = sol.s_star[1];
  const double actual = rb(px, py) - rb(0.0, 0.0);
  const double predicted = -2.0 * px + 0.5 * (2.0 * px * px + 200.0 * py * py);
  EXPECT_NEAR(*rho, actual / predicted, 1e-10);
}

TEST(ReductionRatio, NonFiniteObjectiveThrows) {
  Objective f = constant_objective(1);
  f.value = [](const Vector& x) { return x[0] > 0.5 ? NAN : 0.0; };
  EXPECT_THROW(reduction_ratio(f, Vector::Zero(1), Vector::Ones(1), -1.0), NumericalError);
}

TEST(UpdateRadius, Branches) {
  TrustRegionConfig c;
  EXPECT_DOUBLE_EQ(update_radius(-0.5, 1.0, 0.3, c), 0.25);
  c.delta_max = 1.5;
  EXPECT_DOUBLE_EQ(update_radius(0.99, 1.0, 1.0, c), 1.5);
  EXPECT_DOUBLE_EQ(update_radius(0.5, 1.0, 0.4, c), 1.0);
  // high ratio but interior step
  EXPECT_DOUBLE_EQ(update_radius(0.99, 1.0, 0.4, c), 1.0);
  // boundary within tolerance
  EXPECT_DOUBLE_EQ(update_radius(0.99, 1.0, 1.0 - 1e-10, c), 1.5);
}

TEST(TrustRegionConfig, Validation) {
  TrustRegionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.mu = 0.8;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.gamma1 = 1.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.delta0 = 200.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.solver.ecim.sigma2 = -1.0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(SolveSubproblem, ZeroFieldGivesZeroStep) {
  Matrix j(2, 2);
  j << 2, 0.3, 0.3, 1;
  QuadraticModel m(j, Vector::Zero(2), 0.5);
  for (auto kind : {SubproblemSolverKind::Ecim, SubproblemSolverKind::ExactBall,
                    SubproblemSolverKind::GridOracle}) {
    SubproblemSolver s;
    s.kind = kind;
    const SubproblemSolution sol = solve_subproblem(m, s, 1);
    EXPECT_LT(sol.step.norm(), 1e-9) << to_string(kind);
    EXPECT_NEAR(sol.value, 0.0, 1e-15) << to_string(kind);
  }
}

TEST(SolveSubproblem, EcimDominatesBallAndMatchesGrid) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix b(2, 2);
    for (auto& x : b.reshaped()) x = normal(rng);
    Vector h(2);
    for (auto& x : h) x = normal(rng);
    QuadraticModel m(b * b.transpose(), h, 0.5);
    SubproblemSolver ecim;
    ecim.ecim.iterations = 20000;
    SubproblemSolver ball;
    ball.kind = SubproblemSolverKind::ExactBall;
    const double e = solve_subproblem(m, ecim, trial).value;
    EXPECT_LE(e, solve_subproblem(m, ball, 0).value + 1e-6);
    EXPECT_NEAR(e, grid_minimize_box(m, 1e-3).value, 1e-4);
  }
}

TEST(SolveSubproblem, ScaledStepStaysInScaledBox) {
  const TestProblem p = ill_scaled_quadratic_problem();
  const QuadraticModel m = build_subproblem(p.objective, p.start, 0.1, p.scaling);
  SubproblemSolver s;
  const SubproblemSolution sol = solve_subproblem(m, s, 2);
  EXPECT_LE(p.scaling->cwiseProduct(sol.step).cwiseAbs().maxCoeff(), 0.1 + 1e-15);
  EXPECT_TRUE(sol.scaled_step.isApprox(p.scaling->cwiseProduct(sol.step)));
  EXPECT_NEAR(sol.value, energy(m, sol.step), 1e-15);
}

TEST(Itrust, ConvexQuadraticReachesClosedForm) {
  const TestProblem p = random_quadratic_problem(5, 17);
  TrustRegionConfig c;
  c.delta_max = 1e3;
  c.iterations = 30;
  const TrustRegionTrace t = itrust::itrust(p.objective, c, p.start);
  EXPECT_LT(t.final_grad_norm, 1e-8);
  EXPECT_LE(t.records.size(), 30u);
  const Matrix a = p.objective.hessian(p.start);
  const Vector b = p.objective.gradient(Vector::Zero(5));
  EXPECT_LE((t.final_theta + a.ldlt().solve(b)).norm(), 1e-6);
}

TEST(Itrust, RosenbrockFromStandardStart) {
  const TestProblem p = *find_problem("rosenbrock2");
  TrustRegionConfig c;
  c.iterations = 500;
  for (auto kind : {SubproblemSolverKind::Ecim, SubproblemSolverKind::ExactBall}) {
    c.solver.kind = kind;
    const TrustRegionTrace t = itrust::itrust(p.objective, c, p.start);
    EXPECT_LE((t.final_theta - Vector::Ones(2)).norm(), 1e-4) << to_string(kind);
    EXPECT_LE(t.final_f, 1e-8) << to_string(kind);
  }
}

TEST(Itrust, ConstantObjectiveNeverMoves) {
  TrustRegionConfig c;
  c.gtol = 0.0;
  c.iterations = 50;
  const Vector theta0 = Vector::Constant(2, 0.7);
  const TrustRegionTrace t = itrust::itrust(constant_objective(2), c, theta0);
  EXPECT_EQ(t.final_theta, theta0);
  ASSERT_EQ(t.records.size(), 50u);
  for (const auto& r : t.records) {
    EXPECT_EQ(r.status, IterationStatus::DegenerateModel);
    EXPECT_TRUE(std::isnan(r.rho));
  }
  EXPECT_LT(t.records.back().delta, 1e-20);
  EXPECT_GT(t.records.back().delta, 0.0);
}

TEST(Itrust, TraceInvariants) {
  const TestProblem p = *find_problem("rosenbrock10");
  TrustRegionConfig c;
  c.iterations = 200;
  c.seed = 4;
  const TrustRegionTrace t = itrust::itrust(p.objective, c, p.start);
  double last_accepted = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    EXPECT_GT(r.delta, 0.0);
    EXPECT_LE(r.delta, c.delta_max);
    EXPECT_EQ(r.accepted, r.status == IterationStatus::Ok && r.rho > c.eta);
    if (i + 1 < t.records.size()) {
      const Vector& next = t.records[i + 1].theta;
      if (r.accepted) {
        EXPECT_LT(t.records[i + 1].f, r.f);
        EXPECT_LT(r.f, last_accepted);
        last_accepted = r.f;
      } else {
        EXPECT_EQ(next, r.theta);
      }
    }
  }
}

TEST(Itrust, DeterministicWithNoise) {
  const TestProblem p = *find_problem("rosenbrock2");
  TrustRegionConfig c;
  c.iterations = 40;
  c.seed = 11;
  c.solver.ecim.sigma2 = 1e-4;
  const TrustRegionTrace a = itrust::itrust(p.objective, c, p.start);
  const TrustRegionTrace b = itrust::itrust(p.objective, c, p.start);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].theta, b.records[i].theta);
    EXPECT_EQ(a.records[i].step, b.records[i].step);
  }
}

TEST(Itrust, LiteralAlgorithmStallsInMiddleBand) {
  // without the extra shrink a rejected middle-band step repeats forever
  const TestProblem p = *find_problem("rosenbrock2");
  TrustRegionConfig c;
  c.iterations = 60;
  c.solver.kind = SubproblemSolverKind::ExactBall;
  c.shrink_on_reject = false;
  const TrustRegionTrace literal = itrust::itrust(p.objective, c, p.start);
  c.shrink_on_reject = true;
  const TrustRegionTrace shrinking = itrust::itrust(p.objective, c, p.start);
  EXPECT_LE(shrinking.final_f, literal.final_f);
  for (const auto& r : literal.records) {
    if (r.status == IterationStatus::Ok && !r.accepted && r.rho >= c.mu) {
      // middle band leaves the radius alone in the literal form
      const auto next = std::find_if(literal.records.begin(), literal.records.end(),
                                     [&](const auto& x) { return x.t == r.t + 1; });
      if (next != literal.records.end()) EXPECT_EQ(next->delta, r.delta);
    }
  }
}

TEST(Itrust, EllipticalScalingOnIllScaledQuadratic) {
  const TestProblem p = ill_scaled_quadratic_problem();
  TrustRegionConfig c;
  c.scaling = p.scaling;
  c.iterations = 100;
  const TrustRegionTrace t = itrust::itrust(p.objective, c, p.start);
  EXPECT_LT(t.final_grad_norm, 1e-8);
  EXPECT_LE((t.final_theta - p.objective.optimum->theta).norm(), 1e-6);
}

TEST(Itrust, MinHessianEigenvalue) {
  const Objective f = rosenbrock(2);
  EXPECT_GT(min_hessian_eigenvalue(f, Vector::Ones(2)), 0.0);
  Vector saddle(2);
  saddle << 0.0, 1.0;  // H = [[-398, 0], [0, 200]]
  EXPECT_NEAR(min_hessian_eigenvalue(f, saddle), -398.0, 1e-9);
}
