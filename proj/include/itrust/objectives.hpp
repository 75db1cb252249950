#pragma once

#include "itrust/ecim.hpp"
#include "itrust/model.hpp"
#include "itrust/types.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace itrust {

enum class ConvexityClass { StronglyConvex, Convex, InvexLike, Nonconvex };

const char* to_string(ConvexityClass c);

struct TestProblem {
  std::string name;
  Objective objective;
  Vector start;
  ConvexityClass convexity = ConvexityClass::Nonconvex;
  /// Suggested diagonal for an elliptical trust region.
  std::optional<Vector> scaling;
};

/// f(theta) = 1/2 theta^T A theta + b^T theta. The optimum -A^-1 b is
/// attached when A is positive definite.
Objective quadratic_objective(Matrix a, Vector b);

/// Chained Rosenbrock sum_i b (x_{i+1} - x_i^2)^2 + (a - x_i)^2, n >= 2.
Objective rosenbrock(Eigen::Index n, double a = 1.0, double b = 100.0);

struct LogisticDataset {
  Matrix features;  ///< samples x features, last column is the bias (all ones)
  Vector labels;    ///< +1 / -1
};

inline constexpr std::uint64_t kLogisticDatasetSeed = 20240611;

/// Two Gaussian clusters centred at (1, 1) and (-1, -1) with standard
/// deviation 1.2, half the samples each, plus a bias column.
LogisticDataset synthetic_logistic_dataset(std::size_t samples = 40,
                                           std::uint64_t seed = kLogisticDatasetSeed);

/// Mean logistic loss plus ridge / 2 ||w||^2.
Objective logistic_objective(LogisticDataset data, double ridge = 1e-2);

void write_dataset_csv(const LogisticDataset& data, std::ostream& out);

/// Random SPD quadratic with eigenvalues in [1, 10].
TestProblem random_quadratic_problem(Eigen::Index n, std::uint64_t seed);

/// Diagonal quadratic with condition number 1e4 and a matching scaling
/// diagonal sqrt(diag(A)).
TestProblem ill_scaled_quadratic_problem();

/// quadratic2, quadratic5, quadratic20, rosenbrock2, rosenbrock10,
/// logistic, ill_scaled_quadratic.
std::vector<TestProblem> problem_suite();

std::optional<TestProblem> find_problem(const std::string& name);

struct FiniteDiffReport {
  double grad_err = 0.0;  ///< max_i |g_i - fd_i| / max(1, ||fd||_inf)
  double hess_err = 0.0;  ///< same for the Hessian against differences of g
};

/// Compares the analytic gradient and Hessian with central differences.
FiniteDiffReport finite_diff_check(const Objective& objective, const Vector& theta,
                                   double step = 1e-5);

/// Central-difference Hessian from the analytic gradient, symmetrized.
Matrix finite_difference_hessian(const Objective& objective, const Vector& theta,
                                 double step = 1e-5);

/// Replaces the Hessian callable with finite differences of the gradient.
Objective with_finite_difference_hessian(Objective objective, double step = 1e-5);

struct ConstantEstimates {
  double G = 0.0;                ///< bound on ||grad E|| over the box
  double L = 0.0;                ///< Lipschitz constant of grad E
  std::optional<double> mu;      ///< PL constant (min eigenvalue) when S is positive definite
  std::optional<double> mu_p;    ///< empirical gradient-mapping PL constant
};

inline constexpr double kMuPGapFloor = 1e-12;
inline constexpr Eigen::Index kMaxCornerDim = 20;

/// Analytic G, L and mu of a quadratic model.
ConstantEstimates estimate_constants(const QuadraticModel& model);

/// min_k ||g(k)||^2 / (2 (E(s(k)) - e_star)) over iterates whose gap is at
/// least 1e-12. Empty when no iterate qualifies.
std::optional<double> estimate_mu_p(const EcimTrace& trace, double e_star);

/// estimate_constants(model) plus mu_p from a run.
ConstantEstimates estimate_constants(const QuadraticModel& model, const EcimTrace& trace,
                                     double e_star);

}  // namespace itrust
