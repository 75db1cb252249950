#include "itrust/objectives.hpp"

#include "itrust/grid_kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace itrust {

const char* to_string(ConvexityClass c) {
  switch (c) {
    case ConvexityClass::StronglyConvex: return "strongly-convex";
    case ConvexityClass::Convex: return "convex";
    case ConvexityClass::InvexLike: return "invex-like";
    case ConvexityClass::Nonconvex: return "nonconvex";
  }
  return "unknown";
}

Objective quadratic_objective(Matrix a, Vector b) {
  if (a.rows() != a.cols()) throw ArgumentError("quadratic_objective: A must be square");
  require_dim(b.size(), a.rows(), "quadratic_objective");
  const Matrix sym = 0.5 * (a + a.transpose());

  Objective f;
  f.dim = b.size();
  f.value = [sym, b](const Vector& x) { return 0.5 * x.dot(sym * x) + b.dot(x); };
  f.gradient = [sym, b](const Vector& x) -> Vector { return sym * x + b; };
  f.hessian = [sym](const Vector&) -> Matrix { return sym; };

  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    Vector theta = -llt.solve(b);
    const double value = 0.5 * theta.dot(sym * theta) + b.dot(theta);
    f.optimum = Optimum{std::move(theta), value};
  }
  return f;
}

Objective rosenbrock(Eigen::Index n, double a, double b) {
  if (n < 2) throw ArgumentError("rosenbrock: n must be >= 2");
  Objective f;
  f.dim = n;
  f.value = [n, a, b](const Vector& x) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double r = x[i + 1] - x[i] * x[i];
      const double d = a - x[i];
      sum += b * r * r + d * d;
    }
    return sum;
  };
  f.gradient = [n, a, b](const Vector& x) -> Vector {
    Vector g = Vector::Zero(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double r = x[i + 1] - x[i] * x[i];
      g[i] += -4.0 * b * x[i] * r - 2.0 * (a - x[i]);
      g[i + 1] += 2.0 * b * r;
    }
    return g;
  };
  f.hessian = [n, b](const Vector& x) -> Matrix {
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      h(i, i) += 12.0 * b * x[i] * x[i] - 4.0 * b * x[i + 1] + 2.0;
      h(i, i + 1) += -4.0 * b * x[i];
      h(i + 1, i) += -4.0 * b * x[i];
      h(i + 1, i + 1) += 2.0 * b;
    }
    return h;
  };
  f.optimum = Optimum{Vector::Constant(n, a), 0.0};
  return f;
}

LogisticDataset synthetic_logistic_dataset(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> noise(0.0, 1.2);
  LogisticDataset data;
  const auto m = static_cast<Eigen::Index>(samples);
  data.features.resize(m, 3);
  data.labels.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double label = i < m / 2 ? 1.0 : -1.0;
    data.features(i, 0) = label + noise(engine);
    data.features(i, 1) = label + noise(engine);
    data.features(i, 2) = 1.0;
    data.labels[i] = label;
  }
  return data;
}

namespace {

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Objective logistic_objective(LogisticDataset data, double ridge) {
  const Eigen::Index d = data.features.cols();
  const double inv_m = 1.0 / static_cast<double>(data.features.rows());
  auto shared = std::make_shared<const LogisticDataset>(std::move(data));

  Objective f;
  f.dim = d;
  f.value = [shared, inv_m, ridge](const Vector& w) {
    const Vector margins = shared->labels.cwiseProduct(shared->features * w);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) loss += softplus(-margins[i]);
    return loss * inv_m + 0.5 * ridge * w.squaredNorm();
  };
  f.gradient = [shared, inv_m, ridge](const Vector& w) -> Vector {
    const Vector margins = shared->labels.cwiseProduct(shared->features * w);
    Vector coeff(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      coeff[i] = -shared->labels[i] * sigmoid(-margins[i]);
    }
    return inv_m * (shared->features.transpose() * coeff) + ridge * w;
  };
  f.hessian = [shared, inv_m, ridge, d](const Vector& w) -> Matrix {
    const Vector margins = shared->labels.cwiseProduct(shared->features * w);
    Vector weights(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double p = sigmoid(margins[i]);
      weights[i] = p * (1.0 - p);
    }
    Matrix h = inv_m * (shared->features.transpose() * weights.asDiagonal() * shared->features);
    h += ridge * Matrix::Identity(d, d);
    return 0.5 * (h + h.transpose());
  };
  return f;
}

void write_dataset_csv(const LogisticDataset& data, std::ostream& out) {
  out << "x1,x2,label\n";
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    out << fmt::format("{:.17g},{:.17g},{}\n", data.features(i, 0), data.features(i, 1),
                       data.labels[i] > 0 ? 1 : -1);
  }
}

TestProblem random_quadratic_problem(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> eig(1.0, 10.0);
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(engine);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector lambdas(n);
  for (Eigen::Index i = 0; i < n; ++i) lambdas[i] = eig(engine);
  Matrix a = q * lambdas.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = normal(engine);

  TestProblem p;
  p.name = "quadratic" + std::to_string(n);
  p.objective = quadratic_objective(std::move(a), std::move(b));
  p.start = Vector::Zero(n);
  p.convexity = ConvexityClass::StronglyConvex;
  return p;
}

TestProblem ill_scaled_quadratic_problem() {
  const Eigen::Index n = 4;
  Vector diag(n);
  diag << 1.0, 1e1 * std::sqrt(10.0), 1e3 / std::sqrt(10.0), 1e4;
  Vector b(n);
  b << 1.0, -3.0, 20.0, -500.0;

  TestProblem p;
  p.name = "ill_scaled_quadratic";
  p.objective = quadratic_objective(diag.asDiagonal().toDenseMatrix(), b);
  p.start = Vector::Zero(n);
  p.convexity = ConvexityClass::StronglyConvex;
  p.scaling = diag.cwiseSqrt();
  return p;
}

std::vector<TestProblem> problem_suite() {
  std::vector<TestProblem> suite;
  suite.push_back(random_quadratic_problem(2, 101));
  suite.push_back(random_quadratic_problem(5, 102));
  suite.push_back(random_quadratic_problem(20, 103));

  for (Eigen::Index n : {Eigen::Index{2}, Eigen::Index{10}}) {
    TestProblem p;
    p.name = "rosenbrock" + std::to_string(n);
    p.objective = rosenbrock(n);
    p.start = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) p.start[i] = i % 2 == 0 ? -1.2 : 1.0;
    p.convexity = ConvexityClass::Nonconvex;
    suite.push_back(std::move(p));
  }

  TestProblem logistic;
  logistic.name = "logistic";
  logistic.objective = logistic_objective(synthetic_logistic_dataset());
  logistic.start = Vector::Zero(3);
  logistic.convexity = ConvexityClass::Convex;
  suite.push_back(std::move(logistic));

  suite.push_back(ill_scaled_quadratic_problem());
  return suite;
}

std::optional<TestProblem> find_problem(const std::string& name) {
  for (auto& p : problem_suite()) {
    if (p.name == name) return std::move(p);
  }
  return std::nullopt;
}

Matrix finite_difference_hessian(const Objective& objective, const Vector& theta, double step) {
  const Eigen::Index n = objective.dim;
  require_dim(theta.size(), n, "finite_difference_hessian");
  Matrix h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector plus = theta, minus = theta;
    plus[j] += step;
    minus[j] -= step;
    h.col(j) = (objective.gradient(plus) - objective.gradient(minus)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

FiniteDiffReport finite_diff_check(const Objective& objective, const Vector& theta, double step) {
  const Eigen::Index n = objective.dim;
  require_dim(theta.size(), n, "finite_diff_check");
  Vector fd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector plus = theta, minus = theta;
    plus[i] += step;
    minus[i] -= step;
    fd[i] = (objective.value(plus) - objective.value(minus)) / (2.0 * step);
  }
  const Vector g = objective.gradient(theta);
  const Matrix fd_h = finite_difference_hessian(objective, theta, step);
  const Matrix h = objective.hessian(theta);

  FiniteDiffReport report;
  report.grad_err = (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff());
  report.hess_err = (h - fd_h).cwiseAbs().maxCoeff() / std::max(1.0, fd_h.cwiseAbs().maxCoeff());
  return report;
}

Objective with_finite_difference_hessian(Objective objective, double step) {
  auto base = std::make_shared<const Objective>(objective);
  objective.hessian = [base, step](const Vector& x) -> Matrix {
    return finite_difference_hessian(*base, x, step);
  };
  return objective;
}

ConstantEstimates estimate_constants(const QuadraticModel& model) {
  const Matrix sym = model.symmetric_coupling();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector& lam = eig.eigenvalues();

  ConstantEstimates out;
  out.L = lam.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, out.L);
  if (lam[0] > tol) out.mu = lam[0];

  const Eigen::Index n = model.dim();
  if (n <= kMaxCornerDim) {
    out.G = kernels::max_corner_gradient_norm_parallel(sym, model.field(), model.delta());
  } else {
    out.G = out.L * model.delta() * std::sqrt(static_cast<double>(n)) + model.field().norm();
  }
  return out;
}

std::optional<double> estimate_mu_p(const EcimTrace& trace, double e_star) {
  std::optional<double> best;
  for (std::size_t k = 0; k < trace.gm_norms.size(); ++k) {
    const double gap = trace.energies[k] - e_star;
    if (!(gap >= kMuPGapFloor)) continue;
    const double ratio = trace.gm_norms[k] * trace.gm_norms[k] / (2.0 * gap);
    if (!best || ratio < *best) best = ratio;
  }
  return best;
}

ConstantEstimates estimate_constants(const QuadraticModel& model, const EcimTrace& trace,
                                     double e_star) {
  ConstantEstimates out = estimate_constants(model);
  out.mu_p = estimate_mu_p(trace, e_star);
  return out;
}

}  // namespace itrust
