#include "itrust/trust_region.hpp"

#include "itrust/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace itrust {

namespace {

// splitmix64 finalizer; derives one ECIM seed per outer iteration.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t t) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (t + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double shrink(double delta, double gamma1) {
  return std::max(gamma1 * delta, std::numeric_limits<double>::min());
}

}  // namespace

const char* to_string(SubproblemSolverKind kind) {
  switch (kind) {
    case SubproblemSolverKind::Ecim: return "ecim";
    case SubproblemSolverKind::ExactBall: return "exact-ball";
    case SubproblemSolverKind::GridOracle: return "grid";
  }
  return "unknown";
}

const char* to_string(IterationStatus status) {
  switch (status) {
    case IterationStatus::Ok: return "ok";
    case IterationStatus::DegenerateModel: return "degenerate";
    case IterationStatus::NonDescent: return "non-descent";
    case IterationStatus::SolverDiverged: return "diverged";
  }
  return "unknown";
}

SubproblemSolution solve_subproblem(const QuadraticModel& model, const SubproblemSolver& solver,
                                    std::uint64_t seed, const Vector* warm_start) {
  const QuadraticModel scaled = model.to_scaled_coordinates();
  const double delta = scaled.delta();

  SubproblemSolution out;
  switch (solver.kind) {
    case SubproblemSolverKind::Ecim: {
      EcimConfig config = solver.ecim;
      config.seed = seed;
      const EcimTrace trace =
          warm_start != nullptr && warm_start->size() == scaled.dim()
              ? run_ecim(scaled, config, project_box(*warm_start, delta))
              : run_ecim(scaled, config);
      out.scaled_step = trace.best_iterate;
      out.boundary_norm = out.scaled_step.cwiseAbs().maxCoeff();
      break;
    }
    case SubproblemSolverKind::ExactBall: {
      const OracleSolution sol =
          exact_ball_minimize(scaled.field(), scaled.symmetric_coupling(), delta);
      out.scaled_step = sol.s_star;
      out.boundary_norm = out.scaled_step.norm();
      break;
    }
    case SubproblemSolverKind::GridOracle: {
      GridOptions options;
      options.resolution = 2.0 * delta / static_cast<double>(solver.grid_points - 1);
      options.polish_steps = solver.grid_polish_steps;
      const OracleSolution sol = grid_minimize_box(scaled, options);
      out.scaled_step = sol.s_star;
      out.boundary_norm = out.scaled_step.cwiseAbs().maxCoeff();
      break;
    }
  }
  out.step = model.unscale(out.scaled_step);
  out.value = energy(model, out.step);
  return out;
}

void TrustRegionConfig::validate() const {
  if (!(0.0 < mu && mu < eta && eta < 1.0)) {
    throw ArgumentError("trust region: require 0 < mu < eta < 1");
  }
  if (!(0.0 < gamma1 && gamma1 < 1.0 && gamma2 > 1.0)) {
    throw ArgumentError("trust region: require 0 < gamma1 < 1 < gamma2");
  }
  if (!(0.0 < delta0 && delta0 <= delta_max) || !std::isfinite(delta_max)) {
    throw ArgumentError("trust region: require 0 < delta0 <= delta_max");
  }
  if (!(gtol >= 0.0)) throw ArgumentError("trust region: gtol must be >= 0");
  if (!(boundary_rel_tol >= 0.0)) throw ArgumentError("trust region: boundary tolerance must be >= 0");
  if (solver.kind == SubproblemSolverKind::Ecim) solver.ecim.validate();
  if (solver.kind == SubproblemSolverKind::GridOracle && solver.grid_points < 2) {
    throw ArgumentError("trust region: grid solver needs at least 2 points per axis");
  }
}

double TrustRegionConfig::boundary_tol(double delta) const {
  return boundary_rel_tol * std::max(1.0, delta);
}

std::optional<double> reduction_ratio(const Objective& objective, const Vector& theta,
                                      const Vector& step, double model_value) {
  if (!(std::abs(model_value) >= kDegenerateModelValue)) return std::nullopt;
  const double f0 = objective.value(theta);
  const double f1 = objective.value(theta + step);
  if (!std::isfinite(f0) || !std::isfinite(f1)) {
    throw NumericalError("reduction_ratio: objective is not finite");
  }
  return (f1 - f0) / model_value;
}

double update_radius(double rho, double delta, double step_norm, const TrustRegionConfig& config) {
  if (rho < config.mu) return shrink(delta, config.gamma1);
  if (rho > 1.0 - config.mu && std::abs(step_norm - delta) <= config.boundary_tol(delta)) {
    return std::min(config.gamma2 * delta, config.delta_max);
  }
  return delta;
}

TrustRegionTrace itrust(const Objective& objective, const TrustRegionConfig& config,
                        const Vector& theta0) {
  config.validate();
  require_dim(theta0.size(), objective.dim, "itrust theta0");
  if (config.scaling) require_dim(config.scaling->size(), objective.dim, "itrust scaling");

  TrustRegionTrace trace;
  Vector theta = theta0;
  double f = objective.value(theta);
  if (!std::isfinite(f)) throw NumericalError("itrust: objective is not finite at theta0");
  double delta = config.delta0;
  std::optional<Vector> previous;

  for (std::size_t t = 0; t < config.iterations; ++t) {
    const Vector grad = objective.gradient(theta);
    const double grad_norm = grad.norm();
    if (!std::isfinite(grad_norm)) throw NumericalError("itrust: gradient is not finite");
    if (config.gtol > 0.0 && grad_norm < config.gtol) {
      trace.converged = true;
      break;
    }

    TrustRegionRecord rec;
    rec.t = t;
    rec.theta = theta;
    rec.delta = delta;
    rec.rho = std::numeric_limits<double>::quiet_NaN();
    rec.step = Vector::Zero(theta.size());
    rec.f = f;
    rec.grad_norm = grad_norm;

    const QuadraticModel model(symmetric_hessian(objective, theta), grad, delta, config.scaling);
    SubproblemSolution sol;
    try {
      const Vector* warm = config.solver.warm_start && previous ? &*previous : nullptr;
      sol = solve_subproblem(model, config.solver, mix_seed(config.seed, t), warm);
    } catch (const DivergenceError&) {
      rec.status = IterationStatus::SolverDiverged;
      delta = shrink(delta, config.gamma1);
      trace.records.push_back(std::move(rec));
      continue;
    }
    rec.step = sol.step;
    rec.model_value = sol.value;
    rec.step_norm = sol.boundary_norm;

    const std::optional<double> rho =
        sol.value < 0.0 ? reduction_ratio(objective, theta, sol.step, sol.value) : std::nullopt;
    if (!rho) {
      rec.status = std::abs(sol.value) < kDegenerateModelValue ? IterationStatus::DegenerateModel
                                                                : IterationStatus::NonDescent;
      delta = shrink(delta, config.gamma1);
      trace.records.push_back(std::move(rec));
      continue;
    }
    rec.rho = *rho;
    double next_delta = update_radius(*rho, delta, sol.boundary_norm, config);
    if (*rho > config.eta) {
      theta += sol.step;
      f = objective.value(theta);
      rec.accepted = true;
      ++trace.accepted_steps;
    } else if (config.shrink_on_reject && *rho >= config.mu) {
      next_delta = shrink(delta, config.gamma1);
    }
    previous = sol.scaled_step;
    delta = next_delta;
    trace.records.push_back(std::move(rec));
  }

  trace.final_theta = theta;
  trace.final_f = f;
  trace.final_grad_norm = objective.gradient(theta).norm();
  if (config.gtol > 0.0 && trace.final_grad_norm < config.gtol) trace.converged = true;
  return trace;
}

double min_hessian_eigenvalue(const Objective& objective, const Vector& theta) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_hessian(objective, theta),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

}  // namespace itrust
