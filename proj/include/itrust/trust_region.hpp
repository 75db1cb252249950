#pragma once

#include "itrust/ecim.hpp"
#include "itrust/model.hpp"
#include "itrust/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace itrust {

enum class SubproblemSolverKind { Ecim, ExactBall, GridOracle };

const char* to_string(SubproblemSolverKind kind);

struct SubproblemSolver {
  SubproblemSolverKind kind = SubproblemSolverKind::Ecim;
  EcimConfig ecim{StepSchedule::inverse_lipschitz(1.0), 0.0, 5000, 0, false};
  /// GridOracle: lattice points per axis over [-delta, delta].
  std::int64_t grid_points = 201;
  std::size_t grid_polish_steps = 100;
  /// Start the ECIM from the previous step (clipped to the new box)
  /// instead of a fresh uniform sample.
  bool warm_start = false;
};

struct SubproblemSolution {
  Vector step;           ///< p in the original coordinates
  double value = 0.0;    ///< energy(model, p)
  /// Norm tested against the radius: ||u||_inf for box solvers, ||u||_2
  /// for ExactBall, with u the step in scaled coordinates.
  double boundary_norm = 0.0;
  Vector scaled_step;    ///< u
};

/// Solves the subproblem with the chosen backend. Scaled models are solved
/// in u = D p coordinates and mapped back. Propagates DivergenceError.
SubproblemSolution solve_subproblem(const QuadraticModel& model, const SubproblemSolver& solver,
                                    std::uint64_t seed, const Vector* warm_start = nullptr);

struct TrustRegionConfig {
  double delta0 = 1.0;
  double delta_max = 100.0;
  double mu = 0.1;
  double eta = 0.75;
  double gamma1 = 0.25;
  double gamma2 = 2.0;
  std::size_t iterations = 100;  ///< T
  SubproblemSolver solver;
  /// Boundary test |norm - delta| <= boundary_rel_tol * max(1, delta).
  double boundary_rel_tol = 1e-9;
  /// Early stop once ||grad f|| < gtol; 0 disables.
  double gtol = 1e-8;
  /// Shrink by gamma1 when a step with mu <= rho <= eta is rejected. Without
  /// it a deterministic solver returns the same rejected step forever.
  bool shrink_on_reject = true;
  std::optional<Vector> scaling;
  std::uint64_t seed = 0;

  void validate() const;
  double boundary_tol(double delta) const;
};

inline constexpr double kDegenerateModelValue = 1e-14;

/// (f(theta + step) - f(theta)) / model_value. Empty when |model_value| is
/// below 1e-14. Throws NumericalError if f is not finite at either point.
std::optional<double> reduction_ratio(const Objective& objective, const Vector& theta,
                                      const Vector& step, double model_value);

double update_radius(double rho, double delta, double step_norm, const TrustRegionConfig& config);

enum class IterationStatus {
  Ok,
  DegenerateModel,  ///< |model value| < 1e-14
  NonDescent,       ///< model value >= 0
  SolverDiverged,
};

const char* to_string(IterationStatus status);

struct TrustRegionRecord {
  std::size_t t = 0;
  Vector theta;               ///< theta(t), before the update
  double delta = 0.0;         ///< delta_t
  double rho = 0.0;           ///< NaN unless status == Ok
  Vector step;
  double model_value = 0.0;
  double f = 0.0;             ///< f(theta(t))
  double grad_norm = 0.0;
  double step_norm = 0.0;     ///< boundary norm of the step
  bool accepted = false;
  IterationStatus status = IterationStatus::Ok;
};

struct TrustRegionTrace {
  std::vector<TrustRegionRecord> records;
  Vector final_theta;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;  ///< stopped on gtol
  std::size_t accepted_steps = 0;
};

/// Trust-region loop with box subproblems solved by the configured backend.
/// Throws NumericalError when f is not finite.
TrustRegionTrace itrust(const Objective& objective, const TrustRegionConfig& config,
                        const Vector& theta0);

/// Smallest eigenvalue of the symmetrized Hessian at theta.
double min_hessian_eigenvalue(const Objective& objective, const Vector& theta);

}  // namespace itrust
