#pragma once

#include "itrust/types.hpp"

#include <functional>
#include <optional>

namespace itrust {

/// Box-constrained quadratic (Ising energy) E(s) = 1/2 <s, J s> + <h, s>
/// over [-delta, delta]^n. J need not be symmetric.
///
/// When a scaling diagonal D is attached the model describes an elliptical
/// trust region; solvers work on to_scaled_coordinates() and map their
/// answer back with unscale().
class QuadraticModel {
 public:
  QuadraticModel(Matrix coupling, Vector field, double delta,
                 std::optional<Vector> scaling = std::nullopt);

  const Matrix& coupling() const noexcept { return coupling_; }
  const Vector& field() const noexcept { return field_; }
  double delta() const noexcept { return delta_; }
  const std::optional<Vector>& scaling() const noexcept { return scaling_; }
  Eigen::Index dim() const noexcept { return field_.size(); }

  /// (J + J^T) / 2
  Matrix symmetric_coupling() const;

  /// The same model in u = D p coordinates: J <- D^-1 J D^-1, h <- D^-1 h,
  /// half-width unchanged. Returns *this when no scaling is attached.
  /// Throws ArgumentError if any diagonal entry of D is zero.
  QuadraticModel to_scaled_coordinates() const;

  /// p = D^-1 u (identity without scaling).
  Vector unscale(const Vector& u) const;

  /// Same coupling and field with a different half-width.
  QuadraticModel with_delta(double delta) const;

 private:
  Matrix coupling_;
  Vector field_;
  double delta_;
  std::optional<Vector> scaling_;
};

struct Optimum {
  Vector theta;
  double value = 0.0;
};

/// Twice-differentiable objective f : R^n -> R. The callables must be
/// re-entrant; they are shared by value across threads.
struct Objective {
  Eigen::Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  std::optional<Optimum> optimum;
};

inline constexpr double kHessianSymmetryTol = 1e-10;

/// Evaluates the Hessian and returns (H + H^T) / 2. Throws ArgumentError
/// when max |H - H^T| exceeds tol * max(1, max |H|).
Matrix symmetric_hessian(const Objective& objective, const Vector& theta,
                         double tol = kHessianSymmetryTol);

/// 1/2 s^T J s + h^T s, evaluated literally (J is not symmetrized).
double energy(const QuadraticModel& model, const Vector& s);

/// (J + J^T) s / 2 + h
Vector energy_gradient(const QuadraticModel& model, const Vector& s);

/// Trust-region model m(p) = h^T p + 1/2 p^T S p with S = (J + J^T) / 2.
double model_value(const QuadraticModel& model, const Vector& p);

/// Subproblem at theta: J = H(theta), h = grad f(theta), half-width delta.
QuadraticModel build_subproblem(const Objective& objective, const Vector& theta,
                                double delta,
                                std::optional<Vector> scaling = std::nullopt);

}  // namespace itrust
