#include "itrust/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace itrust {

QuadraticModel::QuadraticModel(Matrix coupling, Vector field, double delta,
                               std::optional<Vector> scaling)
    : coupling_(std::move(coupling)),
      field_(std::move(field)),
      delta_(delta),
      scaling_(std::move(scaling)) {
  if (coupling_.rows() != coupling_.cols()) {
    throw ArgumentError("QuadraticModel: coupling matrix must be square");
  }
  require_dim(field_.size(), coupling_.rows(), "QuadraticModel field");
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) {
    throw ArgumentError("QuadraticModel: delta must be positive and finite");
  }
  if (scaling_) {
    require_dim(scaling_->size(), field_.size(), "QuadraticModel scaling");
    if ((scaling_->array() < 0.0).any() || !(scaling_->array() > 0.0).any()) {
      throw ArgumentError(
          "QuadraticModel: scaling entries must be >= 0 with at least one > 0");
    }
  }
}

Matrix QuadraticModel::symmetric_coupling() const {
  return 0.5 * (coupling_ + coupling_.transpose());
}

QuadraticModel QuadraticModel::to_scaled_coordinates() const {
  if (!scaling_) return *this;
  if ((scaling_->array() == 0.0).any()) {
    throw ArgumentError("QuadraticModel: zero scaling entry in elliptical trust region");
  }
  const Vector inv = scaling_->cwiseInverse();
  Matrix j = inv.asDiagonal() * coupling_ * inv.asDiagonal();
  Vector h = inv.cwiseProduct(field_);
  return QuadraticModel(std::move(j), std::move(h), delta_);
}

Vector QuadraticModel::unscale(const Vector& u) const {
  require_dim(u.size(), dim(), "unscale");
  if (!scaling_) return u;
  return u.cwiseQuotient(*scaling_);
}

QuadraticModel QuadraticModel::with_delta(double delta) const {
  return QuadraticModel(coupling_, field_, delta, scaling_);
}

Matrix symmetric_hessian(const Objective& objective, const Vector& theta, double tol) {
  Matrix h = objective.hessian(theta);
  if (h.rows() != objective.dim || h.cols() != objective.dim) {
    throw ArgumentError("hessian: wrong shape " + std::to_string(h.rows()) + "x" +
                        std::to_string(h.cols()));
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= tol * scale)) {
    throw ArgumentError("hessian: asymmetry " + std::to_string(asym) +
                        " exceeds tolerance");
  }
  return 0.5 * (h + h.transpose());
}

double energy(const QuadraticModel& model, const Vector& s) {
  require_dim(s.size(), model.dim(), "energy");
  return 0.5 * s.dot(model.coupling() * s) + model.field().dot(s);
}

Vector energy_gradient(const QuadraticModel& model, const Vector& s) {
  require_dim(s.size(), model.dim(), "energy_gradient");
  const Matrix& j = model.coupling();
  return 0.5 * (j * s + j.transpose() * s) + model.field();
}

double model_value(const QuadraticModel& model, const Vector& p) {
  require_dim(p.size(), model.dim(), "model_value");
  return model.field().dot(p) + 0.5 * p.dot(model.symmetric_coupling() * p);
}

QuadraticModel build_subproblem(const Objective& objective, const Vector& theta,
                                double delta, std::optional<Vector> scaling) {
  require_dim(theta.size(), objective.dim, "build_subproblem");
  return QuadraticModel(symmetric_hessian(objective, theta), objective.gradient(theta),
                        delta, std::move(scaling));
}

}  // namespace itrust
