#include "itrust/oracles.hpp"

#include "itrust/ecim.hpp"
#include "itrust/grid_kernels.hpp"

#include <algorithm>
#include <cmath>

namespace itrust {

OracleSolution grid_minimize_box(const QuadraticModel& model, const GridOptions& options) {
  const Eigen::Index n = model.dim();
  if (n > kMaxGridDim) {
    throw CapabilityError("grid oracle supports n <= " + std::to_string(kMaxGridDim) +
                          ", got n = " + std::to_string(n));
  }
  const Matrix sym = model.symmetric_coupling();
  const Vector& h = model.field();
  const kernels::Lattice lattice = kernels::make_lattice(n, model.delta(), options.resolution);
  const kernels::LatticeMin best = options.parallel
                                       ? kernels::lattice_argmin_parallel(sym, h, lattice)
                                       : kernels::lattice_argmin_serial(sym, h, lattice);

  OracleSolution out;
  out.method = OracleMethod::Grid;
  out.resolution = lattice.spacing();
  out.s_star = lattice.point(best.index);
  out.value = energy(model, out.s_star);

  const double l = lipschitz_constant(model);
  if (options.polish_steps == 0 || !(l > 0.0)) return out;

  const double beta = 1.0 / l;
  Vector s = out.s_star;
  for (std::size_t k = 0; k < options.polish_steps; ++k) {
    Vector next = project_box(s - beta * (sym * s + h), model.delta());
    const double moved = (next - s).cwiseAbs().maxCoeff();
    const double e = energy(model, next);
    if (e < out.value) {
      out.value = e;
      out.s_star = next;
    }
    s = std::move(next);
    if (moved <= options.polish_tol) break;
  }
  return out;
}

OracleSolution grid_minimize_box(const QuadraticModel& model, double resolution) {
  GridOptions options;
  options.resolution = resolution;
  return grid_minimize_box(model, options);
}

OracleSolution exact_ball_minimize(const Vector& g, const Matrix& hessian, double delta) {
  const Eigen::Index n = g.size();
  require_dim(hessian.rows(), n, "exact_ball_minimize");
  require_dim(hessian.cols(), n, "exact_ball_minimize");
  if (!(delta > 0.0)) throw ArgumentError("exact_ball_minimize: delta must be positive");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian);
  if (eig.info() != Eigen::Success) throw NumericalError("exact_ball_minimize: eigensolver failed");
  const Vector& lam = eig.eigenvalues();  // ascending
  const Matrix& q = eig.eigenvectors();
  const Vector gt = q.transpose() * g;
  const double lmin = lam[0];
  const double eig_tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double g_tol = 1e-12 * std::max(1.0, g.norm());

  auto value_of = [&](const Vector& p) { return g.dot(p) + 0.5 * p.dot(hessian * p); };
  // Step at multiplier lambda, skipping components flagged in `skip`.
  auto coeffs_at = [&](double lambda, Eigen::Index skip_upto) {
    Vector c = Vector::Zero(n);
    for (Eigen::Index i = skip_upto; i < n; ++i) c[i] = -gt[i] / (lam[i] + lambda);
    return c;
  };
  auto finish = [&](Vector coeffs, double lambda, bool hard) {
    OracleSolution out;
    out.method = OracleMethod::ExactBall;
    out.s_star = q * coeffs;
    out.value = value_of(out.s_star);
    out.multiplier = lambda;
    out.hard_case = hard;
    return out;
  };

  if (lmin > eig_tol) {
    Vector c = coeffs_at(0.0, 0);
    if (c.norm() <= delta) return finish(std::move(c), 0.0, false);
  }

  const double lambda_lo = std::max(0.0, -lmin);

  if (lmin <= eig_tol) {
    Eigen::Index near = 0;
    while (near < n && lam[near] - lmin <= eig_tol) ++near;
    if (gt.head(near).norm() <= g_tol) {
      Vector c = coeffs_at(lambda_lo, near);
      const double cn = c.norm();
      if (cn <= delta) {
        if (lmin >= -eig_tol) {
          // Flat along the null space; the minimum-norm step is optimal.
          return finish(std::move(c), 0.0, false);
        }
        c[0] = std::sqrt(std::max(0.0, delta * delta - cn * cn));
        return finish(std::move(c), lambda_lo, true);
      }
    }
  }

  double lo = lambda_lo;
  double hi = std::max(lambda_lo, g.norm() / delta - lmin);
  hi = hi * (1.0 + 1e-12) + 1e-300;
  bool converged = false;
  for (int it = 0; it < kBallMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double phi = coeffs_at(mid, 0).norm() - delta;
    if (phi > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * hi || std::abs(phi) <= 1e-14 * delta) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("exact_ball_minimize: secular equation did not converge");

  Vector c = coeffs_at(hi, 0);
  const double cn = c.norm();
  if (lmin < -eig_tol && cn < delta * (1.0 - 1e-10)) {
    // Nearly hard case: top up along the most negative curvature direction.
    const double tau = std::sqrt(delta * delta - cn * cn);
    Vector plus = c, minus = c;
    plus[0] += tau;
    minus[0] -= tau;
    const bool take_plus = value_of(q * plus) <= value_of(q * minus);
    return finish(take_plus ? std::move(plus) : std::move(minus), hi, true);
  }
  return finish(std::move(c), hi, false);
}

}  // namespace itrust
