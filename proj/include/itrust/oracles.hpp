#pragma once

#include "itrust/model.hpp"
#include "itrust/types.hpp"

#include <cstddef>

namespace itrust {

enum class OracleMethod { Grid, ExactBall };

struct OracleSolution {
  Vector s_star;
  double value = 0.0;
  OracleMethod method = OracleMethod::Grid;
  double resolution = 0.0;  ///< lattice spacing (Grid)
  double multiplier = 0.0;  ///< lambda (ExactBall)
  bool hard_case = false;   ///< ExactBall took the eigenvector augmentation path
};

inline constexpr Eigen::Index kMaxGridDim = 4;

struct GridOptions {
  double resolution = 1e-3;
  /// Projected-gradient steps at beta = 1/L from the best lattice point.
  std::size_t polish_steps = 100;
  /// Stop polishing once a step moves less than this (infinity norm).
  double polish_tol = 0.0;
  bool parallel = true;
};

/// Brute-force minimum of energy(model, .) over the lattice on
/// [-delta, delta]^n, optionally refined by projected-gradient polish.
/// Throws CapabilityError for n > 4.
OracleSolution grid_minimize_box(const QuadraticModel& model, const GridOptions& options);
OracleSolution grid_minimize_box(const QuadraticModel& model, double resolution);

inline constexpr int kBallMaxIterations = 200;

/// min <g, p> + 1/2 <p, H p> subject to ||p||_2 <= delta, via
/// eigendecomposition of H and bisection on the secular equation, with the
/// hard case handled by eigenvector augmentation. H must be symmetric.
OracleSolution exact_ball_minimize(const Vector& g, const Matrix& hessian, double delta);

}  // namespace itrust
