#pragma once

#include <cstddef>
#include <span>

namespace itrust {

/// Least-squares line through (x, log gap).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

inline constexpr double kMinFitGap = 1e-14;
inline constexpr std::size_t kMinFitPoints = 4;

/// log(gap) against log(K). Pairs with gap < 1e-14 are dropped; throws
/// InsufficientDataError when fewer than 4 remain.
RateFit fit_log_log(std::span<const double> horizons, std::span<const double> gaps);

/// log(gap) against K (linear-rate check), same filtering.
RateFit fit_log_linear(std::span<const double> horizons, std::span<const double> gaps);

}  // namespace itrust
