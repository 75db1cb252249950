#include "itrust/rate_fit.hpp"

#include "itrust/types.hpp"

#include <cmath>
#include <vector>

namespace itrust {

namespace {

RateFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("rate fit: horizons must not all coincide");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A perfectly flat series is fitted exactly.
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = x.size();
  return fit;
}

template <class XMap>
RateFit fit_impl(std::span<const double> horizons, std::span<const double> gaps, XMap xmap,
                 bool positive_x) {
  if (horizons.size() != gaps.size()) {
    throw ArgumentError("rate fit: horizons and gaps differ in length");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] >= kMinFitGap) || !std::isfinite(gaps[i])) continue;
    if (positive_x && !(horizons[i] > 0.0)) continue;
    x.push_back(xmap(horizons[i]));
    y.push_back(std::log(gaps[i]));
  }
  if (x.size() < kMinFitPoints) {
    throw InsufficientDataError("rate fit: only " + std::to_string(x.size()) +
                                " usable points (need 4)");
  }
  return least_squares(x, y);
}

}  // namespace

RateFit fit_log_log(std::span<const double> horizons, std::span<const double> gaps) {
  return fit_impl(horizons, gaps, [](double k) { return std::log(k); }, true);
}

RateFit fit_log_linear(std::span<const double> horizons, std::span<const double> gaps) {
  return fit_impl(horizons, gaps, [](double k) { return k; }, false);
}

}  // namespace itrust
