#include "heatlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "heatlab/error.hpp"

namespace heatlab {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::invalid_parameter, "fit needs equally many x and y values");
  const std::size_t n = x.size();
  if (n < 2) throw Error(Errc::insufficient_data, "fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(Errc::insufficient_data, "fit needs at least two distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = n;
  return fit;
}

double relative_spread(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::insufficient_data, "spread of an empty set");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean == 0.0) return *hi == *lo ? 0.0 : INFINITY;
  return (*hi - *lo) / std::abs(mean);
}

}  // namespace heatlab
