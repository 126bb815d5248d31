#pragma once

#include <span>

namespace heatlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept. Throws
/// Error(insufficient_data) with fewer than two points or constant x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// (max - min) / |mean| of the values.
double relative_spread(std::span<const double> values);

}  // namespace heatlab
