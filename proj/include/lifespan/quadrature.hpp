#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace lifespan {

/// Composite trapezoid rule with n >= 1 intervals on [lo, hi].
template <class F>
double trapezoid(F&& fn, double lo, double hi, std::size_t n) {
  if (n == 0) throw std::invalid_argument("trapezoid: need at least one interval");
  if (hi == lo) return 0.0;
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = 0.5 * (fn(lo) + fn(hi));
  for (std::size_t k = 1; k < n; ++k) acc += fn(lo + h * static_cast<double>(k));
  return acc * h;
}

/// Trapezoid rule over uniformly spaced samples.
double trapezoid_samples(std::span<const double> values, double h) noexcept;

/// Trapezoid rule over samples at arbitrary increasing abscissae.
double trapezoid_samples(std::span<const double> x, std::span<const double> values);

/// Least-squares line y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double pearson_r = 0.0;
};

/// Requires at least two points with distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace lifespan
