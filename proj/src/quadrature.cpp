#include "lifespan/quadrature.hpp"

#include <cmath>

namespace lifespan {

double trapezoid_samples(std::span<const double> values, double h) noexcept {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t k = 1; k + 1 < values.size(); ++k) acc += values[k];
  return acc * h;
}

double trapezoid_samples(std::span<const double> x, std::span<const double> values) {
  if (x.size() != values.size()) throw std::invalid_argument("trapezoid_samples: size mismatch");
  double acc = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) acc += 0.5 * (x[k] - x[k - 1]) * (values[k] + values[k - 1]);
  return acc;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.pearson_r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = y[k] - (fit.intercept + fit.slope * x[k]);
      sse += r * r;
    }
    fit.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace lifespan
