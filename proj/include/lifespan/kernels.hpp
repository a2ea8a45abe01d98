#pragma once

// Grid kernels. Every kernel has a plain serial reference and an OpenMP
// version; the tests hold them equal and bench/ compares their speed.

#include <cstddef>
#include <span>
#include <vector>

namespace lifespan {

/// Node fields of one time level: v = u_t, w = u_x, u.
struct LevelFields {
  std::vector<double> v, w, u;

  LevelFields() = default;
  explicit LevelFields(std::size_t n) : v(n, 0.0), w(n, 0.0), u(n, 0.0) {}
  std::size_t size() const noexcept { return u.size(); }
};

/// Inclusive node index range.
struct NodeRange {
  std::ptrdiff_t lo = 0;
  std::ptrdiff_t hi = -1;
};

struct StepConfig {
  double delta = 0.0;
  double p = 2.0;
  bool nonlinear = true;
};

struct StepStats {
  double max_abs_w = 0.0;
  double max_abs_u = 0.0;
  bool finite = true;
};

/// One unit-CFL level of the characteristic scheme on `range`.
/// Riemann invariants r = v + w and s = v - w are transported exactly along
/// x + t and x - t; the source N = |w|^p * weight is integrated with one
/// Heun predictor-corrector pass, and u with the trapezoid rule in time.
/// `range` must satisfy 1 <= lo and hi <= size - 2. Nodes of `next` outside
/// `range` are left untouched.
StepStats advance_level_serial(const LevelFields& now, LevelFields& next, std::span<const double> weight,
                               NodeRange range, const StepConfig& cfg);
StepStats advance_level_parallel(const LevelFields& now, LevelFields& next, std::span<const double> weight,
                                 NodeRange range, const StepConfig& cfg);

/// Row-major (level, node) samples on the characteristic grid x = x0 + i*delta,
/// t = n*delta.
struct SpaceTimeField {
  std::size_t levels = 0;
  std::size_t nodes = 0;
  double x0 = 0.0;
  double delta = 0.0;
  std::vector<double> data;

  SpaceTimeField() = default;
  SpaceTimeField(std::size_t levels_, std::size_t nodes_, double x0_, double delta_)
      : levels(levels_), nodes(nodes_), x0(x0_), delta(delta_), data(levels_ * nodes_, 0.0) {}

  double& at(std::size_t n, std::size_t i) noexcept { return data[n * nodes + i]; }
  double at(std::size_t n, std::size_t i) const noexcept { return data[n * nodes + i]; }
  std::span<double> row(std::size_t n) noexcept { return {data.data() + n * nodes, nodes}; }
  std::span<const double> row(std::size_t n) const noexcept { return {data.data() + n * nodes, nodes}; }
  double x(std::size_t i) const noexcept { return x0 + delta * static_cast<double>(i); }
  double t(std::size_t n) const noexcept { return delta * static_cast<double>(n); }
};

enum class LineSign { plus, minus };

/// Line Duhamel operator on grid nodes:
///   out(x,t) = 1/2 int_0^t q(x+t-s, s) ds  (+/-)  1/2 int_0^t q(x-t+s, s) ds,
/// q = field * weight, trapezoid rule along the characteristic lines through
/// grid nodes. Samples beyond the array are taken as zero.
/// The serial version sums each line directly; the parallel one accumulates
/// along characteristics level by level.
void line_operator_serial(const SpaceTimeField& field, std::span<const double> weight, LineSign sign,
                          SpaceTimeField& out);
void line_operator_parallel(const SpaceTimeField& field, std::span<const double> weight, LineSign sign,
                            SpaceTimeField& out);

/// |v|^p with fast paths for p = 2 and p = 3.
double abs_pow(double v, double p) noexcept;

}  // namespace lifespan
