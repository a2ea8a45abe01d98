#pragma once

#include "lifespan/kernels.hpp"
#include "lifespan/model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lifespan {

/// Characteristic grid with unit CFL: delta = dx = dt, x_i = x0 + i*delta.
/// The node array spans [-(t_max + R) - 2 delta, (t_max + R) + 2 delta].
class CharGrid {
 public:
  CharGrid(const ProblemSpec& spec, const InitialData& data, double delta, double t_max);

  double delta() const noexcept { return delta_; }
  std::int64_t level() const noexcept { return level_; }
  double t() const noexcept { return delta_ * static_cast<double>(level_); }
  double x0() const noexcept { return x0_; }
  double x(std::size_t i) const noexcept { return x0_ + delta_ * static_cast<double>(i); }
  std::size_t size() const noexcept { return now_.size(); }
  /// Index of the node at x = 0.
  std::size_t center() const noexcept { return center_; }

  const std::vector<double>& v() const noexcept { return now_.v; }
  const std::vector<double>& w() const noexcept { return now_.w; }
  const std::vector<double>& u() const noexcept { return now_.u; }
  const std::vector<double>& weights() const noexcept { return weight_; }

  /// Nodes that may be nonzero at the current level.
  NodeRange active_range() const noexcept;

  StepStats advance(bool nonlinear, bool parallel);

  /// True when every node with |x| > t + R holds exact zeros.
  bool cone_clean() const noexcept;

 private:
  double delta_;
  double R_;
  double p_;
  double x0_;
  std::size_t center_;
  std::int64_t level_ = 0;
  LevelFields now_, next_;
  std::vector<double> weight_;
};

enum class RunStatus { survived, blew_up, numerical_failure };

std::string_view to_string(RunStatus s) noexcept;

struct LevelStats {
  double t;
  double max_ux;
  double max_u;
};

/// Field values over the active node range of one level.
struct FieldSnapshot {
  std::int64_t level = 0;
  double t = 0.0;
  std::size_t first_node = 0;
  std::vector<double> u, ux, ut;
};

struct SolutionRun {
  ProblemSpec spec;
  double delta = 0.0;
  double x0 = 0.0;
  std::size_t node_count = 0;
  std::vector<LevelStats> history;
  std::vector<FieldSnapshot> snapshots;
  RunStatus status = RunStatus::survived;
  /// Last level time reached (t_max when survived).
  double t_end = 0.0;
  /// Crossing time per threshold, NaN when not crossed.
  std::vector<double> thresholds;
  std::vector<double> crossings;

  double node_x(std::size_t i) const noexcept { return x0 + delta * static_cast<double>(i); }
  /// Snapshot at a level; throws std::out_of_range when not stored.
  const FieldSnapshot& snapshot_at_level(std::int64_t level) const;
};

struct EvolveOptions {
  double delta = 1.0 / 200.0;
  double t_max = 1.0;
  /// Crossing times are recorded for each; the run halts at the largest.
  std::vector<double> thresholds{1e3};
  bool nonlinear = true;
  /// Store field snapshots every this many levels (0: none, 1: all).
  int snapshot_stride = 0;
  bool parallel = true;
};

/// Evolves to t_max or until max|u_x| reaches the largest threshold. A
/// non-finite value before that is reported as RunStatus::numerical_failure.
SolutionRun evolve(const ProblemSpec& spec, const EvolveOptions& opts);
SolutionRun evolve(const ProblemSpec& spec, double delta, double t_max, double blow_threshold);

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Area Duhamel operator
///   L_a(v)(x,t) = 1/2 int_0^t ds int_{x-t+s}^{x+t-s} v(y,s) <y>^{-a} dy
/// by composite trapezoid quadrature with quad_n intervals in s and in y.
double duhamel_area(const std::function<double(double, double)>& field, double x, double t, double a,
                    int quad_n);

/// Same operator on grid nodes: the backward triangle from (node, level)
/// is covered exactly by grid nodes, so no interpolation enters.
double duhamel_area(const SpaceTimeField& field, std::size_t level, std::size_t node, double a);

struct LifespanOptions {
  double t_max = 1e3;
  std::vector<double> thresholds{1e3, 4e3, 1.6e4};
  int refinement_levels = 3;
  bool parallel = true;
};

struct LifespanEstimate {
  double t_star = std::numeric_limits<double>::infinity();
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds_used;
  /// |t*(d) - t*(d/2)| / |t*(d/2) - t*(d/4)|; NaN with fewer than three levels.
  double refinement_ratio = std::numeric_limits<double>::quiet_NaN();
  double delta_finest = 0.0;
  bool survived = false;
  /// Extrapolated t* per grid level, coarsest first.
  std::vector<double> level_t_star;
  /// Crossing times per grid level.
  std::vector<std::vector<double>> level_crossings;
};

/// Runs evolve at delta0, delta0/2, ... and extrapolates the threshold
/// crossing times. Throws NumericalFailure if a run breaks down.
LifespanEstimate estimate_lifespan(const ProblemSpec& spec, double delta0, const LifespanOptions& opts);

/// Crossing-time extrapolation for one run: t_Theta = t* - c * Theta^{-(p-1)}.
double extrapolate_crossings(std::span<const double> thresholds, std::span<const double> crossings, double p);

/// CSV `t,max_ux,max_u`.
void write_history_csv(const SolutionRun& run, std::ostream& os);

/// Binary field dump: three little-endian int64 (level count, node count,
/// spacing as fixed point with denominator 2^32) followed by float64 rows,
/// one per snapshot, over the full node array (zeros outside the cone).
/// `field` selects "u", "ux" or "ut".
void write_field_dump(const SolutionRun& run, std::ostream& os, std::string_view field);

struct FieldDump {
  std::int64_t levels = 0;
  std::int64_t nodes = 0;
  double delta = 0.0;
  std::vector<double> values;
};
FieldDump read_field_dump(std::istream& is);

/// Stacks snapshots (which must be taken every level from 0) into a dense
/// (level, node) field.
SpaceTimeField snapshot_field(const SolutionRun& run, std::string_view field);


struct RepresentationCheck {
  int points = 0;
  double worst_error = 0.0;
  double worst_x = 0.0;
  double worst_t = 0.0;
  /// 10 delta^2.
  double bound = 0.0;
  bool pass = false;
};

/// |u - eps u^0 - L_a(|u_x|^p)| at `points` nodes drawn uniformly (seeded)
/// from the cone interior |x| < t + R, 0 < t <= t_end. Needs snapshots at
/// every level.
RepresentationCheck representation_check(const SolutionRun& run, int points, std::uint64_t seed);

}  // namespace lifespan
