#include "lifespan/solver.hpp"

#include "lifespan/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace lifespan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Nodes within this many indices of the center may be nonzero at level 0.
std::int64_t initial_reach(double R, double delta) {
  return static_cast<std::int64_t>(std::floor(R / delta * (1.0 + 1e-12)));
}

}  // namespace

CharGrid::CharGrid(const ProblemSpec& spec, const InitialData& data, double delta, double t_max)
    : delta_(delta), R_(spec.R), p_(spec.p) {
  if (!(delta > 0.0)) throw std::invalid_argument("CharGrid: delta must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("CharGrid: t_max must be positive");
  const auto half = static_cast<std::size_t>(std::ceil((t_max + spec.R) / delta)) + 2;
  center_ = half;
  x0_ = -delta * static_cast<double>(half);
  const std::size_t n = 2 * half + 1;
  now_ = LevelFields(n);
  next_ = LevelFields(n);
  weight_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x(i);
    weight_[i] = weight(xi, spec.a);
    now_.v[i] = spec.eps * data.g(xi);
    now_.w[i] = spec.eps * data.df(xi);
    now_.u[i] = spec.eps * data.f(xi);
  }
}

NodeRange CharGrid::active_range() const noexcept {
  const auto reach = initial_reach(R_, delta_) + level_;
  const auto c = static_cast<std::ptrdiff_t>(center_);
  const auto last = static_cast<std::ptrdiff_t>(size()) - 1;
  return {std::max<std::ptrdiff_t>(0, c - reach), std::min<std::ptrdiff_t>(last, c + reach)};
}

StepStats CharGrid::advance(bool nonlinear, bool parallel) {
  const auto reach = initial_reach(R_, delta_) + level_ + 1;
  const auto c = static_cast<std::ptrdiff_t>(center_);
  const auto last = static_cast<std::ptrdiff_t>(size()) - 2;
  const NodeRange range{std::max<std::ptrdiff_t>(1, c - reach), std::min<std::ptrdiff_t>(last, c + reach)};
  const StepConfig cfg{delta_, p_, nonlinear};
  const StepStats st = parallel ? advance_level_parallel(now_, next_, weight_, range, cfg)
                                : advance_level_serial(now_, next_, weight_, range, cfg);
  std::swap(now_, next_);
  ++level_;
  return st;
}

bool CharGrid::cone_clean() const noexcept {
  const double edge = t() + R_;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(x(i)) <= edge) continue;
    if (now_.v[i] != 0.0 || now_.w[i] != 0.0 || now_.u[i] != 0.0) return false;
  }
  return true;
}

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::survived: return "survived";
    case RunStatus::blew_up: return "blew_up";
    case RunStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

const FieldSnapshot& SolutionRun::snapshot_at_level(std::int64_t level) const {
  const auto it = std::lower_bound(snapshots.begin(), snapshots.end(), level,
                                   [](const FieldSnapshot& s, std::int64_t l) { return s.level < l; });
  if (it == snapshots.end() || it->level != level) throw std::out_of_range("no snapshot at requested level");
  return *it;
}

namespace {

FieldSnapshot take_snapshot(const CharGrid& grid) {
  const NodeRange r = grid.active_range();
  FieldSnapshot s;
  s.level = grid.level();
  s.t = grid.t();
  s.first_node = static_cast<std::size_t>(r.lo);
  s.u.assign(grid.u().begin() + r.lo, grid.u().begin() + r.hi + 1);
  s.ux.assign(grid.w().begin() + r.lo, grid.w().begin() + r.hi + 1);
  s.ut.assign(grid.v().begin() + r.lo, grid.v().begin() + r.hi + 1);
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

SolutionRun evolve(const ProblemSpec& spec, const EvolveOptions& opts) {
  spec.validate();
  if (!(opts.delta > 0.0)) throw std::invalid_argument("evolve: delta must be positive");
  if (!(opts.t_max > 0.0)) throw std::invalid_argument("evolve: t_max must be positive");
  if (opts.thresholds.empty()) throw std::invalid_argument("evolve: need at least one threshold");
  if (!std::is_sorted(opts.thresholds.begin(), opts.thresholds.end()))
    throw std::invalid_argument("evolve: thresholds must be increasing");

  const InitialData data = preset_data(spec);
  CharGrid grid(spec, data, opts.delta, opts.t_max);

  SolutionRun run;
  run.spec = spec;
  run.delta = opts.delta;
  run.x0 = grid.x0();
  run.node_count = grid.size();
  run.thresholds = opts.thresholds;
  run.crossings.assign(opts.thresholds.size(), kNaN);

  const auto levels = static_cast<std::int64_t>(std::ceil(opts.t_max / opts.delta - 1e-9));
  run.history.reserve(static_cast<std::size_t>(levels) + 1);
  run.history.push_back({0.0, max_abs(grid.w()), max_abs(grid.u())});
  if (opts.snapshot_stride > 0) run.snapshots.push_back(take_snapshot(grid));

  const double decay = spec.p - 1.0;
  std::size_t next_threshold = 0;
  while (next_threshold < opts.thresholds.size() && run.history.back().max_ux >= opts.thresholds[next_threshold])
    run.crossings[next_threshold++] = 0.0;

  run.status = RunStatus::survived;
  for (std::int64_t n = 0; n < levels && next_threshold < opts.thresholds.size(); ++n) {
    const double prev_max = run.history.back().max_ux;
    const StepStats st = grid.advance(opts.nonlinear, opts.parallel);
    const double t = grid.t();
    run.history.push_back({t, st.max_abs_w, st.max_abs_u});
    if (!st.finite) {
      run.status = RunStatus::numerical_failure;
      break;
    }
    if (opts.snapshot_stride > 0 && grid.level() % opts.snapshot_stride == 0) run.snapshots.push_back(take_snapshot(grid));
    if (grid.level() % 100 == 0 && !grid.cone_clean())
      throw std::logic_error("evolve: nonzero field outside the light cone");

    // crossing times, interpolated linearly in max^{-(p-1)}
    while (next_threshold < opts.thresholds.size() && st.max_abs_w >= opts.thresholds[next_threshold]) {
      const double theta = opts.thresholds[next_threshold];
      const double y0 = std::pow(prev_max, -decay);
      const double y1 = std::pow(st.max_abs_w, -decay);
      const double yt = std::pow(theta, -decay);
      double frac = (y0 > y1 && std::isfinite(y0)) ? (y0 - yt) / (y0 - y1) : 1.0;
      frac = std::clamp(frac, 0.0, 1.0);
      run.crossings[next_threshold++] = t - opts.delta * (1.0 - frac);
    }
    if (next_threshold == opts.thresholds.size()) run.status = RunStatus::blew_up;
  }
  run.t_end = grid.t();
  if (opts.snapshot_stride > 0 && run.snapshots.back().level != grid.level())
    run.snapshots.push_back(take_snapshot(grid));
  return run;
}

SolutionRun evolve(const ProblemSpec& spec, double delta, double t_max, double blow_threshold) {
  EvolveOptions opts;
  opts.delta = delta;
  opts.t_max = t_max;
  opts.thresholds = {blow_threshold};
  return evolve(spec, opts);
}

double duhamel_area(const std::function<double(double, double)>& field, double x, double t, double a, int quad_n) {
  if (t < 0.0) throw std::invalid_argument("duhamel_area: t must be nonnegative");
  if (quad_n < 2) throw std::invalid_argument("duhamel_area: quad_n must be at least 2");
  if (t == 0.0) return 0.0;
  const double hs = t / quad_n;
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (int k = 0; k <= quad_n; ++k) {
    const double s = hs * k;
    const double half = t - s;
    double row = 0.0;
    if (half > 0.0) {
      const double lo = x - half;
      const double hy = 2.0 * half / quad_n;
      row = 0.5 * (field(lo, s) * weight(lo, a) + field(x + half, s) * weight(x + half, a));
      for (int j = 1; j < quad_n; ++j) {
        const double y = lo + hy * j;
        row += field(y, s) * weight(y, a);
      }
      row *= hy;
    }
    acc += (k == 0 || k == quad_n ? 0.5 : 1.0) * row;
  }
  return 0.5 * hs * acc;
}

double duhamel_area(const SpaceTimeField& field, std::size_t level, std::size_t node, double a) {
  if (level >= field.levels || node >= field.nodes) throw std::out_of_range("duhamel_area: node outside field");
  const double h = field.delta;
  const auto nodes = static_cast<std::ptrdiff_t>(field.nodes);
  const auto i = static_cast<std::ptrdiff_t>(node);
  double acc = 0.0;
  for (std::size_t m = 0; m < level; ++m) {
    const auto half = static_cast<std::ptrdiff_t>(level - m);
    double row = 0.0;
    for (std::ptrdiff_t j = i - half; j <= i + half; ++j) {
      if (j < 0 || j >= nodes) continue;
      const double wgt = (j == i - half || j == i + half) ? 0.5 : 1.0;
      row += wgt * field.at(m, static_cast<std::size_t>(j)) * weight(field.x(static_cast<std::size_t>(j)), a);
    }
    acc += (m == 0 ? 0.5 : 1.0) * row * h;
  }
  // the row at m == level has zero width
  return 0.5 * h * acc;
}

double extrapolate_crossings(std::span<const double> thresholds, std::span<const double> crossings, double p) {
  std::vector<double> xs, ts;
  for (std::size_t k = 0; k < thresholds.size() && k < crossings.size(); ++k) {
    if (!std::isfinite(crossings[k])) continue;
    xs.push_back(std::pow(thresholds[k], -(p - 1.0)));
    ts.push_back(crossings[k]);
  }
  if (ts.empty()) return std::numeric_limits<double>::infinity();
  if (ts.size() == 1) return ts.front();
  return fit_line(xs, ts).intercept;
}

LifespanEstimate estimate_lifespan(const ProblemSpec& spec, double delta0, const LifespanOptions& opts) {
  if (opts.thresholds.size() < 3) throw std::invalid_argument("estimate_lifespan: need at least three thresholds");
  for (std::size_t k = 1; k < opts.thresholds.size(); ++k)
    if (!(opts.thresholds[k] > opts.thresholds[k - 1]))
      throw std::invalid_argument("estimate_lifespan: thresholds must be strictly increasing");
  if (opts.refinement_levels < 1) throw std::invalid_argument("estimate_lifespan: need at least one grid level");

  LifespanEstimate est;
  est.thresholds_used = opts.thresholds;
  bool finest_blew_up = false;
  double delta = delta0;
  for (int k = 0; k < opts.refinement_levels; ++k, delta *= 0.5) {
    EvolveOptions eo;
    eo.delta = delta;
    eo.t_max = opts.t_max;
    eo.thresholds = opts.thresholds;
    eo.parallel = opts.parallel;
    const SolutionRun run = evolve(spec, eo);
    if (run.status == RunStatus::numerical_failure) {
      std::ostringstream msg;
      msg << "numerical failure at eps=" << spec.eps << " delta=" << delta << " t=" << run.t_end;
      throw NumericalFailure(msg.str());
    }
    est.level_crossings.push_back(run.crossings);
    finest_blew_up = run.status == RunStatus::blew_up;
    est.level_t_star.push_back(finest_blew_up ? extrapolate_crossings(opts.thresholds, run.crossings, spec.p)
                                              : std::numeric_limits<double>::infinity());
    est.delta_finest = delta;
  }

  if (!finest_blew_up) {
    est.survived = true;
    est.t_star = std::numeric_limits<double>::infinity();
    est.t_lo = opts.t_max;
    est.t_hi = std::numeric_limits<double>::infinity();
    return est;
  }

  const auto& cross = est.level_crossings.back();
  const double first = *std::min_element(cross.begin(), cross.end());
  const double last = *std::max_element(cross.begin(), cross.end());
  const double spread = last - first;
  est.t_lo = last;
  est.t_star = std::max(est.level_t_star.back(), last);
  est.t_hi = est.t_star + spread;
  const std::size_t L = est.level_t_star.size();
  if (spread > 0.05 * est.t_star) {
    const double grid_gap = L >= 2 ? std::abs(est.level_t_star[L - 1] - est.level_t_star[L - 2]) : 0.0;
    est.t_hi += spread + (std::isfinite(grid_gap) ? grid_gap : 0.0);
  }
  if (L >= 3) {
    const double d1 = std::abs(est.level_t_star[L - 3] - est.level_t_star[L - 2]);
    const double d2 = std::abs(est.level_t_star[L - 2] - est.level_t_star[L - 1]);
    est.refinement_ratio = d1 / d2;
  }
  return est;
}

void write_history_csv(const SolutionRun& run, std::ostream& os) {
  os << "t,max_ux,max_u\n";
  char buf[96];
  for (const auto& h : run.history) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", h.t, h.max_ux, h.max_u);
    os << buf;
  }
}

namespace {

void put_le64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  os.write(b, 8);
}

std::uint64_t get_le64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("field dump: truncated");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

const std::vector<double>& pick(const FieldSnapshot& s, std::string_view field) {
  if (field == "u") return s.u;
  if (field == "ux") return s.ux;
  if (field == "ut") return s.ut;
  throw std::invalid_argument("unknown field '" + std::string(field) + "'");
}

constexpr double kFixedPoint = 4294967296.0;  // 2^32

}  // namespace

void write_field_dump(const SolutionRun& run, std::ostream& os, std::string_view field) {
  put_le64(os, static_cast<std::uint64_t>(run.snapshots.size()));
  put_le64(os, static_cast<std::uint64_t>(run.node_count));
  put_le64(os, static_cast<std::uint64_t>(std::llround(run.delta * kFixedPoint)));
  std::vector<double> row(run.node_count);
  for (const auto& s : run.snapshots) {
    std::fill(row.begin(), row.end(), 0.0);
    const auto& vals = pick(s, field);
    std::copy(vals.begin(), vals.end(), row.begin() + static_cast<std::ptrdiff_t>(s.first_node));
    for (double v : row) put_le64(os, std::bit_cast<std::uint64_t>(v));
  }
}

FieldDump read_field_dump(std::istream& is) {
  FieldDump d;
  d.levels = static_cast<std::int64_t>(get_le64(is));
  d.nodes = static_cast<std::int64_t>(get_le64(is));
  d.delta = static_cast<double>(get_le64(is)) / kFixedPoint;
  d.values.resize(static_cast<std::size_t>(d.levels * d.nodes));
  for (auto& v : d.values) v = std::bit_cast<double>(get_le64(is));
  return d;
}

SpaceTimeField snapshot_field(const SolutionRun& run, std::string_view field) {
  const std::size_t levels = run.snapshots.size();
  SpaceTimeField out(levels, run.node_count, run.x0, run.delta);
  for (std::size_t n = 0; n < levels; ++n) {
    const auto& s = run.snapshots[n];
    if (s.level != static_cast<std::int64_t>(n))
      throw std::invalid_argument("snapshot_field: snapshots must cover every level from 0");
    const auto& vals = pick(s, field);
    std::copy(vals.begin(), vals.end(), out.row(n).begin() + static_cast<std::ptrdiff_t>(s.first_node));
  }
  return out;
}

RepresentationCheck representation_check(const SolutionRun& run, int points, std::uint64_t seed) {
  if (points < 1) throw std::invalid_argument("representation_check: need at least one point");
  const SpaceTimeField ux = snapshot_field(run, "ux");
  const SpaceTimeField u = snapshot_field(run, "u");
  SpaceTimeField src = ux;
  for (double& v : src.data) v = abs_pow(v, run.spec.p);
  const InitialData data = preset_data(run.spec);

  RepresentationCheck rc;
  rc.points = points;
  rc.bound = 10.0 * run.delta * run.delta;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_level(1, ux.levels - 1);
  std::uniform_real_distribution<double> pick_frac(-1.0, 1.0);
  for (int k = 0; k < points; ++k) {
    const std::size_t n = pick_level(rng);
    const double t = ux.t(n);
    const double x = pick_frac(rng) * (t + run.spec.R - run.delta);
    const auto node = static_cast<std::size_t>(std::llround((x - ux.x0) / ux.delta));
    const double xn = ux.x(node);
    const double err =
        std::abs(u.at(n, node) - free_solution(data, run.spec.eps, xn, t).u - duhamel_area(src, n, node, run.spec.a));
    if (err >= rc.worst_error) {
      rc.worst_error = err;
      rc.worst_x = xn;
      rc.worst_t = t;
    }
  }
  rc.pass = rc.worst_error <= rc.bound;
  return rc;
}

}  // namespace lifespan
