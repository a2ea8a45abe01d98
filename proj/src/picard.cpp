#include "lifespan/picard.hpp"

#include "lifespan/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lifespan {

double duhamel_line(const std::function<double(double, double)>& field, double x, double t, double a,
                    LineSign sign, int quad_n) {
  if (t < 0.0) throw std::invalid_argument("duhamel_line: t must be nonnegative");
  if (quad_n < 1) throw std::invalid_argument("duhamel_line: quad_n must be positive");
  if (t == 0.0) return 0.0;
  const double h = t / quad_n;
  double left = 0.0;
  double right = 0.0;
  for (int k = 0; k <= quad_n; ++k) {
    const double s = h * k;
    const double wgt = (k == 0 || k == quad_n) ? 0.5 : 1.0;
    const double yl = x + t - s;
    const double yr = x - t + s;
    left += wgt * field(yl, s) * weight(yl, a);
    right += wgt * field(yr, s) * weight(yr, a);
  }
  const double sgn = sign == LineSign::plus ? 1.0 : -1.0;
  return 0.5 * h * (left + sgn * right);
}

double apriori_factor(double T, double a, double R) {
  if (T < 0.0) throw std::invalid_argument("apriori_factor: T must be nonnegative");
  if (!(R >= 1.0)) throw std::invalid_argument("apriori_factor: R must be at least 1");
  if (a < 1.0) return std::pow(T + 2.0 * R, 1.0 - a);
  if (a == 1.0) return std::log(T + 2.0 * R);
  return 1.0;
}

SpaceTimeField cone_grid(double T, double R, double delta) {
  if (!(T > 0.0) || !(delta > 0.0)) throw std::invalid_argument("cone_grid: T and delta must be positive");
  const auto half = static_cast<std::size_t>(std::ceil((T + R) / delta)) + 2;
  const auto levels = static_cast<std::size_t>(std::ceil(T / delta - 1e-9)) + 1;
  return SpaceTimeField(levels, 2 * half + 1, -delta * static_cast<double>(half), delta);
}

double sup_norm(const SpaceTimeField& f) noexcept {
  double m = 0.0;
  for (double v : f.data) m = std::max(m, std::abs(v));
  return m;
}

namespace {

std::vector<double> node_weights(const SpaceTimeField& f, double a) {
  std::vector<double> w(f.nodes);
  for (std::size_t i = 0; i < f.nodes; ++i) w[i] = weight(f.x(i), a);
  return w;
}

void line_operator(const SpaceTimeField& field, std::span<const double> weight, LineSign sign, SpaceTimeField& out,
                   bool parallel) {
  if (parallel) line_operator_parallel(field, weight, sign, out);
  else line_operator_serial(field, weight, sign, out);
}

// Integer reach, as in CharGrid, so that rounding at the edge cannot flip the test.
bool cone_clean(const SpaceTimeField& f, double R) {
  const auto center = static_cast<std::ptrdiff_t>(f.nodes / 2);
  const auto base = static_cast<std::ptrdiff_t>(std::floor(R / f.delta * (1.0 + 1e-12)));
  for (std::size_t n = 0; n < f.levels; ++n) {
    const auto reach = base + static_cast<std::ptrdiff_t>(n);
    for (std::size_t i = 0; i < f.nodes; ++i)
      if (std::abs(static_cast<std::ptrdiff_t>(i) - center) > reach && f.at(n, i) != 0.0) return false;
  }
  return true;
}

}  // namespace

PicardReport picard_run(const ProblemSpec& spec, double T, double delta, int j_max, double tol, bool parallel) {
  spec.validate();
  if (j_max < 2) throw std::invalid_argument("picard_run: j_max must be at least 2");
  if (!(tol >= 0.0)) throw std::invalid_argument("picard_run: tol must be nonnegative");
  const InitialData data = preset_data(spec);

  SpaceTimeField base = cone_grid(T, spec.R, delta);
  for (std::size_t n = 0; n < base.levels; ++n)
    for (std::size_t i = 0; i < base.nodes; ++i)
      base.at(n, i) = free_solution(data, spec.eps, base.x(i), base.t(n)).ux;
  const std::vector<double> wt = node_weights(base, spec.a);

  PicardReport rep;
  SpaceTimeField w = base;
  SpaceTimeField q(base.levels, base.nodes, base.x0, base.delta);
  SpaceTimeField lin(base.levels, base.nodes, base.x0, base.delta);
  rep.iterate_norms.push_back(sup_norm(w));

  int rises = 0;
  for (int j = 1; j < j_max; ++j) {
    for (std::size_t k = 0; k < w.data.size(); ++k) q.data[k] = abs_pow(w.data[k], spec.p);
    line_operator(q, wt, LineSign::minus, lin, parallel);
    double diff = 0.0;
    bool finite = true;
    for (std::size_t k = 0; k < w.data.size(); ++k) {
      const double next = base.data[k] + lin.data[k];
      if (!std::isfinite(next)) finite = false;
      diff = std::max(diff, std::abs(next - w.data[k]));
      w.data[k] = next;
    }
    if (!cone_clean(w, spec.R)) throw std::logic_error("picard_run: iterate left the light cone");
    rep.iterate_norms.push_back(sup_norm(w));
    if (!rep.diff_norms.empty()) {
      const double prev = rep.diff_norms.back();
      rep.contraction_ratios.push_back(prev == 0.0 ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                                   : diff / prev);
      rises = diff > prev ? rises + 1 : 0;
    }
    rep.diff_norms.push_back(diff);
    if (!finite || !std::isfinite(diff) || rises >= 3) {
      rep.diverged = true;
      break;
    }
    if (diff <= tol) {
      rep.converged = rep.contraction_ratios.empty() || rep.contraction_ratios.back() < 1.0;
      break;
    }
  }
  rep.final_field = std::move(w);
  return rep;
}

void write_picard_csv(const PicardReport& report, std::ostream& os) {
  os << "j,norm,diff,ratio\n";
  char buf[128];
  for (std::size_t j = 0; j < report.iterate_norms.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,", j + 1, report.iterate_norms[j]);
    os << buf;
    if (j < report.diff_norms.size()) {
      std::snprintf(buf, sizeof buf, "%.12g", report.diff_norms[j]);
      os << buf;
    }
    os << ',';
    if (j >= 1 && j - 1 < report.contraction_ratios.size()) {
      std::snprintf(buf, sizeof buf, "%.12g", report.contraction_ratios[j - 1]);
      os << buf;
    }
    os << '\n';
  }
}

double domination_excess(const SpaceTimeField& v, double a, bool parallel) {
  const std::vector<double> wt = node_weights(v, a);
  SpaceTimeField abs_v = v;
  for (double& x : abs_v.data) x = std::abs(x);
  SpaceTimeField conj, plus;
  line_operator(v, wt, LineSign::minus, conj, parallel);
  line_operator(abs_v, wt, LineSign::plus, plus, parallel);
  double excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.data.size(); ++k) excess = std::max(excess, std::abs(conj.data[k]) - plus.data[k]);
  return excess;
}

AprioriReport apriori_check(const SpaceTimeField& w, double T, double a, double R, double p, bool parallel) {
  AprioriReport rep;
  rep.T = T;
  rep.a = a;
  SpaceTimeField q = w;
  for (double& x : q.data) x = abs_pow(x, p);
  const std::vector<double> wt = node_weights(q, a);
  SpaceTimeField conj;
  line_operator(q, wt, LineSign::minus, conj, parallel);
  rep.measured_lhs = sup_norm(conj);
  rep.rhs_factor = std::pow(sup_norm(w), p) * apriori_factor(T, a, R);
  rep.implied_C = rep.rhs_factor == 0.0 ? 0.0 : rep.measured_lhs / rep.rhs_factor;
  rep.domination_excess = domination_excess(q, a, parallel);
  // roundoff allowance relative to the operator scale
  rep.domination_holds = rep.domination_excess <= 1e-12 * std::max(1.0, rep.measured_lhs);
  return rep;
}

PicardAgreement picard_vs_evolve(const ProblemSpec& spec, double T, double delta, int j_max, double tol,
                                 bool parallel) {
  PicardAgreement ag;
  ag.report = picard_run(spec, T, delta, j_max, tol, parallel);
  EvolveOptions eo;
  eo.delta = delta;
  eo.t_max = T;
  eo.thresholds = {std::numeric_limits<double>::max()};
  eo.snapshot_stride = 1;
  eo.parallel = parallel;
  const SolutionRun run = evolve(spec, eo);
  if (run.status != RunStatus::survived) throw NumericalFailure("picard_vs_evolve: evolve did not survive to T");
  const SpaceTimeField ux = snapshot_field(run, "ux");
  const SpaceTimeField& w = ag.report.final_field;
  if (ux.levels != w.levels || ux.nodes != w.nodes) throw std::logic_error("picard_vs_evolve: grids differ");
  for (std::size_t k = 0; k < w.data.size(); ++k) ag.max_diff = std::max(ag.max_diff, std::abs(w.data[k] - ux.data[k]));
  ag.bound = 10.0 * delta * delta;

  // ratios of diffs already at rounding level carry no information
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * sup_norm(w);
  const auto& d = ag.report.diff_norms;
  const auto& r = ag.report.contraction_ratios;
  ag.ratios_below_one = !r.empty();
  for (std::size_t k = 0; k < r.size(); ++k)
    if (d[k] > floor && !(r[k] < 1.0)) ag.ratios_below_one = false;
  ag.pass = ag.ratios_below_one && ag.report.converged && ag.max_diff <= ag.bound;
  return ag;
}

}  // namespace lifespan
