#include "lifespan/functionals.hpp"

#include "lifespan/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace lifespan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kQuadNodes = 10000;

}  // namespace

double default_R0(double R) {
  const double r0 = 0.5 * (R + 0.5);
  return std::clamp(r0, std::nextafter(0.5, R), std::nextafter(R, 0.5));
}

double lai_tu_C(double a, double p) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({a, p}); it != cache.end()) return it->second;
  }
  const double k = a / (p - 1.0);
  double best = 0.0;
  for (int step = 0; step <= 5000; ++step) {
    const double t = 0.01 * step;
    auto fn = [&](double x) { return std::exp(x - t) * std::pow(1.0 + x, k); };
    const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, 0.0, 1.0 + t, 10, 1e-12);
    best = std::max(best, val / std::pow(1.0 + t, k));
  }
  std::lock_guard lock(mu);
  cache[{a, p}] = best;
  return best;
}

ConstantSet constants(const ProblemSpec& spec, double R0) {
  spec.validate();
  const double R = spec.R;
  const double p = spec.p;
  const double a = spec.a;
  if (!(R0 > 0.5 && R0 < R)) throw std::invalid_argument("constants: R0 must satisfy 1/2 < R0 < R");
  if (!(a < p)) throw std::invalid_argument("constants: need a < p");
  const InitialData data = preset_data(spec);

  ConstantSet c;
  c.R0 = R0;
  c.R1 = 0.5 * (R - R0);
  c.Cf = trapezoid([&](double y) { return data.f(y); }, R0, R, kQuadNodes);
  c.Cg = trapezoid([&](double y) { return data.g(y); }, 0.5 * (R + R0), R, kQuadNodes);
  c.psi_f = trapezoid([&](double x) { return hyperbolic_pair(x).psi * data.df(x); }, -R, R, kQuadNodes);
  c.psi_gf = trapezoid([&](double x) { return hyperbolic_pair(x).psi * (data.dg(x) - data.df(x)); }, -R, R,
                       kQuadNodes);

  const double q = a / p;
  const double w5 = std::pow(2.0 * (R + 1.0), -q);
  c.D5 = std::min(w5, 1.0);
  c.D6 = std::max(w5, 1.0);
  c.D8 = std::min(std::pow(2.0 * (R + 1.0), -a), 1.0);
  const double shape = (1.0 - std::pow(0.5, 1.0 - q)) * (1.0 - std::pow(0.5, 2.0 - q)) / (2.0 * (1.0 - q) * (2.0 - q));
  c.D7 = c.Cf * c.D5 * shape;
  const double holder = std::pow(c.D6, -p) * std::pow(c.R1, -2.0 * (p - 1.0));
  c.D9_text = 0.5 * c.D5 * c.D7 * holder;
  c.D9 = 0.5 * c.D5 * c.D8 * holder;
  c.D10 = R0 / (2.0 * R);
  c.D11 = c.D10 * std::pow(4.0, -p) * std::pow(c.R1, -2.0 * (p - 1.0));
  c.D12 = shape * c.Cg * c.D5 * c.R1;
  c.lai_tu_C = lai_tu_C(a, p);
  c.M6 = std::pow(4.0 * c.lai_tu_C, -(p - 1.0)) * std::pow(2.0, -a);
  c.M7 = 0.5 * c.psi_gf + c.psi_f;
  return c;
}

void FunctionalSeries::differentiate() {
  const std::size_t n = times.size();
  d1.assign(n, kNaN);
  d2.assign(n, kNaN);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h0 = times[k] - times[k - 1];
    const double h1 = times[k + 1] - times[k];
    const double f0 = values[k - 1], f1 = values[k], f2 = values[k + 1];
    const double den = h0 * h1 * (h0 + h1);
    d1[k] = (h0 * h0 * f2 - h1 * h1 * f0 + (h1 * h1 - h0 * h0) * f1) / den;
    d2[k] = 2.0 * (h0 * f2 - (h0 + h1) * f1 + h1 * f0) / den;
  }
}

namespace {

double snapshot_value(const SolutionRun& run, const std::vector<double>& vals, std::size_t first, double x) {
  const double pos = (x - run.x0) / run.delta;
  const double fl = std::floor(pos);
  const double frac = pos - fl;
  auto at = [&](double idx) {
    if (idx < static_cast<double>(first)) return 0.0;
    const auto k = static_cast<std::size_t>(idx) - first;
    return k < vals.size() ? vals[k] : 0.0;
  };
  if (frac == 0.0) return at(fl);
  return (1.0 - frac) * at(fl) + frac * at(fl + 1.0);
}

// int_lo^hi u(x) w(x) dx with u the linear interpolant through grid nodes.
template <class W>
double strip_integral(const SolutionRun& run, const FieldSnapshot& snap, double lo, double hi, W&& wfun) {
  std::vector<double> xs, ys;
  xs.push_back(lo);
  ys.push_back(snapshot_value(run, snap.u, snap.first_node, lo) * wfun(lo));
  const double first = std::floor((lo - run.x0) / run.delta) + 1.0;
  for (double idx = first;; idx += 1.0) {
    const double x = run.x0 + run.delta * idx;
    if (x >= hi) break;
    if (x <= lo) continue;
    xs.push_back(x);
    ys.push_back(snapshot_value(run, snap.u, snap.first_node, x) * wfun(x));
  }
  xs.push_back(hi);
  ys.push_back(snapshot_value(run, snap.u, snap.first_node, hi) * wfun(hi));
  return trapezoid_samples(xs, ys);
}

}  // namespace

FunctionalSeries strip_functional(const SolutionRun& run, double R0, StripWeight w, double s0) {
  if (run.snapshots.size() < 3) throw std::invalid_argument("strip_functional: need at least three snapshots");
  const double R = run.spec.R;
  const double q = run.spec.a / run.spec.p;
  const std::size_t K = run.snapshots.size();

  std::vector<double> ts(K), S(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& snap = run.snapshots[k];
    const double s = snap.t;
    ts[k] = s;
    switch (w) {
      case StripWeight::bracket:
        S[k] = strip_integral(run, snap, s + R0, s + R, [&](double x) { return std::pow(bracket(x), -q); });
        break;
      case StripWeight::time: {
        const double ws = s > 0.0 ? std::pow(s, -q) : (q == 0.0 ? 1.0 : kNaN);
        S[k] = ws * strip_integral(run, snap, s + R0, s + R, [](double) { return 1.0; });
        break;
      }
      case StripWeight::inverse_x:
        S[k] = strip_integral(run, snap, s + R0, s + R, [](double x) { return 1.0 / x; });
        break;
      case StripWeight::inverse_bracket:
        S[k] = strip_integral(run, snap, s + R0, s + R, [](double x) { return 1.0 / bracket(x); });
        break;
    }
  }

  FunctionalSeries H;
  H.times = ts;
  H.values.assign(K, 0.0);
  // S at s0 by linear interpolation in time
  const auto up = std::upper_bound(ts.begin(), ts.end(), s0);
  if (up == ts.end()) throw std::out_of_range("strip_functional: s0 beyond the run horizon");
  double S0 = S.front();
  if (up != ts.begin()) {
    const std::size_t j = static_cast<std::size_t>(up - ts.begin());
    const double th = (s0 - ts[j - 1]) / (ts[j] - ts[j - 1]);
    S0 = (1.0 - th) * S[j - 1] + th * S[j];
  }
  const std::size_t first = static_cast<std::size_t>(up - ts.begin());
  std::vector<double> xs, ys;
  for (std::size_t k = first; k < K; ++k) {
    const double t = ts[k];
    xs.assign(1, s0);
    ys.assign(1, (t - s0) * S0);
    for (std::size_t j = first; j <= k; ++j) {
      xs.push_back(ts[j]);
      ys.push_back((t - ts[j]) * S[j]);
    }
    H.values[k] = trapezoid_samples(xs, ys);
  }
  H.differentiate();
  return H;
}

FunctionalSeries strip_H(const SolutionRun& run, double R0, HVariant variant) {
  if (variant == HVariant::critical) {
    if (run.spec.a != 1.0) throw std::invalid_argument("strip_H: the critical variant requires a = 1");
    return strip_functional(run, R0, StripWeight::inverse_x, 0.0);
  }
  return strip_functional(run, R0, StripWeight::bracket, 1.0);
}

MomentSeries exp_moments(const SolutionRun& run) {
  MomentSeries m;
  const std::size_t K = run.snapshots.size();
  m.F.times.resize(K);
  m.G.times.resize(K);
  m.F.values.resize(K);
  m.G.values.resize(K);
  std::vector<double> row;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& snap = run.snapshots[k];
    const double t = snap.t;
    row.resize(snap.ux.size());
    for (std::size_t i = 0; i < snap.ux.size(); ++i) {
      const double x = run.node_x(snap.first_node + i);
      row[i] = (-std::exp(x - t) + std::exp(-x - t)) * snap.ux[i];
    }
    const double G = trapezoid_samples(row, run.delta);
    m.G.times[k] = m.F.times[k] = t;
    m.G.values[k] = G;
    m.F.values[k] = std::exp(t) * G;
  }
  m.F.differentiate();
  m.G.differentiate();
  return m;
}

std::vector<double> inequality_residuals(const MomentSeries& m, const ConstantSet& c, double p, double a) {
  const auto& G = m.G;
  if (G.times.size() < 3) throw std::invalid_argument("inequality_residuals: need at least three samples");
  std::vector<double> r(G.times.size(), kNaN);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (std::isnan(G.d2[k])) continue;
    r[k] = G.d2[k] + 2.0 * G.d1[k] - c.M6 * std::pow(std::abs(G.values[k]), p) * std::pow(1.0 + G.times[k], -a);
  }
  return r;
}

std::vector<double> F_equation_residuals(const SolutionRun& run, const MomentSeries& m) {
  const auto& F = m.F;
  std::vector<double> r(F.times.size(), kNaN);
  std::vector<double> row;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (std::isnan(F.d2[k])) continue;
    const auto& snap = run.snapshots[k];
    row.resize(snap.ux.size());
    for (std::size_t i = 0; i < snap.ux.size(); ++i) {
      const double x = run.node_x(snap.first_node + i);
      row[i] = abs_pow(snap.ux[i], run.spec.p) * weight(x, run.spec.a) * hyperbolic_pair(x).phi;
    }
    r[k] = F.d2[k] - F.values[k] - trapezoid_samples(row, run.delta);
  }
  return r;
}

double calibrate_tol_fd(const SolutionRun& linear_run, double safety) {
  const MomentSeries m = exp_moments(linear_run);
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < m.G.times.size(); ++k) {
    scale = std::max(scale, std::abs(m.G.values[k]));
    if (std::isnan(m.G.d2[k])) continue;
    worst = std::max(worst, std::abs(m.G.d2[k] + 2.0 * m.G.d1[k]));
  }
  return safety * std::max(worst, 1e-14 * scale);
}

std::vector<double> Gt2_rhs(const FunctionalSeries& G, double M6, double p, double a) {
  const std::size_t K = G.times.size();
  std::vector<double> out(K, kNaN);
  if (K == 0 || G.times.front() != 0.0) throw std::invalid_argument("Gt2_rhs: series must start at t = 0");
  // inner(s) = e^{-2s} int_0^s e^{2r} q(r) dr, advanced with rescaling to stay finite
  auto q = [&](std::size_t k) { return std::pow(std::abs(G.values[k]), p) * std::pow(1.0 + G.times[k], -a); };
  double inner = 0.0;
  double outer = 0.0;
  out[0] = 0.0;
  for (std::size_t k = 1; k < K; ++k) {
    const double h = G.times[k] - G.times[k - 1];
    const double decay = std::exp(-2.0 * h);
    const double prev_inner = inner;
    inner = decay * inner + 0.5 * h * (decay * q(k - 1) + q(k));
    outer += 0.5 * h * (prev_inner + inner);
    out[k] = M6 * outer;
  }
  return out;
}

std::vector<double> G_floor_exact(const FunctionalSeries& G, const ConstantSet& c, double eps) {
  std::vector<double> out(G.times.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = eps * c.psi_f + 0.5 * eps * c.psi_gf * (1.0 - std::exp(-2.0 * G.times[k]));
  return out;
}

Verdict check_lower_bound(std::string name, const std::vector<double>& times, const std::vector<double>& lhs,
                          const std::vector<double>& rhs, double t_lo, double t_hi, double tol) {
  Verdict v;
  v.name = std::move(name);
  v.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (t < t_lo || t > t_hi) continue;
    if (!std::isfinite(lhs[k]) || !std::isfinite(rhs[k])) continue;
    ++v.samples;
    const double margin = lhs[k] - rhs[k];
    if (margin < v.worst_margin) {
      v.worst_margin = margin;
      v.worst_t = t;
    }
  }
  v.pass = v.samples > 0 && v.worst_margin >= -tol;
  char buf[160];
  std::snprintf(buf, sizeof buf, "window [%.4g, %.4g], tol %.3g", t_lo, t_hi, tol);
  v.detail = buf;
  if (v.samples == 0) v.detail += ", no samples in window";
  return v;
}

Verdict check_sy(double R, double R0, double s_max) {
  const double D10 = R0 / (2.0 * R);
  std::vector<double> ts, lhs, rhs;
  for (int i = 0; i <= 400; ++i) {
    const double s = s_max * i / 400.0;
    for (int j = 0; j <= 50; ++j) {
      const double y = s + R0 + (R - R0) * j / 50.0;
      ts.push_back(s);
      lhs.push_back(1.0 / bracket(y));
      rhs.push_back(D10 / (s + R0));
    }
  }
  return check_lower_bound("sy", ts, lhs, rhs, 0.0, s_max);
}

bool FunctionalReport::all_pass() const noexcept {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void write_verdicts(const FunctionalReport& report, std::ostream& os) {
  char buf[256];
  for (const auto& v : report.verdicts) {
    std::snprintf(buf, sizeof buf, "%s %-10s worst_margin=%.6g at t=%.6g samples=%d (%s)\n", v.pass ? "PASS" : "FAIL",
                  v.name.c_str(), v.worst_margin, v.worst_t, v.samples, v.detail.c_str());
    os << buf;
  }
}

void write_functionals_csv(const FunctionalSeries& H, const MomentSeries& m, const std::vector<double>& residual,
                           std::ostream& os) {
  os << "t,H,Hp,Hpp,F,G,residual\n";
  const std::size_t n = m.G.times.size();
  if (H.times.size() != n || residual.size() != n)
    throw std::invalid_argument("write_functionals_csv: series lengths differ");
  char buf[256];
  auto num = [&](double v) {
    if (std::isnan(v)) return std::string();
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < n; ++k) {
    os << num(m.G.times[k]) << ',' << num(H.values[k]) << ',' << num(H.d1[k]) << ',' << num(H.d2[k]) << ','
       << num(m.F.values[k]) << ',' << num(m.G.values[k]) << ',' << num(residual[k]) << '\n';
  }
}

namespace {

// Drops a trailing snapshot that breaks the uniform stride.
void trim_to_stride(SolutionRun& run) {
  auto& s = run.snapshots;
  if (s.size() < 3) return;
  const auto stride = s[1].level - s[0].level;
  if (s.back().level - s[s.size() - 2].level != stride) s.pop_back();
}

}  // namespace

FunctionalStudy functional_study(const ProblemSpec& spec, double R0, const StudyOptions& opts) {
  FunctionalStudy st;
  st.constants = constants(spec, R0);
  const ConstantSet& c = st.constants;

  EvolveOptions eo;
  eo.delta = opts.delta;
  eo.t_max = opts.t_max;
  eo.thresholds = opts.thresholds;
  eo.parallel = opts.parallel;
  const SolutionRun probe = evolve(spec, eo);
  if (probe.status == RunStatus::numerical_failure) throw NumericalFailure("functional_study: probe run failed");
  const auto levels = static_cast<std::int64_t>(std::llround(probe.t_end / opts.delta));
  eo.snapshot_stride = static_cast<int>(std::max<std::int64_t>(1, levels / std::max(1, opts.snapshots)));
  eo.t_max = probe.t_end;

  SolutionRun run = evolve(spec, eo);
  trim_to_stride(run);
  st.t_star = run.status == RunStatus::blew_up ? extrapolate_crossings(run.thresholds, run.crossings, spec.p)
                                               : run.t_end;
  EvolveOptions lo = eo;
  lo.nonlinear = false;
  SolutionRun linear = evolve(spec, lo);
  trim_to_stride(linear);
  st.tol_fd = calibrate_tol_fd(linear, opts.safety);

  st.moments = exp_moments(run);
  st.residual = inequality_residuals(st.moments, c, spec.p, spec.a);
  const double t_hi = run.status == RunStatus::blew_up ? 0.9 * st.t_star : run.snapshots.back().t;
  const auto& ts = st.moments.G.times;
  auto& v = st.report.verdicts;

  if (spec.a < 1.0 && t_hi > 1.0) {
    st.H = strip_H(run, R0, HVariant::subcritical);
    std::vector<double> rhs(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) rhs[k] = c.D7 * spec.eps * std::pow(ts[k], 2.0 - spec.a / spec.p);
    v.push_back(check_lower_bound("H >= D7 eps t^(2-a/p)", ts, st.H.values, rhs, 4.0, t_hi));
  } else {
    st.H.times = ts;
    st.H.values = st.H.d1 = st.H.d2 = std::vector<double>(ts.size(), std::numeric_limits<double>::quiet_NaN());
  }

  const std::vector<double> floor_m7(ts.size(), c.M7 * spec.eps);
  v.push_back(check_lower_bound("G >= M7 eps", ts, st.moments.G.values, floor_m7, 0.0, t_hi));
  const std::vector<double> floor_exact = G_floor_exact(st.moments.G, c, spec.eps);
  v.push_back(check_lower_bound("G >= exact floor", ts, st.moments.G.values, floor_exact, 0.0, t_hi, st.tol_fd));
  const std::vector<double> zero(ts.size(), 0.0);
  v.push_back(check_lower_bound("Gt residual >= -tol_fd", ts, st.residual, zero, 0.0, t_hi, st.tol_fd));
  Verdict sy = check_sy(spec.R, R0, t_hi);
  sy.name = "1/<y> >= D10/(s+R0)";
  v.push_back(sy);
  return st;
}

const Verdict& find_verdict(const FunctionalReport& report, const std::string& name) {
  for (const auto& v : report.verdicts)
    if (v.name == name) return v;
  throw std::out_of_range("no verdict named '" + name + "'");
}

}  // namespace lifespan
