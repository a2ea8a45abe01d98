#include "lifespan/config.hpp"
#include "lifespan/functionals.hpp"
#include "lifespan/harness.hpp"
#include "lifespan/odelab.hpp"
#include "lifespan/picard.hpp"
#include "lifespan/quadrature.hpp"
#include "lifespan/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

using namespace lifespan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

ProblemSpec spec_of(Preset preset, double p, double a, double eps) {
  ProblemSpec s;
  s.p = p;
  s.a = a;
  s.eps = eps;
  s.R = 1.0;
  s.preset = preset;
  return s;
}

double linear_error(double delta) {
  const ProblemSpec s = spec_of(Preset::bump_both, 2.0, 0.0, 0.5);
  EvolveOptions eo;
  eo.delta = delta;
  eo.t_max = 2.0;
  eo.nonlinear = false;
  eo.thresholds = {1e300};
  eo.snapshot_stride = 1 << 30;
  const SolutionRun run = evolve(s, eo);
  const InitialData d = preset_data(s);
  const FieldSnapshot& snap = run.snapshots.back();
  double err = 0.0;
  for (std::size_t i = 0; i < snap.u.size(); ++i) {
    const FreeWave w = free_solution(d, s.eps, run.node_x(snap.first_node + i), snap.t);
    err = std::max({err, std::abs(snap.u[i] - w.u), std::abs(snap.ux[i] - w.ux), std::abs(snap.ut[i] - w.ut)});
  }
  return err;
}

Outcome scan_criterion(const std::string& file) {
  const LabConfig cfg = load_config(std::string(LIFESPAN_CONFIG_DIR) + "/" + file);
  const ScanTable t =
      lifespan_scan(cfg.problem, cfg.eps_grid, cfg.delta, cfg.lifespan_options(), effective_workers(cfg));
  const FitReport f = fit_exponent(t, parse_regime(cfg.regime), cfg.fit_tolerance);
  return {f.pass, fmt("a=%g slope %.4f +- %.4f, predicted %.4f, tol %.2f, %zu rows, t* %.4g..%.4g", cfg.problem.a,
                      f.slope, f.stderr_slope, f.predicted_slope, f.tolerance, f.rows_used, t.rows.front().t_star,
                      t.rows.back().t_star)};
}

}  // namespace

int main() {
  criterion(1, "linear solver order", [] {
    const double e1 = linear_error(1.0 / 200.0), e2 = linear_error(1.0 / 400.0);
    const double order = std::log2(e1 / e2);
    return Outcome{order >= 1.9, fmt("errors %.3e, %.3e, order %.3f", e1, e2, order)};
  });

  criterion(2, "representation consistency", [] {
    EvolveOptions eo;
    eo.delta = 0.01;
    eo.t_max = 1.0;
    eo.thresholds = {1e300};
    eo.snapshot_stride = 1;
    const SolutionRun run = evolve(spec_of(Preset::bump_both, 2.0, 0.0, 0.1), eo);
    const RepresentationCheck rc = representation_check(run, 20, 2024);
    const bool ok = rc.pass && run.status == RunStatus::survived;
    return Outcome{ok, fmt("worst %.3e at (x=%.3f, t=%.3f), bound %.3e", rc.worst_error, rc.worst_x, rc.worst_t,
                           rc.bound)};
  });

  criterion(3, "Picard-solver agreement", [] {
    const PicardAgreement ag = picard_vs_evolve(spec_of(Preset::bump_both, 2.0, 0.0, 0.1), 0.5, 0.01, 60, 1e-12);
    return Outcome{ag.pass, fmt("diff %.3e, bound %.3e, %zu iterates, ratios<1 %s, converged %s", ag.max_diff,
                                ag.bound, ag.report.iterate_norms.size(), ag.ratios_below_one ? "yes" : "no",
                                ag.report.converged ? "yes" : "no")};
  });

  criterion(4, "subcritical scaling a=0", [] { return scan_criterion("scan_a0.ini"); });
  criterion(4, "subcritical scaling a=0.5", [] { return scan_criterion("scan_a05.ini"); });

  criterion(5, "supercritical survival a=2", [] {
    EvolveOptions eo;
    eo.delta = 1.0 / 32.0;
    eo.t_max = 1000.0;
    eo.thresholds = {1e3};
    const SolutionRun run = evolve(spec_of(Preset::bump_both, 2.0, 2.0, 0.05), eo);
    double at_one = NAN, peak = 0.0;
    for (const auto& h : run.history) {
      if (std::isnan(at_one) && h.t >= 1.0 - 1e-12) at_one = h.max_ux;
      if (h.t >= 1.0 - 1e-12) peak = std::max(peak, h.max_ux);
    }
    const double ratio = peak / at_one;
    const bool ok = run.status == RunStatus::survived && run.t_end >= 1000.0 - 1e-9 && ratio <= 3.0;
    return Outcome{ok, fmt("status %s, t_end %.1f, max|u_x| / value at t=1 = %.4f",
                           std::string(to_string(run.status)).c_str(), run.t_end, ratio)};
  });

  criterion(6, "ODE lemma dominance", [] {
    int points = 0, bad = 0;
    double worst_margin = INFINITY, worst_rich = 0.0;
    for (double p : {1.5, 2.0, 3.0})
      for (double a : {-1.0, -0.5, 0.0, 0.5})
        for (double c1 : {0.5, 1.0, 2.0})
          for (double c2 : {0.5, 1.0, 2.0})
            for (OdeKind kind : {OdeKind::lem1, OdeKind::lizhou}) {
              ++points;
              try {
                const BoundReport r = dominance_point(kind, {p, a, c1, c2, kind == OdeKind::lem1 ? 1.0 : 0.0}, 0.05);
                worst_margin = std::min(worst_margin, r.margin);
                worst_rich = std::max(worst_rich, r.richardson_rel);
                if (!(r.margin >= 1.0) || !(r.richardson_rel < 0.01)) ++bad;
              } catch (const NoBlowup&) {
                ++bad;
              }
            }
    return Outcome{bad == 0, fmt("%d points, %d failing, smallest margin %.4g, worst Richardson %.2e", points, bad,
                                 worst_margin, worst_rich)};
  });

  criterion(7, "damped ODE scaling", [] {
    std::string detail;
    bool ok = true;
    for (double a : {0.0, 0.5, 1.0}) {
      std::vector<double> x, y;
      for (int k = 0; k <= 6; ++k) {
        const double M1 = std::ldexp(1.0, -k);
        const OdeResult r = ode_blowup(OdeKind::lizhou, {2.0, a, M1, a < 1.0 ? 0.125 : 1.0, 0.0}, 0.05, 1e300);
        x.push_back(a < 1.0 ? std::log(M1) : 1.0 / M1);
        y.push_back(std::log(r.t_observed));
      }
      const LineFit f = fit_line(x, y);
      if (a < 1.0) {
        const double predicted = -1.0 / (1.0 - a);
        const bool pass = std::abs(f.slope - predicted) <= 0.1 * std::abs(predicted);
        ok = ok && pass;
        detail += fmt("a=%g slope %.4f vs %.4f; ", a, f.slope, predicted);
      } else {
        const bool pass = f.pearson_r >= 0.98;
        ok = ok && pass;
        detail += fmt("a=1 r %.6f, slope %.4f", f.pearson_r, f.slope);
      }
    }
    return Outcome{ok, detail};
  });

  criterion(8, "sequence identities", [] {
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0})
      for (double a : {0.0, 0.5})
        for (SeqKind k : {SeqKind::lem1_abc, SeqKind::lizhou_mk, SeqKind::lizhou_hjt, SeqKind::lizhou_ql}) {
          const SequenceTable t = seq_eval(k, p, a, 30);
          for (const auto& row : t.rows)
            for (std::size_t c = 0; c < row.closed.size(); ++c) {
              if (std::isnan(row.closed[c])) continue;
              worst = std::max(worst, std::abs(row.recurrence[c] - row.closed[c]) /
                                          std::max(1.0, std::abs(row.closed[c])));
            }
        }
    const double k_err = std::abs(k_infinity() - 2.0);
    bool b_ok = true;
    int n0_max = 0;
    for (double p : {1.5, 2.0, 3.0}) {
      const int n0 = compute_n0(p);
      n0_max = std::max(n0_max, n0);
      for (int n = 1; n <= 60; ++n) b_ok = b_ok && log_b(p, n) >= -std::pow(p, n0) * std::log(2.0);
    }
    const bool ok = worst <= 1e-12 && k_err <= 1e-14 && b_ok;
    return Outcome{ok, fmt("worst rel %.2e, |k_inf - 2| %.1e, b_n bound %s (n0 <= %d)", worst, k_err,
                           b_ok ? "holds" : "violated", n0_max)};
  });

  criterion(9, "functional inequalities", [] {
    const double R0 = default_R0(1.0);
    StudyOptions o;
    o.delta = 0.01;
    const FunctionalStudy fs = functional_study(spec_of(Preset::bump_f, 2.0, 0.0, 0.1), R0, o);
    const Verdict h = find_verdict(fs.report, "H >= D7 eps t^(2-a/p)");
    const FunctionalStudy th = functional_study(spec_of(Preset::thm2, 2.0, 0.0, 0.1), R0, o);
    const Verdict g = find_verdict(th.report, "G >= M7 eps");
    const Verdict ge = find_verdict(th.report, "G >= exact floor");
    const Verdict r = find_verdict(th.report, "Gt residual >= -tol_fd");
    const bool ok = h.pass && g.pass && r.pass;
    return Outcome{ok, fmt("bump_f t* %.4g, H margin %.3e [%s]; thm2 t* %.4g, G-M7 eps margin %.3e at t=%.3g [%s], "
                           "exact floor margin %.3e [%s], Gt residual margin %.3e [%s]",
                           fs.t_star, h.worst_margin, h.pass ? "ok" : "fail", th.t_star, g.worst_margin, g.worst_t,
                           g.pass ? "ok" : "fail", ge.worst_margin, ge.pass ? "ok" : "fail", r.worst_margin,
                           r.pass ? "ok" : "fail")};
  });

  criterion(10, "quadrature closed forms", [] {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 3.0}) {
      const double area = duhamel_area([](double, double) { return 1.0; }, 0.2, t, 0.0, 10000);
      const double line = duhamel_line([](double, double) { return 1.0; }, 0.2, t, 0.0, LineSign::plus, 10000);
      worst = std::max({worst, std::abs(area - 0.5 * t * t), std::abs(line - t)});
    }
    return Outcome{worst <= 1e-6, fmt("worst error %.2e", worst)};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
