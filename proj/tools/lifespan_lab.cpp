// lifespan_lab: command line front end. Exit codes: 0 all checks pass,
// 1 a check failed, 2 usage or config error, 3 numerical failure.

#include "lifespan/config.hpp"
#include "lifespan/functionals.hpp"
#include "lifespan/harness.hpp"
#include "lifespan/io.hpp"
#include "lifespan/odelab.hpp"
#include "lifespan/picard.hpp"
#include "lifespan/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace lifespan;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
};

LabConfig load(const Common& c) {
  LabConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

fs::path out_dir(const LabConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

template <class Fn>
void save(const fs::path& path, Fn&& writer) {
  std::ostringstream os;
  writer(os);
  write_text_file(path, os.str());
  std::printf("wrote %s\n", path.string().c_str());
}

int run_solve(const LabConfig& cfg, std::uint64_t seed) {
  EvolveOptions eo = cfg.evolve_options();
  if (cfg.verify_points > 0) eo.snapshot_stride = 1;
  const SolutionRun run = evolve(cfg.problem, eo);
  const fs::path dir = out_dir(cfg);
  save(dir / "history.csv", [&](std::ostream& os) { write_history_csv(run, os); });
  if (eo.snapshot_stride > 0) {
    std::ofstream bin(dir / "field_ux.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write field dump");
    write_field_dump(run, bin, "ux");
  }
  std::printf("status %s, t_end %.6g\n", std::string(to_string(run.status)).c_str(), run.t_end);
  for (std::size_t k = 0; k < run.thresholds.size(); ++k)
    std::printf("  crossing of %.6g at t = %s\n", run.thresholds[k], format_real(run.crossings[k]).c_str());
  if (run.status == RunStatus::numerical_failure) return kNumerical;
  if (cfg.verify_points > 0) {
    if (run.status != RunStatus::survived) {
      std::printf("representation check skipped: run did not survive\n");
      return kCheckFailed;
    }
    const RepresentationCheck rc = representation_check(run, cfg.verify_points, seed);
    std::printf("%s representation: worst error %.3g at (x=%.4g, t=%.4g), bound %.3g, %d points\n",
                rc.pass ? "PASS" : "FAIL", rc.worst_error, rc.worst_x, rc.worst_t, rc.bound, rc.points);
    if (!rc.pass) return kCheckFailed;
  }
  return kPass;
}

int run_lifespan(const LabConfig& cfg) {
  const LifespanEstimate est = estimate_lifespan(cfg.problem, cfg.delta, cfg.lifespan_options());
  ScanTable table;
  table.spec = cfg.problem;
  table.fingerprint = scan_fingerprint(cfg.problem, cfg.delta, cfg.lifespan_options());
  table.rows.push_back({cfg.problem.eps, est.delta_finest, est.t_star, est.t_lo, est.t_hi,
                        est.survived ? RunStatus::survived : RunStatus::blew_up});
  const fs::path dir = out_dir(cfg);
  save(dir / "lifespan.csv", [&](std::ostream& os) { write_scan_csv(table, os); });
  if (est.survived) {
    std::printf("survived to t_max = %.6g\n", est.t_lo);
  } else {
    std::printf("t* = %.8g in [%.8g, %.8g], finest delta %.6g\n", est.t_star, est.t_lo, est.t_hi, est.delta_finest);
    for (std::size_t k = 0; k < est.level_t_star.size(); ++k)
      std::printf("  level %zu: t* = %.8g\n", k, est.level_t_star[k]);
    if (std::isfinite(est.refinement_ratio)) std::printf("  refinement ratio %.4g\n", est.refinement_ratio);
  }
  return kPass;
}

int run_scan(const LabConfig& cfg) {
  if (cfg.eps_grid.empty()) throw ConfigError("[scan] eps_grid is required for scan");
  const ScanTable table =
      lifespan_scan(cfg.problem, cfg.eps_grid, cfg.delta, cfg.lifespan_options(), effective_workers(cfg));
  const Regime regime = parse_regime(cfg.regime);
  FitReport fit;
  bool have_fit = true;
  try {
    fit = fit_exponent(table, regime, cfg.fit_tolerance);
  } catch (const InsufficientRows& e) {
    std::printf("no fit: %s\n", e.what());
    have_fit = false;
  }
  const auto files = emit(table, have_fit ? &fit : nullptr, out_dir(cfg), {cfg.csv, cfg.svg});
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
  for (const auto& r : table.rows)
    std::printf("  eps %-10.6g %-9s t* %s\n", r.eps, std::string(to_string(r.status)).c_str(),
                format_real(r.t_star).c_str());
  if (!have_fit) return kCheckFailed;
  if (regime == Regime::global)
    std::printf("%s global: %zu of %zu rows survived\n", fit.pass ? "PASS" : "FAIL",
                table.rows.size() - table.blew_up_count(), table.rows.size());
  else
    std::printf("%s %s fit: slope %.5f +- %.2g, predicted %s, r = %.5f, %zu rows\n", fit.pass ? "PASS" : "FAIL",
                std::string(to_string(regime)).c_str(), fit.slope, fit.stderr_slope,
                format_real(fit.predicted_slope).c_str(), fit.pearson_r, fit.rows_used);
  return fit.pass ? kPass : kCheckFailed;
}

int run_picard(const LabConfig& cfg) {
  const PicardAgreement ag =
      picard_vs_evolve(cfg.problem, cfg.picard_T, cfg.delta, cfg.picard_jmax, cfg.picard_tol, cfg.parallel);
  save(out_dir(cfg) / "picard.csv", [&](std::ostream& os) { write_picard_csv(ag.report, os); });
  const AprioriReport ap =
      apriori_check(ag.report.final_field, cfg.picard_T, cfg.problem.a, cfg.problem.R, cfg.problem.p, cfg.parallel);
  std::printf("iterates %zu, converged %s, diverged %s\n", ag.report.iterate_norms.size(),
              ag.report.converged ? "yes" : "no", ag.report.diverged ? "yes" : "no");
  std::printf("%s contraction ratios below 1\n", ag.ratios_below_one ? "PASS" : "FAIL");
  std::printf("%s |w_picard - w_evolve| = %.3g (bound %.3g)\n", ag.max_diff <= ag.bound ? "PASS" : "FAIL", ag.max_diff,
              ag.bound);
  std::printf("a priori: lhs %.4g, E(T) %.4g, implied C %.4g, domination %s (excess %.3g)\n", ap.measured_lhs,
              ap.rhs_factor, ap.implied_C, ap.domination_holds ? "holds" : "fails", ap.domination_excess);
  return ag.pass && ap.domination_holds ? kPass : kCheckFailed;
}

int run_functionals(const LabConfig& cfg) {
  StudyOptions o;
  o.delta = cfg.delta;
  o.t_max = cfg.t_max;
  o.thresholds = cfg.thresholds;
  o.parallel = cfg.parallel;
  const FunctionalStudy st = functional_study(cfg.problem, cfg.effective_R0(), o);
  const fs::path dir = out_dir(cfg);
  save(dir / "functionals.csv",
       [&](std::ostream& os) { write_functionals_csv(st.H, st.moments, st.residual, os); });
  save(dir / "verdicts.txt", [&](std::ostream& os) { write_verdicts(st.report, os); });
  std::printf("t* %.6g, tol_fd %.3g\n", st.t_star, st.tol_fd);
  write_verdicts(st.report, std::cout);
  return st.report.all_pass() ? kPass : kCheckFailed;
}

int run_odelab(const LabConfig& cfg) {
  std::vector<BoundReport> reports;
  bool ok = true;
  for (double p : {1.5, 2.0, 3.0})
    for (double a : {-1.0, -0.5, 0.0, 0.5})
      for (double c1 : {0.5, 1.0, 2.0})
        for (double c2 : {0.5, 1.0, 2.0})
          for (OdeKind kind : {OdeKind::lem1, OdeKind::lizhou}) {
            const OdeParams q{p, a, c1, c2, kind == OdeKind::lem1 ? cfg.ode_E : 0.0};
            try {
              reports.push_back(dominance_point(kind, q, cfg.ode_step));
              const auto& r = reports.back();
              if (!(r.margin >= 1.0) || !(r.richardson_rel < 0.01)) {
                ok = false;
                std::printf("FAIL %s p=%g a=%g (%g, %g): margin %.4g, richardson %.3g\n", r.lemma.c_str(), p, a, c1,
                            c2, r.margin, r.richardson_rel);
              }
            } catch (const NoBlowup& e) {
              ok = false;
              std::printf("FAIL p=%g a=%g (%g, %g): %s\n", p, a, c1, c2, e.what());
            }
          }
  save(out_dir(cfg) / "odelab.csv", [&](std::ostream& os) { write_bound_csv(reports, os); });
  double worst = INFINITY;
  for (const auto& r : reports) worst = std::min(worst, r.margin);
  std::printf("%s dominance over %zu points, smallest margin %.4g\n", ok ? "PASS" : "FAIL", reports.size(), worst);
  return ok ? kPass : kCheckFailed;
}

int run_bounds(const LabConfig& cfg) {
  const double p = cfg.problem.p, a = cfg.problem.a;
  std::vector<BoundReport> reports;
  if (a < 1.0) reports.push_back(lemma1_bound(cfg.lemma_c1, cfg.lemma_c2, p, a));
  if (a <= 1.0) reports.push_back(lizhou_bound(cfg.lemma_c1, cfg.lemma_c2, p, a));
  Lemma3Params l3;
  l3.p = p;
  l3.A = cfg.lemma_c1;
  l3.B = cfg.lemma_c2;
  l3.y = -p * l3.a - 1.0;
  try {
    reports.push_back(lemma3_bound(l3));
  } catch (const ConstraintError& e) {
    std::printf("lem3 skipped: %s\n", e.what());
  }
  const fs::path dir = out_dir(cfg);
  save(dir / "bounds.csv", [&](std::ostream& os) { write_bound_csv(reports, os); });

  nlohmann::json j;
  j["p"] = p;
  j["a"] = a;
  j["n0"] = compute_n0(p);
  j["l_inf"] = l_infinity(p);
  j["k_inf"] = k_infinity();
  try {
    const ConstantSet c = constants(cfg.problem, cfg.effective_R0());
    j["constants"] = {{"R0", c.R0},     {"R1", c.R1},     {"Cf", c.Cf},   {"Cg", c.Cg},   {"D5", c.D5},
                      {"D6", c.D6},     {"D7", c.D7},     {"D8", c.D8},   {"D9", c.D9},   {"D9_text", c.D9_text},
                      {"D10", c.D10},   {"D11", c.D11},   {"D12", c.D12}, {"M6", c.M6},   {"M7", c.M7},
                      {"psi_f", c.psi_f}, {"psi_gf", c.psi_gf}, {"lai_tu_C", c.lai_tu_C}};
  } catch (const std::invalid_argument& e) {
    j["constants_error"] = e.what();
  }
  save(dir / "constants.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  for (const auto& r : reports)
    std::printf("%-6s constant %.6g, bound %.6g\n", r.lemma.c_str(), r.constant, r.t_bound);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for u_tt - u_xx = |u_x|^p / <x>^a"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "INI file with [problem], [solver], [scan], [output]");
  app.add_option("--out", common.out, "output directory (overrides [output] dir)");
  app.add_option("--seed", common.seed, "seed for randomized test points");

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"solve", "evolve once; writes history.csv"},
      {"lifespan", "lifespan estimate with grid refinement"},
      {"scan", "eps scan, exponent fit, CSV and SVG"},
      {"picard", "Picard iteration against the solver"},
      {"functionals", "functional inequalities on one run"},
      {"odelab", "ODE lemma bounds against integrated blow-up times"},
      {"bounds", "lemma bounds and constants for the configured p, a"},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const LabConfig cfg = load(common);
    if (cmd == "solve") return run_solve(cfg, common.seed);
    if (cmd == "lifespan") return run_lifespan(cfg);
    if (cmd == "scan") return run_scan(cfg);
    if (cmd == "picard") return run_picard(cfg);
    if (cmd == "functionals") return run_functionals(cfg);
    if (cmd == "odelab") return run_odelab(cfg);
    return run_bounds(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
}
