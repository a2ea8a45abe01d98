#include "lifespan/config.hpp"
#include "lifespan/functionals.hpp"
#include "lifespan/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lifespan;
namespace fs = std::filesystem;

namespace {

LabConfig cfg_of(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ScanTable synthetic(double p, double a, Regime regime, int n) {
  ScanTable t;
  t.spec.p = p;
  t.spec.a = a;
  for (int i = 0; i < n; ++i) {
    ScanRow r;
    r.eps = 0.5 / std::pow(1.5, i);
    switch (regime) {
      case Regime::power: r.t_star = 3.0 * std::pow(r.eps, -(p - 1.0) / (1.0 - a)); break;
      case Regime::exp: r.t_star = std::exp(0.7 * std::pow(r.eps, -(p - 1.0))); break;
      case Regime::global: r.t_star = INFINITY; break;
    }
    r.status = std::isinf(r.t_star) ? RunStatus::survived : RunStatus::blew_up;
    r.t_lo = std::isinf(r.t_star) ? 10.0 : 0.9 * r.t_star;
    r.t_hi = std::isinf(r.t_star) ? INFINITY : 1.1 * r.t_star;
    t.rows.push_back(r);
  }
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ProblemSpec scan_spec() {
  ProblemSpec s;
  s.p = 2.0;
  s.a = 0.0;
  s.R = 1.0;
  s.preset = Preset::bump_both;
  return s;
}

std::vector<double> grid5(double top) {
  std::vector<double> g;
  for (int i = 0; i < 5; ++i) g.push_back(top / std::pow(1.25, i));
  return g;
}

LifespanOptions cheap_opts() {
  LifespanOptions o;
  o.t_max = 200.0;
  o.refinement_levels = 2;
  return o;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults and values") {
  const LabConfig d = cfg_of("");
  CHECK(d.problem.p == 2.0);
  CHECK(d.regime == "power");
  CHECK(d.workers == 1);
  CHECK(d.effective_R0() == doctest::Approx(default_R0(d.problem.R)));

  const LabConfig c = cfg_of(
      "[problem]\np = 3\na = 0.5\npreset = thm2\n[solver]\ndelta = 0.01\nthresholds = 10, 100, 1000\n"
      "parallel = false\n[scan]\neps_grid = 0.4,0.2\nregime = exp\n[output]\ndir = out\nformats = csv\n");
  CHECK(c.problem.p == 3.0);
  CHECK(c.problem.a == 0.5);
  CHECK(c.problem.preset == Preset::thm2);
  CHECK(c.thresholds == std::vector<double>{10, 100, 1000});
  CHECK_FALSE(c.parallel);
  CHECK(c.eps_grid.size() == 2);
  CHECK(c.out_dir == "out");
  CHECK(c.csv);
  CHECK_FALSE(c.svg);
  CHECK(c.lifespan_options().thresholds == c.thresholds);
  CHECK(c.evolve_options().delta == 0.01);
}

TEST_CASE("config rejects unknown and malformed input") {
  CHECK_THROWS_AS(cfg_of("[problem]\nq = 2\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("[physics]\np = 2\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("p = 2\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("[problem]\np = two\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("[solver]\nrefinement_levels = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("[solver]\nparallel = maybe\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("[scan]\nregime = linear\n"), ConfigError);
  CHECK_THROWS_AS(cfg_of("[output]\nformats = png\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/lab.ini"), ConfigError);
}

TEST_CASE("worker override from the environment") {
  LabConfig c = cfg_of("[scan]\nworkers = 3\n");
  ::unsetenv("LIFESPAN_LAB_WORKERS");
  CHECK(effective_workers(c) == 3);
  ::setenv("LIFESPAN_LAB_WORKERS", "2", 1);
  CHECK(effective_workers(c) == 2);
  ::setenv("LIFESPAN_LAB_WORKERS", "zero", 1);
  CHECK_THROWS_AS(effective_workers(c), ConfigError);
  ::unsetenv("LIFESPAN_LAB_WORKERS");
}

TEST_CASE("eps grid checks") {
  CHECK_NOTHROW(check_eps_grid(grid5(0.4)));
  CHECK_NOTHROW(check_eps_grid({0.1, 0.2, 0.4, 0.8, 1.6}));
  CHECK_THROWS_AS(check_eps_grid({0.4, 0.2, 0.1, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(check_eps_grid({1.0, 0.9, 0.81, 0.729, 0.6561}), std::invalid_argument);
  CHECK_THROWS_AS(check_eps_grid({0.8, 0.4, 0.2, 0.1, 0.04}), std::invalid_argument);
}

TEST_CASE("fingerprint and merge") {
  const ProblemSpec s = scan_spec();
  const LifespanOptions o;
  const auto f = scan_fingerprint(s, 0.02, o);
  ProblemSpec s2 = s;
  s2.eps = 0.77;
  CHECK(scan_fingerprint(s2, 0.02, o) == f);
  CHECK(scan_fingerprint(s, 0.01, o) != f);
  s2.a = 0.1;
  CHECK(scan_fingerprint(s2, 0.02, o) != f);

  ScanTable a = synthetic(2.0, 0.0, Regime::power, 3), b = a;
  a.fingerprint = b.fingerprint = f;
  CHECK_THROWS_AS(a.merge(b), std::invalid_argument);
  for (auto& r : b.rows) r.eps *= 0.1;
  a.merge(b);
  CHECK(a.rows.size() == 6);
  for (std::size_t i = 1; i < a.rows.size(); ++i) CHECK(a.rows[i].eps < a.rows[i - 1].eps);
  ScanTable c = b;
  c.fingerprint = f + 1;
  CHECK_THROWS_AS(a.merge(c), std::invalid_argument);
}

TEST_CASE("fits on synthetic tables") {
  for (double a : {0.0, 0.5}) {
    const FitReport r = fit_exponent(synthetic(2.0, a, Regime::power, 8), Regime::power);
    CHECK(r.slope == doctest::Approx(-1.0 / (1.0 - a)).epsilon(1e-12));
    CHECK(r.stderr_slope <= 1e-10);
    CHECK(r.pass);
    CHECK(r.rows_used == 8);
  }
  const FitReport e = fit_exponent(synthetic(2.0, 1.0, Regime::exp, 6), Regime::exp);
  CHECK(e.slope == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(e.pass);
  const FitReport g = fit_exponent(synthetic(2.0, 2.0, Regime::global, 6), Regime::global);
  CHECK(g.pass);
  CHECK_FALSE(fit_exponent(synthetic(2.0, 0.0, Regime::power, 6), Regime::global).pass);
  CHECK_THROWS_AS(fit_exponent(synthetic(2.0, 0.0, Regime::power, 4), Regime::power), InsufficientRows);
  CHECK_THROWS_AS(fit_exponent(synthetic(2.0, 0.0, Regime::global, 6), Regime::power), InsufficientRows);
  CHECK(parse_regime("exp") == Regime::exp);
  CHECK_THROWS_AS(parse_regime("log"), std::invalid_argument);
}

TEST_CASE("emit writes deterministic files") {
  const fs::path dir = fs::temp_directory_path() / "lifespan_harness_emit";
  fs::remove_all(dir);
  const ScanTable t = synthetic(2.0, 0.0, Regime::power, 6);
  const FitReport f = fit_exponent(t, Regime::power);
  emit(t, &f, dir / "one", {});
  emit(t, &f, dir / "two", {});
  CHECK(slurp(dir / "one" / "scan.csv") == slurp(dir / "two" / "scan.csv"));
  CHECK(slurp(dir / "one" / "scan.svg") == slurp(dir / "two" / "scan.svg"));
  CHECK(slurp(dir / "one" / "scan.svg").find("class=\"fit\"") != std::string::npos);

  ScanTable single = t;
  single.rows.resize(1);
  emit(single, nullptr, dir / "single", {});
  const std::string csv = slurp(dir / "single" / "scan.csv");
  CHECK(csv.rfind("eps,delta_finest,t_star,t_lo,t_hi,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(slurp(dir / "single" / "scan.svg").find("class=\"fit\"") == std::string::npos);

  const auto only_csv = emit(t, nullptr, dir / "csv", {true, false});
  CHECK(only_csv.size() == 1);
  CHECK_FALSE(fs::exists(dir / "csv" / "scan.svg"));

  CHECK_THROWS_AS(emit(ScanTable{}, nullptr, dir / "empty", {}), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("zero data scan survives everywhere") {
  ProblemSpec s = scan_spec();
  s.preset = Preset::zero;
  LifespanOptions o = cheap_opts();
  o.t_max = 5.0;
  const ScanTable t = lifespan_scan(s, grid5(0.4), 0.1, o, 2);
  CHECK(t.blew_up_count() == 0);
  for (const auto& r : t.rows) {
    CHECK(r.status == RunStatus::survived);
    CHECK(std::isinf(r.t_star));
  }
  CHECK(fit_exponent(t, Regime::global).pass);
}

TEST_CASE("small scan: order, stability and threshold robustness") {
  const ProblemSpec s = scan_spec();
  const LifespanOptions o = cheap_opts();
  const ScanTable serial = lifespan_scan(s, grid5(0.5), 0.05, o, 1);
  const ScanTable pooled = lifespan_scan(s, grid5(0.5), 0.05, o, 3);
  REQUIRE(serial.blew_up_count() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(serial.rows[i].t_star == pooled.rows[i].t_star);
    if (i) CHECK(serial.rows[i].t_star > serial.rows[i - 1].t_star);
  }
  const FitReport full = fit_exponent(serial, Regime::power, 0.3);

  // drop the largest eps, add one below the grid
  const ScanTable shifted = lifespan_scan(s, grid5(0.4), 0.05, o, 1);
  CHECK(std::abs(fit_exponent(shifted, Regime::power, 0.3).slope - full.slope) < 0.05);

  LifespanOptions big = o;
  for (double& th : big.thresholds) th *= 10.0;
  const ScanTable raised = lifespan_scan(s, grid5(0.5), 0.05, big, 1);
  CHECK(std::abs(fit_exponent(raised, Regime::power, 0.3).slope / full.slope - 1.0) < 0.02);
}

}
