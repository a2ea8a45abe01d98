#include "lifespan/kernels.hpp"
#include "lifespan/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace lifespan;

namespace {

ProblemSpec spec_of(Preset preset, double p, double a, double eps) {
  ProblemSpec s;
  s.p = p;
  s.a = a;
  s.eps = eps;
  s.R = 1.0;
  s.preset = preset;
  return s;
}

double linear_error(double delta, double T) {
  const ProblemSpec s = spec_of(Preset::bump_both, 2.0, 0.0, 0.5);
  EvolveOptions eo;
  eo.delta = delta;
  eo.t_max = T;
  eo.nonlinear = false;
  eo.thresholds = {1e300};
  eo.snapshot_stride = 1000000;
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

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("linear run converges to d'Alembert at second order") {
  const double e1 = linear_error(1.0 / 50.0, 1.0);
  const double e2 = linear_error(1.0 / 100.0, 1.0);
  CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("serial and parallel level kernels agree bitwise") {
  const std::size_t n = 801;
  LevelFields now(n), a(n), b(n);
  std::vector<double> wt(n);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    now.v[i] = U(rng);
    now.w[i] = U(rng);
    now.u[i] = U(rng);
    wt[i] = weight(-4.0 + 0.01 * i, 0.7);
  }
  for (double p : {1.5, 2.0, 3.0}) {
    const StepConfig cfg{0.01, p, true};
    const NodeRange r{1, static_cast<std::ptrdiff_t>(n) - 2};
    const StepStats sa = advance_level_serial(now, a, wt, r, cfg);
    const StepStats sb = advance_level_parallel(now, b, wt, r, cfg);
    CHECK(a.v == b.v);
    CHECK(a.w == b.w);
    CHECK(a.u == b.u);
    CHECK(sa.max_abs_w == sb.max_abs_w);
  }
}

TEST_CASE("cone locality holds level by level") {
  const ProblemSpec s = spec_of(Preset::bump_both, 2.0, 0.0, 0.3);
  const InitialData d = preset_data(s);
  CharGrid g(s, d, 0.05, 3.0);
  CHECK(g.cone_clean());
  for (int k = 0; k < 60; ++k) {
    g.advance(true, true);
    REQUIRE(g.cone_clean());
  }
  const NodeRange r = g.active_range();
  CHECK(g.x(static_cast<std::size_t>(r.hi)) <= g.t() + s.R + 1e-9);
}

TEST_CASE("area operator closed forms") {
  CHECK(duhamel_area([](double, double) { return 1.0; }, 0.3, 1.5, 0.0, 400) == doctest::Approx(1.125).epsilon(1e-9));
  // 1/2 int_0^t s * 2(t-s) ds = t^3/6 (trapezoid error O(h^2))
  CHECK(duhamel_area([](double, double s) { return s; }, 0.0, 2.0, 0.0, 2000) ==
        doctest::Approx(8.0 / 6.0).epsilon(1e-6));
  // odd field integrates to x t^2 / 2
  CHECK(duhamel_area([](double y, double) { return y; }, 0.7, 1.0, 0.0, 200) == doctest::Approx(0.35).epsilon(1e-9));
  CHECK(duhamel_area([](double, double) { return 1.0; }, 0.0, 0.0, 0.0, 10) == 0.0);
  CHECK_THROWS_AS(duhamel_area([](double, double) { return 1.0; }, 0.0, -1.0, 0.0, 10), std::invalid_argument);

  SpaceTimeField ones(41, 101, -0.5 * 100 * 0.05, 0.05);
  for (double& v : ones.data) v = 1.0;
  const double t = ones.t(40);
  CHECK(duhamel_area(ones, 40, 50, 0.0) == doctest::Approx(0.5 * t * t).epsilon(1e-13));
}

TEST_CASE("crossing extrapolation recovers a synthetic limit") {
  const std::vector<double> th{1e3, 4e3, 1.6e4};
  std::vector<double> cr;
  for (double T : th) cr.push_back(5.0 - 30.0 / T);
  CHECK(extrapolate_crossings(th, cr, 2.0) == doctest::Approx(5.0).epsilon(1e-12));
  std::vector<double> none(3, std::numeric_limits<double>::quiet_NaN());
  CHECK(std::isinf(extrapolate_crossings(th, none, 2.0)));
}

TEST_CASE("zero data returns the survived sentinel") {
  const ProblemSpec s = spec_of(Preset::zero, 2.0, 0.0, 0.1);
  LifespanOptions o;
  o.t_max = 5.0;
  o.refinement_levels = 2;
  const LifespanEstimate e = estimate_lifespan(s, 0.1, o);
  CHECK(e.survived);
  CHECK(std::isinf(e.t_star));
  CHECK(e.t_lo == 5.0);
}

TEST_CASE("bracket ordering and monotonicity in eps") {
  LifespanOptions o;
  o.t_max = 100.0;
  o.refinement_levels = 3;
  const LifespanEstimate big = estimate_lifespan(spec_of(Preset::bump_both, 2.0, 0.0, 0.4), 0.05, o);
  const LifespanEstimate small = estimate_lifespan(spec_of(Preset::bump_both, 2.0, 0.0, 0.2), 0.05, o);
  REQUIRE_FALSE(big.survived);
  REQUIRE_FALSE(small.survived);
  CHECK(big.t_lo <= big.t_star);
  CHECK(big.t_star <= big.t_hi);
  CHECK(small.t_star > big.t_star);
  // crossing times increase with the threshold
  for (const auto& cr : small.level_crossings) {
    CHECK(cr[0] < cr[1]);
    CHECK(cr[1] < cr[2]);
  }
}

TEST_CASE("threshold preconditions") {
  LifespanOptions o;
  o.thresholds = {1e3, 1e3, 1e4};
  CHECK_THROWS_AS(estimate_lifespan(spec_of(Preset::bump_both, 2.0, 0.0, 0.2), 0.1, o), std::invalid_argument);
  o.thresholds = {1e3, 1e4};
  CHECK_THROWS_AS(estimate_lifespan(spec_of(Preset::bump_both, 2.0, 0.0, 0.2), 0.1, o), std::invalid_argument);
}

TEST_CASE("field dump round trip and snapshot access") {
  EvolveOptions eo;
  eo.delta = 0.125;
  eo.t_max = 1.0;
  eo.snapshot_stride = 2;
  const SolutionRun run = evolve(spec_of(Preset::bump_both, 2.0, 0.0, 0.2), eo);
  std::stringstream ss;
  write_field_dump(run, ss, "ux");
  const FieldDump d = read_field_dump(ss);
  CHECK(d.levels == static_cast<std::int64_t>(run.snapshots.size()));
  CHECK(d.nodes == static_cast<std::int64_t>(run.node_count));
  CHECK(d.delta == 0.125);
  const FieldSnapshot& s = run.snapshot_at_level(4);
  CHECK(d.values[2 * run.node_count + s.first_node + 3] == s.ux[3]);
  CHECK_THROWS_AS(run.snapshot_at_level(3), std::out_of_range);
  std::ostringstream h;
  write_history_csv(run, h);
  CHECK(h.str().rfind("t,max_ux,max_u\n", 0) == 0);
}

TEST_CASE("representation check on a short run") {
  EvolveOptions eo;
  eo.delta = 0.02;
  eo.t_max = 0.6;
  eo.snapshot_stride = 1;
  const SolutionRun run = evolve(spec_of(Preset::bump_both, 2.0, 0.0, 0.1), eo);
  const RepresentationCheck rc = representation_check(run, 20, 11);
  CHECK(rc.pass);
  CHECK(rc.worst_error <= rc.bound);
}

}
