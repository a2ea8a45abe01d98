#include "lifespan/functionals.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace lifespan;

namespace {

ProblemSpec spec_of(Preset preset, double eps) {
  ProblemSpec s;
  s.p = 2.0;
  s.a = 0.0;
  s.eps = eps;
  s.R = 1.0;
  s.preset = preset;
  return s;
}

SolutionRun run_of(const ProblemSpec& s, double t_max, bool nonlinear) {
  EvolveOptions eo;
  eo.delta = 0.01;
  eo.t_max = t_max;
  eo.nonlinear = nonlinear;
  eo.thresholds = {1e300};
  eo.snapshot_stride = 5;
  return evolve(s, eo);
}

}  // namespace

TEST_SUITE("functionals") {

TEST_CASE("constants against quadrature oracles") {
  CHECK(default_R0(1.0) == doctest::Approx(0.75));
  const ConstantSet c = constants(spec_of(Preset::bump_both, 0.1), 0.75);
  // mpmath values of int (1 - x^2)^3 over [R0, R] and [(R + R0)/2, R]
  CHECK(c.Cf == doctest::Approx(0.005704171316964286).epsilon(1e-6));
  CHECK(c.Cg == doctest::Approx(0.000418785640171596).epsilon(1e-6));
  CHECK(c.psi_f == doctest::Approx(1.9324973806214133).epsilon(1e-6));
  CHECK(c.psi_gf == doctest::Approx(0.0).scale(1.0));
  CHECK(c.R1 == doctest::Approx(0.125));
  CHECK(c.D10 == doctest::Approx(0.375));
  CHECK(c.D5 <= c.D6);

  const ConstantSet t = constants(spec_of(Preset::thm2, 0.1), 0.75);
  CHECK(t.M7 == doctest::Approx(0.5 * 1.9324973806214133).epsilon(1e-6));
  CHECK(t.M7 > 0.0);

  const ConstantSet z = constants(spec_of(Preset::zero, 0.1), 0.75);
  CHECK(z.Cf == 0.0);
  CHECK(z.Cg == 0.0);
  CHECK(z.M7 == 0.0);

  CHECK_THROWS_AS(constants(spec_of(Preset::bump_f, 0.1), 0.4), std::invalid_argument);
  CHECK_THROWS_AS(constants(spec_of(Preset::bump_f, 0.1), 1.0), std::invalid_argument);
  ProblemSpec bad = spec_of(Preset::bump_f, 0.1);
  bad.a = 2.5;
  CHECK_THROWS_AS(constants(bad, 0.75), std::invalid_argument);
}

TEST_CASE("lai_tu_C") {
  // a = 0: sup of e (1 - e^{-(1+t)}) is attained at t = 50
  CHECK(lai_tu_C(0.0, 2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  // mpmath, same grid end point
  CHECK(lai_tu_C(0.5, 2.0) == doctest::Approx(2.718148478898273).epsilon(1e-8));
}

TEST_CASE("centered differences") {
  FunctionalSeries s;
  const double h = 0.1;
  for (int k = 0; k <= 20; ++k) {
    s.times.push_back(h * k);
    s.values.push_back(std::pow(h * k, 3));
  }
  s.differentiate();
  CHECK(std::isnan(s.d1.front()));
  CHECK(std::isnan(s.d2.back()));
  for (int k = 1; k < 20; ++k) {
    const double t = h * k;
    CHECK(s.d1[k] == doctest::Approx(3 * t * t + h * h).epsilon(1e-10));
    CHECK(s.d2[k] == doctest::Approx(6 * t).epsilon(1e-10));
  }
}

TEST_CASE("Gt2 right side for constant G") {
  FunctionalSeries G;
  for (int k = 0; k <= 400; ++k) {
    G.times.push_back(0.01 * k);
    G.values.push_back(1.0);
  }
  const auto r = Gt2_rhs(G, 2.0, 2.0, 0.0);
  const double t = 4.0;
  CHECK(r.back() == doctest::Approx(2.0 * (t / 2 - (1 - std::exp(-2 * t)) / 4)).epsilon(1e-4));
  G.times[0] = 0.5;
  CHECK_THROWS_AS(Gt2_rhs(G, 2.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("moments at t = 0 and the exact floor") {
  const ProblemSpec f = spec_of(Preset::bump_f, 0.1);
  const SolutionRun run = run_of(f, 1.0, true);
  const MomentSeries m = exp_moments(run);
  CHECK(m.G.values[0] == doctest::Approx(0.1 * 1.9324973806214133).epsilon(1e-4));
  CHECK(m.F.values[0] == m.G.values[0]);

  const ProblemSpec t = spec_of(Preset::thm2, 0.1);
  const MomentSeries mt = exp_moments(run_of(t, 1.0, true));
  CHECK(mt.G.values[0] == doctest::Approx(0.0).scale(1.0));
  const ConstantSet c = constants(t, 0.75);
  const auto fl = G_floor_exact(mt.G, c, 0.1);
  CHECK(fl[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(fl.back() < c.M7 * 0.1);
}

TEST_CASE("F equation holds up to differencing error") {
  const SolutionRun run = run_of(spec_of(Preset::bump_both, 0.3), 3.0, true);
  const MomentSeries m = exp_moments(run);
  const auto r = F_equation_residuals(run, m);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    scale = std::max(scale, std::abs(m.F.values[k]));
    if (!std::isnan(r[k])) worst = std::max(worst, std::abs(r[k]));
  }
  CHECK(worst <= 1e-3 * scale);
  CHECK(calibrate_tol_fd(run_of(spec_of(Preset::bump_both, 0.3), 3.0, false)) > 0.0);
}

TEST_CASE("lower bound checker") {
  const std::vector<double> t{0, 1, 2, 3}, lhs{1, 2, 3, 4}, rhs{0.5, 2.5, 1, 1};
  const Verdict v = check_lower_bound("x", t, lhs, rhs, 0.0, 3.0);
  CHECK_FALSE(v.pass);
  CHECK(v.worst_margin == doctest::Approx(-0.5));
  CHECK(v.worst_t == 1.0);
  CHECK(check_lower_bound("x", t, lhs, rhs, 0.0, 3.0, 0.6).pass);
  CHECK(check_lower_bound("x", t, lhs, rhs, 2.0, 3.0).pass);
  CHECK_FALSE(check_lower_bound("x", t, lhs, rhs, 5.0, 6.0).pass);
  CHECK(check_sy(1.0, 0.75, 50.0).pass);
}

TEST_CASE("study on a blow-up run with bump_f data") {
  StudyOptions o;
  o.delta = 0.02;
  const FunctionalStudy st = functional_study(spec_of(Preset::bump_f, 0.2), 0.75, o);
  CHECK(std::isfinite(st.t_star));
  CHECK(find_verdict(st.report, "H >= D7 eps t^(2-a/p)").pass);
  CHECK(find_verdict(st.report, "Gt residual >= -tol_fd").pass);
  CHECK_THROWS_AS(find_verdict(st.report, "nope"), std::out_of_range);
  std::ostringstream os;
  write_functionals_csv(st.H, st.moments, st.residual, os);
  CHECK(os.str().rfind("t,H,Hp,Hpp,F,G,residual\n", 0) == 0);
}

}
