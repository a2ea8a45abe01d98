#include "lifespan/picard.hpp"
#include "lifespan/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace lifespan;

TEST_SUITE("picard") {

TEST_CASE("line operator closed forms") {
  auto one = [](double, double) { return 1.0; };
  CHECK(duhamel_line(one, 0.4, 1.7, 0.0, LineSign::plus, 10000) == doctest::Approx(1.7).epsilon(1e-9));
  CHECK(duhamel_line(one, 0.4, 1.7, 0.0, LineSign::minus, 10000) == doctest::Approx(0.0).scale(1.0));
  // v = s: 1/2 int_0^t s ds on each line
  auto s_field = [](double, double s) { return s; };
  CHECK(duhamel_line(s_field, 0.0, 2.0, 0.0, LineSign::plus, 1000) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("a priori factor") {
  CHECK(apriori_factor(2.0, 0.0, 1.0) == doctest::Approx(4.0));
  CHECK(apriori_factor(2.0, 0.5, 1.0) == doctest::Approx(2.0));
  CHECK(apriori_factor(2.0, 1.0, 1.0) == doctest::Approx(std::log(4.0)));
  CHECK(apriori_factor(2.0, 2.0, 1.0) == 1.0);
}

TEST_CASE("cone grid shares the solver node layout") {
  ProblemSpec s;
  s.R = 1.0;
  const InitialData d = preset_data(s);
  for (double delta : {0.1, 0.03, 0.01}) {
    const CharGrid g(s, d, delta, 0.5);
    const SpaceTimeField f = cone_grid(0.5, 1.0, delta);
    CHECK(f.nodes == g.size());
    CHECK(f.x0 == g.x0());
  }
}

TEST_CASE("serial and parallel line operators agree") {
  SpaceTimeField f(60, 201, -5.0, 0.05);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& v : f.data) v = U(rng);
  std::vector<double> w(f.nodes);
  for (std::size_t i = 0; i < f.nodes; ++i) w[i] = weight(f.x(i), 0.5);
  for (LineSign sign : {LineSign::plus, LineSign::minus}) {
    SpaceTimeField a(f.levels, f.nodes, f.x0, f.delta), b = a;
    line_operator_serial(f, w, sign, a);
    line_operator_parallel(f, w, sign, b);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) worst = std::max(worst, std::abs(a.data[k] - b.data[k]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("conjugate operator is dominated by the plus operator of |v|") {
  SpaceTimeField f(40, 161, -4.0, 0.05);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& v : f.data) v = U(rng);
  CHECK(domination_excess(f, 0.0) <= 1e-12);
  CHECK(domination_excess(f, 1.5) <= 1e-12);
}

TEST_CASE("zero data: Picard stops at once") {
  ProblemSpec s;
  s.preset = Preset::zero;
  const PicardReport r = picard_run(s, 0.5, 0.05, 10, 1e-14);
  CHECK(r.converged);
  CHECK(sup_norm(r.final_field) == 0.0);
}

TEST_CASE("Picard contracts on a short interval") {
  ProblemSpec s;
  s.eps = 0.1;
  const PicardReport r = picard_run(s, 0.5, 0.02, 40, 1e-12);
  CHECK(r.converged);
  CHECK_FALSE(r.diverged);
  REQUIRE(r.contraction_ratios.size() >= 2);
  CHECK(r.contraction_ratios.front() < 1.0);
  std::ostringstream os;
  write_picard_csv(r, os);
  CHECK(os.str().rfind("j,norm,diff,ratio\n", 0) == 0);

  const AprioriReport ap = apriori_check(r.final_field, 0.5, 0.0, 1.0, 2.0);
  CHECK(ap.domination_holds);
  CHECK(std::isfinite(ap.implied_C));
  CHECK(ap.rhs_factor == doctest::Approx(std::pow(sup_norm(r.final_field), 2.0) * 2.5));
}

TEST_CASE("Picard diverges for large data over a long interval") {
  ProblemSpec s;
  s.eps = 3.0;
  const PicardReport r = picard_run(s, 3.0, 0.05, 40, 1e-12);
  CHECK(r.diverged);
  CHECK_FALSE(r.converged);
}

}
