#include <cmath>

#include <doctest.h>

#include "models.hpp"
#include "pssmp/error.hpp"
#include "pssmp/expfun.hpp"
#include "pssmp/lamperti.hpp"

using namespace pssmp;

TEST_CASE("segment integrals") {
  CHECK(exp_segment_integral(2.0, 0.0, 0.0, 1.0) == doctest::Approx(2.0));
  CHECK(exp_segment_integral(1.0, 0.0, 1.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK(exp_segment_integral(1.0, 0.0, 2.0, 2.0) == doctest::Approx(std::exp(1.0) - 1.0));
  const double s = exp_segment_inverse_fraction(0.5, 0.0, 1.0, 1.0);
  CHECK(std::expm1(s) / std::expm1(1.0) == doctest::Approx(0.5));
}

TEST_CASE("pure drift: X_t = x - t and T_0 = x") {
  SimConfig c;
  c.dt = 0.05;
  for (double x0 : {0.5, 1.0, 3.0}) {
    const PssmpPath p = sample_pssmp_path(testmodels::pure_drift(), x0, c);
    REQUIRE(p.t0);
    CHECK(std::abs(*p.t0 - x0) < 1e-9);
    for (double u : {0.0, 0.1 * x0, 0.5 * x0, 0.9 * x0}) CHECK(std::abs(p.value_at(u) - (x0 - u)) < 1e-9);
    CHECK(p.value_at(2.0 * x0) == 0.0);
  }
}

TEST_CASE("pure drift with alpha = 2: X_t = (sqrt(x) - t/2)^2") {
  SimConfig c;
  const double x0 = 4.0;
  const PssmpPath p = sample_pssmp_path(testmodels::pure_drift(2.0), x0, c);
  REQUIRE(p.t0);
  CHECK(std::abs(*p.t0 - 4.0) < 1e-9);
  for (double u : {0.5, 1.0, 3.0}) CHECK(p.value_at(u) == doctest::Approx(std::pow(2.0 - 0.5 * u, 2)).epsilon(1e-9));
  CHECK(std::abs(sample_I(testmodels::pure_drift(2.0), c).value - 2.0) < 1e-9);
}

TEST_CASE("T_0 = x^(1/alpha) I pathwise on shared streams") {
  LevyModel m = testmodels::two_sided();
  for (double alpha : {1.0, 0.5}) {
    m = LevyModel(m.drift(), m.gaussian(), m.jumps(), m.killing(), alpha);
    SimConfig c;
    c.seed = 77;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const SimConfig ci = c.child(i);
      const double x = 0.3 + 0.1 * static_cast<double>(i % 20);
      const PssmpPath p = sample_pssmp_path(m, x, ci);
      const FunctionalDraw d = sample_I(m, ci);
      REQUIRE(p.t0);
      CHECK(std::abs(*p.t0 - std::pow(x, 1.0 / alpha) * d.value) <= 1e-12 * std::max(1.0, *p.t0));
    }
  }
}

TEST_CASE("Lamperti map round trip") {
  SimConfig c;
  c.seed = 4;
  const LevyModel m = testmodels::two_sided();
  const LevyPath xi = sample_levy_path(m, c);
  const PssmpPath x = levy_to_pssmp(xi, 2.0, m.alpha());
  const LevyPath back = pssmp_to_levy(x);
  REQUIRE(back.times.size() == xi.times.size());
  for (std::size_t i = 0; i < xi.times.size(); ++i) {
    CHECK(back.times[i] == doctest::Approx(xi.times[i]).epsilon(1e-9));
    CHECK(back.values[i] == doctest::Approx(xi.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("scaling of a single path") {
  SimConfig c;
  c.seed = 12;
  const LevyModel m = testmodels::brownian();
  const LevyPath xi = sample_levy_path(m, c);
  const PssmpPath a = levy_to_pssmp(xi, 1.0, 1.0);
  const PssmpPath b = levy_to_pssmp(xi, 3.0, 1.0);
  for (double u : {0.1, 0.4, 1.0}) {
    if (u * 3.0 < *b.t0) CHECK(b.value_at(3.0 * u) == doctest::Approx(3.0 * a.value_at(u)).epsilon(1e-10));
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(require_hits_zero(LevyModel(1.0, 0.0, {}, 0.0, 1.0)), Error);
  SimConfig c;
  CHECK_THROWS_AS(sample_pssmp_path(testmodels::brownian(), 0.0, c), Error);
  SimConfig short_run;
  short_run.horizon = 0.5;
  const PssmpPath p = sample_pssmp_path(LevyModel(-0.01, 0.0, {}, 0.0, 1.0), 1.0, short_run);
  CHECK(p.truncated);
  CHECK_THROWS_AS(p.hitting_time(), Error);
  CHECK_THROWS_AS(p.value_at(1e6), Error);
}
