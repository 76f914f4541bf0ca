#include <cmath>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "models.hpp"
#include "pssmp/error.hpp"
#include "pssmp/path_sim.hpp"
#include "pssmp/stats.hpp"
#include "pssmp/verify.hpp"

using namespace pssmp;

TEST_CASE("streams are reproducible and distinct") {
  Rng a(5, 9), b(5, 9), c(5, 10), d(6, 9);
  const std::uint64_t x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
  CHECK(mix_keys(1, 2) != mix_keys(2, 1));
  SimConfig s;
  s.seed = 3;
  CHECK(s.child(1).stream_id != s.child(2).stream_id);
  CHECK(s.child(1).child(2).stream_id != s.child(2).child(1).stream_id);
}

TEST_CASE("uniform, exponential and gamma draws have the right means") {
  Rng r(1, 0);
  MeanAccumulator u, e, g;
  for (int i = 0; i < 200000; ++i) {
    u.add(r.uniform());
    e.add(r.exponential());
    g.add(r.gamma(0.4));
  }
  CHECK(std::abs(u.mean() - 0.5) < 4 * u.std_err());
  CHECK(std::abs(e.mean() - 1.0) < 4 * e.std_err());
  CHECK(std::abs(g.mean() - 0.4) < 4 * g.std_err());
}

TEST_CASE("pure drift paths are exact") {
  SimConfig c;
  c.horizon = 3.0;
  c.dt = 0.1;
  const LevyPath p = sample_levy_path(testmodels::pure_drift(), c);
  REQUIRE(p.size() > 2);
  CHECK_FALSE(p.zeta);
  CHECK(p.truncated);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.values[i] == doctest::Approx(-p.times[i]).epsilon(1e-14));
  CHECK(p.times.back() == doctest::Approx(3.0));
}

TEST_CASE("same stream gives the same path") {
  SimConfig c;
  c.seed = 42;
  c.horizon = 20.0;
  const LevyModel m = testmodels::two_sided();
  const LevyPath a = sample_levy_path(m, c);
  const LevyPath b = sample_levy_path(m, c);
  CHECK(a.values == b.values);
  CHECK(a.times == b.times);
  const LevyPath other = sample_levy_path(m, c.child(1));
  CHECK(other.values != a.values);
}

TEST_CASE("killing time is exponential and ends the path") {
  const LevyModel m(0.0, 1.0, {}, 0.5, 1.0);
  SimConfig c;
  c.horizon = 1000.0;
  MeanAccumulator z;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const LevyPath p = sample_levy_path(m, c.child(i));
    REQUIRE(p.zeta);
    CHECK(p.times.back() == *p.zeta);
    z.add(*p.zeta);
  }
  CHECK(std::abs(z.mean() - 2.0) < 4 * z.std_err());
}

TEST_CASE("gaussian increments with drift and killing") {
  const LevyModel m(0.3, 0.5, {}, 0.2, 1.0);
  SimConfig c;
  c.seed = 8;
  c.dt = 0.05;
  const std::size_t n = 20000;
  const auto draws = sample_increment_batch(m, 2.0, n, c);
  std::vector<double> alive;
  std::size_t killed = 0;
  for (const auto& d : draws) {
    if (d.killed) ++killed;
    else alive.push_back(d.value);
  }
  const double pk = 1.0 - std::exp(-0.4);
  CHECK(std::abs(static_cast<double>(killed) / n - pk) < 4 * std::sqrt(pk * (1 - pk) / n));
  const KsReport ks = ks_one_sample(alive, [](double x) {
    return 0.5 * std::erfc(-(x - 0.6) / std::sqrt(2.0 * 1.0));
  });
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("compound Poisson increments") {
  const LevyModel m(0.0, 0.0, {CompoundPoisson{2.0, ExponentialJumps{3.0, +1}}}, 0.0, 1.0);
  SimConfig c;
  c.seed = 2;
  const auto draws = sample_increment_batch(m, 1.5, 20000, c);
  MeanAccumulator acc;
  std::size_t zeros = 0;
  for (const auto& d : draws) {
    acc.add(d.value);
    if (d.value == 0.0) ++zeros;
  }
  CHECK(std::abs(acc.mean() - 1.0) < 4 * acc.std_err());
  CHECK(acc.variance() == doctest::Approx(2.0 * 1.5 * 2.0 / 9.0).epsilon(0.05));
  const double p0 = std::exp(-3.0);
  CHECK(std::abs(zeros / 20000.0 - p0) < 4 * std::sqrt(p0 * (1 - p0) / 20000.0));
}

TEST_CASE("jump paths are piecewise constant without drift or diffusion") {
  const LevyModel m(0.0, 0.0, {CompoundPoisson{1.0, PointMassJumps{0.5}}}, 0.0, 1.0);
  SimConfig c;
  c.horizon = 30.0;
  const LevyPath p = sample_levy_path(m, c);
  for (std::size_t i = 1; i < p.size(); ++i) {
    CHECK(p.left_values[i] == p.values[i - 1]);
    const double jump = p.values[i] - p.left_values[i];
    CHECK((jump == 0.0 || std::abs(jump - 0.5) < 1e-14));
  }
}

TEST_CASE("invalid simulation configs") {
  SimConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  SimConfig d;
  d.horizon = 1.0;
  CHECK_THROWS_AS(sample_increment_batch(testmodels::brownian(), 2.0, 10, d), Error);
}

TEST_CASE("JSON-lines dump") {
  SimConfig c;
  c.horizon = 1.0;
  c.dt = 0.25;
  std::ostringstream os;
  write_jsonl(os, sample_levy_path(testmodels::pure_drift(), c));
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j["t"].size() == 5);
  CHECK(j["x"][4].get<double>() == doctest::Approx(-1.0));
  CHECK(j["zeta"].is_null());
}
