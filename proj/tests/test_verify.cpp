#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "models.hpp"
#include "pssmp/error.hpp"
#include "pssmp/stats.hpp"
#include "pssmp/verify.hpp"

using namespace pssmp;

TEST_CASE("Kolmogorov tail against tabulated values") {
  CHECK(kolmogorov_tail(1.0) == doctest::Approx(0.2699996717).epsilon(1e-8));
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(10.0) < 1e-80);
}

TEST_CASE("two-sample KS statistics by hand") {
  std::vector<double> a(20), b(20);
  std::iota(a.begin(), a.end(), 1.0);
  std::iota(b.begin(), b.end(), 11.0);
  CHECK(ks_two_sample(a, b).statistic == doctest::Approx(0.5));
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p_value == doctest::Approx(1.0));
  std::vector<double> far(20);
  std::iota(far.begin(), far.end(), 100.0);
  const KsReport r = ks_two_sample(a, far);
  CHECK(r.statistic == 1.0);
  CHECK(r.p_value < 1e-6);
  CHECK(r.n1 == 20);
  CHECK(r.n2 == 20);
}

TEST_CASE("KS handles ties") {
  std::vector<double> a(40), b(40);
  for (int i = 0; i < 40; ++i) {
    a[i] = i % 4;
    b[i] = (i + 1) % 4;
  }
  CHECK(ks_two_sample(a, b).statistic == 0.0);
  std::vector<double> c(40, 1.0);
  CHECK(ks_two_sample(a, c).statistic == doctest::Approx(0.5));
}

TEST_CASE("KS sample size floor") {
  std::vector<double> small(10, 0.0), big(100, 0.0);
  CHECK_THROWS_AS(ks_two_sample(small, big), Error);
  CHECK_THROWS_AS(ks_one_sample(small, [](double) { return 0.5; }), Error);
}

TEST_CASE("one-sample KS") {
  std::vector<double> xs(20);
  for (int i = 0; i < 20; ++i) xs[i] = (i + 0.5) / 20.0;
  const KsReport r = ks_one_sample(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(r.statistic == doctest::Approx(0.025));
  CHECK(r.p_value > 0.99);
  CHECK(r.n2 == 0);
}

TEST_CASE("KS p-values are close to uniform under the null") {
  std::size_t rejections = 0;
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  for (int run = 0; run < 400; ++run) {
    std::vector<double> a(200), b(300);
    for (auto& x : a) x = nd(gen);
    for (auto& x : b) x = nd(gen);
    if (ks_two_sample(a, b).p_value < 0.05) ++rejections;
  }
  CHECK(rejections >= 8);
  CHECK(rejections <= 36);
}

TEST_CASE("scaling test detects a wrong index") {
  const LevyModel m = testmodels::brownian();
  SimConfig c;
  c.seed = 50;
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0};
  for (const KsReport& r : scaling_test(m, 1.0, 4.0, grid, 2000, c)) CHECK(r.p_value > 1e-3);
  ScalingOptions wrong;
  wrong.rescale_alpha = 1.5;
  double p_min = 1.0;
  for (const KsReport& r : scaling_test(m, 1.0, 4.0, grid, 2000, c, wrong)) p_min = std::min(p_min, r.p_value);
  CHECK(p_min < 0.01 / grid.size());
  CHECK_THROWS_AS(scaling_test(m, 0.0, 2.0, grid, 100, c), Error);
}

TEST_CASE("multi-seed pass rate") {
  const PassRate r = multi_seed_pass_rate(10, 0.05, [](std::size_t k) { return k < 7 ? 0.5 : 0.01; });
  CHECK(r.passes == 7);
  CHECK(r.runs == 10);
  CHECK(r.rate() == doctest::Approx(0.7));
}

TEST_CASE("renewal problem tails") {
  RenewalProblem p;
  p.gamma = 0.75;
  CHECK(p.survival(3.0) == doctest::Approx(std::pow(4.0, -0.75)));
  CHECK(p.mean_residual(3.0) == doctest::Approx((std::pow(4.0, 0.25) - 1.0) / 0.25));
  p.tail = TailKind::TemperedPower;
  CHECK(p.survival(2.0) == doctest::Approx(std::pow((1.0 - std::exp(-2.0)) / 2.0, 0.75)));
  CHECK(p.survival(0.0) == doctest::Approx(1.0));
  p.gamma = 0.4;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("renewal masses against simulated renewal counts") {
  RenewalProblem p;
  p.gamma = 0.75;
  const double t = 5.0, dx = 0.005;
  const std::vector<double> u = renewal_masses(p, t, dx);
  const double grid = std::accumulate(u.begin(), u.end(), 0.0);
  CHECK(u.front() == doctest::Approx(1.0));

  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  MeanAccumulator count;
  for (int run = 0; run < 100000; ++run) {
    double s = 0.0;
    int n = 0;
    while (s <= t) {
      ++n;
      s += std::pow(1.0 - uni(gen), -1.0 / 0.75) - 1.0;
    }
    count.add(n);
  }
  CHECK(std::abs(grid - count.mean()) < 4.0 * count.std_err() + 0.01 * count.mean());
}

TEST_CASE("renewal functional is linear in g") {
  RenewalProblem p;
  p.t_max = 50.0;
  p.dx = 0.02;
  const std::vector<double> ts{20.0, 50.0};
  const RenewalResult whole = renewal_limit(p, StepFunction::indicator(0.0, 2.0), ts);
  const RenewalResult parts = renewal_limit(p, StepFunction{{{0.0, 1.0, 1.0}, {1.0, 2.0, 1.0}}}, ts);
  const RenewalResult scaled = renewal_limit(p, StepFunction{{{0.0, 2.0, 3.0}}}, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(parts.points[i].value == doctest::Approx(whole.points[i].value).epsilon(1e-10));
    CHECK(scaled.points[i].value == doctest::Approx(3.0 * whole.points[i].value).epsilon(1e-10));
  }
  CHECK(whole.points[1].target == doctest::Approx(std::sin(0.75 * M_PI) / M_PI * 2.0));
  CHECK(whole.points[1].erickson_target ==
        doctest::Approx(2.0 / (std::tgamma(0.75) * std::tgamma(1.25))));
  CHECK(whole.refinement_change < 0.02);
}

TEST_CASE("renewal preconditions") {
  RenewalProblem p;
  p.t_max = 10.0;
  const std::vector<double> ts{10.0};
  CHECK_THROWS_AS(renewal_limit(p, StepFunction::indicator(-1.0, 1.0), ts, RenewalPart::One), Error);
  CHECK_NOTHROW(renewal_limit(p, StepFunction::indicator(-1.0, 1.0), ts, RenewalPart::Two));
  CHECK_THROWS_AS(renewal_limit(p, StepFunction{{{0.0, 1.0, -1.0}}}, ts), Error);
  RenewalProblem coarse;
  coarse.t_max = 4.0;
  coarse.dx = 1.0;
  CHECK_THROWS_AS(renewal_limit(coarse, StepFunction::indicator(0.0, 1.0), std::vector<double>{4.0}), Error);
}

TEST_CASE("Hill estimator on an exact Pareto sample") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = std::pow(1.0 - uni(gen), -1.0 / 0.75);
  CHECK(hill_estimate(xs, 1000) == doctest::Approx(0.75).epsilon(0.08));
  CHECK_THROWS_AS(hill_estimate(xs, 1), Error);
}

TEST_CASE("tempered subordinator demonstration preconditions") {
  SimConfig c;
  CHECK_THROWS_AS(counterexample_demo(1.0, 0.4, 0.01, 100, c), Error);
  CHECK_THROWS_AS(counterexample_demo(1.0, 1.0, 0.01, 100, c), Error);
  CHECK_THROWS_AS(counterexample_demo(0.0, 0.75, 0.01, 100, c), Error);
  const LevyModel m = counterexample_model(0.5, 0.75, 0.01);
  const CramerReport r = cramer_root(m);
  REQUIRE(r.theta);
  CHECK(std::abs(*r.theta - 0.5) < 1e-9);
  CHECK(std::isinf(*r.psi_prime_at_theta));
}
