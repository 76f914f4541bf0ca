// One line per acceptance criterion: "[PASS] C<k> <title>: <details>".
// Usage: acceptance [k ...]; no arguments runs every criterion.
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pssmp/error.hpp"
#include "pssmp/expfun.hpp"
#include "pssmp/extensions.hpp"
#include "pssmp/lamperti.hpp"
#include "pssmp/levy_model.hpp"
#include "pssmp/path_sim.hpp"
#include "pssmp/stats.hpp"
#include "pssmp/verify.hpp"

using namespace pssmp;

namespace {

constexpr double kZMax = 4.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

LevyModel brownian() { return {0.0, 1.0, {}, 0.125, 1.0}; }
LevyModel pure_drift() { return {-1.0, 0.0, {}, 0.0, 1.0}; }
LevyModel two_sided() {
  return {0.0, 0.5, {CompoundPoisson{1.0, TwoSidedExponentialJumps{3.0, 3.0, 0.5}}}, 0.2, 1.0};
}

SimConfig seeded(std::uint64_t seed) {
  SimConfig c;
  c.seed = seed;
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void c1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const LevyModel m = pure_drift();
  SimConfig c;
  c.dt = 0.01;
  double worst = 0.0;
  for (double x : {0.5, 1.0, 2.0}) {
    const PssmpPath p = sample_pssmp_path(m, x, c);
    worst = std::max(worst, std::abs(p.hitting_time() - x));
    for (double u = 0.0; u < x; u += x / 16.0) worst = std::max(worst, std::abs(p.value_at(u) - (x - u)));
  }
  const double i_value = sample_I(m, c).value;
  worst = std::max(worst, std::abs(i_value - 1.0));
  const IdentityReport r = recursion_check(m, 0.5, 100, c);
  worst = std::max({worst, std::abs(r.lhs - 1.0), std::abs(r.rhs - 1.0)});
  const double secs = seconds_since(t0);
  o.detail << "max error " << worst << ", I = " << i_value << ", recursion " << r.lhs << " = " << r.rhs
           << ", " << secs << " s";
  o.require(worst <= 1e-9, "closed-form error above 1e-9");
  o.require(secs < 1.0, "runtime 1 s");
}

void c2(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const CramerReport b = cramer_root(brownian());
  o.require(b.theta && std::abs(*b.theta - 0.5) <= 1e-10, "brownian theta");
  o.require(b.psi_prime_at_theta && std::abs(*b.psi_prime_at_theta - 0.5) <= 1e-9, "brownian psi'(theta)");
  o.require(b.jump_in_range.lo == 0.0 && std::abs(b.jump_in_range.hi - 0.5) <= 1e-10 &&
                !b.jump_in_range.hi_closed,
            "jump-in range (0, 0.5)");
  o.detail << "brownian theta " << b.theta.value_or(NAN) << " psi' " << b.psi_prime_at_theta.value_or(NAN)
           << " jump-in (" << b.jump_in_range.lo << ", " << b.jump_in_range.hi << ")";
  for (double q : {1.0, 0.5}) {
    const CramerReport t = cramer_root(counterexample_model(q, 0.75, 0.01));
    const bool root_ok = t.theta && std::abs(*t.theta - q) <= 1e-9;
    const bool fails4 = t.psi_prime_at_theta && std::isinf(*t.psi_prime_at_theta);
    o.detail << "; tempered q=" << q << " theta " << t.theta.value_or(NAN) << " condition (4) "
             << (fails4 ? "fails" : "holds");
    o.require(root_ok, "tempered theta = q");
    o.require(fails4, "condition (4) failure");
  }
  const double secs = seconds_since(t0);
  o.detail << ", " << secs << " s";
  o.require(secs < 1.0, "runtime 1 s");
}

void c3(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 100000;
  const LevyModel b = esscher(brownian(), 0.5);
  // Under the tilt xi is B_t + t/2, so J ~ 2 / Gamma(1).
  std::mt19937_64 gen(2024);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  MeanAccumulator inv, inv_sqrt;
  for (std::size_t i = 0; i < n; ++i) {
    const double j = 2.0 / gamma(gen);
    inv.add(1.0 / j);
    inv_sqrt.add(1.0 / std::sqrt(j));
  }
  const ExpFunEstimate e1 = moment(b, Functional::J, -1.0, n, seeded(301));
  const ExpFunEstimate e2 = moment(b, Functional::J, -0.5, n, seeded(302));
  const double z1 = std::abs(e1.value - 0.5) / e1.std_err;
  const double z2 = std::abs(e2.value - 0.6267) / e2.std_err;
  const double zo1 = z_score(e1.value, e1.std_err, inv.mean(), inv.std_err());
  const double zo2 = z_score(e2.value, e2.std_err, inv_sqrt.mean(), inv_sqrt.std_err());
  const double secs = seconds_since(t0);
  o.detail << "E(J^-1) = " << e1.value << " +- " << e1.std_err << " (z " << z1 << ", vs gamma sampler " << zo1
           << "); E(J^-1/2) = " << e2.value << " +- " << e2.std_err << " (z " << z2 << ", vs gamma sampler "
           << zo2 << "); " << secs << " s";
  o.require(z1 < kZMax && z2 < kZMax, "closed-form values within 4 SE");
  o.require(zo1 < kZMax && zo2 < kZMax, "gamma-sampler oracle within 4 SE");
  o.require(secs < 60.0, "runtime 1 min");
}

void c4(Outcome& o) {
  const LevyModel b = brownian();
  const IdentityReport r1 = recursion_check(b, 0.25, 100000, seeded(401));
  o.detail << "beta 0.25: " << r1.lhs << " vs " << r1.rhs << " z " << r1.z << " (n " << r1.n << ")";
  o.require(r1.z < kZMax, "beta 0.25 z < 4");
  const IdentityReport r2 = recursion_check(b, 0.45, 1000000, seeded(402));
  o.detail << "; beta 0.45: " << r2.lhs << " vs " << r2.rhs << " z " << r2.z << " (n " << r2.n << ")";
  o.require(r2.z < kZMax, "beta 0.45 z < 4");
}

void c5(Outcome& o) {
  const IdentityReport rb = dual_identity_check(brownian(), 100000, seeded(501));
  const IdentityReport rt = dual_identity_check(two_sided(), 100000, seeded(502));
  o.detail << "brownian " << rb.lhs << " vs " << rb.rhs << " z " << rb.z << "; two-sided " << rt.lhs << " vs "
           << rt.rhs << " z " << rt.z;
  o.require(rb.z < kZMax, "brownian z < 4");
  o.require(rt.z < kZMax, "two-sided z < 4");
}

void c6(Outcome& o) {
  const LevyModel b = brownian();
  const std::size_t n = 100000;
  const ExpFunEstimate one = entrance_law(b, 1.0, TestFunction::one(), n, seeded(601));
  const double target = 1.0 / std::tgamma(0.5);
  const double z_one = std::abs(one.value - target) / one.std_err;
  o.detail << "n_1(1) = " << one.value << " +- " << one.std_err << " vs " << target << " (z " << z_one << ")";
  o.require(z_one < kZMax, "f = 1 within 4 SE");

  std::vector<ExpFunEstimate> pw;
  const std::vector<double> ts{0.5, 1.0, 2.0};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    pw.push_back(entrance_law(b, ts[k], TestFunction::power(0.5), n, seeded(610 + k)));
  }
  double z_max = 0.0;
  for (std::size_t i = 0; i < pw.size(); ++i) {
    for (std::size_t j = i + 1; j < pw.size(); ++j) {
      z_max = std::max(z_max, z_score(pw[i].value, pw[i].std_err, pw[j].value, pw[j].std_err));
    }
  }
  o.detail << "; x^theta at t = 0.5, 1, 2: " << pw[0].value << ", " << pw[1].value << ", " << pw[2].value
           << " (max pairwise z " << z_max << ")";
  o.require(z_max < kZMax, "x^theta constant in t within 4 SE");

  const NormalizationReport nr = excursion_normalization_check(b, n, seeded(620));
  o.detail << "; normalization " << nr.value << " +- " << nr.std_err;
  o.require(std::abs(nr.value - 1.0) <= 0.05, "normalization within 5%");
}

void c7(Outcome& o) {
  double worst = 0.0;
  for (const LevyModel& m : {brownian(), two_sided()}) {
    const SimConfig c = seeded(701);
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const double x = 0.25 + 0.01 * static_cast<double>(i % 400);
      const PssmpPath p = sample_pssmp_path(m, x, c.child(i));
      const double i_value = sample_I(m, c.child(i)).value;
      worst = std::max(worst, std::abs(p.hitting_time() - std::pow(x, 1.0 / m.alpha()) * i_value) /
                                  std::max(1.0, p.hitting_time()));
    }
  }
  o.detail << "pathwise T0 vs x^(1/alpha) I: max rel error " << worst;
  o.require(worst <= 1e-12, "pathwise identity to 1e-12");

  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0};
  const double c = 4.0;
  for (const auto& [name, m] : {std::pair{"brownian", brownian()}, std::pair{"two-sided", two_sided()}}) {
    const PassRate ok = scaling_pass_rate(m, 1.0, c, grid, 2000, 100, 0.01, seeded(710));
    o.detail << "; " << name << " scaling " << ok.passes << "/" << ok.runs;
    o.require(ok.rate() >= 0.95, std::string(name) + " pass rate >= 95%");
  }
  ScalingOptions wrong;
  wrong.rescale_alpha = brownian().alpha() + 0.5;
  const PassRate bad = scaling_pass_rate(brownian(), 1.0, c, grid, 2000, 100, 0.01, seeded(720), wrong);
  o.detail << "; alpha + 0.5: " << bad.passes << "/" << bad.runs;
  o.require(bad.rate() < 0.95, "perturbed alpha fails the pass-rate rule");
}

void c8(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const LevyModel m = brownian();
  const std::size_t excursions = 10000;
  const ExtensionConfig cfg = make_extension_config(m, ExtensionMode::Continuous, 0.0, 0.01,
                                                    std::numeric_limits<double>::infinity(), excursions);
  OccupationHistogram hist(0.1, 1.0, 10, m.alpha());
  simulate_extension_stream(m, cfg, seeded(801), [&](const Excursion& e) { hist.add_path(*e.path); });
  const SlopeFit fit = occupation_slope(hist, 0.1, 1.0);
  const double secs = seconds_since(t0);
  o.detail << "slope " << fit.slope << " +- " << fit.slope_std_err << " vs -0.5 (" << excursions
           << " excursions, " << secs << " s)";
  o.require(std::abs(fit.slope + 0.5) <= 0.1, "slope within 0.1 of -0.5");
  o.require(secs < 300.0, "runtime 5 min");
}

void c9(Outcome& o) {
  const LevyModel m = brownian();
  std::size_t refused = 0;
  const std::vector<double> bad_betas{0.5, 0.6, 0.9};
  for (double beta : bad_betas) {
    try {
      make_extension_config(m, ExtensionMode::JumpIn, beta, 0.01, 100.0);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigRejected) ++refused;
    }
  }
  o.detail << "refused " << refused << "/" << bad_betas.size() << " configs with psi(beta) >= 0";
  o.require(refused == bad_betas.size(), "all configs with psi(beta) >= 0 refused");

  const double beta = 0.3, eps = 0.01;
  const ExtensionConfig cfg = make_extension_config(m, ExtensionMode::JumpIn, beta, eps,
                                                    std::numeric_limits<double>::infinity(), 200);
  const SimConfig base = seeded(901);
  const PassRate rate = multi_seed_pass_rate(100, 0.01, [&](std::size_t k) {
    std::vector<double> sizes;
    simulate_extension_stream(m, cfg, base.child(k), [&](const Excursion& e) { sizes.push_back(e.restart.value); });
    return ks_one_sample(sizes, [&](double x) { return x <= eps ? 0.0 : 1.0 - std::pow(eps / x, beta); }).p_value;
  });
  o.detail << "; restart law KS " << rate.passes << "/" << rate.runs;
  o.require(rate.rate() >= 0.95, "restart KS pass rate >= 95%");
}

void c10(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  RenewalProblem pr;
  pr.tail = TailKind::Pareto;
  pr.gamma = 0.75;
  pr.dx = 0.01;
  pr.t_max = 200.0;
  const std::vector<double> ts{200.0};
  RenewalResult r;
  try {
    r = renewal_limit(pr, StepFunction::indicator(0.0, 1.0), ts);
  } catch (const Error& e) {
    o.require(false, e.what());
    return;
  }
  const RenewalPoint& p = r.points.front();
  const double rel = std::abs(p.value / p.target - 1.0);
  const double secs = seconds_since(t0);
  o.detail << "value " << p.value << " at t = 200, target " << p.target << " (rel diff " << rel
           << "), grid halving change " << r.refinement_change << ", m(t)-normalized limit "
           << p.erickson_target << ", " << secs << " s";
  o.require(rel <= 0.15, "within 15% of sin(pi gamma)/pi");
  o.require(r.refinement_change <= 0.02, "grid halving within 2%");
  o.require(secs < 60.0, "runtime 1 min");
}

void c11(Outcome& o) {
  const ResolventReport r =
      resolvent_crosscheck(brownian(), 1.0, TestFunction::bump(0.5, 1.5), 100000, seeded(1101));
  o.detail << "entrance-law route " << r.report.lhs << " +- " << r.report.se_lhs << ", dual route "
           << r.report.rhs << " +- " << r.report.se_rhs << ", z " << r.report.z;
  o.require(r.report.z < kZMax, "z < 4");
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "closed-form pure drift", c1},
      {2, "Cramer analysis", c2},
      {3, "Dufresne cross-check", c3},
      {4, "recursion identity", c4},
      {5, "duality identity", c5},
      {6, "entrance law and normalization", c6},
      {7, "T0 law and scaling", c7},
      {8, "occupation law", c8},
      {9, "jump-in gate and restart law", c9},
      {10, "renewal limit", c10},
      {11, "resolvent cross-check", c11},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("[%s] C%d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
