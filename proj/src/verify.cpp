#include "pssmp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "pssmp/error.hpp"
#include "pssmp/lamperti.hpp"
#include "pssmp/parallel.hpp"

namespace pssmp {
namespace {

constexpr std::size_t kMinKsSamples = 20;
constexpr double kRenewalStability = 0.02;

double ks_p_value(double d, double effective_n) {
  const double sq = std::sqrt(effective_n);
  return kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d);
}

}  // namespace

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // Jacobi-theta form, fast for small x.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 20; k += 2) s += std::exp(-static_cast<double>(k * k) * c);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < kMinKsSamples || b.size() < kMinKsSamples) {
    throw Error(ErrorCode::TooFewSamples, "KS test needs at least 20 points per sample");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  KsReport r;
  r.statistic = d;
  r.n1 = x.size();
  r.n2 = y.size();
  r.p_value = ks_p_value(d, n1 * n2 / (n1 + n2));
  return r;
}

KsReport ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.size() < kMinKsSamples) {
    throw Error(ErrorCode::TooFewSamples, "KS test needs at least 20 points");
  }
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsReport r;
  r.statistic = d;
  r.n1 = x.size();
  r.p_value = ks_p_value(d, n);
  return r;
}

std::vector<KsReport> scaling_test(const LevyModel& model, double x, double c,
                                   std::span<const double> t_grid, std::size_t n,
                                   const SimConfig& config, const ScalingOptions& options) {
  if (!(x > 0.0) || !(c > 0.0)) throw Error(ErrorCode::PreconditionFailed, "x and c must be > 0");
  const double alpha = options.rescale_alpha.value_or(model.alpha());
  const double time_factor = std::pow(c, -1.0 / alpha);
  const SimConfig ca = config.child(1);
  const SimConfig cb = config.child(2);

  // Row i holds one path's values at every t.
  const auto left = parallel_map<std::vector<double>>(n, [&](std::size_t i) {
    const PssmpPath p = sample_pssmp_path(model, x, ca.child(i));
    std::vector<double> v;
    for (double t : t_grid) v.push_back(c * p.value_at(t * time_factor));
    return v;
  });
  const auto right = parallel_map<std::vector<double>>(n, [&](std::size_t i) {
    const PssmpPath p = sample_pssmp_path(model, c * x, cb.child(i));
    std::vector<double> v;
    for (double t : t_grid) v.push_back(p.value_at(t));
    return v;
  });

  std::vector<KsReport> out;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = left[i][k];
      b[i] = right[i][k];
    }
    out.push_back(ks_two_sample(a, b));
  }
  return out;
}

PassRate multi_seed_pass_rate(std::size_t runs, double level,
                              const std::function<double(std::size_t)>& trial) {
  const std::vector<double> p = parallel_map<double>(runs, trial);
  PassRate r;
  r.runs = runs;
  for (double v : p) r.passes += v > level ? 1 : 0;
  return r;
}

PassRate scaling_pass_rate(const LevyModel& model, double x, double c,
                           std::span<const double> t_grid, std::size_t n, std::size_t runs,
                           double level, const SimConfig& config, const ScalingOptions& options) {
  const double per_t = level / static_cast<double>(std::max<std::size_t>(t_grid.size(), 1));
  // Each run is already parallel inside; keep runs sequential.
  PassRate r;
  r.runs = runs;
  for (std::size_t k = 0; k < runs; ++k) {
    const auto reports = scaling_test(model, x, c, t_grid, n, config.child(k), options);
    const bool ok = std::all_of(reports.begin(), reports.end(),
                                [&](const KsReport& rep) { return rep.p_value > per_t; });
    r.passes += ok ? 1 : 0;
  }
  return r;
}

// ---------------------------------------------------------------------------

double RenewalProblem::survival(double u) const {
  if (u <= 0.0) return 1.0;
  if (tail == TailKind::Pareto) return std::pow(1.0 + u, -gamma);
  return std::pow(-std::expm1(-u) / u, gamma);
}

double RenewalProblem::mean_residual(double x) const {
  if (x <= 0.0) return 0.0;
  if (tail == TailKind::Pareto) {
    if (gamma == 1.0) return std::log1p(x);
    return (std::pow(1.0 + x, 1.0 - gamma) - 1.0) / (1.0 - gamma);
  }
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double u) { return survival(u); }, 0.0, x, 15, 1e-12);
}

void RenewalProblem::validate() const {
  if (!(gamma > 0.5 && gamma <= 1.0)) {
    throw Error(ErrorCode::PreconditionFailed, "regular-variation index must lie in (1/2, 1]");
  }
  if (!(dx > 0.0) || !(t_max > dx)) {
    throw Error(ErrorCode::PreconditionFailed, "renewal grid needs 0 < dx < t_max");
  }
}

double StepFunction::integral() const {
  double s = 0.0;
  for (const Step& st : steps) s += st.height * (st.b - st.a);
  return s;
}

double StepFunction::lower() const {
  double v = std::numeric_limits<double>::infinity();
  for (const Step& st : steps) v = std::min(v, st.a);
  return v;
}

double StepFunction::upper() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const Step& st : steps) v = std::max(v, st.b);
  return v;
}

std::vector<double> renewal_masses(const RenewalProblem& problem, double t_end, double dx) {
  const auto n = static_cast<std::size_t>(std::ceil(t_end / dx)) + 1;
  std::vector<double> p(n, 0.0);  // p[j] = G((j-1) dx, j dx]
  for (std::size_t j = 1; j < n; ++j) {
    p[j] = problem.survival(static_cast<double>(j - 1) * dx) -
           problem.survival(static_cast<double>(j) * dx);
  }
  std::vector<double> u(n, 0.0);
  u[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += p[j] * u[k - j];
    u[k] = s;
  }
  return u;
}

namespace {

// int h(y) U(dy) for h the step function g placed on [shift + a, shift + b],
// with the mass u[k] standing for the cell ((k-1) dx, k dx].
double integrate_steps(const std::vector<double>& u, double dx, const StepFunction& g, double shift,
                       bool reflect) {
  double s = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  for (const Step& st : g.steps) {
    double lo = reflect ? shift - st.b : shift + st.a;
    double hi = reflect ? shift - st.a : shift + st.b;
    auto k0 = static_cast<std::ptrdiff_t>(std::floor(lo / dx + 1e-9)) + 1;
    auto k1 = static_cast<std::ptrdiff_t>(std::floor(hi / dx + 1e-9));
    k0 = std::max<std::ptrdiff_t>(k0, lo <= 0.0 ? 0 : 1);
    k1 = std::min(k1, n - 1);
    for (auto k = k0; k <= k1; ++k) s += st.height * u[static_cast<std::size_t>(k)];
  }
  return s;
}

double renewal_value(const RenewalProblem& problem, const std::vector<double>& u, double dx,
                     const StepFunction& g, double t, RenewalPart part) {
  // (i): int_0^t g(t - y) U(dy), y ranges over t - supp g.
  // (ii): int g(y - t) U(dy), y ranges over t + supp g.
  const double integral = part == RenewalPart::One ? integrate_steps(u, dx, g, t, true)
                                                   : integrate_steps(u, dx, g, t, false);
  return problem.mean_residual(t) * integral;
}

}  // namespace

RenewalResult renewal_limit(const RenewalProblem& problem, const StepFunction& g,
                            std::span<const double> t_list, RenewalPart part) {
  problem.validate();
  for (const Step& st : g.steps) {
    if (!(st.height >= 0.0) || !(st.b > st.a)) {
      throw Error(ErrorCode::PreconditionFailed, "g must be a nonnegative step function");
    }
    if (part == RenewalPart::One && st.a < 0.0) {
      throw Error(ErrorCode::PreconditionFailed, "part (i) needs g supported in [0, inf)");
    }
  }
  double t_top = problem.t_max;
  for (double t : t_list) t_top = std::max(t_top, t);
  const double reach = t_top + std::max(0.0, part == RenewalPart::Two ? g.upper() : -g.lower());

  const std::vector<double> u = renewal_masses(problem, reach, problem.dx);
  const std::vector<double> u_fine = renewal_masses(problem, reach, problem.dx / 2.0);

  const double g_int = g.integral();
  const double gm = problem.gamma;
  const double reflection = gm == 1.0 ? 0.0 : std::sin(std::numbers::pi * gm) / std::numbers::pi;
  const double erickson = 1.0 / (boost::math::tgamma(gm) * boost::math::tgamma(2.0 - gm));

  RenewalResult out;
  for (double t : t_list) {
    RenewalPoint pt;
    pt.t = t;
    pt.value = renewal_value(problem, u, problem.dx, g, t, part);
    pt.target = reflection * g_int;
    pt.erickson_target = erickson * g_int;
    out.points.push_back(pt);
  }
  out.value_at_tmax = renewal_value(problem, u, problem.dx, g, problem.t_max, part);
  out.value_at_tmax_refined = renewal_value(problem, u_fine, problem.dx / 2.0, g, problem.t_max, part);
  out.refinement_change = std::abs(out.value_at_tmax_refined / out.value_at_tmax - 1.0);
  if (out.refinement_change > kRenewalStability) {
    throw Error(ErrorCode::GridTooCoarse,
                "halving dx moved the value at t_max by " + std::to_string(100.0 * out.refinement_change) + "%");
  }
  return out;
}

// ---------------------------------------------------------------------------

LevyModel counterexample_model(double q, double beta, double delta, double alpha) {
  const LevyModel unkilled(0.0, 0.0, {TemperedPower(q, beta, delta)}, 0.0, alpha);
  return unkilled.killed_at_root(q);
}

double hill_estimate(std::vector<double> xs, std::size_t k) {
  if (k < 2 || k >= xs.size()) throw Error(ErrorCode::TooFewSamples, "Hill estimator needs 2 <= k < n");
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end(), std::greater<>());
  const double threshold = xs[k];
  if (!(threshold > 0.0)) throw Error(ErrorCode::PreconditionFailed, "Hill estimator needs a positive threshold");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(xs[i] / threshold);
  return static_cast<double>(k) / s;
}

CounterexampleReport counterexample_demo(double q, double beta, double delta, std::size_t n,
                                         const SimConfig& config) {
  if (!(beta > 0.5 && beta < 1.0)) {
    throw Error(ErrorCode::PreconditionFailed, "beta must lie in (1/2, 1)");
  }
  if (!(q > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::PreconditionFailed, "q and delta must be > 0");

  const LevyModel model = counterexample_model(q, beta, delta);
  CounterexampleReport out;
  out.q = q;
  out.beta = beta;
  out.delta = delta;
  out.killing = model.killing();

  const CramerReport rep = cramer_root(model);
  if (!rep.theta) throw Error(ErrorCode::NoCramerRoot, "tempered model lost its root");
  out.cramer_root = *rep.theta;
  out.root_error = std::abs(*rep.theta - q);
  out.derivative_infinite = !std::isfinite(rep.psi_prime_at_theta.value_or(0.0));

  // Tilted increments: the tilted Levy density is x^(-1-beta) on (delta, inf).
  const LevyModel tilted = esscher(model, *rep.theta);
  const auto incs = sample_increment_batch(tilted, 1.0, n, config.child(1));
  std::vector<double> xi1;
  xi1.reserve(n);
  for (const IncrementDraw& d : incs) xi1.push_back(d.value);
  out.hill_k = std::max<std::size_t>(n / 100, 10);
  out.hill_index = hill_estimate(xi1, out.hill_k);

  const auto hits = hitting_time_samples(model, 1.0, n, config.child(2));
  for (double x : {1.0, 2.0, 5.0, 10.0}) {
    std::size_t above = 0;
    for (const HittingTimeDraw& h : hits) above += h.value > x ? 1 : 0;
    double m = 0.0;  // int_0^log x P^tilt(xi_1 > u) du = E min(xi_1, log x)
    for (double v : xi1) m += std::min(v, std::log(x)) / static_cast<double>(n);
    TailRow row;
    row.x = x;
    row.survival = static_cast<double>(above) / static_cast<double>(n);
    row.scaled = std::pow(x, q) * row.survival;
    row.log_corrected = m * row.scaled;
    out.tail.push_back(row);
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const TailRow& r : out.tail) {
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
  }
  out.tail_nondegenerate = lo > 0.0 && hi / lo < 10.0;
  out.note = "qualitative display; asymptotic tail limits are not claimed";
  return out;
}

}  // namespace pssmp
