#include "pssmp/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <nlohmann/json.hpp>

#include "pssmp/error.hpp"
#include "pssmp/parallel.hpp"
#include "pssmp/stats.hpp"

namespace pssmp {
namespace {

constexpr double kSmallLambda = 1e-6;
constexpr double kNormalizationTmax = 40.0;

[[noreturn]] void reject(const std::string& why) { throw Error(ErrorCode::ConfigRejected, why); }

double expected_gamma(const LevyModel& model, const ExtensionConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) reject("epsilon must be > 0");
  if (!(cfg.horizon > 0.0)) reject("horizon must be > 0");
  try {
    require_hits_zero(model);
  } catch (const Error& e) {
    reject(e.what());
  }
  const double a = model.alpha();
  if (cfg.mode == ExtensionMode::JumpIn) {
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0 / a)) reject("jump-in index must lie in (0, 1/alpha)");
    const double v = psi(model, cfg.beta);
    if (!(v < -std::max(kCramerTolerance, model.psi_accuracy()))) {
      reject("psi(beta) = " + std::to_string(v) + " >= 0: no extension leaving 0 by this jump");
    }
    return a * cfg.beta;
  }
  const CramerReport rep = cramer_root(model);
  if (!rep.theta) reject("no Cramer root: no extension leaving 0 continuously");
  if (!(*rep.alpha_theta < 1.0)) reject("alpha * theta >= 1: no continuous extension");
  return *rep.alpha_theta;
}

// Composite 30-point Gauss-Legendre.
template <class F>
double integrate_panels(F f, double lo, double hi, int panels) {
  const double step = (hi - lo) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    sum += boost::math::quadrature::gauss<double, 30>::integrate(f, lo + k * step, lo + (k + 1) * step);
  }
  return sum;
}

struct TiltedSetup {
  double theta;
  double alpha_theta;
  double gamma_fn;  // Gamma(1 - alpha theta)
  LevyModel tilted;
};

TiltedSetup tilted_setup(const LevyModel& model) {
  const CramerReport rep = require_cramer_root(model);
  return {*rep.theta, *rep.alpha_theta, std::tgamma(1.0 - *rep.alpha_theta),
          esscher(model, *rep.theta)};
}

std::vector<double> functional_draws(const LevyModel& m, Functional which, std::size_t n,
                                     const SimConfig& config, std::size_t& censored) {
  const std::vector<FunctionalDraw> draws = parallel_map<FunctionalDraw>(n, [&](std::size_t i) {
    return which == Functional::I ? sample_I(m, config.child(i)) : sample_J(m, config.child(i));
  });
  std::vector<double> out;
  out.reserve(n);
  for (const FunctionalDraw& d : draws) {
    if (d.censored) {
      ++censored;
    } else {
      out.push_back(d.value);
    }
  }
  return out;
}

template <class F>
MeanEstimate mean_over(const std::vector<double>& xs, F f) {
  const std::vector<double> vals = parallel_map<double>(xs.size(), [&](std::size_t i) { return f(xs[i]); });
  return estimate_mean(vals);
}

}  // namespace

ExtensionConfig make_extension_config(const LevyModel& model, ExtensionMode mode, double beta,
                                      double epsilon, double horizon, std::size_t max_excursions) {
  ExtensionConfig cfg;
  cfg.mode = mode;
  cfg.beta = beta;
  cfg.epsilon = epsilon;
  cfg.horizon = horizon;
  cfg.max_excursions = max_excursions;
  cfg.gamma = expected_gamma(model, cfg);
  return cfg;
}

void validate_extension_config(const LevyModel& model, const ExtensionConfig& cfg) {
  const double g = expected_gamma(model, cfg);
  if (std::abs(g - cfg.gamma) > 1e-9) {
    reject("gamma = " + std::to_string(cfg.gamma) + " does not match the mode, expected " +
           std::to_string(g));
  }
}

double jump_in_restart_from_uniform(double beta, double epsilon, double u) {
  return epsilon * std::pow(u, -1.0 / beta);
}

double sample_jump_in_restart(double beta, double epsilon, Rng& rng) {
  if (!(beta > 0.0) || !(epsilon > 0.0)) {
    throw Error(ErrorCode::PreconditionFailed, "beta and epsilon must be > 0");
  }
  return jump_in_restart_from_uniform(beta, epsilon, rng.uniform());
}

ExtensionSummary simulate_extension_stream(const LevyModel& model, const ExtensionConfig& cfg,
                                           const SimConfig& sim,
                                           const std::function<void(const Excursion&)>& visit) {
  validate_extension_config(model, cfg);
  sim.validate();

  ExtensionSummary out;
  out.epsilon_used = cfg.epsilon;
  if (cfg.mode == ExtensionMode::JumpIn) {
    const double a = model.alpha();
    const double v = psi(model, 1.0 / a);
    if (v < 0.0) {
      const double mean_i = -1.0 / v;
      out.discarded_duration_bound =
          mean_i * cfg.beta * std::pow(cfg.epsilon, 1.0 / a - cfg.beta) * a / (1.0 - a * cfg.beta);
    }
  }

  double t = 0.0;
  for (std::size_t k = 0; t < cfg.horizon && (cfg.max_excursions == 0 || k < cfg.max_excursions);
       ++k) {
    const SimConfig c = sim.child(k);
    double x = cfg.epsilon;
    if (cfg.mode == ExtensionMode::JumpIn) {
      Rng rng = c.child(0).rng();
      x = sample_jump_in_restart(cfg.beta, cfg.epsilon, rng);
    }
    const PssmpPath path = sample_pssmp_path(model, x, c.child(1));
    out.restarts.push_back({t, x});
    const bool complete = path.t0 && t + *path.t0 <= cfg.horizon;
    visit(Excursion{k, t, {t, x}, &path, complete});
    if (!complete) {
      out.truncated = true;
      out.end_time = path.t0 ? cfg.horizon : std::min(cfg.horizon, t + path.times.back());
      return out;
    }
    t += *path.t0;
    out.zero_hits.push_back(t);
  }
  out.end_time = t;
  return out;
}

ExtensionPath simulate_extension(const LevyModel& model, const ExtensionConfig& cfg,
                                 const SimConfig& sim) {
  ExtensionPath out;
  const ExtensionSummary summary =
      simulate_extension_stream(model, cfg, sim, [&](const Excursion& e) {
        const PssmpPath& p = *e.path;
        for (std::size_t i = 0; i < p.times.size(); ++i) {
          const double u = e.start + p.times[i];
          if (u > cfg.horizon) {
            out.times.push_back(cfg.horizon);
            out.values.push_back(p.value_at(cfg.horizon - e.start));
            return;
          }
          out.times.push_back(u);
          out.values.push_back(p.values[i]);
        }
      });
  out.zero_hits = summary.zero_hits;
  out.restarts = summary.restarts;
  out.epsilon_used = summary.epsilon_used;
  out.discarded_duration_bound = summary.discarded_duration_bound;
  out.truncated = summary.truncated;
  return out;
}

void write_excursion_jsonl(std::ostream& out, const Excursion& e, std::size_t path_index) {
  nlohmann::json rec;
  rec["path"] = path_index;
  rec["excursion"] = e.index;
  std::vector<double> t(e.path->times);
  for (double& u : t) u += e.start;
  rec["t"] = t;
  rec["x"] = e.path->values;
  rec["restart"] = {{"time", e.restart.time}, {"value", e.restart.value}};
  rec["zero_hit"] = e.complete ? nlohmann::json(e.start + *e.path->t0) : nlohmann::json(nullptr);
  out << rec.dump() << '\n';
}

// ---------------------------------------------------------------------------

OccupationHistogram::OccupationHistogram(double lo, double hi, std::size_t bins, double alpha)
    : log_lo_(std::log(lo)),
      log_hi_(std::log(hi)),
      width_((std::log(hi) - std::log(lo)) / static_cast<double>(bins)),
      alpha_(alpha),
      time_(bins, 0.0) {
  if (!(lo > 0.0 && hi > lo && bins > 0)) {
    throw Error(ErrorCode::PreconditionFailed, "histogram needs 0 < lo < hi and bins > 0");
  }
}

double OccupationHistogram::lower_edge(std::size_t i) const {
  return std::exp(log_lo_ + width_ * static_cast<double>(i));
}

double OccupationHistogram::upper_edge(std::size_t i) const {
  return std::exp(log_lo_ + width_ * static_cast<double>(i + 1));
}

double OccupationHistogram::density(std::size_t i) const {
  return time_.at(i) / (upper_edge(i) - lower_edge(i));
}

double OccupationHistogram::total_time() const noexcept {
  double s = 0.0;
  for (double v : time_) s += v;
  return s;
}

void OccupationHistogram::add_path(const PssmpPath& path) {
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    add_segment(path.times[k + 1] - path.times[k], std::log(path.values[k]),
                std::log(path.left_values[k + 1]));
  }
}

// X-time du spent while log X moves linearly (in the Levy clock) from a to b;
// the X-time density in the level v is proportional to exp(v / alpha).
void OccupationHistogram::add_segment(double du, double a, double b) {
  if (!(du > 0.0)) return;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (hi < log_lo_ || lo >= log_hi_) return;
  const auto bin_of = [&](double v) {
    return static_cast<std::ptrdiff_t>(std::floor((v - log_lo_) / width_));
  };
  const auto last = static_cast<std::ptrdiff_t>(time_.size()) - 1;
  if (hi - lo < 1e-12) {
    const auto i = bin_of(lo);
    if (i >= 0 && i <= last) time_[static_cast<std::size_t>(i)] += du;
    return;
  }
  const double total = -std::expm1((lo - hi) / alpha_);  // scaled by exp(-hi / alpha)
  for (auto i = std::max<std::ptrdiff_t>(bin_of(lo), 0); i <= std::min(bin_of(hi), last); ++i) {
    const double e0 = log_lo_ + width_ * static_cast<double>(i);
    const double v1 = std::max(lo, e0);
    const double v2 = std::min(hi, e0 + width_);
    if (v2 <= v1) continue;
    const double part = std::exp((v1 - hi) / alpha_) * std::expm1((v2 - v1) / alpha_);
    time_[static_cast<std::size_t>(i)] += du * part / total;
  }
}

SlopeFit occupation_slope(const OccupationHistogram& hist, double lo, double hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double l = hist.lower_edge(i);
    const double u = hist.upper_edge(i);
    if (l < lo * (1 - 1e-9) || u > hi * (1 + 1e-9) || !(hist.time_in_bin(i) > 0.0)) continue;
    xs.push_back(0.5 * (std::log(l) + std::log(u)));
    ys.push_back(std::log(hist.density(i)));
  }
  SlopeFit fit;
  fit.points = xs.size();
  if (xs.size() < 3) throw Error(ErrorCode::TooFewSamples, "fewer than 3 occupied bins in range");
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / m;
    my += ys[i] / m;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += r * r;
  }
  fit.slope_std_err = std::sqrt(rss / (m - 2.0) / sxx);
  return fit;
}

// ---------------------------------------------------------------------------

double TestFunction::operator()(double x) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Bump: {
      if (!(x > a && x < b)) return 0.0;
      const double s = (2.0 * x - a - b) / (b - a);
      return std::exp(1.0 - 1.0 / (1.0 - s * s));
    }
    case Kind::Power:
      return std::pow(x, p);
    case Kind::Indicator:
      return x >= a && x <= b ? 1.0 : 0.0;
  }
  return 0.0;
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::One: os << "one"; break;
    case Kind::Bump: os << "bump[" << a << "," << b << "]"; break;
    case Kind::Power: os << "power(" << p << ")"; break;
    case Kind::Indicator: os << "indicator[" << a << "," << b << "]"; break;
  }
  return os.str();
}

ExpFunEstimate entrance_law(const LevyModel& model, double t, const TestFunction& f, std::size_t n,
                            const SimConfig& config) {
  if (!(t > 0.0)) throw Error(ErrorCode::PreconditionFailed, "t must be > 0");
  const TiltedSetup s = tilted_setup(model);
  if (f.kind == TestFunction::Kind::Power && std::abs(f.p) > s.theta + 1e-12) {
    throw Error(ErrorCode::PreconditionFailed, "power test functions need |p| <= theta");
  }
  const double a = model.alpha();
  const double at = s.alpha_theta;

  ExpFunEstimate out;
  const std::vector<double> js = functional_draws(s.tilted, Functional::J, n, config.child(1), out.censored);
  const MeanEstimate num = mean_over(js, [&](double j) {
    return f(std::pow(t / j, a)) * std::pow(j, at - 1.0);
  });
  const ExpFunEstimate norm = moment(s.tilted, Functional::J, at - 1.0, n, config.child(2));
  const double scale = 1.0 / (std::pow(t, at) * s.gamma_fn);
  out.value = scale * num.mean / norm.value;
  out.std_err = scale * ratio_std_err(num.mean, num.std_err, norm.value, norm.std_err);
  out.n = n;
  out.censored += norm.censored;
  out.truncation_note = norm.truncation_note;
  out.method = "tilted J, independent normalizer";
  return out;
}

NormalizationReport excursion_normalization_check(const LevyModel& model, std::size_t n,
                                                  const SimConfig& config,
                                                  std::size_t grid_points) {
  const TiltedSetup s = tilted_setup(model);
  const double a = model.alpha();
  const double at = s.alpha_theta;
  if (grid_points < 2) throw Error(ErrorCode::PreconditionFailed, "need at least 2 grid intervals");

  // In u = t^(1 - alpha theta) the t^(-alpha theta) singularity disappears:
  // dt t^(-alpha theta) = du / (1 - alpha theta).
  const double u_max = std::pow(kNormalizationTmax, 1.0 - at);
  struct Node {
    double t;
    double w;  // Simpson weight times e^-t / ((1 - alpha theta) Gamma)
  };
  const auto grid = [&](std::size_t intervals) {
    const std::size_t m = intervals + intervals % 2;
    const double h = u_max / static_cast<double>(m);
    std::vector<Node> nodes;
    for (std::size_t i = 0; i <= m; ++i) {
      const double u = h * static_cast<double>(i);
      const double t = std::pow(u, 1.0 / (1.0 - at));
      const double simpson = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      nodes.push_back({t, simpson * h / 3.0 * std::exp(-t) / ((1.0 - at) * s.gamma_fn)});
    }
    return nodes;
  };
  const std::vector<Node> coarse = grid(grid_points);
  const std::vector<Node> fine = grid(2 * grid_points);

  const TestFunction one = TestFunction::one();
  std::size_t censored = 0;
  const std::vector<double> js = functional_draws(s.tilted, Functional::J, n, config.child(1), censored);
  const auto integrate = [&](const std::vector<Node>& nodes) {
    return mean_over(js, [&](double j) {
      double q = 0.0;
      for (const Node& nd : nodes) q += nd.w * one(std::pow(nd.t / j, a));
      return q * std::pow(j, at - 1.0);
    });
  };
  const ExpFunEstimate norm = moment(s.tilted, Functional::J, at - 1.0, n, config.child(2));

  NormalizationReport out;
  const MeanEstimate q1 = integrate(coarse);
  const MeanEstimate q2 = integrate(fine);
  out.value = q1.mean / norm.value;
  out.std_err = ratio_std_err(q1.mean, q1.std_err, norm.value, norm.std_err);
  out.value_refined = q2.mean / norm.value;
  out.refinement_change = std::abs(out.value_refined / out.value - 1.0);
  for (const Node& nd : coarse) out.analytic_value += nd.w;
  out.n = n;
  return out;
}

ResolventReport resolvent_crosscheck(const LevyModel& model, double lambda, const TestFunction& f,
                                     std::size_t n, const SimConfig& config) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::PreconditionFailed, "lambda must be > 0");
  if (!f.compact_support() || !(f.a > 0.0 && f.b > f.a)) {
    throw Error(ErrorCode::PreconditionFailed, "needs a test function with support [a, b] in (0, inf)");
  }
  const TiltedSetup s = tilted_setup(model);
  const double a = model.alpha();
  const double at = s.alpha_theta;
  constexpr int kPanels = 4;

  // Entrance-law route: int e^(-lambda t) t^(-alpha theta) f((t/J)^alpha) dt J^(alpha theta - 1).
  std::size_t censored = 0;
  const std::vector<double> js = functional_draws(s.tilted, Functional::J, n, config.child(1), censored);
  const auto time_integral = [&](double lam) {
    return mean_over(js, [&](double j) {
      const double t_lo = j * std::pow(f.a, 1.0 / a);
      const double t_hi = j * std::pow(f.b, 1.0 / a);
      const double q = integrate_panels(
          [&](double t) { return std::exp(-lam * t) * std::pow(t, -at) * f(std::pow(t / j, a)); },
          t_lo, t_hi, kPanels);
      return q * std::pow(j, at - 1.0);
    });
  };
  const ExpFunEstimate norm_j = moment(s.tilted, Functional::J, at - 1.0, n, config.child(2));
  const MeanEstimate lhs_num = time_integral(lambda);

  // Dual route: I under the dual of the tilted model, x-quadrature.
  const LevyModel reflected = dual(s.tilted);
  const std::vector<double> is = functional_draws(reflected, Functional::I, n, config.child(3), censored);
  const MeanEstimate rhs_num = mean_over(is, [&](double i_val) {
    return integrate_panels(
        [&](double x) {
          return f(x) * std::pow(x, 1.0 / a - 1.0 - s.theta) * std::exp(-lambda * std::pow(x, 1.0 / a) * i_val);
        },
        f.a, f.b, kPanels);
  });
  const ExpFunEstimate norm_i = moment(reflected, Functional::I, at - 1.0, n, config.child(4));

  ResolventReport out;
  out.lambda = lambda;
  IdentityReport& r = out.report;
  const double lhs_scale = 1.0 / s.gamma_fn;
  const double rhs_scale = 1.0 / (a * s.gamma_fn);
  r.lhs = lhs_scale * lhs_num.mean / norm_j.value;
  r.se_lhs = lhs_scale * ratio_std_err(lhs_num.mean, lhs_num.std_err, norm_j.value, norm_j.std_err);
  r.rhs = rhs_scale * rhs_num.mean / norm_i.value;
  r.se_rhs = rhs_scale * ratio_std_err(rhs_num.mean, rhs_num.std_err, norm_i.value, norm_i.std_err);
  r.se = std::hypot(r.se_lhs, r.se_rhs);
  r.z = z_score(r.lhs, r.se_lhs, r.rhs, r.se_rhs);
  r.n = n;
  r.censored = censored + norm_j.censored + norm_i.censored;

  const MeanEstimate small = time_integral(kSmallLambda);
  out.small_lambda_lhs = lhs_scale * small.mean / norm_j.value;
  const double power_integral = integrate_panels(
      [&](double x) { return f(x) * std::pow(x, 1.0 / a - 1.0 - s.theta); }, f.a, f.b, kPanels);
  out.occupation_limit = rhs_scale * power_integral / norm_i.value;
  out.small_lambda_rel_diff = std::abs(out.small_lambda_lhs / out.occupation_limit - 1.0);
  return out;
}

}  // namespace pssmp
