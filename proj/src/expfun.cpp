#include "pssmp/expfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pssmp/error.hpp"
#include "pssmp/parallel.hpp"
#include "pssmp/stats.hpp"

namespace pssmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNearCritical = 0.02;

// Gauss-Legendre nodes and weights on [0, 1].
constexpr std::array<double, 8> kGlNodes = {
    0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
constexpr std::array<double, 8> kGlWeights = {
    0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918100,
    0.18134189168918100, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};

double psi_tolerance(const LevyModel& model) {
  return std::max(kCramerTolerance, model.psi_accuracy());
}

// int_0^h kappa exp(-kappa (t0 + s)) A(t0 + s)^p ds on one linear segment of
// xi from a to b, where A(t0 + s) = a0 + h e^(a/alpha) (s/h) expm1_ratio(d s/h).
double killed_power_segment(double a0, double t0, double h, double a, double b, double alpha,
                            double kappa, double p) {
  const double ea = std::exp(a / alpha);
  const double d = (b - a) / alpha;
  double sum = 0.0;
  if (a0 == 0.0) {
    // sigma = w^(1/(p+1)) absorbs the sigma^p singularity.
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double sigma = std::pow(kGlNodes[i], 1.0 / (p + 1.0));
      sum += kGlWeights[i] * kappa * std::exp(-kappa * (t0 + h * sigma)) *
             std::pow(expm1_ratio(d * sigma), p);
    }
    return std::pow(h, p + 1.0) * std::pow(ea, p) / (p + 1.0) * sum;
  }
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    const double sigma = kGlNodes[i];
    const double area = a0 + h * ea * sigma * expm1_ratio(d * sigma);
    sum += kGlWeights[i] * kappa * std::exp(-kappa * (t0 + h * sigma)) * std::pow(area, p);
  }
  return h * sum;
}

// I^p with the killing time integrated out on [0, s0].
FunctionalDraw sample_I_conditioned(const LevyModel& model, const SimConfig& config, double p,
                                    double s0) {
  Rng rng = config.rng();
  const double zeta = rng.exponential() / model.killing();
  LevyStepper stepper(model, config.dt, rng, std::nullopt);
  const double end = std::max(zeta, s0);
  if (end > config.horizon) return {0.0, true, 0.0};

  double area = 0.0;
  double conditioned = 0.0;
  while (stepper.time() < end) {
    const double limit = stepper.time() < s0 ? s0 : end;
    const Segment s = stepper.next(limit);
    const double h = s.t_end - s.t_start;
    if (s.t_start < s0) {
      conditioned += killed_power_segment(area, s.t_start, h, s.x_start, s.x_end_left,
                                          model.alpha(), model.killing(), p);
    }
    area += exp_segment_integral(h, s.x_start, s.x_end_left, model.alpha());
  }
  const double tail = zeta > s0 ? std::pow(area, p) : 0.0;
  return {tail + conditioned, false, 0.0};
}

// I^p - (I - A(t_s))^p 1{zeta > t_s}; its mean is E(I^p) (1 - exp(t_s psi(p/alpha))).
FunctionalDraw sample_I_split(const LevyModel& model, const SimConfig& config, double p,
                              double split, double rel_tol) {
  LevyStepper stepper(model, config.dt, config.rng());
  ConvergenceMonitor monitor(rel_tol);
  const bool watch = model.killing() == 0.0;
  double area = 0.0;
  double area_at_split = -1.0;
  while (!stepper.dead() && stepper.time() < config.horizon) {
    const double limit = stepper.time() < split ? std::min(split, config.horizon) : config.horizon;
    const Segment s = stepper.next(limit);
    area += exp_segment_integral(s.t_end - s.t_start, s.x_start, s.x_end_left, model.alpha());
    if (s.t_end == split && !s.killed) area_at_split = area;
    if (s.killed || (watch && monitor.update(s.t_end, area))) {
      const double rest = area_at_split >= 0.0 ? std::pow(area - area_at_split, p) : 0.0;
      return {std::pow(area, p) - rest, false, 0.0};
    }
  }
  return {0.0, true, 0.0};
}

double default_split_time(const LevyModel& model, double p) {
  // Long enough that the denominator 1 - exp(t psi) is not small, short
  // enough that A(t_s) keeps light tails.
  const double rate = -psi(model, p / model.alpha());
  return std::clamp(1.0 / rate, 0.5, 4.0);
}

std::string format_note(const SimConfig& config, Functional which, double max_tail) {
  std::ostringstream os;
  os << "horizon=" << config.horizon << " dt=" << config.dt;
  if (which == Functional::I) {
    os << " rel_tol=" << kIRelTol;
  } else {
    os << " rel_tol=" << kJRelTol << " max_tail_bound=" << max_tail;
  }
  return os.str();
}

void add_near_critical_warning(std::vector<std::string>& warnings, double psi_value) {
  if (std::abs(psi_value) < kNearCritical) {
    warnings.push_back("near-critical exponent |psi| = " + std::to_string(std::abs(psi_value)) +
                       " < 0.02: variance is large, use a large sample");
  }
}

}  // namespace

FunctionalDraw sample_I(const LevyModel& model, const SimConfig& config, double rel_tol) {
  require_hits_zero(model);
  config.validate();
  LevyStepper stepper(model, config.dt, config.rng());
  ConvergenceMonitor monitor(rel_tol);
  const bool watch = model.killing() == 0.0;
  double area = 0.0;
  while (!stepper.dead() && stepper.time() < config.horizon) {
    const Segment s = stepper.next(config.horizon);
    area += exp_segment_integral(s.t_end - s.t_start, s.x_start, s.x_end_left, model.alpha());
    if (s.killed || (watch && monitor.update(s.t_end, area))) return {area, false, 0.0};
  }
  return {area, true, 0.0};
}

FunctionalDraw sample_J(const LevyModel& tilted, const SimConfig& config, double rel_tol) {
  if (tilted.killing() != 0.0) {
    throw Error(ErrorCode::PreconditionFailed, "J needs a conservative (unkilled) model");
  }
  const double slope = psi_prime(tilted, 0.0);
  if (!(slope > 0.0)) {
    throw Error(ErrorCode::NotDriftingUp,
                "psi'(0) = " + std::to_string(slope) + " so J is not finite");
  }
  config.validate();
  LevyStepper stepper(tilted, config.dt, config.rng());
  ConvergenceMonitor monitor(rel_tol);
  double area = 0.0;
  while (stepper.time() < config.horizon) {
    const Segment s = stepper.next(config.horizon);
    area += exp_segment_integral(s.t_end - s.t_start, -s.x_start, -s.x_end_left, tilted.alpha());
    if (monitor.update(s.t_end, area)) {
      const double bound = tilted.alpha() * std::exp(-s.x_end / tilted.alpha()) / slope;
      return {area, false, bound};
    }
  }
  return {area, true, tilted.alpha() * std::exp(-stepper.value() / tilted.alpha()) / slope};
}

void check_moment_hypothesis(const LevyModel& model, Functional which, double p) {
  const double tol = psi_tolerance(model);
  // Exponent of the process whose exponential functional is taken: J is the
  // I functional of the dual of the tilted model.
  auto exponent = [&](double lambda) {
    return which == Functional::I ? psi(model, lambda) : psi(model, -lambda);
  };
  if (which == Functional::I) {
    require_hits_zero(model);
  } else {
    if (model.killing() != 0.0) {
      throw Error(ErrorCode::PreconditionFailed, "J moments need a conservative model");
    }
    if (!(psi_prime(model, 0.0) > 0.0)) {
      throw Error(ErrorCode::NotDriftingUp, "J is not finite for a model drifting to -inf");
    }
  }
  const double a = model.alpha();
  if (p > 0.0) {
    const double v = exponent(p / a);
    if (!(v < -tol)) {
      throw Error(ErrorCode::HypothesisViolated,
                  "moment of order " + std::to_string(p) + " is infinite: psi(p/alpha) = " +
                      std::to_string(v) + " is not negative");
    }
  } else if (p < 0.0 && p > -1.0) {
    const double v = exponent((p + 1.0) / a);
    if (v > tol) {
      throw Error(ErrorCode::HypothesisViolated,
                  "negative moment of order " + std::to_string(p) +
                      " not covered: psi((p+1)/alpha) = " + std::to_string(v) + " > 0");
    }
  } else if (p == -1.0) {
    const bool killed = which == Functional::I && model.killing() > 0.0;
    const double slope = std::abs(psi_prime(model, 0.0));
    if (killed || !std::isfinite(slope)) {
      throw Error(ErrorCode::HypothesisViolated,
                  "the order -1 moment needs an unkilled model with finite mean");
    }
  } else if (p < -1.0) {
    throw Error(ErrorCode::HypothesisViolated, "moments of order below -1 are not supported");
  }
}

ExpFunEstimate moment(const LevyModel& model, Functional which, double p, std::size_t n,
                      const SimConfig& config, const MomentOptions& options) {
  check_moment_hypothesis(model, which, p);
  config.validate();
  if (n == 0) throw Error(ErrorCode::PreconditionFailed, "need at least one sample");

  ExpFunEstimate est;
  est.n = n;
  if (p == 0.0) {
    est.value = 1.0;
    est.method = "trivial";
    return est;
  }

  MomentMethod method = options.method;
  if (which == Functional::J) method = MomentMethod::Plain;
  if (method == MomentMethod::Auto) {
    if (p < 0.0 && model.killing() > 0.0) {
      method = MomentMethod::Conditioned;
    } else if (p > 0.0 && !(psi(model, 2.0 * p / model.alpha()) < 0.0)) {
      method = MomentMethod::Regenerative;  // F^p has infinite variance
    } else {
      method = MomentMethod::Plain;
    }
  }
  if (method == MomentMethod::Conditioned && !(p < 0.0 && model.killing() > 0.0)) {
    throw Error(ErrorCode::PreconditionFailed, "conditioning needs p < 0 and a killed model");
  }
  if (method == MomentMethod::Regenerative && !(p > 0.0)) {
    throw Error(ErrorCode::PreconditionFailed, "the regenerative split needs p > 0");
  }

  const double split =
      options.split_time > 0.0 ? options.split_time : default_split_time(model, p);
  const std::vector<FunctionalDraw> draws = parallel_map<FunctionalDraw>(n, [&](std::size_t i) {
    const SimConfig c = config.child(i);
    switch (method) {
      case MomentMethod::Conditioned:
        return sample_I_conditioned(model, c, p, options.condition_window);
      case MomentMethod::Regenerative:
        return sample_I_split(model, c, p, split, kIRelTol);
      default: {
        FunctionalDraw d = which == Functional::I ? sample_I(model, c) : sample_J(model, c);
        d.value = std::pow(d.value, p);
        return d;
      }
    }
  });

  MeanAccumulator acc;
  double max_tail = 0.0;
  for (const FunctionalDraw& d : draws) {
    if (d.censored) {
      ++est.censored;
      continue;
    }
    acc.add(d.value);
    max_tail = std::max(max_tail, d.tail_bound);
  }
  est.value = acc.mean();
  est.std_err = acc.std_err();
  if (method == MomentMethod::Regenerative) {
    const double denom = -std::expm1(split * psi(model, p / model.alpha()));
    est.value /= denom;
    est.std_err /= denom;
  }
  est.truncation_note = format_note(config, which, max_tail);
  switch (method) {
    case MomentMethod::Conditioned: est.method = "conditioned"; break;
    case MomentMethod::Regenerative: est.method = "regenerative"; break;
    default: est.method = "plain"; break;
  }
  const double lambda = (p > 0.0 ? p : p + 1.0) / model.alpha();
  add_near_critical_warning(est.warnings,
                            which == Functional::I ? psi(model, lambda) : psi(model, -lambda));
  return est;
}

namespace {

IdentityReport combine(const ExpFunEstimate& lhs, double rhs_factor, const ExpFunEstimate& rhs) {
  IdentityReport r;
  r.lhs = lhs.value;
  r.se_lhs = lhs.std_err;
  r.rhs = rhs_factor * rhs.value;
  r.se_rhs = std::abs(rhs_factor) * rhs.std_err;
  r.se = std::hypot(r.se_lhs, r.se_rhs);
  r.z = z_score(r.lhs, r.se_lhs, r.rhs, r.se_rhs);
  r.n = lhs.n;
  r.censored = lhs.censored + rhs.censored;
  r.warnings = lhs.warnings;
  r.warnings.insert(r.warnings.end(), rhs.warnings.begin(), rhs.warnings.end());
  return r;
}

}  // namespace

CramerReport require_cramer_root(const LevyModel& model) {
  CramerReport rep = cramer_root(model);
  if (!rep.theta) throw Error(ErrorCode::NoCramerRoot, "psi has no positive root");
  if (!(*rep.alpha_theta < 1.0)) {
    throw Error(ErrorCode::PreconditionFailed, "needs alpha * theta < 1");
  }
  return rep;
}

IdentityReport recursion_check(const LevyModel& model, double beta, std::size_t n,
                               const SimConfig& config) {
  classify_beta(model, beta);
  const double psi_beta = psi(model, beta);
  if (!(psi_beta < -psi_tolerance(model))) {
    throw Error(ErrorCode::HypothesisViolated,
                "recursion needs psi(beta) < 0, got " + std::to_string(psi_beta));
  }
  const double p = model.alpha() * beta;
  const ExpFunEstimate lhs = moment(model, Functional::I, p, n, config.child(1));
  const ExpFunEstimate rhs = moment(model, Functional::I, p - 1.0, n, config.child(2));
  return combine(lhs, p / -psi_beta, rhs);
}

IdentityReport dual_identity_check(const LevyModel& model, std::size_t n, const SimConfig& config) {
  const CramerReport rep = require_cramer_root(model);
  const double p = *rep.alpha_theta - 1.0;
  const LevyModel tilted = esscher(model, *rep.theta);
  const ExpFunEstimate lhs = moment(tilted, Functional::J, p, n, config.child(1));
  const ExpFunEstimate rhs = moment(model, Functional::I, p, n, config.child(2));
  return combine(lhs, 1.0, rhs);
}

NegativeMomentReport negative_moment_check(const LevyModel& model, std::size_t n,
                                           const SimConfig& config) {
  const CramerReport rep = require_cramer_root(model);
  const LevyModel tilted = esscher(model, *rep.theta);
  NegativeMomentReport out;
  const double slope = *rep.psi_prime_at_theta;
  if (std::isfinite(slope)) {
    const ExpFunEstimate lhs = moment(tilted, Functional::J, -1.0, n, config.child(1));
    ExpFunEstimate exact;
    exact.value = slope / model.alpha();
    out.report = combine(lhs, 1.0, exact);
    return out;
  }

  // E^tilt(J^-1) = psi'(theta) / alpha = inf: watch the running mean instead.
  out.derivative_infinite = true;
  const SimConfig c = config.child(1);
  const std::vector<FunctionalDraw> draws = parallel_map<FunctionalDraw>(
      n, [&](std::size_t i) { return sample_J(tilted, c.child(i)); });
  MeanAccumulator acc;
  std::size_t next_report = std::max<std::size_t>(n / 8, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!draws[i].censored) acc.add(1.0 / draws[i].value);
    if (i + 1 == next_report || i + 1 == n) {
      out.prefix_sizes.push_back(i + 1);
      out.running_estimates.push_back(acc.mean());
      next_report *= 2;
    }
  }
  const std::size_t k = out.running_estimates.size();
  out.stabilizes = k >= 2 && std::abs(out.running_estimates[k - 1] / out.running_estimates[k - 2] -
                                      1.0) < 0.01;
  out.report.lhs = acc.mean();
  out.report.se_lhs = acc.std_err();
  out.report.rhs = kInf;
  out.report.se = acc.std_err();
  out.report.z = std::numeric_limits<double>::quiet_NaN();
  out.report.n = n;
  return out;
}

std::string to_json(const IdentityReport& report) {
  nlohmann::json j;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  j["lhs"] = finite_or_null(report.lhs);
  j["rhs"] = finite_or_null(report.rhs);
  j["se"] = finite_or_null(report.se);
  j["z"] = finite_or_null(report.z);
  j["n"] = report.n;
  j["censored"] = report.censored;
  return j.dump();
}

}  // namespace pssmp
