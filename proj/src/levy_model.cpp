#include "pssmp/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "pssmp/error.hpp"

namespace pssmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadratureTolerance = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Integral over (delta, inf) by double-exponential quadrature.
template <class F>
double integrate_tail(F f, double delta) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  return integrator.integrate(
      [&](double x) { return f(x); }, delta, kInf, kQuadratureTolerance * 1e-2, &error, &l1);
}

// phi(mu) = int_delta^inf (exp(mu x) - 1) exp(-q x) x^(-1-beta) dx, finite for mu <= q.
double tempered_phi(const TemperedPower& tp, double mu) {
  if (mu > tp.q()) return kInf;
  if (mu == 0.0) return 0.0;
  const double q = tp.q();
  const double b = tp.beta();
  return integrate_tail(
      [&](double x) {
        // expm1 keeps the small-x part accurate; the split form avoids inf * 0.
        const double diff = std::abs(mu * x) < 1.0 ? std::expm1(mu * x) * std::exp(-q * x)
                                                   : std::exp((mu - q) * x) - std::exp(-q * x);
        return diff * std::pow(x, -1.0 - b);
      },
      tp.delta());
}

double tempered_phi_prime(const TemperedPower& tp, double mu) {
  if (mu >= tp.q()) return kInf;
  const double rate = tp.q() - mu;
  const double b = tp.beta();
  return integrate_tail([&](double x) { return std::pow(x, -b) * std::exp(-rate * x); },
                        tp.delta());
}

// Moment transform E(exp(lambda Y)) of one jump.
double law_mgf(const JumpLaw& law, double lambda) {
  return std::visit(
      Overloaded{
          [&](const ExponentialJumps& e) {
            const double s = e.sign * lambda;
            return s < e.rate ? e.rate / (e.rate - s) : kInf;
          },
          [&](const TwoSidedExponentialJumps& t) {
            double up = 0.0;
            double down = 0.0;
            if (t.p_plus > 0.0) up = lambda < t.rate_plus ? t.rate_plus / (t.rate_plus - lambda) : kInf;
            if (t.p_plus < 1.0)
              down = lambda > -t.rate_minus ? t.rate_minus / (t.rate_minus + lambda) : kInf;
            return t.p_plus * up + (1.0 - t.p_plus) * down;
          },
          [&](const PointMassJumps& p) { return std::exp(lambda * p.value); },
      },
      law);
}

double law_mgf_prime(const JumpLaw& law, double lambda) {
  return std::visit(
      Overloaded{
          [&](const ExponentialJumps& e) {
            const double s = e.sign * lambda;
            if (s >= e.rate) return e.sign * kInf;
            return e.sign * e.rate / ((e.rate - s) * (e.rate - s));
          },
          [&](const TwoSidedExponentialJumps& t) {
            double up = 0.0;
            double down = 0.0;
            if (t.p_plus > 0.0) {
              up = lambda < t.rate_plus ? t.rate_plus / ((t.rate_plus - lambda) * (t.rate_plus - lambda))
                                        : kInf;
            }
            if (t.p_plus < 1.0) {
              down = lambda > -t.rate_minus
                         ? -t.rate_minus / ((t.rate_minus + lambda) * (t.rate_minus + lambda))
                         : -kInf;
            }
            return t.p_plus * up + (1.0 - t.p_plus) * down;
          },
          [&](const PointMassJumps& p) { return p.value * std::exp(lambda * p.value); },
      },
      law);
}

ExponentDomain law_domain(const JumpLaw& law) {
  ExponentDomain d{-kInf, false, kInf, false};
  std::visit(Overloaded{
                 [&](const ExponentialJumps& e) {
                   if (e.sign > 0) d.hi = e.rate;
                   else d.lo = -e.rate;
                 },
                 [&](const TwoSidedExponentialJumps& t) {
                   if (t.p_plus > 0.0) d.hi = t.rate_plus;
                   if (t.p_plus < 1.0) d.lo = -t.rate_minus;
                 },
                 [](const PointMassJumps&) {},
             },
             law);
  return d;
}

void intersect(ExponentDomain& d, const ExponentDomain& other) {
  if (other.hi < d.hi || (other.hi == d.hi && !other.hi_closed)) {
    d.hi = other.hi;
    d.hi_closed = other.hi_closed;
  }
  if (other.lo > d.lo || (other.lo == d.lo && !other.lo_closed)) {
    d.lo = other.lo;
    d.lo_closed = other.lo_closed;
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidModel, what);
}

void validate_law(const JumpLaw& law) {
  std::visit(Overloaded{
                 [](const ExponentialJumps& e) {
                   require(e.rate > 0.0, "exponential jump rate must be > 0");
                   require(e.sign == 1 || e.sign == -1, "exponential jump sign must be +1 or -1");
                 },
                 [](const TwoSidedExponentialJumps& t) {
                   require(t.rate_plus > 0.0 && t.rate_minus > 0.0,
                           "two-sided exponential rates must be > 0");
                   require(t.p_plus >= 0.0 && t.p_plus <= 1.0, "p_plus must lie in [0, 1]");
                 },
                 [](const PointMassJumps& p) {
                   require(std::isfinite(p.value), "point mass value must be finite");
                 },
             },
             law);
}

}  // namespace

// ---------------------------------------------------------------------------

TemperedPower::TemperedPower(double q, double beta, double delta, int sign)
    : q_(q), beta_(beta), delta_(delta), sign_(sign), total_intensity_(0.0) {
  require(q >= 0.0 && std::isfinite(q), "tempered power q must be >= 0");
  require(beta > 0.0 && beta < 1.0, "tempered power beta must lie in (0, 1)");
  require(delta > 0.0 && std::isfinite(delta), "tempered power delta must be > 0");
  require(sign == 1 || sign == -1, "tempered power sign must be +1 or -1");
  total_intensity_ = integrate_tail(
      [&](double x) { return std::exp(-q * x) * std::pow(x, -1.0 - beta); }, delta);
}

double TemperedPower::truncation_bias_bound() const noexcept {
  return std::pow(delta_, 1.0 - beta_) / (1.0 - beta_);
}

bool ExponentDomain::contains(double lambda) const noexcept {
  const bool above = lo_closed ? lambda >= lo : lambda > lo;
  const bool below = hi_closed ? lambda <= hi : lambda < hi;
  return above && below;
}

LevyModel::LevyModel(double drift, double gaussian, std::vector<JumpSpec> jumps, double killing,
                     double alpha)
    : drift_(drift), gaussian_(gaussian), jumps_(std::move(jumps)), killing_(killing), alpha_(alpha) {
  require(std::isfinite(drift), "drift must be finite");
  require(gaussian >= 0.0 && std::isfinite(gaussian), "gaussian coefficient must be >= 0");
  require(killing >= 0.0 && std::isfinite(killing), "killing rate must be >= 0");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be > 0");
  for (const auto& j : jumps_) {
    if (const auto* cp = std::get_if<CompoundPoisson>(&j)) {
      require(cp->rate > 0.0 && std::isfinite(cp->rate), "compound Poisson rate must be > 0");
      validate_law(cp->law);
    }
  }
}

double LevyModel::total_jump_rate() const noexcept {
  double total = 0.0;
  for (const auto& j : jumps_) {
    total += std::visit(Overloaded{[](const CompoundPoisson& cp) { return cp.rate; },
                                   [](const TemperedPower& tp) { return tp.total_intensity(); }},
                        j);
  }
  return total;
}

ExponentDomain LevyModel::domain() const {
  ExponentDomain d{-kInf, false, kInf, false};
  for (const auto& j : jumps_) {
    if (const auto* cp = std::get_if<CompoundPoisson>(&j)) {
      intersect(d, law_domain(cp->law));
    } else {
      const auto& tp = std::get<TemperedPower>(j);
      if (tp.sign() > 0) intersect(d, {-kInf, false, tp.q(), true});
      else intersect(d, {-tp.q(), true, kInf, false});
    }
  }
  return d;
}

double LevyModel::psi_accuracy() const noexcept {
  double acc = 1e-14 * (1.0 + std::abs(killing_));
  for (const auto& j : jumps_) {
    if (std::holds_alternative<TemperedPower>(j)) acc += kQuadratureTolerance;
  }
  return acc;
}

LevyModel LevyModel::with_killing(double killing) const {
  return LevyModel(drift_, gaussian_, jumps_, killing, alpha_);
}

LevyModel LevyModel::killed_at_root(double root) const {
  const double unkilled = psi(with_killing(0.0), root);
  if (!std::isfinite(unkilled) || unkilled < 0.0) {
    throw Error(ErrorCode::InvalidModel,
                "cannot choose a nonnegative killing rate making psi(" + std::to_string(root) +
                    ") vanish");
  }
  return with_killing(unkilled);
}

// ---------------------------------------------------------------------------

double psi(const LevyModel& model, double lambda) {
  double value = -model.killing() + model.drift() * lambda +
                 0.5 * model.gaussian() * lambda * lambda;
  for (const auto& j : model.jumps()) {
    double part = 0.0;
    if (const auto* cp = std::get_if<CompoundPoisson>(&j)) {
      const double m = law_mgf(cp->law, lambda);
      if (!std::isfinite(m)) return kInf;
      part = cp->rate * (m - 1.0);
    } else {
      const auto& tp = std::get<TemperedPower>(j);
      part = tempered_phi(tp, tp.sign() * lambda);
    }
    if (!std::isfinite(part)) return kInf;
    value += part;
  }
  return value;
}

double psi_prime(const LevyModel& model, double lambda) {
  double value = model.drift() + model.gaussian() * lambda;
  for (const auto& j : model.jumps()) {
    if (const auto* cp = std::get_if<CompoundPoisson>(&j)) {
      value += cp->rate * law_mgf_prime(cp->law, lambda);
    } else {
      const auto& tp = std::get<TemperedPower>(j);
      value += tp.sign() * tempered_phi_prime(tp, tp.sign() * lambda);
    }
  }
  return value;
}

CramerReport cramer_root(const LevyModel& model, double tol) {
  const double slope0 = psi_prime(model, 0.0);
  if (model.killing() == 0.0 && !(slope0 < 0.0)) {
    throw Error(ErrorCode::ModelDoesNotHitZero,
                "conservative model with psi'(0+) = " + std::to_string(slope0) + " >= 0");
  }

  const ExponentDomain dom = model.domain();
  const double boundary_tol = std::max(tol, model.psi_accuracy());
  CramerReport report{};
  report.domain_sup = dom.hi;
  report.domain_sup_closed = dom.hi_closed;

  // Find hi with psi(hi) > 0, or conclude psi < 0 on (0, sup E).
  std::optional<double> hi;
  if (std::isfinite(dom.hi) && dom.hi_closed) {
    const double at_sup = psi(model, dom.hi);
    if (std::abs(at_sup) <= boundary_tol) report.theta = dom.hi;
    else if (at_sup > 0.0) hi = dom.hi;
  } else if (std::isfinite(dom.hi)) {
    for (int k = 1; k <= 60 && !hi; ++k) {
      const double lambda = dom.hi * (1.0 - std::ldexp(1.0, -k));
      if (lambda > 0.0 && psi(model, lambda) > 0.0) hi = lambda;
    }
  } else {
    for (double lambda = 1.0; lambda <= 1e12 && !hi; lambda *= 2.0) {
      if (psi(model, lambda) > 0.0) hi = lambda;
    }
  }

  if (hi) {
    double lo = 0.0;
    double up = *hi;
    for (int iter = 0; iter < 400 && up - lo > tol; ++iter) {
      const double mid = 0.5 * (lo + up);
      if (mid <= lo || mid >= up) break;
      if (psi(model, mid) <= 0.0) lo = mid;
      else up = mid;
    }
    report.theta = std::abs(psi(model, lo)) <= std::abs(psi(model, up)) ? lo : up;
  }

  const double inv_alpha = 1.0 / model.alpha();
  if (report.theta) {
    const double theta = *report.theta;
    report.psi_prime_at_theta = psi_prime(model, theta);
    report.alpha_theta = model.alpha() * theta;
    report.jump_in_range = {0.0, std::min(theta, inv_alpha), false};
    report.continuous_extension_exists = *report.alpha_theta < 1.0;
  } else {
    if (dom.hi < inv_alpha) report.jump_in_range = {0.0, dom.hi, dom.hi_closed};
    else report.jump_in_range = {0.0, inv_alpha, false};
    report.continuous_extension_exists = false;
  }
  return report;
}

LevyModel esscher(const LevyModel& model, double theta) {
  if (!model.domain().contains(theta)) {
    throw Error(ErrorCode::TiltOutsideDomain,
                "tilt " + std::to_string(theta) + " lies outside the exponent domain");
  }
  const double at_theta = psi(model, theta);
  if (std::abs(at_theta) > std::max(kCramerTolerance, model.psi_accuracy())) {
    throw Error(ErrorCode::NotCramerRoot,
                "psi(" + std::to_string(theta) + ") = " + std::to_string(at_theta));
  }

  std::vector<JumpSpec> tilted;
  tilted.reserve(model.jumps().size());
  for (const auto& j : model.jumps()) {
    if (const auto* cp = std::get_if<CompoundPoisson>(&j)) {
      const double m = law_mgf(cp->law, theta);
      JumpLaw law = std::visit(
          Overloaded{
              [&](const ExponentialJumps& e) -> JumpLaw {
                return ExponentialJumps{e.rate - e.sign * theta, e.sign};
              },
              [&](const TwoSidedExponentialJumps& t) -> JumpLaw {
                double p = t.p_plus;
                if (p > 0.0 && p < 1.0) p = p * (t.rate_plus / (t.rate_plus - theta)) / m;
                return TwoSidedExponentialJumps{t.rate_plus - theta, t.rate_minus + theta, p};
              },
              [&](const PointMassJumps& p) -> JumpLaw { return p; },
          },
          cp->law);
      tilted.emplace_back(CompoundPoisson{cp->rate * m, law});
    } else {
      const auto& tp = std::get<TemperedPower>(j);
      tilted.emplace_back(TemperedPower(tp.q() - tp.sign() * theta, tp.beta(), tp.delta(), tp.sign()));
    }
  }
  return LevyModel(model.drift() + model.gaussian() * theta, model.gaussian(), std::move(tilted),
                   0.0, model.alpha());
}

LevyModel dual(const LevyModel& model) {
  std::vector<JumpSpec> reflected;
  reflected.reserve(model.jumps().size());
  for (const auto& j : model.jumps()) {
    if (const auto* cp = std::get_if<CompoundPoisson>(&j)) {
      JumpLaw law = std::visit(
          Overloaded{
              [](const ExponentialJumps& e) -> JumpLaw { return ExponentialJumps{e.rate, -e.sign}; },
              [](const TwoSidedExponentialJumps& t) -> JumpLaw {
                return TwoSidedExponentialJumps{t.rate_minus, t.rate_plus, 1.0 - t.p_plus};
              },
              [](const PointMassJumps& p) -> JumpLaw { return PointMassJumps{-p.value}; },
          },
          cp->law);
      reflected.emplace_back(CompoundPoisson{cp->rate, law});
    } else {
      const auto& tp = std::get<TemperedPower>(j);
      reflected.emplace_back(TemperedPower(tp.q(), tp.beta(), tp.delta(), -tp.sign()));
    }
  }
  return LevyModel(-model.drift(), model.gaussian(), std::move(reflected), model.killing(),
                   model.alpha());
}

BetaClass classify_beta(const LevyModel& model, double beta) {
  if (!(beta > 0.0 && beta < 1.0 / model.alpha())) {
    throw Error(ErrorCode::BetaOutOfRange,
                "beta = " + std::to_string(beta) + " must lie in (0, 1/alpha)");
  }
  const double value = psi(model, beta);
  if (std::abs(value) <= std::max(kCramerTolerance, model.psi_accuracy())) return BetaClass::Critical;
  return value < 0.0 ? BetaClass::JumpInExists : BetaClass::Neither;
}

}  // namespace pssmp
