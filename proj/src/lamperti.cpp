#include "pssmp/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "pssmp/error.hpp"
#include "pssmp/parallel.hpp"

namespace pssmp {

void require_hits_zero(const LevyModel& model) {
  if (model.killing() > 0.0) return;
  const double slope = psi_prime(model, 0.0);
  if (!(slope < 0.0)) {
    throw Error(ErrorCode::ModelDoesNotHitZero,
                "unkilled model with psi'(0+) = " + std::to_string(slope) + " does not drift to -inf");
  }
}

PssmpPath levy_to_pssmp(const LevyPath& path, double x0, double alpha, double rel_tol) {
  if (!(x0 > 0.0)) throw Error(ErrorCode::StartsAtZero, "x0 must be > 0");
  if (path.times.empty()) throw Error(ErrorCode::PreconditionFailed, "empty Levy path");

  PssmpPath out;
  out.x0 = x0;
  out.alpha = alpha;
  const double scale = std::pow(x0, 1.0 / alpha);
  const std::size_t n = path.size();
  out.times.reserve(n);
  out.values.reserve(n);
  out.left_values.reserve(n);

  out.times.push_back(0.0);
  out.values.push_back(x0 * std::exp(path.values[0]));
  out.left_values.push_back(out.values.back());

  ConvergenceMonitor monitor(rel_tol);
  double area = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    area += exp_segment_integral(path.times[k] - path.times[k - 1], path.values[k - 1],
                                 path.left_values[k], alpha);
    out.times.push_back(scale * area);
    out.left_values.push_back(x0 * std::exp(path.left_values[k]));
    out.values.push_back(x0 * std::exp(path.values[k]));

    const bool killed_here = path.zeta && k + 1 == n;
    if (killed_here) {
      out.values.back() = 0.0;
      out.t0 = out.times.back();
      out.hit_by_jump = true;
      out.levy_zeta = path.zeta;
      return out;
    }
    if (!path.zeta && monitor.update(path.times[k], area)) {
      out.values.back() = 0.0;
      out.t0 = out.times.back();
      return out;
    }
  }
  out.truncated = true;
  return out;
}

LevyPath pssmp_to_levy(const PssmpPath& path) {
  if (!(path.x0 > 0.0)) throw Error(ErrorCode::StartsAtZero, "x0 must be > 0");
  const double inv_scale = std::pow(path.x0, -1.0 / path.alpha);
  const std::size_t n = path.times.size();

  LevyPath out;
  out.times.reserve(n);
  out.values.reserve(n);
  out.left_values.reserve(n);
  out.times.push_back(0.0);
  out.values.push_back(std::log(path.values[0] / path.x0));
  out.left_values.push_back(out.values.back());

  double clock = 0.0;  // B(u), the Levy time
  for (std::size_t k = 1; k < n; ++k) {
    const double a = out.values.back();
    const double b = std::log(path.left_values[k] / path.x0);
    const double du = path.times[k] - path.times[k - 1];
    // Invert du = x0^(1/alpha) h e^(a/alpha) expm1(d)/d for the segment length h.
    clock += du * inv_scale * std::exp(-a / path.alpha) / expm1_ratio((b - a) / path.alpha);
    out.times.push_back(clock);
    out.left_values.push_back(b);
    const bool at_zero = path.t0 && k + 1 == n;
    out.values.push_back(at_zero ? b : std::log(path.values[k] / path.x0));
  }
  if (path.t0 && path.hit_by_jump) out.zeta = out.times.back();
  out.truncated = !out.zeta.has_value();
  return out;
}

double PssmpPath::hitting_time() const {
  if (!t0) throw Error(ErrorCode::HorizonTooShort, "path was truncated before reaching 0");
  return *t0;
}

double PssmpPath::value_at(double u) const {
  if (u < 0.0) throw Error(ErrorCode::PreconditionFailed, "negative time");
  if (t0 && u >= *t0) return 0.0;
  if (u > times.back()) {
    throw Error(ErrorCode::HorizonTooShort, "time lies beyond the simulated path");
  }
  const auto it = std::upper_bound(times.begin(), times.end(), u);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  if (k + 1 >= times.size()) return values[k];
  const double a = std::log(values[k] / x0);
  const double b = std::log(left_values[k + 1] / x0);
  const double r = (u - times[k]) / (times[k + 1] - times[k]);
  const double sigma = exp_segment_inverse_fraction(r, a, b, alpha);
  return x0 * std::exp(a + (b - a) * sigma);
}

PssmpPath sample_pssmp_path(const LevyModel& model, double x0, const SimConfig& config,
                            double rel_tol) {
  config.validate();
  LevyStepper stepper(model, config.dt, config.rng());
  ConvergenceMonitor monitor(rel_tol);
  const bool watch = model.killing() == 0.0;

  LevyPath path;
  path.times.push_back(0.0);
  path.values.push_back(0.0);
  path.left_values.push_back(0.0);
  double area = 0.0;
  while (!stepper.dead() && stepper.time() < config.horizon) {
    const Segment s = stepper.next(config.horizon);
    path.times.push_back(s.t_end);
    path.values.push_back(s.x_end);
    path.left_values.push_back(s.x_end_left);
    if (s.killed) path.zeta = s.t_end;
    area += exp_segment_integral(s.t_end - s.t_start, s.x_start, s.x_end_left, model.alpha());
    if (watch && monitor.update(s.t_end, area)) break;
  }
  path.truncated = !path.zeta.has_value();
  return levy_to_pssmp(path, x0, model.alpha(), rel_tol);
}

std::vector<HittingTimeDraw> hitting_time_samples(const LevyModel& model, double x0, std::size_t n,
                                                  const SimConfig& config) {
  require_hits_zero(model);
  if (!(x0 > 0.0)) throw Error(ErrorCode::StartsAtZero, "x0 must be > 0");
  return parallel_map<HittingTimeDraw>(n, [&](std::size_t i) {
    const PssmpPath p = sample_pssmp_path(model, x0, config.child(i));
    if (p.t0) return HittingTimeDraw{*p.t0, false};
    return HittingTimeDraw{p.times.back(), true};
  });
}

void write_jsonl(std::ostream& out, const PssmpPath& path) {
  nlohmann::json rec;
  rec["t"] = path.times;
  rec["x"] = path.values;
  rec["zeta"] = path.levy_zeta ? nlohmann::json(*path.levy_zeta) : nlohmann::json(nullptr);
  rec["t0"] = path.t0 ? nlohmann::json(*path.t0) : nlohmann::json(nullptr);
  out << rec.dump() << '\n';
}

}  // namespace pssmp
