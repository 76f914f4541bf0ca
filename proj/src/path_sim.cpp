#include "pssmp/path_sim.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "pssmp/error.hpp"
#include "pssmp/parallel.hpp"

namespace pssmp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double draw_law(const JumpLaw& law, Rng& rng) {
  if (const auto* e = std::get_if<ExponentialJumps>(&law)) return e->sign * rng.exponential() / e->rate;
  if (const auto* t = std::get_if<TwoSidedExponentialJumps>(&law)) {
    if (rng.uniform() < t->p_plus) return rng.exponential() / t->rate_plus;
    return -rng.exponential() / t->rate_minus;
  }
  return std::get<PointMassJumps>(law).value;
}

// Pareto(delta, beta) proposals thinned by exp(-q (x - delta)).
double draw_tempered(const TemperedPower& tp, Rng& rng) {
  for (;;) {
    const double x = tp.delta() * std::pow(rng.uniform(), -1.0 / tp.beta());
    if (tp.q() == 0.0 || rng.uniform() < std::exp(-tp.q() * (x - tp.delta()))) return tp.sign() * x;
  }
}

std::optional<double> draw_zeta(const LevyModel& model, Rng& rng) {
  if (model.killing() <= 0.0) return std::nullopt;
  return rng.exponential() / model.killing();
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon) {
    throw Error(ErrorCode::PreconditionFailed, "simulation config needs 0 < dt <= horizon");
  }
}

LevyStepper::LevyStepper(const LevyModel& model, double dt, Rng rng)
    : LevyStepper(model, dt, rng, std::nullopt) {
  // Stream order: first jump clock, then the killing time, then path draws.
  zeta_ = draw_zeta(model, rng_);
}

LevyStepper::LevyStepper(const LevyModel& model, double dt, Rng rng, std::optional<double> zeta)
    : model_(&model),
      dt_(dt),
      rng_(rng),
      drift_(model.drift()),
      sigma_(std::sqrt(model.gaussian())),
      jump_rate_(model.total_jump_rate()),
      zeta_(zeta),
      next_jump_(kInf) {
  if (jump_rate_ > 0.0) next_jump_ = rng_.exponential() / jump_rate_;
}

double LevyStepper::draw_jump() {
  double pick = rng_.uniform() * jump_rate_;
  const auto& specs = model_->jumps();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const double rate = std::visit(
        [](const auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CompoundPoisson>) return s.rate;
          else return s.total_intensity();
        },
        specs[i]);
    if (pick < rate || i + 1 == specs.size()) {
      if (const auto* cp = std::get_if<CompoundPoisson>(&specs[i])) return draw_law(cp->law, rng_);
      return draw_tempered(std::get<TemperedPower>(specs[i]), rng_);
    }
    pick -= rate;
  }
  return 0.0;
}

Segment LevyStepper::next(double limit) {
  Segment seg{t_, t_, value(), value(), value(), false};
  if (dead_) return seg;

  const double grid = static_cast<double>(grid_index_ + 1) * dt_;
  const double zeta = zeta_.value_or(kInf);
  double t_end = std::min({grid, next_jump_, zeta, limit});
  if (!(t_end > t_)) t_end = std::min(grid, limit);

  const double h = t_end - t_;
  if (sigma_ > 0.0) gauss_ += sigma_ * std::sqrt(h) * rng_.normal();
  t_ = t_end;
  seg.t_end = t_end;
  seg.x_end_left = value();

  if (t_end == zeta) {
    dead_ = true;
    seg.killed = true;
  } else if (t_end == next_jump_) {
    jumps_ += draw_jump();
    next_jump_ += rng_.exponential() / jump_rate_;
  }
  if (t_end == grid) ++grid_index_;
  seg.x_end = value();
  return seg;
}

LevyPath sample_levy_path(const LevyModel& model, const SimConfig& config) {
  config.validate();
  LevyStepper stepper(model, config.dt, config.rng());
  LevyPath path;
  path.times.push_back(0.0);
  path.values.push_back(0.0);
  path.left_values.push_back(0.0);
  while (!stepper.dead() && stepper.time() < config.horizon) {
    const Segment s = stepper.next(config.horizon);
    path.times.push_back(s.t_end);
    path.values.push_back(s.x_end);
    path.left_values.push_back(s.x_end_left);
    if (s.killed) path.zeta = s.t_end;
  }
  path.truncated = !path.zeta.has_value();
  return path;
}

std::vector<IncrementDraw> sample_increment_batch(const LevyModel& model, double t, std::size_t n,
                                                  const SimConfig& config) {
  config.validate();
  if (!(t > 0.0) || t > config.horizon) {
    throw Error(ErrorCode::PreconditionFailed, "increment time must lie in (0, horizon]");
  }
  return parallel_map<IncrementDraw>(n, [&](std::size_t i) {
    LevyStepper stepper(model, config.dt, config.child(i).rng());
    while (!stepper.dead() && stepper.time() < t) stepper.next(t);
    return IncrementDraw{stepper.dead() ? std::nan("") : stepper.value(), stepper.dead()};
  });
}

void write_jsonl(std::ostream& out, const LevyPath& path) {
  nlohmann::json rec;
  rec["t"] = path.times;
  rec["x"] = path.values;
  rec["zeta"] = path.zeta ? nlohmann::json(*path.zeta) : nlohmann::json(nullptr);
  out << rec.dump() << '\n';
}

}  // namespace pssmp
