#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pssmp/levy_model.hpp"
#include "pssmp/rng.hpp"

namespace pssmp {

struct SimConfig {
  double dt = 0.01;
  double horizon = 1000.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Generator for this configuration's own stream.
  Rng rng() const noexcept { return Rng(seed, stream_id); }
  /// Configuration whose stream is the k-th child of this one. Batches use
  /// child(i) for sample i; independent estimators use distinct tags.
  SimConfig child(std::uint64_t k) const noexcept {
    SimConfig c = *this;
    c.stream_id = mix_keys(stream_id, k);
    return c;
  }
  void validate() const;
};

/// Recorded sample path of xi. Between consecutive points xi is taken to be
/// linear from values[k] to left_values[k + 1]; a jump at times[k] is
/// values[k] - left_values[k]. When zeta is set the last point sits at zeta
/// and carries the pre-killing value.
struct LevyPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> left_values;
  std::optional<double> zeta;
  bool truncated = false;

  std::size_t size() const noexcept { return times.size(); }
};

/// One piece of the simulated path: xi moves linearly from x_start at t_start
/// to x_end_left just before t_end, then jumps to x_end (equal unless a jump
/// happens at t_end).
struct Segment {
  double t_start;
  double t_end;
  double x_start;
  double x_end_left;
  double x_end;
  bool killed;  // t_end is the killing time
};

/// Incremental exact-in-law generator for xi on the dt grid with jump and
/// killing times inserted exactly. Random numbers are consumed in a fixed
/// order (first jump time, killing time, then per-step draws), so every
/// consumer of the same stream sees the same path prefix.
class LevyStepper {
 public:
  LevyStepper(const LevyModel& model, double dt, Rng rng);
  /// Variant with the killing time supplied by the caller; nullopt disables
  /// killing. Used when the killing time must be handled analytically.
  LevyStepper(const LevyModel& model, double dt, Rng rng, std::optional<double> zeta);

  /// Advances to the next grid point, jump or killing time, never past limit.
  Segment next(double limit);

  double time() const noexcept { return t_; }
  double value() const noexcept { return drift_ * t_ + gauss_ + jumps_; }
  bool dead() const noexcept { return dead_; }
  std::optional<double> zeta() const noexcept { return zeta_; }

 private:
  double draw_jump();

  const LevyModel* model_;
  double dt_;
  Rng rng_;
  double drift_;
  double sigma_;
  double jump_rate_;
  std::optional<double> zeta_;
  double next_jump_;
  double t_ = 0.0;
  std::uint64_t grid_index_ = 0;
  double gauss_ = 0.0;
  double jumps_ = 0.0;
  bool dead_ = false;
};

LevyPath sample_levy_path(const LevyModel& model, const SimConfig& config);

struct IncrementDraw {
  double value;  // xi_t; meaningless when killed
  bool killed;   // zeta <= t
};

/// n independent copies of xi_t, sample i on stream config.child(i).
std::vector<IncrementDraw> sample_increment_batch(const LevyModel& model, double t, std::size_t n,
                                                  const SimConfig& config);

/// One JSON object per line: {"t": [...], "x": [...], "zeta": r|null}.
void write_jsonl(std::ostream& out, const LevyPath& path);

}  // namespace pssmp
