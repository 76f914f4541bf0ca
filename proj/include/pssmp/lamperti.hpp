#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pssmp/levy_model.hpp"
#include "pssmp/path_sim.hpp"

namespace pssmp {

// ---------------------------------------------------------------------------
// Closed-form pieces of the time change A(t) = int_0^t exp(xi_s / alpha) ds
// ---------------------------------------------------------------------------

/// expm1(d) / d, continuous at d = 0.
inline double expm1_ratio(double d) noexcept {
  return std::abs(d) < 1e-8 ? 1.0 + 0.5 * d : std::expm1(d) / d;
}

/// int_0^h exp((a + (b - a) s / h) / alpha) ds.
inline double exp_segment_integral(double h, double a, double b, double alpha) noexcept {
  return h * std::exp(a / alpha) * expm1_ratio((b - a) / alpha);
}

/// Fraction sigma in [0, 1] of a linear segment at which the exponential
/// integral reaches the fraction r of its segment total.
inline double exp_segment_inverse_fraction(double r, double a, double b, double alpha) noexcept {
  const double d = (b - a) / alpha;
  if (std::abs(d) < 1e-12) return r;
  return std::log1p(r * std::expm1(d)) / d;
}

/// Decides when A(t) (or the functional J) has converged on a path without
/// killing: at checkpoints every `window` time units, stop once the last
/// window added less than rel_tol of the running total.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(double rel_tol, double window = 1.0) : rel_tol_(rel_tol), window_(window) {}

  bool update(double t, double total) noexcept {
    if (t < last_check_ + window_) return false;
    const bool done = total - last_total_ < rel_tol_ * total;
    last_check_ = t;
    last_total_ = total;
    return done;
  }

 private:
  double rel_tol_;
  double window_;
  double last_check_ = 0.0;
  double last_total_ = 0.0;
};

inline constexpr double kIRelTol = 1e-10;
inline constexpr double kJRelTol = 1e-6;

// ---------------------------------------------------------------------------
// pssMp paths
// ---------------------------------------------------------------------------

/// Sample path of X under P_x0. Between consecutive points the underlying
/// xi is linear in its own clock, so values_at() is exact for the path.
struct PssmpPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> left_values;
  std::optional<double> t0;
  bool hit_by_jump = false;  // X_{t0-} > 0 because xi was killed
  std::optional<double> levy_zeta;  // killing time of the underlying xi
  bool truncated = false;
  double x0 = 1.0;
  double alpha = 1.0;

  /// X at time u >= 0 (0 after t0). Throws HorizonTooShort past the end of
  /// a truncated path.
  double value_at(double u) const;
  /// Throws HorizonTooShort when the path never reached 0.
  double hitting_time() const;
};

/// Lamperti map: X_u = x0 exp(xi_{tau(u x0^(-1/alpha))}) with tau the inverse
/// of A. t0 = x0^(1/alpha) A(zeta) for killed paths; for unkilled paths t0 is
/// set once A has converged (rel_tol) and the path is cut there; otherwise
/// t0 stays empty and the result is flagged truncated.
PssmpPath levy_to_pssmp(const LevyPath& path, double x0, double alpha, double rel_tol = kIRelTol);

/// Inverse map through B_t = int_0^t X_s^(-1/alpha) ds.
LevyPath pssmp_to_levy(const PssmpPath& path);

/// Simulates xi on config's stream up to killing, convergence of A or the
/// horizon, and maps it to a pssMp path started at x0.
PssmpPath sample_pssmp_path(const LevyModel& model, double x0, const SimConfig& config,
                            double rel_tol = kIRelTol);

struct HittingTimeDraw {
  double value;   // T_0, or the time reached when censored
  bool censored;  // horizon hit before T_0
};

/// n draws of T_0 under P_x0, draw i on stream config.child(i).
std::vector<HittingTimeDraw> hitting_time_samples(const LevyModel& model, double x0, std::size_t n,
                                                  const SimConfig& config);

/// Throws ModelDoesNotHitZero unless the pssMp reaches 0 in finite time.
void require_hits_zero(const LevyModel& model);

/// Same JSON-lines record as the Levy dump plus "t0".
void write_jsonl(std::ostream& out, const PssmpPath& path);

}  // namespace pssmp
