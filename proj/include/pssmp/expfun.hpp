#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pssmp/lamperti.hpp"
#include "pssmp/levy_model.hpp"
#include "pssmp/path_sim.hpp"

namespace pssmp {

struct ExpFunEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
  std::size_t censored = 0;
  std::string truncation_note;
  std::string method;
  std::vector<std::string> warnings;
};

/// One draw of an exponential functional.
struct FunctionalDraw {
  double value = 0.0;
  bool censored = false;     // neither killing nor convergence before the horizon
  double tail_bound = 0.0;   // deterministic bound on the neglected tail (J only)
};

/// I = int_0^zeta exp(xi_s / alpha) ds on config's stream.
FunctionalDraw sample_I(const LevyModel& model, const SimConfig& config, double rel_tol = kIRelTol);

/// J = int_0^inf exp(-xi_s / alpha) ds for a conservative model drifting to
/// +inf. The tail bound is alpha exp(-xi_T / alpha) / psi'(0) at the stop.
FunctionalDraw sample_J(const LevyModel& tilted, const SimConfig& config,
                        double rel_tol = kJRelTol);

enum class Functional { I, J };

enum class MomentMethod {
  Auto,
  Plain,         // mean of F^p
  Conditioned,   // p < 0, killed model: integrate the killing time out on [0, s0]
  Regenerative,  // p > 0: split at a fixed time and use the Markov property
};

struct MomentOptions {
  MomentMethod method = MomentMethod::Auto;
  double condition_window = 0.5;  // s0 for Conditioned
  double split_time = 0.0;        // t_s for Regenerative; 0 picks a default
};

/// Monte Carlo estimate of E(F^p), F = I under `model` or J under the tilted
/// model. Throws HypothesisViolated when the moment is not known to be finite.
ExpFunEstimate moment(const LevyModel& model, Functional which, double p, std::size_t n,
                      const SimConfig& config, const MomentOptions& options = {});

/// Throws HypothesisViolated unless E(F^p) < inf is guaranteed.
void check_moment_hypothesis(const LevyModel& model, Functional which, double p);

/// Cramer report of a model with a root theta and alpha theta < 1. Throws
/// NoCramerRoot without a root.
CramerReport require_cramer_root(const LevyModel& model);

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double se_lhs = 0.0;
  double se_rhs = 0.0;
  double se = 0.0;
  double z = 0.0;
  std::size_t n = 0;
  std::size_t censored = 0;
  std::vector<std::string> warnings;
};

/// E(I^(alpha beta)) against alpha beta / (-psi(beta)) E(I^(alpha beta - 1)).
IdentityReport recursion_check(const LevyModel& model, double beta, std::size_t n,
                               const SimConfig& config);

/// E^tilt(J^(alpha theta - 1)) against E(I^(alpha theta - 1)).
IdentityReport dual_identity_check(const LevyModel& model, std::size_t n, const SimConfig& config);

struct NegativeMomentReport {
  IdentityReport report;  // lhs = E^tilt(J^-1), rhs = psi'(theta) / alpha
  bool derivative_infinite = false;
  /// When the derivative is infinite: running estimates of E^tilt(J^-1) over
  /// growing prefixes of one sample, and whether they settled.
  std::vector<std::size_t> prefix_sizes;
  std::vector<double> running_estimates;
  bool stabilizes = false;
};

NegativeMomentReport negative_moment_check(const LevyModel& model, std::size_t n,
                                           const SimConfig& config);

/// {"lhs","rhs","se","z","n","censored"}.
std::string to_json(const IdentityReport& report);

}  // namespace pssmp
