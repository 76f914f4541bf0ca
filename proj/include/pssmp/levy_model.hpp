#pragma once

#include <optional>
#include <variant>
#include <vector>

namespace pssmp {

/// Tolerance on |psi(theta)| accepted as "theta is the Cramer root" by the
/// tilting and classification routines.
inline constexpr double kCramerTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Jump specifications
// ---------------------------------------------------------------------------

/// Exponential jump sizes with the given rate; sign +1 for upward jumps,
/// -1 for downward jumps.
struct ExponentialJumps {
  double rate = 1.0;
  int sign = +1;
  bool operator==(const ExponentialJumps&) const = default;
};

/// Upward Exp(rate_plus) with probability p_plus, otherwise downward
/// Exp(rate_minus).
struct TwoSidedExponentialJumps {
  double rate_plus = 1.0;
  double rate_minus = 1.0;
  double p_plus = 0.5;
  bool operator==(const TwoSidedExponentialJumps&) const = default;
};

struct PointMassJumps {
  double value = 0.0;
  bool operator==(const PointMassJumps&) const = default;
};

using JumpLaw = std::variant<ExponentialJumps, TwoSidedExponentialJumps, PointMassJumps>;

struct CompoundPoisson {
  double rate = 1.0;  // events per unit time
  JumpLaw law;
  bool operator==(const CompoundPoisson&) const = default;
};

/// Jumps with intensity density exp(-q x) x^(-1-beta) on x > delta (mirrored
/// to x < -delta when sign = -1). Jumps below delta are dropped, so the
/// family stays compound Poisson; q = 0 is allowed because tilting a
/// q-tempered family at q removes the tempering.
class TemperedPower {
 public:
  TemperedPower(double q, double beta, double delta, int sign = +1);

  double q() const noexcept { return q_; }
  double beta() const noexcept { return beta_; }
  double delta() const noexcept { return delta_; }
  int sign() const noexcept { return sign_; }
  /// Integral of the intensity over (delta, inf); the compound Poisson rate.
  double total_intensity() const noexcept { return total_intensity_; }
  /// Upper bound on the mean of the dropped jumps below delta, per unit time:
  /// delta^(1-beta) / (1-beta).
  double truncation_bias_bound() const noexcept;

  bool operator==(const TemperedPower&) const = default;

 private:
  double q_;
  double beta_;
  double delta_;
  int sign_;
  double total_intensity_;
};

using JumpSpec = std::variant<CompoundPoisson, TemperedPower>;

// ---------------------------------------------------------------------------
// The model
// ---------------------------------------------------------------------------

/// Interval where psi is finite: {lambda : psi(lambda) < inf}. Endpoints may
/// be infinite; the closed flags say whether a finite endpoint belongs to it.
struct ExponentDomain {
  double lo;
  bool lo_closed;
  double hi;
  bool hi_closed;

  bool contains(double lambda) const noexcept;
};

/// A Levy process killed at an independent Exp(killing) time, together with
/// the self-similarity index alpha of the pssMp it generates.
class LevyModel {
 public:
  LevyModel(double drift, double gaussian, std::vector<JumpSpec> jumps, double killing,
            double alpha);

  double drift() const noexcept { return drift_; }
  double gaussian() const noexcept { return gaussian_; }
  const std::vector<JumpSpec>& jumps() const noexcept { return jumps_; }
  double killing() const noexcept { return killing_; }
  double alpha() const noexcept { return alpha_; }

  /// Sum of compound Poisson rates over all jump specs.
  double total_jump_rate() const noexcept;
  ExponentDomain domain() const;
  /// Absolute accuracy of psi(); nonzero only for quadrature-backed specs.
  double psi_accuracy() const noexcept;

  /// Same characteristics with the killing rate replaced.
  LevyModel with_killing(double killing) const;
  /// Same characteristics with the killing rate chosen so that psi(root) = 0.
  LevyModel killed_at_root(double root) const;

  bool operator==(const LevyModel&) const = default;

 private:
  double drift_;
  double gaussian_;
  std::vector<JumpSpec> jumps_;
  double killing_;
  double alpha_;
};

// ---------------------------------------------------------------------------
// Laplace exponent and Cramer analysis
// ---------------------------------------------------------------------------

/// psi(lambda) with E(exp(lambda xi_1), 1 < zeta) = exp(psi(lambda));
/// +inf outside the domain.
double psi(const LevyModel& model, double lambda);

/// Derivative of psi. At a closed domain endpoint this is the one-sided
/// derivative from inside, possibly +inf (or -inf at the lower end).
double psi_prime(const LevyModel& model, double lambda);

struct Interval {
  double lo;
  double hi;
  bool hi_closed;
  bool empty() const noexcept { return !(hi > lo); }
  bool contains(double x) const noexcept { return x > lo && (hi_closed ? x <= hi : x < hi); }
};

struct CramerReport {
  double domain_sup;
  bool domain_sup_closed;
  std::optional<double> theta;
  std::optional<double> psi_prime_at_theta;  // may be +inf
  std::optional<double> alpha_theta;
  Interval jump_in_range;
  bool continuous_extension_exists;
};

/// Locates the positive root of psi by bisection. Throws ModelDoesNotHitZero
/// when the model is conservative with psi'(0+) >= 0.
CramerReport cramer_root(const LevyModel& model, double tol = 1e-12);

/// Model of xi under the measure tilted by exp(theta xi_t); psi of the
/// result is lambda -> psi(lambda + theta).
LevyModel esscher(const LevyModel& model, double theta);

/// Model of -xi.
LevyModel dual(const LevyModel& model);

enum class BetaClass { JumpInExists, Critical, Neither };

BetaClass classify_beta(const LevyModel& model, double beta);

}  // namespace pssmp
