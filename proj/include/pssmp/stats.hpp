#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace pssmp {

/// Running mean and variance (Welford).
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_err() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
};

inline MeanEstimate estimate_mean(std::span<const double> xs) {
  MeanAccumulator acc;
  for (double x : xs) acc.add(x);
  return {acc.mean(), acc.std_err(), acc.count()};
}

/// |a - b| / sqrt(se_a^2 + se_b^2); zero when both the difference and the
/// errors vanish (deterministic cases), infinite for a nonzero difference
/// with zero error.
inline double z_score(double a, double se_a, double b, double se_b) noexcept {
  const double diff = std::abs(a - b);
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  if (se == 0.0) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return diff <= 1e-9 * scale ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / se;
}

/// Delta-method standard error of num / den for independent estimates.
inline double ratio_std_err(double num, double se_num, double den, double se_den) noexcept {
  const double r = num / den;
  return std::sqrt(se_num * se_num + r * r * se_den * se_den) / std::abs(den);
}

}  // namespace pssmp
