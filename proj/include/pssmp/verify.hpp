#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pssmp/levy_model.hpp"
#include "pssmp/path_sim.hpp"

namespace pssmp {

struct KsReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;  // 0 for one-sample tests
};

/// Asymptotic Kolmogorov tail P(K > x).
double kolmogorov_tail(double x);

/// Two-sample Kolmogorov-Smirnov test; p-value from the asymptotic
/// distribution with the usual small-sample correction of the argument.
/// Throws TooFewSamples when either sample has fewer than 20 points.
KsReport ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample test against a continuous CDF.
KsReport ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);

struct ScalingOptions {
  /// Index used in the time rescaling t c^(-1/alpha); defaults to the model's.
  std::optional<double> rescale_alpha;
};

/// Per t: KS between c X_(t c^(-1/alpha)) under P_x and X_t under P_(cx).
std::vector<KsReport> scaling_test(const LevyModel& model, double x, double c,
                                   std::span<const double> t_grid, std::size_t n,
                                   const SimConfig& config, const ScalingOptions& options = {});

struct PassRate {
  std::size_t passes = 0;
  std::size_t runs = 0;
  double rate() const noexcept { return runs ? static_cast<double>(passes) / runs : 0.0; }
};

/// Runs trial(k) for k < runs in parallel; a run passes when its p-value
/// exceeds level.
PassRate multi_seed_pass_rate(std::size_t runs, double level,
                              const std::function<double(std::size_t)>& trial);

/// Scaling test repeated on config.child(k) for k < runs. A run passes when
/// every t passes at level / |t_grid|.
PassRate scaling_pass_rate(const LevyModel& model, double x, double c,
                           std::span<const double> t_grid, std::size_t n, std::size_t runs,
                           double level, const SimConfig& config,
                           const ScalingOptions& options = {});

// ---------------------------------------------------------------------------
// Renewal limit
// ---------------------------------------------------------------------------

enum class TailKind {
  Pareto,         // 1 - G(u) = (1 + u)^(-gamma)
  TemperedPower,  // 1 - G(u) = ((1 - e^(-u)) / u)^gamma
};

struct RenewalProblem {
  TailKind tail = TailKind::Pareto;
  double gamma = 0.75;
  double dx = 0.01;
  double t_max = 200.0;

  double survival(double u) const;  // 1 - G(u)
  double mean_residual(double x) const;  // m(x) = int_0^x (1 - G)
  void validate() const;
};

struct Step {
  double a;
  double b;
  double height;
};

/// Nonnegative step function with bounded support.
struct StepFunction {
  std::vector<Step> steps;

  static StepFunction indicator(double a, double b) { return {{{a, b, 1.0}}}; }
  double integral() const;
  double lower() const;
  double upper() const;
};

struct RenewalPoint {
  double t = 0.0;
  double value = 0.0;
  double target = 0.0;            // sin(pi gamma) / pi * int g
  double erickson_target = 0.0;   // 1 / (Gamma(gamma) Gamma(2 - gamma)) * int g
};

struct RenewalResult {
  std::vector<RenewalPoint> points;
  double value_at_tmax = 0.0;
  double value_at_tmax_refined = 0.0;  // grid step halved
  double refinement_change = 0.0;
};

enum class RenewalPart {
  One,  // m(t) int_0^t g(t - y) U(dy), g on [0, inf)
  Two,  // m(t) int g(y - t) U(dy), g on the whole line
};

/// Renewal measure U by the discretized renewal equation on the dx grid (mass
/// of each cell at its right end). Throws GridTooCoarse when halving dx moves
/// the value at t_max by more than 2%.
RenewalResult renewal_limit(const RenewalProblem& problem, const StepFunction& g,
                            std::span<const double> t_list, RenewalPart part = RenewalPart::One);

/// Renewal masses u_k = U({k dx}) (k = 0 carries the atom at 0) up to t_end.
std::vector<double> renewal_masses(const RenewalProblem& problem, double t_end, double dx);

// ---------------------------------------------------------------------------
// Tempered-subordinator demonstration
// ---------------------------------------------------------------------------

/// Tempered stable-like subordinator killed so that psi(q) = 0.
LevyModel counterexample_model(double q, double beta, double delta, double alpha = 1.0);

/// Hill estimator of the tail index from the k largest of xs.
double hill_estimate(std::vector<double> xs, std::size_t k);

struct TailRow {
  double x;
  double survival;        // P_1(T_0 > x)
  double scaled;          // x^q P_1(T_0 > x)
  double log_corrected;   // m(log x) x^q P_1(T_0 > x)
};

struct CounterexampleReport {
  double q = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double killing = 0.0;
  double cramer_root = 0.0;
  double root_error = 0.0;
  bool derivative_infinite = false;
  double hill_index = 0.0;
  std::size_t hill_k = 0;
  std::vector<TailRow> tail;
  bool tail_nondegenerate = false;
  std::string note;
};

/// Qualitative demo: root at q, Hill index of the tilted increment tail and a
/// tail display of T_0. Requires beta in (1/2, 1) and q > 0.
CounterexampleReport counterexample_demo(double q, double beta, double delta, std::size_t n,
                                         const SimConfig& config);

}  // namespace pssmp
