#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pssmp/expfun.hpp"
#include "pssmp/lamperti.hpp"
#include "pssmp/levy_model.hpp"
#include "pssmp/path_sim.hpp"

namespace pssmp {

enum class ExtensionMode { JumpIn, Continuous };

struct ExtensionConfig {
  ExtensionMode mode = ExtensionMode::Continuous;
  double beta = 0.0;  // jump-in index, JumpIn only
  double epsilon = 0.01;
  double horizon = 1000.0;
  std::size_t max_excursions = 0;  // 0: limited by horizon only
  double gamma = 0.0;              // alpha * beta or alpha * theta
};

/// Fills gamma and checks the existence conditions for the requested mode.
/// Throws ConfigRejected when no extension of that kind exists.
ExtensionConfig make_extension_config(const LevyModel& model, ExtensionMode mode, double beta,
                                      double epsilon, double horizon,
                                      std::size_t max_excursions = 0);

/// Throws ConfigRejected unless cfg is admissible for model.
void validate_extension_config(const LevyModel& model, const ExtensionConfig& cfg);

/// Draw from beta x^(-1-beta) dx restricted to (epsilon, inf), normalized.
double sample_jump_in_restart(double beta, double epsilon, Rng& rng);
/// Inverse-CDF form: epsilon u^(-1/beta).
double jump_in_restart_from_uniform(double beta, double epsilon, double u);

struct Restart {
  double time;
  double value;
};

/// One excursion of the glued process. Times in `path` are local (start 0).
struct Excursion {
  std::size_t index;
  double start;      // global restart time
  Restart restart;
  const PssmpPath* path;
  bool complete;     // reached 0 before the horizon
};

struct ExtensionSummary {
  std::vector<double> zero_hits;
  std::vector<Restart> restarts;
  double end_time = 0.0;
  double epsilon_used = 0.0;
  /// Bound on the total expected duration of the excursions started below
  /// epsilon per unit of the jump-in measure; empty when not finite.
  std::optional<double> discarded_duration_bound;
  bool truncated = false;  // last excursion cut at the horizon
};

/// Glues excursions restarted from epsilon (Continuous) or from the truncated
/// jump-in measure (JumpIn), with no time spent at 0. Excursion k uses
/// sim.child(k). The visitor sees every excursion in order.
ExtensionSummary simulate_extension_stream(const LevyModel& model, const ExtensionConfig& cfg,
                                           const SimConfig& sim,
                                           const std::function<void(const Excursion&)>& visit);

struct ExtensionPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> zero_hits;
  std::vector<Restart> restarts;
  double epsilon_used = 0.0;
  std::optional<double> discarded_duration_bound;
  bool truncated = false;
};

ExtensionPath simulate_extension(const LevyModel& model, const ExtensionConfig& cfg,
                                 const SimConfig& sim);

/// One line per excursion: {"path","excursion","t","x","restart":{"time","value"},
/// "zero_hit"}. Times are global.
void write_excursion_jsonl(std::ostream& out, const Excursion& e, std::size_t path_index = 0);

// ---------------------------------------------------------------------------
// Occupation measure
// ---------------------------------------------------------------------------

/// Time spent by X in logarithmic bins of [lo, hi]. Within a recorded segment
/// log X is linear in the Levy clock, which gives the split between bins in
/// closed form.
class OccupationHistogram {
 public:
  OccupationHistogram(double lo, double hi, std::size_t bins, double alpha);

  void add_path(const PssmpPath& path);

  std::size_t bins() const noexcept { return time_.size(); }
  double lower_edge(std::size_t i) const;
  double upper_edge(std::size_t i) const;
  double time_in_bin(std::size_t i) const { return time_.at(i); }
  /// Time per unit of y.
  double density(std::size_t i) const;
  double total_time() const noexcept;

 private:
  void add_segment(double du, double a, double b);

  double log_lo_;
  double log_hi_;
  double width_;
  double alpha_;
  std::vector<double> time_;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_err = 0.0;
  std::size_t points = 0;
};

/// Least squares of log density on log bin centre over bins inside [lo, hi].
SlopeFit occupation_slope(const OccupationHistogram& hist, double lo, double hi);

// ---------------------------------------------------------------------------
// Entrance law
// ---------------------------------------------------------------------------

struct TestFunction {
  enum class Kind { One, Bump, Power, Indicator };
  Kind kind = Kind::One;
  double a = 0.0;  // support [a, b] for Bump and Indicator
  double b = 0.0;
  double p = 0.0;  // exponent for Power

  static TestFunction one() { return {Kind::One, 0.0, 0.0, 0.0}; }
  static TestFunction bump(double a, double b) { return {Kind::Bump, a, b, 0.0}; }
  static TestFunction power(double p) { return {Kind::Power, 0.0, 0.0, p}; }
  static TestFunction indicator(double a, double b) { return {Kind::Indicator, a, b, 0.0}; }

  double operator()(double x) const;
  bool compact_support() const noexcept { return kind == Kind::Bump || kind == Kind::Indicator; }
  std::string describe() const;
};

/// n(f(X_t), t < T_0) from J samples under the tilted model, normalizer on
/// an independent stream.
ExpFunEstimate entrance_law(const LevyModel& model, double t, const TestFunction& f, std::size_t n,
                            const SimConfig& config);

struct NormalizationReport {
  double value = 0.0;  // int_0^inf e^-t n(t < T_0) dt
  double std_err = 0.0;
  double value_refined = 0.0;  // same with the t-grid halved
  double refinement_change = 0.0;
  double analytic_value = 0.0;  // analytic integrand through the same quadrature
  std::size_t n = 0;
};

NormalizationReport excursion_normalization_check(const LevyModel& model, std::size_t n,
                                                  const SimConfig& config,
                                                  std::size_t grid_points = 200);

struct ResolventReport {
  IdentityReport report;  // lhs: entrance-law route, rhs: dual-model route
  double lambda = 0.0;
  double small_lambda_lhs = 0.0;       // lhs route at lambda -> 0
  double occupation_limit = 0.0;       // power-law integral with the rhs normalizer
  double small_lambda_rel_diff = 0.0;
};

ResolventReport resolvent_crosscheck(const LevyModel& model, double lambda, const TestFunction& f,
                                     std::size_t n, const SimConfig& config);

}  // namespace pssmp
