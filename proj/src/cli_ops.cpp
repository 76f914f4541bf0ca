#include "pssmp/cli_ops.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "pssmp/error.hpp"
#include "pssmp/expfun.hpp"
#include "pssmp/extensions.hpp"
#include "pssmp/model_io.hpp"
#include "pssmp/verify.hpp"

namespace pssmp {
namespace {

using nlohmann::json;

std::string interval_text(const Interval& iv) {
  if (iv.empty()) return "empty";
  std::ostringstream os;
  os << "(" << iv.lo << ", " << iv.hi << (iv.hi_closed ? "]" : ")");
  return os.str();
}

double get_number(const json& obj, const char* key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::ParseError, std::string("params.") + key + ": expected a number");
  return it->get<double>();
}

double require_number(const json& obj, const char* key) {
  if (!obj.contains(key)) throw Error(ErrorCode::ParseError, std::string("params.") + key + ": missing");
  return get_number(obj, key, 0.0);
}

TestFunction parse_test_function(const json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "params.f: expected an object");
  const std::string kind = obj.value("kind", "one");
  if (kind == "one") return TestFunction::one();
  if (kind == "bump") return TestFunction::bump(require_number(obj, "a"), require_number(obj, "b"));
  if (kind == "indicator") return TestFunction::indicator(require_number(obj, "a"), require_number(obj, "b"));
  if (kind == "power") return TestFunction::power(require_number(obj, "p"));
  throw Error(ErrorCode::ParseError, "params.f.kind: unknown test function \"" + kind + "\"");
}

json identity_json(const IdentityReport& r) {
  json j = json::parse(to_json(r));
  j["warnings"] = r.warnings;
  return j;
}

LevyModel check_model(const json& check, const std::filesystem::path& base_dir) {
  const auto it = check.find("model");
  if (it == check.end()) throw Error(ErrorCode::ParseError, "model: missing");
  if (it->is_string()) return load_model_file(base_dir / it->get<std::string>());
  return parse_model(*it);
}

SimConfig check_config(const json& check) {
  SimConfig c;
  c.seed = check.value("seed", std::uint64_t{1});
  c.dt = check.value("dt", c.dt);
  c.horizon = check.value("horizon", c.horizon);
  c.validate();
  return c;
}

// Fills "passed", "z", "p_value", "report" for one operation.
void dispatch(const std::string& op, const json& check, const json& params,
              const std::filesystem::path& base_dir, json& out) {
  const std::size_t n = check.value("samples", std::size_t{10000});
  const double z_max = get_number(params, "z_max", 4.0);

  if (op == "cramer") {
    const LevyModel model = check_model(check, base_dir);
    const json report = analyze_report(model);
    out["report"] = report;
    bool ok = true;
    if (params.contains("theta")) {
      const double tol = get_number(params, "tol", 1e-9);
      ok = report["theta"].is_number() &&
           std::abs(report["theta"].get<double>() - require_number(params, "theta")) <= tol;
    }
    if (params.contains("condition_4")) ok = ok && report["verdicts"]["condition_4"] == params["condition_4"];
    if (params.contains("continuous")) {
      ok = ok && report["verdicts"]["continuous_extension"] == params["continuous"];
    }
    out["passed"] = ok;
    return;
  }
  if (op == "recursion") {
    const LevyModel model = check_model(check, base_dir);
    const IdentityReport r = recursion_check(model, require_number(params, "beta"), n, check_config(check));
    out["report"] = identity_json(r);
    out["z"] = number_or_text(r.z);
    out["passed"] = r.z < z_max;
    return;
  }
  if (op == "dual_identity") {
    const LevyModel model = check_model(check, base_dir);
    const IdentityReport r = dual_identity_check(model, n, check_config(check));
    out["report"] = identity_json(r);
    out["z"] = number_or_text(r.z);
    out["passed"] = r.z < z_max;
    return;
  }
  if (op == "negative_moment") {
    const LevyModel model = check_model(check, base_dir);
    const NegativeMomentReport r = negative_moment_check(model, n, check_config(check));
    json rep = identity_json(r.report);
    rep["derivative_infinite"] = r.derivative_infinite;
    if (r.derivative_infinite) {
      rep["prefix_sizes"] = r.prefix_sizes;
      rep["running_estimates"] = r.running_estimates;
      rep["stabilizes"] = r.stabilizes;
    }
    out["report"] = rep;
    const bool expect_infinite = params.value("expect_derivative_infinite", false);
    if (expect_infinite) {
      out["passed"] = r.derivative_infinite;
    } else {
      out["z"] = number_or_text(r.report.z);
      out["passed"] = !r.derivative_infinite && r.report.z < z_max;
    }
    return;
  }
  if (op == "entrance_law") {
    const LevyModel model = check_model(check, base_dir);
    const double t = require_number(params, "t");
    const TestFunction f = parse_test_function(params.value("f", json::object()));
    const ExpFunEstimate e = entrance_law(model, t, f, n, check_config(check));
    double expected = get_number(params, "expected", std::nan(""));
    if (std::isnan(expected) && f.kind == TestFunction::Kind::One) {
      const double at = *cramer_root(model).alpha_theta;
      expected = std::pow(t, -at) / std::tgamma(1.0 - at);
    }
    out["report"] = {{"value", e.value}, {"se", e.std_err}, {"n", e.n}, {"censored", e.censored},
                     {"f", f.describe()}, {"expected", number_or_text(expected)}};
    if (std::isnan(expected)) {
      out["passed"] = true;
    } else {
      const double z = std::abs(e.value - expected) / e.std_err;
      out["z"] = number_or_text(z);
      out["passed"] = z < z_max;
    }
    return;
  }
  if (op == "normalization") {
    const LevyModel model = check_model(check, base_dir);
    const NormalizationReport r = excursion_normalization_check(model, n, check_config(check));
    const double tol = get_number(params, "tol", 0.05);
    out["report"] = {{"value", r.value}, {"se", r.std_err}, {"value_refined", r.value_refined},
                     {"refinement_change", r.refinement_change}, {"analytic_value", r.analytic_value},
                     {"n", r.n}};
    out["passed"] = std::abs(r.value - 1.0) <= tol && r.refinement_change < 0.01;
    return;
  }
  if (op == "resolvent") {
    const LevyModel model = check_model(check, base_dir);
    const TestFunction f = parse_test_function(params.value("f", json{{"kind", "bump"}, {"a", 0.5}, {"b", 1.5}}));
    const ResolventReport r = resolvent_crosscheck(model, get_number(params, "lambda", 1.0), f, n, check_config(check));
    json rep = identity_json(r.report);
    rep["small_lambda_lhs"] = r.small_lambda_lhs;
    rep["occupation_limit"] = r.occupation_limit;
    rep["small_lambda_rel_diff"] = r.small_lambda_rel_diff;
    out["report"] = rep;
    out["z"] = number_or_text(r.report.z);
    out["passed"] = r.report.z < z_max && r.small_lambda_rel_diff < 0.1;
    return;
  }
  if (op == "scaling") {
    const LevyModel model = check_model(check, base_dir);
    std::vector<double> grid = params.value("t_grid", std::vector<double>{0.5});
    ScalingOptions opt;
    if (params.contains("rescale_alpha")) opt.rescale_alpha = require_number(params, "rescale_alpha");
    const double level = get_number(params, "level", 0.01);
    const auto reps = scaling_test(model, get_number(params, "x", 1.0), get_number(params, "c", 2.0),
                                   grid, n, check_config(check), opt);
    json rows = json::array();
    double p_min = 1.0;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      rows.push_back({{"t", grid[k]}, {"statistic", reps[k].statistic}, {"p_value", reps[k].p_value}});
      p_min = std::min(p_min, reps[k].p_value);
    }
    out["report"] = rows;
    out["p_value"] = p_min;
    out["passed"] = p_min > level / static_cast<double>(std::max<std::size_t>(grid.size(), 1));
    return;
  }
  if (op == "renewal") {
    RenewalProblem pr;
    pr.gamma = get_number(params, "gamma", 0.75);
    pr.dx = get_number(params, "dx", 0.01);
    pr.t_max = get_number(params, "t_max", 200.0);
    const std::string tail = params.value("tail", "pareto");
    if (tail == "tempered_power") {
      pr.tail = TailKind::TemperedPower;
    } else if (tail != "pareto") {
      throw Error(ErrorCode::ParseError, "params.tail: expected \"pareto\" or \"tempered_power\"");
    }
    const auto g = params.value("g", std::vector<double>{0.0, 1.0});
    if (g.size() != 2) throw Error(ErrorCode::ParseError, "params.g: expected [a, b]");
    const RenewalPart part = params.value("part", 1) == 2 ? RenewalPart::Two : RenewalPart::One;
    const double t = get_number(params, "t", pr.t_max);
    const std::vector<double> ts{t};
    const RenewalResult r = renewal_limit(pr, StepFunction::indicator(g[0], g[1]), ts, part);
    const RenewalPoint& pt = r.points.front();
    const double rel_tol = get_number(params, "rel_tol", 0.15);
    out["report"] = {{"t", pt.t}, {"value", pt.value}, {"target", pt.target},
                     {"erickson_target", pt.erickson_target},
                     {"refinement_change", r.refinement_change}};
    out["passed"] = std::abs(pt.value / pt.target - 1.0) <= rel_tol;
    return;
  }
  if (op == "counterexample") {
    const CounterexampleReport r =
        counterexample_demo(get_number(params, "q", 1.0), get_number(params, "beta", 0.75),
                            get_number(params, "delta", 0.01), n, check_config(check));
    json tail = json::array();
    for (const TailRow& row : r.tail) {
      tail.push_back({{"x", row.x}, {"survival", row.survival}, {"scaled", row.scaled},
                      {"log_corrected", row.log_corrected}});
    }
    out["report"] = {{"killing", r.killing}, {"cramer_root", r.cramer_root}, {"root_error", r.root_error},
                     {"derivative_infinite", r.derivative_infinite}, {"hill_index", r.hill_index},
                     {"hill_k", r.hill_k}, {"tail", tail}, {"tail_nondegenerate", r.tail_nondegenerate},
                     {"note", r.note}};
    const auto band = params.value("hill_range", std::vector<double>{0.6, 0.9});
    out["passed"] = r.root_error <= get_number(params, "root_tol", 1e-9) &&
                    r.hill_index >= band.at(0) && r.hill_index <= band.at(1);
    return;
  }
  if (op == "occupation") {
    const LevyModel model = check_model(check, base_dir);
    const auto excursions = static_cast<std::size_t>(get_number(params, "excursions", 1000));
    const ExtensionConfig cfg = make_extension_config(
        model, ExtensionMode::Continuous, 0.0, get_number(params, "epsilon", 0.01),
        std::numeric_limits<double>::infinity(), excursions);
    const double lo = get_number(params, "lo", 0.1);
    const double hi = get_number(params, "hi", 1.0);
    OccupationHistogram hist(lo, hi, static_cast<std::size_t>(get_number(params, "bins", 10)), model.alpha());
    simulate_extension_stream(model, cfg, check_config(check),
                              [&](const Excursion& e) { hist.add_path(*e.path); });
    const SlopeFit fit = occupation_slope(hist, lo, hi);
    const double expected = (1.0 - model.alpha() - cfg.gamma) / model.alpha();
    const double tol = get_number(params, "tol", 0.1);
    out["report"] = {{"slope", fit.slope}, {"slope_se", fit.slope_std_err}, {"expected", expected},
                     {"points", fit.points}, {"excursions", excursions}};
    out["passed"] = std::abs(fit.slope - expected) <= tol;
    return;
  }
  throw Error(ErrorCode::ParseError, "op: unknown operation \"" + op + "\"");
}

}  // namespace

json number_or_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json analyze_report(const LevyModel& model) {
  const CramerReport rep = cramer_root(model);
  const ExponentDomain dom = model.domain();
  json j;
  j["model"] = model_to_json(model);
  j["psi_at_zero"] = psi(model, 0.0);
  j["domain"] = {{"lo", number_or_text(dom.lo)}, {"lo_closed", dom.lo_closed},
                 {"hi", number_or_text(dom.hi)}, {"hi_closed", dom.hi_closed}};
  j["theta"] = rep.theta ? json(*rep.theta) : json(nullptr);
  j["psi_at_theta"] = rep.theta ? json(psi(model, *rep.theta)) : json(nullptr);
  j["psi_prime_at_theta"] = rep.psi_prime_at_theta ? number_or_text(*rep.psi_prime_at_theta) : json(nullptr);
  j["alpha_theta"] = rep.alpha_theta ? json(*rep.alpha_theta) : json(nullptr);
  j["jump_in_range"] = {{"lo", rep.jump_in_range.lo},
                        {"hi", number_or_text(rep.jump_in_range.hi)},
                        {"hi_closed", rep.jump_in_range.hi_closed},
                        {"text", interval_text(rep.jump_in_range)}};
  std::string cond4 = "not_applicable";
  if (rep.theta) cond4 = std::isfinite(*rep.psi_prime_at_theta) ? "holds" : "fails";
  j["verdicts"] = {{"continuous_extension", rep.continuous_extension_exists},
                   {"jump_in_extension", !rep.jump_in_range.empty()},
                   {"jump_in_betas", interval_text(rep.jump_in_range)},
                   {"condition_4", cond4}};
  return j;
}

json run_check(const json& check, const std::filesystem::path& base_dir) {
  json out;
  out["name"] = check.is_object() ? check.value("name", "") : "";
  out["op"] = check.is_object() ? check.value("op", "") : "";
  out["passed"] = false;
  out["z"] = nullptr;
  out["p_value"] = nullptr;
  out["report"] = nullptr;
  out["error"] = nullptr;
  try {
    if (!check.is_object()) throw Error(ErrorCode::ParseError, "check: expected an object");
    const json params = check.value("params", json::object());
    dispatch(check.value("op", ""), check, params, base_dir, out);
  } catch (const std::exception& e) {
    out["passed"] = false;
    out["error"] = e.what();
  }
  return out;
}

SuiteOutcome run_suite(const json& suite, const std::filesystem::path& base_dir) {
  if (!suite.is_object()) throw Error(ErrorCode::ParseError, "$: expected an object");
  const json checks = suite.value("checks", json::array());
  if (!checks.is_array()) throw Error(ErrorCode::ParseError, "$.checks: expected an array");

  SuiteOutcome out;
  json results = json::array();
  std::size_t passed = 0;
  for (const json& check : checks) {
    json r = run_check(check, base_dir);
    if (r["passed"].get<bool>()) {
      ++passed;
    } else {
      out.all_passed = false;
    }
    results.push_back(std::move(r));
  }
  out.report = {{"checks", results},
                {"passed", passed},
                {"failed", results.size() - passed},
                {"all_passed", out.all_passed}};
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},   {"arguments", m.arguments}, {"model_path", m.model_path},
          {"model_digest", m.model_digest}, {"seed", m.seed}, {"samples", m.samples},
          {"threads", m.threads},   {"started", m.started},     {"finished", m.finished},
          {"outputs", m.outputs}};
}

}  // namespace pssmp
