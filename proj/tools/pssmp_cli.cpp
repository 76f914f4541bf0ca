#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pssmp/cli_ops.hpp"
#include "pssmp/error.hpp"
#include "pssmp/extensions.hpp"
#include "pssmp/lamperti.hpp"
#include "pssmp/model_io.hpp"
#include "pssmp/parallel.hpp"
#include "pssmp/path_sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string model;
  std::string suite;
  std::string out;
  std::string kind;
  std::uint64_t seed = 1;
  std::uint64_t samples = 1;
  double dt = 0.01;
  double horizon = 1000.0;
  double x0 = 1.0;
  std::optional<double> epsilon;
  std::optional<double> beta;
  bool continuous = false;
  std::uint64_t excursions = 0;
  unsigned threads = 0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to --out (plus a manifest next to it) or to stdout.
class Output {
 public:
  Output(const Options& opt, std::string command, std::vector<std::string> args)
      : opt_(opt) {
    manifest_.command = std::move(command);
    manifest_.arguments = std::move(args);
    manifest_.seed = opt.seed;
    manifest_.samples = opt.samples;
    manifest_.threads = pssmp::max_threads();
    if (!opt.model.empty()) {
      manifest_.model_path = opt.model;
      manifest_.model_digest = pssmp::sha256_hex(pssmp::read_file(opt.model));
    } else if (!opt.suite.empty()) {
      manifest_.model_path = opt.suite;
      manifest_.model_digest = pssmp::sha256_hex(pssmp::read_file(opt.suite));
    }
    manifest_.started = pssmp::utc_timestamp();
    if (!opt.out.empty()) {
      file_.open(opt.out, std::ios::binary);
      if (!file_) throw UsageError("cannot open output file " + opt.out);
      manifest_.outputs.push_back(opt.out);
    }
  }

  std::ostream& stream() { return opt_.out.empty() ? std::cout : file_; }

  void finish() {
    if (opt_.out.empty()) return;
    file_.close();
    manifest_.finished = pssmp::utc_timestamp();
    std::ofstream m(opt_.out + ".manifest.json", std::ios::binary);
    m << pssmp::to_json(manifest_).dump(2) << '\n';
  }

 private:
  const Options& opt_;
  pssmp::RunManifest manifest_;
  std::ofstream file_;
};

pssmp::SimConfig sim_config(const Options& opt) {
  pssmp::SimConfig c;
  c.seed = opt.seed;
  c.dt = opt.dt;
  c.horizon = opt.horizon;
  return c;
}

int run_analyze(const Options& opt, const std::vector<std::string>& args) {
  const pssmp::LevyModel model = pssmp::load_model_file(opt.model);
  Output out(opt, "analyze", args);
  out.stream() << pssmp::analyze_report(model).dump(2) << '\n';
  out.finish();
  return kExitOk;
}

int run_simulate(const Options& opt, const std::vector<std::string>& args) {
  if (opt.kind != "levy" && opt.kind != "pssmp" && opt.kind != "extension") {
    throw UsageError("--kind must be levy, pssmp or extension");
  }
  std::optional<pssmp::ExtensionConfig> ext;
  const pssmp::LevyModel model = pssmp::load_model_file(opt.model);
  if (opt.kind == "extension") {
    if (!opt.epsilon) throw UsageError("extension needs --epsilon");
    if (!opt.beta && !opt.continuous) throw UsageError("extension needs --beta (jump-in) or --continuous");
    if (opt.beta && opt.continuous) throw UsageError("--beta and --continuous are exclusive");
    const double total = opt.excursions > 0 ? std::numeric_limits<double>::infinity() : opt.horizon;
    ext = pssmp::make_extension_config(
        model, opt.continuous ? pssmp::ExtensionMode::Continuous : pssmp::ExtensionMode::JumpIn,
        opt.beta.value_or(0.0), *opt.epsilon, total, opt.excursions);
  }

  Output out(opt, "simulate", args);
  const pssmp::SimConfig base = sim_config(opt);
  for (std::uint64_t i = 0; i < opt.samples; ++i) {
    const pssmp::SimConfig c = base.child(i);
    if (opt.kind == "levy") {
      pssmp::write_jsonl(out.stream(), pssmp::sample_levy_path(model, c));
    } else if (opt.kind == "pssmp") {
      pssmp::write_jsonl(out.stream(), pssmp::sample_pssmp_path(model, opt.x0, c));
    } else {
      pssmp::SimConfig levy = c;
      levy.horizon = 1000.0;
      pssmp::simulate_extension_stream(model, *ext, levy, [&](const pssmp::Excursion& e) {
        pssmp::write_excursion_jsonl(out.stream(), e, i);
      });
    }
  }
  out.finish();
  return kExitOk;
}

int run_verify(const Options& opt, const std::vector<std::string>& args) {
  const std::filesystem::path suite_path(opt.suite);
  const nlohmann::json suite =
      pssmp::parse_json_text(pssmp::read_file(suite_path), suite_path.string());
  Output out(opt, "verify", args);
  const pssmp::SuiteOutcome result = pssmp::run_suite(suite, suite_path.parent_path());
  out.stream() << result.report.dump(2) << '\n';
  out.finish();
  return result.all_passed ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and checks for self-similar Markov processes built from Levy processes"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Base seed");
    sub->add_option("--samples", opt.samples, "Number of samples or paths");
    sub->add_option("--dt", opt.dt, "Grid step of the Levy clock");
    sub->add_option("--horizon", opt.horizon, "Levy-time horizon (total time for extensions)");
    sub->add_option("--out", opt.out, "Output file; a manifest is written next to it");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Cramer analysis and extension verdicts");
  analyze->add_option("--model", opt.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", opt.out, "Output file");

  CLI::App* simulate = app.add_subcommand("simulate", "Dump sample paths as JSON lines");
  simulate->add_option("--model", opt.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--kind", opt.kind, "levy, pssmp or extension")->required();
  simulate->add_option("--x0", opt.x0, "Starting point of the pssMp");
  simulate->add_option("--epsilon", opt.epsilon, "Restart cutoff for extensions");
  simulate->add_option("--beta", opt.beta, "Jump-in index");
  simulate->add_flag("--continuous", opt.continuous, "Extension leaving 0 continuously");
  simulate->add_option("--excursions", opt.excursions, "Stop extensions after this many excursions");
  add_common(simulate);

  CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->alias("run_suite");
  verify->add_option("--suite", opt.suite, "Suite JSON file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", opt.out, "Output file");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  pssmp::set_max_threads(opt.threads);

  try {
    if (*analyze) return run_analyze(opt, args);
    if (*simulate) return run_simulate(opt, args);
    return run_verify(opt, args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pssmp::Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == pssmp::ErrorCode::ParseError ? kExitUsage : kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}
