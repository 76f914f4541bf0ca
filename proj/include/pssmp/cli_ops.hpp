#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pssmp/levy_model.hpp"

namespace pssmp {

/// Cramer analysis with extension verdicts and the finiteness of
/// psi'(theta) (equivalently E(xi_1^+ e^(theta xi_1), 1 < zeta)).
nlohmann::json analyze_report(const LevyModel& model);

/// Runs one suite entry. Failures of any kind are recorded in the entry's
/// "error" field; this never throws for a well-formed entry object.
nlohmann::json run_check(const nlohmann::json& check, const std::filesystem::path& base_dir);

struct SuiteOutcome {
  nlohmann::json report;
  bool all_passed = true;
};

/// {"checks": [...]}; model paths are resolved against base_dir. Throws
/// ParseError when the suite document itself is malformed.
SuiteOutcome run_suite(const nlohmann::json& suite, const std::filesystem::path& base_dir);

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string model_path;
  std::string model_digest;  // SHA-256 of the model file bytes
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  unsigned threads = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();
nlohmann::json to_json(const RunManifest& m);

/// JSON number, or "inf" / "-inf" / "nan" for non-finite values.
nlohmann::json number_or_text(double v);

}  // namespace pssmp
