#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pssmp/levy_model.hpp"

namespace pssmp {

/// Builds a model from its JSON description (see docs/model_schema.md).
/// Throws ParseError naming the offending field, e.g. "$.jumps[0].law.rate".
LevyModel parse_model(const nlohmann::json& doc);

LevyModel load_model_file(const std::filesystem::path& path);

nlohmann::json model_to_json(const LevyModel& model);

/// Parses text as JSON, reporting syntax errors as ParseError.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);

std::string read_file(const std::filesystem::path& path);

}  // namespace pssmp
