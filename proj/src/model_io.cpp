#include "pssmp/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pssmp/error.hpp"

namespace pssmp {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::ParseError, path + ": " + why);
}

void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) fail(path + "." + key, "unknown field");
  }
}

const json& object_at(const json& doc, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected an object");
  return doc;
}

double number(const json& obj, const std::string& key, const std::string& path,
              std::optional<double> fallback = std::nullopt) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required number");
  }
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

int sign_field(const json& obj, const std::string& path) {
  const auto it = obj.find("sign");
  if (it == obj.end()) return +1;
  if (it->is_string()) {
    const std::string s = it->get<std::string>();
    if (s == "+") return +1;
    if (s == "-") return -1;
  } else if (it->is_number_integer()) {
    const int v = it->get<int>();
    if (v == 1 || v == -1) return v;
  }
  fail(path + ".sign", "expected \"+\", \"-\", 1 or -1");
}

std::string type_field(const json& obj, const std::string& path) {
  const auto it = obj.find("type");
  if (it == obj.end() || !it->is_string()) fail(path + ".type", "missing type string");
  return it->get<std::string>();
}

JumpLaw parse_law(const json& doc, const std::string& path) {
  const json& obj = object_at(doc, path);
  const std::string type = type_field(obj, path);
  if (type == "exponential") {
    only_keys(obj, path, {"type", "rate", "sign"});
    return ExponentialJumps{number(obj, "rate", path), sign_field(obj, path)};
  }
  if (type == "two_sided_exponential") {
    only_keys(obj, path, {"type", "rate_plus", "rate_minus", "p_plus"});
    return TwoSidedExponentialJumps{number(obj, "rate_plus", path), number(obj, "rate_minus", path),
                                    number(obj, "p_plus", path)};
  }
  if (type == "point_mass") {
    only_keys(obj, path, {"type", "value"});
    return PointMassJumps{number(obj, "value", path)};
  }
  fail(path + ".type", "unknown jump law \"" + type + "\"");
}

JumpSpec parse_jump(const json& doc, const std::string& path) {
  const json& obj = object_at(doc, path);
  const std::string type = type_field(obj, path);
  if (type == "compound_poisson") {
    only_keys(obj, path, {"type", "rate", "law"});
    if (!obj.contains("law")) fail(path + ".law", "missing jump law");
    return CompoundPoisson{number(obj, "rate", path), parse_law(obj.at("law"), path + ".law")};
  }
  if (type == "tempered_power") {
    only_keys(obj, path, {"type", "q", "beta", "delta", "sign"});
    try {
      return TemperedPower(number(obj, "q", path), number(obj, "beta", path),
                           number(obj, "delta", path), sign_field(obj, path));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      fail(path, e.what());
    }
  }
  fail(path + ".type", "unknown jump type \"" + type + "\"");
}

json law_to_json(const JumpLaw& law) {
  if (const auto* e = std::get_if<ExponentialJumps>(&law)) {
    return {{"type", "exponential"}, {"rate", e->rate}, {"sign", e->sign > 0 ? "+" : "-"}};
  }
  if (const auto* t = std::get_if<TwoSidedExponentialJumps>(&law)) {
    return {{"type", "two_sided_exponential"},
            {"rate_plus", t->rate_plus},
            {"rate_minus", t->rate_minus},
            {"p_plus", t->p_plus}};
  }
  return {{"type", "point_mass"}, {"value", std::get<PointMassJumps>(law).value}};
}

}  // namespace

LevyModel parse_model(const json& doc) {
  const std::string root = "$";
  const json& obj = object_at(doc, root);
  only_keys(obj, root, {"drift", "gaussian", "jumps", "killing", "alpha", "name", "description"});

  std::vector<JumpSpec> jumps;
  if (const auto it = obj.find("jumps"); it != obj.end()) {
    if (!it->is_array()) fail(root + ".jumps", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      jumps.push_back(parse_jump((*it)[i], root + ".jumps[" + std::to_string(i) + "]"));
    }
  }

  const double drift = number(obj, "drift", root, 0.0);
  const double gaussian = number(obj, "gaussian", root, 0.0);
  const double alpha = number(obj, "alpha", root, 1.0);

  std::optional<double> root_for_killing;
  double killing = 0.0;
  if (const auto it = obj.find("killing"); it != obj.end()) {
    if (it->is_number()) {
      killing = it->get<double>();
    } else if (it->is_object()) {
      only_keys(*it, root + ".killing", {"root"});
      root_for_killing = number(*it, "root", root + ".killing");
    } else {
      fail(root + ".killing", "expected a number or {\"root\": r}");
    }
  }

  try {
    LevyModel model(drift, gaussian, std::move(jumps), killing, alpha);
    if (root_for_killing) model = model.killed_at_root(*root_for_killing);
    return model;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    fail(root, e.what());
  }
}

json model_to_json(const LevyModel& model) {
  json jumps = json::array();
  for (const JumpSpec& spec : model.jumps()) {
    if (const auto* cp = std::get_if<CompoundPoisson>(&spec)) {
      jumps.push_back({{"type", "compound_poisson"}, {"rate", cp->rate}, {"law", law_to_json(cp->law)}});
    } else {
      const auto& tp = std::get<TemperedPower>(spec);
      jumps.push_back({{"type", "tempered_power"},
                       {"q", tp.q()},
                       {"beta", tp.beta()},
                       {"delta", tp.delta()},
                       {"sign", tp.sign() > 0 ? "+" : "-"}});
    }
  }
  return {{"drift", model.drift()},
          {"gaussian", model.gaussian()},
          {"jumps", jumps},
          {"killing", model.killing()},
          {"alpha", model.alpha()}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  }
}

LevyModel load_model_file(const std::filesystem::path& path) {
  return parse_model(parse_json_text(read_file(path), path.string()));
}

}  // namespace pssmp
