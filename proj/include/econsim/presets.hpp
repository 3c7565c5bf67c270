#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econsim/scenario.hpp"

namespace econsim {

struct PresetInfo {
  std::string name;
  std::string summary;
  const char* document;
};

// Scenario documents bundled with the library. Each one is a complete
// scenario file; `extends` in a user file merges on top of it.
inline const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> c = {
      {"aging-pension", "pension authority, OLG households, perfect competition, non-profit bank",
       R"({
  "name": "aging-pension",
  "roles": {"individual": "olg", "governments": ["pension"], "bank": "non-profit", "firm": "perfect"},
  "pension": {"initial_fund_per_capita": 20000, "contribution_rate": 0.08, "retirement_age": 65, "fund_return": 0.0,
              "hard_stop": false},
  "population": {"size": 1000},
  "termination": {"horizon": 150},
  "policies": {"pension": "constant"}
})"},
      {"optimal-tax", "fiscal authority with a Saez top rate, Ramsey households",
       R"({
  "name": "optimal-tax",
  "roles": {"individual": "ramsey", "governments": ["fiscal"], "bank": "non-profit", "firm": "perfect"},
  "fiscal": {"objective": "welfare"},
  "population": {"size": 1000},
  "termination": {"horizon": 100},
  "policies": {"fiscal": {"kind": "saez", "params": {"elasticity": 0.25, "base_rate": 0.2}}}
})"},
      {"monetary-fiscal", "fiscal and central bank coordination with a commercial bank",
       R"({
  "name": "monetary-fiscal",
  "roles": {"individual": "ramsey", "governments": ["fiscal", "central-bank"], "bank": "commercial", "firm": "perfect"},
  "fiscal": {"spending_share": 0.1},
  "population": {"size": 1000},
  "termination": {"horizon": 100},
  "policies": {
    "fiscal": "constant",
    "central_bank": "taylor",
    "bank": {"kind": "constant", "params": {"deposit_rate": 0.0, "lending_rate": 1.0}}
  }
})"},
      {"multi-government", "fiscal, central bank and pension acting together",
       R"({
  "name": "multi-government",
  "roles": {"individual": "olg", "governments": ["fiscal", "central-bank", "pension"], "bank": "non-profit", "firm": "perfect"},
  "population": {"size": 1000},
  "termination": {"horizon": 100},
  "policies": {
    "fiscal": {"kind": "saez", "params": {"base_rate": 0.2}},
    "central_bank": "taylor",
    "pension": "imf-pension"
  }
})"},
      {"real-data", "OLG economy taxed with a US 2022 bracket schedule",
       R"({
  "name": "real-data",
  "roles": {"individual": "olg", "governments": ["fiscal"], "bank": "non-profit", "firm": "perfect"},
  "population": {"size": 10000},
  "termination": {"horizon": 60},
  "policies": {"fiscal": {"kind": "constant", "params": {"brackets": "us-2022", "bracket_scale": 0.02}}}
})"},
      {"monopoly", "one price-setting firm, Ramsey households",
       R"({
  "name": "monopoly",
  "roles": {"individual": "ramsey", "governments": ["fiscal"], "bank": "non-profit", "firm": "monopoly", "firm_count": 1},
  "fiscal": {"spending_share": 0.1},
  "population": {"size": 1000},
  "termination": {"horizon": 100}
})"},
      {"oligopoly", "a few firms competing for household demand and labor",
       R"({
  "name": "oligopoly",
  "roles": {"individual": "ramsey", "governments": ["fiscal"], "bank": "non-profit", "firm": "oligopoly", "firm_count": 3},
  "fiscal": {"spending_share": 0.1},
  "population": {"size": 1000},
  "termination": {"horizon": 100}
})"},
      {"monopolistic", "CES-differentiated firms with markup pricing",
       R"({
  "name": "monopolistic",
  "roles": {"individual": "ramsey", "governments": ["fiscal"], "bank": "non-profit", "firm": "monopolistic", "firm_count": 5},
  "fiscal": {"spending_share": 0.1},
  "population": {"size": 1000},
  "termination": {"horizon": 100}
})"},
  };
  return c;
}

inline const PresetInfo* find_preset(const std::string& name) {
  for (const auto& p : preset_catalog())
    if (p.name == name) return &p;
  return nullptr;
}

inline json preset_document(const std::string& name) {
  const auto* p = find_preset(name);
  if (!p) throw ScenarioError("unknown preset '" + name + "'");
  return json::parse(p->document);
}

/// Applies `extends` (a preset name) by merging the file over the preset.
inline json resolve_extends(const json& doc) {
  if (!doc.is_object() || !doc.contains("extends")) return doc;
  const auto& e = doc.at("extends");
  if (!e.is_string()) throw ScenarioError("extends: expected a preset name");
  json base = preset_document(e.get<std::string>());
  json patch = doc;
  patch.erase("extends");
  base.merge_patch(patch);
  return base;
}

/// Reads a scenario document from a file, or a bundled preset by name when no
/// such file exists.
inline json load_scenario_document(const std::string& path_or_preset) {
  std::ifstream in(path_or_preset);
  if (!in) {
    if (find_preset(path_or_preset)) return preset_document(path_or_preset);
    throw ScenarioError("cannot open scenario '" + path_or_preset + "' (and no preset by that name)");
  }
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path_or_preset + ": " + e.what());
  }
  return resolve_extends(doc);
}

inline ScenarioSpec load_scenario(const std::string& path_or_preset) {
  return parse_scenario_json(load_scenario_document(path_or_preset));
}

}  // namespace econsim
