#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econsim/config.hpp"
#include "econsim/policies.hpp"
#include "econsim/types.hpp"

namespace econsim {

using nlohmann::json;

struct OutputSpec {
  std::string dir = "out";
  std::string format = "csv";  // csv | jsonl
  bool panel = false;
};

struct MetricSpec {
  std::string reference_income;  // one value per row
  std::string reference_wealth;
};

struct ScenarioSpec {
  std::string name;
  EconomyConfig config;
  std::vector<std::uint64_t> seeds{0};
  OutputSpec output;
  MetricSpec metrics;
  std::vector<std::string> warnings;
};

class ScenarioError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Reads one JSON object, remembering which keys were used so leftovers can
/// be reported with their full path.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ScenarioError(path_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json* get(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void number(const std::string& k, T& out) {
    if (const json* v = get(k)) {
      if (!v->is_number()) throw ScenarioError(at(k) + ": expected a number");
      if constexpr (std::is_integral_v<T>) {
        const double d = v->get<double>();
        if (d != std::floor(d)) throw ScenarioError(at(k) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (d < 0) throw ScenarioError(at(k) + ": expected a non-negative integer");
        out = static_cast<T>(d);
      } else {
        out = v->get<T>();
      }
    }
  }

  void boolean(const std::string& k, bool& out) {
    if (const json* v = get(k)) {
      if (!v->is_boolean()) throw ScenarioError(at(k) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& k, std::string& out) {
    if (const json* v = get(k)) {
      if (!v->is_string()) throw ScenarioError(at(k) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ScenarioError(at(k) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline IndividualKind parse_individual(const std::string& s, const std::string& where) {
  const auto v = lower(s);
  if (v == "olg") return IndividualKind::olg;
  if (v == "ramsey") return IndividualKind::ramsey;
  throw ScenarioError(where + ": unknown individual type '" + s + "'");
}

inline GovKind parse_gov(const std::string& s, const std::string& where) {
  const auto v = lower(s);
  if (v == "fiscal") return GovKind::fiscal;
  if (v == "central-bank" || v == "central_bank" || v == "central bank") return GovKind::central_bank;
  if (v == "pension") return GovKind::pension;
  throw ScenarioError(where + ": unknown government type '" + s + "'");
}

inline BankKind parse_bank(const std::string& s, const std::string& where) {
  const auto v = lower(s);
  if (v == "non-profit" || v == "nonprofit" || v == "non_profit") return BankKind::non_profit;
  if (v == "commercial") return BankKind::commercial;
  throw ScenarioError(where + ": unknown bank type '" + s + "'");
}

inline FirmKind parse_firm(const std::string& s, const std::string& where) {
  const auto v = lower(s);
  if (v == "perfect") return FirmKind::perfect;
  if (v == "monopoly") return FirmKind::monopoly;
  if (v == "oligopoly") return FirmKind::oligopoly;
  if (v == "monopolistic") return FirmKind::monopolistic;
  throw ScenarioError(where + ": unknown firm type '" + s + "'");
}

inline FiscalObjective parse_objective(const std::string& s, const std::string& where) {
  const auto v = lower(s);
  if (v == "gdp-growth") return FiscalObjective::gdp_growth;
  if (v == "equality") return FiscalObjective::equality;
  if (v == "welfare") return FiscalObjective::welfare;
  throw ScenarioError(where + ": unknown fiscal objective '" + s + "'");
}

inline void read_policy(ObjectReader& parent, const std::string& key, PolicyBinding& out) {
  const json* v = parent.get(key);
  if (!v) return;
  const auto where = parent.at(key);
  if (v->is_string()) {
    out.kind = v->get<std::string>();
    out.params = json::object();
  } else {
    ObjectReader r(*v, where);
    r.string("kind", out.kind);
    if (const json* p = r.get("params")) {
      if (!p->is_object()) throw ScenarioError(where + ".params: expected an object");
      out.params = *p;
    }
    r.finish();
  }
  const auto& kinds = policy_kinds();
  if (std::find(kinds.begin(), kinds.end(), out.kind) == kinds.end())
    throw ScenarioError(where + ": unknown policy kind '" + out.kind + "'");
  if (!policy_allowed(key, out.kind))
    throw ScenarioError(where + ": kind '" + out.kind + "' not available for this role");
}

}  // namespace detail

/// Builds a scenario from its JSON document. Every key is checked; unknown
/// keys and wrong types are reported with their dotted path.
inline ScenarioSpec parse_scenario_json(const json& doc) {
  using detail::ObjectReader;
  ScenarioSpec spec;
  auto& c = spec.config;
  ObjectReader top(doc, "");
  top.string("name", spec.name);
  std::string extends;
  top.string("extends", extends);  // resolved by the caller before this point

  if (const json* rj = top.get("roles")) {
    ObjectReader r(*rj, "roles");
    std::string s;
    if (r.has("individual")) {
      r.string("individual", s);
      c.roles.individual = detail::parse_individual(s, r.at("individual"));
    }
    for (const char* key : {"governments", "government"}) {
      if (const json* g = r.get(key)) {
        c.roles.governments.clear();
        if (g->is_string()) {
          c.roles.governments.push_back(detail::parse_gov(g->get<std::string>(), r.at(key)));
        } else if (g->is_array()) {
          for (const auto& x : *g) {
            if (!x.is_string()) throw ScenarioError(r.at(key) + ": expected strings");
            c.roles.governments.push_back(detail::parse_gov(x.get<std::string>(), r.at(key)));
          }
        } else {
          throw ScenarioError(r.at(key) + ": expected a string or list");
        }
      }
    }
    if (r.has("bank")) {
      r.string("bank", s);
      c.roles.bank = detail::parse_bank(s, r.at("bank"));
    } else {
      r.get("bank");
      spec.warnings.push_back("roles.bank not given; defaulting to non-profit");
    }
    if (r.has("firm")) {
      r.string("firm", s);
      c.roles.firm = detail::parse_firm(s, r.at("firm"));
    }
    r.number("firm_count", c.roles.firm_count);
    r.finish();
  } else {
    spec.warnings.push_back("roles not given; using OLG, no government, non-profit bank, perfect firm");
  }

  if (const json* j = top.get("preferences")) {
    ObjectReader r(*j, "preferences");
    auto& p = c.preferences;
    r.number("beta", p.beta);
    r.number("sigma", p.sigma);
    r.number("gamma", p.gamma);
    r.number("max_hours", p.max_hours);
    r.number("asset_floor", p.asset_floor);
    r.number("floor_utility", p.floor_utility);
    r.number("subsistence", p.subsistence);
    r.finish();
  }
  if (const json* j = top.get("technology")) {
    ObjectReader r(*j, "technology");
    auto& t = c.technology;
    r.number("alpha", t.alpha);
    r.number("delta", t.delta);
    r.number("tfp_volatility", t.tfp_volatility);
    r.number("elasticity", t.elasticity);
    r.number("price_gain", t.price_gain);
    r.number("choice_temperature", t.choice_temperature);
    r.finish();
  }
  if (const json* j = top.get("returns")) {
    ObjectReader r(*j, "returns");
    auto& t = c.returns;
    r.number("base_rate", t.base_rate);
    r.number("risky_premium", t.risky_premium);
    r.number("risky_volatility", t.risky_volatility);
    r.number("education_persistence", t.education_persistence);
    r.number("education_shock", t.education_shock);
    r.finish();
  }
  if (const json* j = top.get("demographics")) {
    ObjectReader r(*j, "demographics");
    auto& d = c.demographics;
    r.number("birth_rate", d.birth_rate);
    r.number("age_max", d.age_max);
    r.number("retirement_age", d.retirement_age);
    if (const json* m = r.get("mortality")) {
      if (!m->is_array()) throw ScenarioError("demographics.mortality: expected a list");
      d.mortality.clear();
      for (std::size_t k = 0; k < m->size(); ++k) {
        ObjectReader b((*m)[k], "demographics.mortality[" + std::to_string(k) + "]");
        MortalityBracket mb;
        b.number("lo", mb.lo);
        b.number("hi", mb.hi);
        b.number("per_100k", mb.per_100k);
        b.finish();
        d.mortality.push_back(mb);
      }
    } else {
      d.mortality = cdc_2022_mortality(d.age_max);
    }
    r.finish();
  }
  if (const json* j = top.get("fiscal")) {
    ObjectReader r(*j, "fiscal");
    auto& f = c.fiscal;
    if (r.has("objective")) {
      std::string s;
      r.string("objective", s);
      f.objective = detail::parse_objective(s, r.at("objective"));
    }
    r.number("tau", f.tau);
    r.number("xi", f.xi);
    r.number("tau_a", f.tau_a);
    r.number("xi_a", f.xi_a);
    r.number("spending_share", f.spending_share);
    r.number("initial_debt", f.initial_debt);
    r.number("debt_cap", f.debt_cap);
    r.finish();
  }
  if (const json* j = top.get("central_bank")) {
    ObjectReader r(*j, "central_bank");
    auto& b = c.central_bank;
    r.number("policy_rate", b.policy_rate);
    r.number("reserve_ratio", b.reserve_ratio);
    r.number("target_inflation", b.target_inflation);
    r.number("target_growth", b.target_growth);
    r.number("growth_weight", b.growth_weight);
    r.finish();
  }
  if (const json* j = top.get("pension")) {
    ObjectReader r(*j, "pension");
    auto& p = c.pension;
    r.number("initial_fund_per_capita", p.initial_fund_per_capita);
    r.number("contribution_rate", p.contribution_rate);
    r.number("retirement_age", p.retirement_age);
    r.number("target_growth", p.target_growth);
    if (r.has("fund_return")) {
      double v = 0.0;
      r.number("fund_return", v);
      p.fund_return = v;
    }
    r.boolean("hard_stop", p.hard_stop);
    r.finish();
  }
  if (const json* j = top.get("population")) {
    ObjectReader r(*j, "population");
    auto& p = c.population;
    r.number("size", p.size);
    r.number("min_age", p.min_age);
    r.number("max_age", p.max_age);
    r.number("pyramid_taper", p.pyramid_taper);
    r.number("work_entry_age", p.work_entry_age);
    r.number("education_log_mean", p.education_log_mean);
    r.number("education_log_sd", p.education_log_sd);
    r.number("wealth_log_mean", p.wealth_log_mean);
    r.number("wealth_log_sd", p.wealth_log_sd);
    r.number("risky_share", p.risky_share);
    r.string("csv", p.csv);
    r.finish();
  }
  if (const json* j = top.get("termination")) {
    ObjectReader r(*j, "termination");
    r.number("horizon", c.termination.horizon);
    r.number("insolvent_share", c.termination.insolvent_share);
    r.finish();
  }
  if (const json* j = top.get("runtime")) {
    ObjectReader r(*j, "runtime");
    r.number("threads", c.runtime.threads);
    r.number("grain", c.runtime.grain);
    r.finish();
  }
  if (const json* j = top.get("policies")) {
    ObjectReader r(*j, "policies");
    auto& b = c.policies;
    detail::read_policy(r, "households", b.households);
    detail::read_policy(r, "fiscal", b.fiscal);
    detail::read_policy(r, "central_bank", b.central_bank);
    detail::read_policy(r, "pension", b.pension);
    detail::read_policy(r, "bank", b.bank);
    detail::read_policy(r, "firms", b.firms);
    r.finish();
  }
  if (const json* j = top.get("seeds")) {
    if (!j->is_array() || j->empty()) throw ScenarioError("seeds: expected a non-empty list");
    spec.seeds.clear();
    for (const auto& s : *j) {
      if (!s.is_number_unsigned()) throw ScenarioError("seeds: expected non-negative integers");
      spec.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (const json* j = top.get("output")) {
    ObjectReader r(*j, "output");
    r.string("dir", spec.output.dir);
    r.string("format", spec.output.format);
    r.boolean("panel", spec.output.panel);
    r.finish();
    if (spec.output.format != "csv" && spec.output.format != "jsonl")
      throw ScenarioError("output.format: expected csv or jsonl");
  }
  if (const json* j = top.get("metrics")) {
    ObjectReader r(*j, "metrics");
    r.string("reference_income", spec.metrics.reference_income);
    r.string("reference_wealth", spec.metrics.reference_wealth);
    r.finish();
  }
  top.finish();

  // Only the bindings of roles that exist are checked against the roster.
  if (c.roles.individual == IndividualKind::ramsey && c.demographics.mortality.empty())
    c.demographics.mortality = cdc_2022_mortality(c.demographics.age_max);
  c.termination.horizon = std::max(0, c.termination.horizon);

  if (auto v = validate_config(c); !v.empty()) {
    std::string msg = "invalid scenario";
    if (!spec.name.empty()) msg += " '" + spec.name + "'";
    msg += ":";
    for (const auto& m : v) msg += "\n  - " + m;
    throw ScenarioError(msg);
  }
  PolicySet check(c);  // rejects bindings with unreadable parameters
  return spec;
}

/// Sets a dotted path ("pension.retirement_age") inside a scenario document,
/// creating intermediate objects.
inline void set_json_path(json& doc, const std::string& path, const json& value) {
  json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ScenarioError("grid key '" + path + "': empty path segment");
    if (!cur->is_object()) throw ScenarioError("grid key '" + path + "': '" + key + "' is not inside an object");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    if (cur->is_null()) *cur = json::object();
    start = dot + 1;
  }
}

}  // namespace econsim
