#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econsim/config.hpp"
#include "econsim/csv.hpp"
#include "econsim/env.hpp"
#include "econsim/parallel.hpp"
#include "econsim/state.hpp"

namespace econsim {

// ---------------------------------------------------------------------------
// Central bank: Taylor rule

struct TaylorParams {
  Rate neutral_rate = 0.02;  // r*
  Rate target_inflation = 0.02;
  Rate target_growth = 0.05;
  double inflation_weight = 0.5;
  double growth_weight = 0.5;
  Rate floor = 0.0;
  double reserve_ratio = 0.1;
};

/// iota = r* + pi + a_pi (pi - pi*) + a_g (g - g*), floored.
inline CentralBankAction taylor_rule(Rate inflation, Rate growth, const TaylorParams& p) {
  const Rate iota = p.neutral_rate + inflation + p.inflation_weight * (inflation - p.target_inflation) +
                    p.growth_weight * (growth - p.target_growth);
  return {std::clamp(std::max(iota, p.floor), -1.0, 10.0), p.reserve_ratio};
}

// ---------------------------------------------------------------------------
// Fiscal: Saez top rate

struct SaezParams {
  double elasticity = 0.25;    // taxable-income elasticity e
  double welfare_weight = 0.0;  // g-bar on top earners
  Rate base_rate = 0.1;
  double spending_share = 0.15;
  double xi = 0.0;  // carried on the action for the HSV fallback; unused with brackets
};

struct ParetoTail {
  double threshold = 0.0;  // 90th percentile
  double a = 0.0;          // mean/(mean - threshold) over the top decile
  bool degenerate = true;
};

inline ParetoTail estimate_pareto_tail(std::span<const double> incomes) {
  ParetoTail t;
  if (incomes.size() < 10) return t;
  std::vector<double> xs(incomes.begin(), incomes.end());
  std::sort(xs.begin(), xs.end());
  t.threshold = sorted_quantile(xs, 0.9);
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : xs)
    if (x >= t.threshold) {
      sum += x;
      ++count;
    }
  const double mean_top = sum / static_cast<double>(count);
  if (!(t.threshold > 0.0) || !(mean_top > t.threshold)) return t;
  t.a = mean_top / (mean_top - t.threshold);
  t.degenerate = false;
  return t;
}

/// tau_top = (1 - g) / (1 - g + a e).
inline double saez_top_rate(double pareto_a, double elasticity, double welfare_weight) {
  const double num = 1.0 - welfare_weight;
  const double den = num + pareto_a * elasticity;
  if (!(den > 0.0)) return 0.0;
  return std::clamp(num / den, 0.0, 1.0);
}

/// Two-bracket schedule: base rate below the 90th percentile, Saez top rate
/// above it. Degenerate distributions get the base rate only.
inline FiscalAction saez_tax_policy(std::span<const double> incomes, const SaezParams& p) {
  FiscalAction a;
  a.tau = p.base_rate;
  a.xi = p.xi;
  a.spending_share = p.spending_share;
  const auto tail = estimate_pareto_tail(incomes);
  if (tail.degenerate) {
    a.brackets = BracketSchedule({{0.0, p.base_rate}});
    return a;
  }
  const double top = saez_top_rate(tail.a, p.elasticity, p.welfare_weight);
  a.brackets = BracketSchedule({{0.0, p.base_rate}, {tail.threshold, top}});
  return a;
}

// ---------------------------------------------------------------------------
// Pension: depletion-triggered parametric reform

struct ImfPensionParams {
  int horizon = 20;  // years of projected solvency required
  int age_step = 1;
  Rate rate_step = 0.01;
  Rate max_rate = 0.3;
};

/// Projects the fund along its least-squares trend; when depletion falls
/// within the horizon, raises the retirement age and contribution rate.
inline PensionAction imf_pension_rule(std::span<const Money> history, const PensionAction& current,
                                      const ImfPensionParams& p) {
  if (history.size() < 2) throw std::invalid_argument("imf_pension_rule: need two fund values");
  const double n = static_cast<double>(history.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    mx += static_cast<double>(k);
    my += history[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    sxy += (static_cast<double>(k) - mx) * (history[k] - my);
    sxx += (static_cast<double>(k) - mx) * (static_cast<double>(k) - mx);
  }
  const double slope = sxy / sxx;
  const Money last = history.back();
  const bool trigger = last <= 0.0 || (slope < 0.0 && last + slope * p.horizon <= 0.0);
  PensionAction out = current;
  if (trigger) {
    out.retirement_age = std::min(current.retirement_age + p.age_step, kAnnuityMaxAge);
    out.contribution_rate = std::min(current.contribution_rate + p.rate_step, p.max_rate);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayRow {
  int t = 0;
  std::map<std::string, double> values;
};

class ReplaySchedule {
 public:
  ReplaySchedule() = default;
  ReplaySchedule(std::vector<ReplayRow> rows, bool hold_last)
      : rows_(std::move(rows)), hold_last_(hold_last) {
    if (rows_.empty()) throw ConfigError("replay schedule is empty");
    if (rows_.front().t != 0) throw ConfigError("replay schedule must start at t = 0");
    for (std::size_t k = 1; k < rows_.size(); ++k)
      if (rows_[k].t <= rows_[k - 1].t) throw ConfigError("replay rows must be sorted by t");
  }

  /// Row in force at t: the last row with row.t <= t.
  const ReplayRow& at(int t) const {
    if (rows_.empty() || t < rows_.front().t)
      throw std::out_of_range("replay: t=" + std::to_string(t) + " before schedule start");
    if (!hold_last_ && t > rows_.back().t)
      throw std::out_of_range("replay: t=" + std::to_string(t) + " past schedule end");
    auto it = std::upper_bound(rows_.begin(), rows_.end(), t,
                               [](int x, const ReplayRow& r) { return x < r.t; });
    return *std::prev(it);
  }

  double value(int t, const std::string& key, double fallback) const {
    const auto& v = at(t).values;
    auto it = v.find(key);
    return it == v.end() ? fallback : it->second;
  }

  const std::vector<ReplayRow>& rows() const noexcept { return rows_; }

 private:
  std::vector<ReplayRow> rows_;
  bool hold_last_ = true;
};

inline ReplaySchedule replay_from_csv(const CsvTable& t, bool hold_last) {
  const auto ct = t.column("t");
  std::vector<ReplayRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto where = "replay row " + std::to_string(i);
    ReplayRow r;
    r.t = static_cast<int>(parse_number(t.rows[i][ct], where));
    for (std::size_t c = 0; c < t.header.size(); ++c)
      if (c != ct) r.values[t.header[c]] = parse_number(t.rows[i][c], where);
    rows.push_back(std::move(r));
  }
  return ReplaySchedule(std::move(rows), hold_last);
}

/// US 2022 federal income tax, single filer, in dollars.
inline BracketSchedule us2022_brackets() {
  return BracketSchedule({{0.0, 0.10},
                          {10275.0, 0.12},
                          {41775.0, 0.22},
                          {89075.0, 0.24},
                          {170050.0, 0.32},
                          {215950.0, 0.35},
                          {539900.0, 0.37}});
}

// ---------------------------------------------------------------------------
// Households

struct HouseholdProfile {
  int adult_age = 18;
  double labor_min = 0.15;
  double labor_peak = 0.55;
  double labor_peak_age = 45.0;
  double labor_width = 20.0;
  double child_allocation = 0.9;
  double allocation_young = 0.7;
  double allocation_peak = 0.85;
  double allocation_decay = 0.02;  // per year past retirement
  double allocation_floor = 0.3;
  double risky_young = 0.6;
  double risky_slope = 0.007;  // per year past adult age
  // Ramsey households act on constants.
  double ramsey_allocation = 0.8;
  double ramsey_labor = 0.4;
  double ramsey_investment = 0.3;
};

/// Age-profile household rule. Labor is an inverted U over working ages,
/// the saving share rises through the career and falls after retirement,
/// and the risky share declines with age.
inline HouseholdAction heuristic_household_policy(const HouseholdObservation& obs,
                                                  const HouseholdProfile& p, int retirement_age) {
  HouseholdAction a;
  if (!obs.age) {
    a.allocation = p.ramsey_allocation;
    a.labor = p.ramsey_labor;
    a.investment = p.ramsey_investment;
    return a;
  }
  const int age = *obs.age;
  const bool retired = obs.retired || age > retirement_age;
  if (age < p.adult_age) {
    a.allocation = p.child_allocation;
    a.labor = 0.0;
    a.investment = p.risky_young;
    return a;
  }
  if (!retired) {
    const double z = (age - p.labor_peak_age) / p.labor_width;
    a.labor = p.labor_min + (p.labor_peak - p.labor_min) * std::exp(-z * z);
    const double span = std::max(1, retirement_age - p.adult_age);
    const double progress = std::clamp((age - p.adult_age) / span, 0.0, 1.0);
    a.allocation = p.allocation_young + (p.allocation_peak - p.allocation_young) * progress;
  } else {
    a.labor = 0.0;
    a.allocation = std::max(p.allocation_floor,
                            p.allocation_peak - p.allocation_decay * (age - retirement_age));
  }
  a.investment = p.risky_young - p.risky_slope * (age - p.adult_age);
  a.allocation = std::clamp(a.allocation, 0.0, 1.0);
  a.labor = std::clamp(a.labor, 0.0, 1.0);
  a.investment = std::clamp(a.investment, 0.05, 0.95);
  return a;
}

// ---------------------------------------------------------------------------
// Firms

struct MarkupParams {
  double price_gain = 0.0;  // response of the markup to last year's excess demand
};

/// Wage at the marginal revenue product of labor; price at the markup over
/// short-run marginal cost W / MPL, nudged by last year's excess demand.
inline FirmAction markup_firm_policy(const FirmObservation& obs, const FirmState& last,
                                     const TechnologyParams& tech, const MarkupParams& p) {
  FirmAction a{obs.price, obs.wage};
  if (!(obs.capital > 0.0) || !(obs.labor > 0.0)) return a;
  const double mu = markup_factor(tech.elasticity);
  const double mpl = (1.0 - tech.alpha) * obs.tfp * std::pow(obs.capital / obs.labor, tech.alpha);
  a.wage = obs.price / mu * mpl;
  double excess = 0.0;
  if (last.output > 0.0) excess = (last.demand - last.output) / last.output;
  a.price = std::max(mu * a.wage / mpl * (1.0 + p.price_gain * excess), obs.price * 1e-3);
  return a;
}

// ---------------------------------------------------------------------------
// Binding resolution

namespace detail {
inline double param(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("policy parameter '") + key + "' must be a number");
  return v.get<double>();
}
inline int int_param(const nlohmann::json& j, const char* key, int fallback) {
  return static_cast<int>(std::lround(param(j, key, fallback)));
}
}  // namespace detail

/// Replay parameters: {"rows": [{"t": 0, ...}], "csv": path, "hold_last": bool}.
inline ReplaySchedule replay_from_params(const nlohmann::json& j) {
  const bool hold = j.value("hold_last", true);
  if (j.contains("csv")) return replay_from_csv(read_csv_file(j.at("csv").get<std::string>()), hold);
  if (!j.contains("rows")) return ReplaySchedule({ReplayRow{0, {}}}, hold);
  std::vector<ReplayRow> rows;
  for (const auto& r : j.at("rows")) {
    ReplayRow row;
    row.t = r.at("t").get<int>();
    for (const auto& [k, v] : r.items())
      if (k != "t") row.values[k] = v.get<double>();
    rows.push_back(std::move(row));
  }
  return ReplaySchedule(std::move(rows), hold);
}

/// Bracket schedule named by policy params: "brackets" is "us-2022", a CSV
/// path, or a list of {lower, rate}; "bracket_scale" rescales the bounds.
inline BracketSchedule brackets_from_params(const nlohmann::json& j) {
  if (!j.contains("brackets")) return {};
  const auto& b = j.at("brackets");
  BracketSchedule s;
  if (b.is_string()) {
    const auto name = b.get<std::string>();
    s = name == "us-2022" ? us2022_brackets() : brackets_from_csv(read_csv_file(name));
  } else {
    std::vector<TaxBracket> rows;
    for (const auto& r : b) rows.push_back({r.at("lower").get<double>(), r.at("rate").get<double>()});
    s = BracketSchedule(std::move(rows));
  }
  return s.scaled(detail::param(j, "bracket_scale", 1.0));
}

inline const std::vector<std::string>& policy_kinds() {
  static const std::vector<std::string> k = {"constant", "taylor", "saez", "imf-pension",
                                             "replay", "heuristic-household", "markup", "external"};
  return k;
}

/// Kinds each role accepts.
inline bool policy_allowed(const std::string& role, const std::string& kind) {
  static const std::map<std::string, std::vector<std::string>> allowed = {
      {"households", {"heuristic-household", "constant", "external"}},
      {"fiscal", {"constant", "saez", "replay", "external"}},
      {"central_bank", {"constant", "taylor", "replay", "external"}},
      {"pension", {"constant", "imf-pension", "replay", "external"}},
      {"bank", {"constant", "external"}},
      {"firms", {"markup", "constant", "external"}},
  };
  auto it = allowed.find(role);
  return it != allowed.end() &&
         std::find(it->second.begin(), it->second.end(), kind) != it->second.end();
}

/// Evaluates every role's binding for one step. External roles take their
/// action from `external`, which must carry it.
class PolicySet {
 public:
  explicit PolicySet(EconomyConfig cfg) : cfg_(std::move(cfg)) {
    const auto& b = cfg_.policies;
    check("households", b.households);
    check("fiscal", b.fiscal);
    check("central_bank", b.central_bank);
    check("pension", b.pension);
    check("bank", b.bank);
    check("firms", b.firms);
    if (b.fiscal.kind == "replay") {
      fiscal_replay_ = replay_from_params(b.fiscal.params);
      fiscal_brackets_ = brackets_from_params(b.fiscal.params);
    }
    if (b.fiscal.kind == "constant") fiscal_brackets_ = brackets_from_params(b.fiscal.params);
    if (b.central_bank.kind == "replay") cb_replay_ = replay_from_params(b.central_bank.params);
    if (b.pension.kind == "replay") pension_replay_ = replay_from_params(b.pension.params);
    const auto& hp = b.households.params;
    HouseholdProfile d;
    profile_ = {detail::int_param(hp, "adult_age", d.adult_age),
                detail::param(hp, "labor_min", d.labor_min),
                detail::param(hp, "labor_peak", d.labor_peak),
                detail::param(hp, "labor_peak_age", d.labor_peak_age),
                detail::param(hp, "labor_width", d.labor_width),
                detail::param(hp, "child_allocation", d.child_allocation),
                detail::param(hp, "allocation_young", d.allocation_young),
                detail::param(hp, "allocation_peak", d.allocation_peak),
                detail::param(hp, "allocation_decay", d.allocation_decay),
                detail::param(hp, "allocation_floor", d.allocation_floor),
                detail::param(hp, "risky_young", d.risky_young),
                detail::param(hp, "risky_slope", d.risky_slope),
                detail::param(hp, "allocation", d.ramsey_allocation),
                detail::param(hp, "labor", d.ramsey_labor),
                detail::param(hp, "investment", d.ramsey_investment)};
  }

  bool any_external() const {
    const auto& b = cfg_.policies;
    return b.households.kind == "external" ||
           (cfg_.roles.has(GovKind::fiscal) && b.fiscal.kind == "external") ||
           (cfg_.roles.has(GovKind::central_bank) && b.central_bank.kind == "external") ||
           (cfg_.roles.has(GovKind::pension) && b.pension.kind == "external") ||
           (cfg_.roles.bank == BankKind::commercial && b.bank.kind == "external") ||
           (is_strategic(cfg_.roles.firm) && b.firms.kind == "external");
  }

  JointAction decide(const EconomySnapshot& s, const Observations& obs,
                     const JointAction* external = nullptr) const {
    const auto& b = cfg_.policies;
    JointAction a;
    auto ext = [&](const char* who) -> const JointAction& {
      if (!external) throw ActionError(std::string(who) + " is bound to an external agent");
      return *external;
    };
    const int t = s.clock.t;
    if (s.fiscal.active) {
      if (b.fiscal.kind == "external") a.fiscal = ext("fiscal").fiscal;
      else a.fiscal = fiscal_action(s, b.fiscal, t);
    }
    if (s.central_bank) {
      if (b.central_bank.kind == "external") a.central_bank = ext("central bank").central_bank;
      else a.central_bank = central_bank_action(s, b.central_bank, t);
    }
    if (s.pension) {
      if (b.pension.kind == "external") a.pension = ext("pension").pension;
      else a.pension = pension_action(s, b.pension, t);
    }
    if (cfg_.roles.bank == BankKind::commercial) {
      if (b.bank.kind == "external") a.bank = ext("bank").bank;
      else
        a.bank = BankAction{detail::param(b.bank.params, "deposit_rate", 0.0),
                            detail::param(b.bank.params, "lending_rate", 1.0)};
    }
    if (is_strategic(cfg_.roles.firm)) {
      if (b.firms.kind == "external") {
        a.firms = ext("firms").firms;
      } else {
        for (std::size_t j = 0; j < s.firms.size(); ++j) {
          if (b.firms.kind == "constant")
            a.firms.push_back({detail::param(b.firms.params, "price", 1.0),
                               detail::param(b.firms.params, "wage", s.firms[j].wage)});
          else
            a.firms.push_back(markup_firm_policy(
                obs.firms[j], s.firms[j], cfg_.technology,
                MarkupParams{detail::param(b.firms.params, "price_gain", 0.0)}));
        }
      }
    }
    if (b.households.kind == "external") {
      a.households = ext("households").households;
    } else if (b.households.kind == "constant") {
      const HouseholdAction c{detail::param(b.households.params, "allocation", 0.8),
                              detail::param(b.households.params, "labor", 0.4),
                              detail::param(b.households.params, "investment", 0.3)};
      a.households.assign(s.households.size(), c);
    } else {
      const int age_r = effective_retirement_age(cfg_, s);
      a.households.resize(obs.households.size());
      parallel_for(obs.households.size(), cfg_.runtime.threads, cfg_.runtime.grain,
                   [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i)
                       a.households[i] = heuristic_household_policy(obs.households[i], profile_, age_r);
                   });
    }
    return a;
  }

 private:
  static void check(const char* role, const PolicyBinding& p) {
    if (!policy_allowed(role, p.kind))
      throw ConfigError(std::string("policies.") + role + ": kind '" + p.kind +
                        "' not available for this role");
  }

  FiscalAction fiscal_action(const EconomySnapshot& s, const PolicyBinding& b, int t) const {
    const auto& f = cfg_.fiscal;
    if (b.kind == "saez") {
      std::vector<double> incomes;
      incomes.reserve(s.households.size());
      for (const auto& h : s.households) incomes.push_back(std::max(0.0, h.income));
      SaezParams p;
      p.elasticity = detail::param(b.params, "elasticity", p.elasticity);
      p.welfare_weight = detail::param(b.params, "welfare_weight", p.welfare_weight);
      p.base_rate = detail::param(b.params, "base_rate", p.base_rate);
      p.spending_share = detail::param(b.params, "spending_share", f.spending_share);
      p.xi = f.xi;
      return saez_tax_policy(incomes, p);
    }
    FiscalAction a{f.tau, f.xi, f.tau_a, f.xi_a, f.spending_share, fiscal_brackets_};
    if (b.kind == "replay") {
      a.tau = fiscal_replay_.value(t, "tau", a.tau);
      a.xi = fiscal_replay_.value(t, "xi", a.xi);
      a.tau_a = fiscal_replay_.value(t, "tau_a", a.tau_a);
      a.xi_a = fiscal_replay_.value(t, "xi_a", a.xi_a);
      a.spending_share = fiscal_replay_.value(t, "spending_share", a.spending_share);
    } else {
      a.tau = detail::param(b.params, "tau", a.tau);
      a.xi = detail::param(b.params, "xi", a.xi);
      a.tau_a = detail::param(b.params, "tau_a", a.tau_a);
      a.xi_a = detail::param(b.params, "xi_a", a.xi_a);
      a.spending_share = detail::param(b.params, "spending_share", a.spending_share);
    }
    return a;
  }

  CentralBankAction central_bank_action(const EconomySnapshot& s, const PolicyBinding& b,
                                        int t) const {
    const auto& c = cfg_.central_bank;
    if (b.kind == "taylor") {
      TaylorParams p;
      p.neutral_rate = detail::param(b.params, "neutral_rate", p.neutral_rate);
      p.target_inflation = c.target_inflation;
      p.target_growth = c.target_growth;
      p.inflation_weight = detail::param(b.params, "inflation_weight", p.inflation_weight);
      p.growth_weight = detail::param(b.params, "growth_weight", p.growth_weight);
      p.floor = detail::param(b.params, "floor", p.floor);
      p.reserve_ratio = detail::param(b.params, "reserve_ratio", c.reserve_ratio);
      return taylor_rule(s.macro.inflation, s.macro.growth, p);
    }
    if (b.kind == "replay")
      return {cb_replay_.value(t, "policy_rate", c.policy_rate),
              cb_replay_.value(t, "reserve_ratio", c.reserve_ratio)};
    return {detail::param(b.params, "policy_rate", c.policy_rate),
            detail::param(b.params, "reserve_ratio", c.reserve_ratio)};
  }

  PensionAction pension_action(const EconomySnapshot& s, const PolicyBinding& b, int t) const {
    const auto& ps = *s.pension;
    PensionAction current{ps.retirement_age, ps.contribution_rate, ps.target_growth};
    if (b.kind == "imf-pension") {
      if (ps.fund_history.size() < 2) return current;
      ImfPensionParams p;
      p.horizon = detail::int_param(b.params, "horizon", p.horizon);
      p.age_step = detail::int_param(b.params, "age_step", p.age_step);
      p.rate_step = detail::param(b.params, "rate_step", p.rate_step);
      p.max_rate = detail::param(b.params, "max_rate", p.max_rate);
      return imf_pension_rule(ps.fund_history, current, p);
    }
    if (b.kind == "replay")
      return {static_cast<int>(std::lround(
                  pension_replay_.value(t, "retirement_age", cfg_.pension.retirement_age))),
              pension_replay_.value(t, "contribution_rate", cfg_.pension.contribution_rate),
              pension_replay_.value(t, "target_growth", cfg_.pension.target_growth)};
    return {detail::int_param(b.params, "retirement_age", cfg_.pension.retirement_age),
            detail::param(b.params, "contribution_rate", cfg_.pension.contribution_rate),
            detail::param(b.params, "target_growth", cfg_.pension.target_growth)};
  }

  EconomyConfig cfg_;
  HouseholdProfile profile_;
  ReplaySchedule fiscal_replay_, cb_replay_, pension_replay_;
  BracketSchedule fiscal_brackets_;
};

}  // namespace econsim
