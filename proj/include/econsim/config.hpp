#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econsim/banks.hpp"
#include "econsim/firms.hpp"
#include "econsim/governments.hpp"
#include "econsim/households.hpp"
#include "econsim/types.hpp"

namespace econsim {

struct Roles {
  IndividualKind individual = IndividualKind::olg;
  std::vector<GovKind> governments;
  BankKind bank = BankKind::non_profit;
  FirmKind firm = FirmKind::perfect;
  int firm_count = 1;

  bool has(GovKind g) const {
    return std::find(governments.begin(), governments.end(), g) != governments.end();
  }
};

struct ReturnsParams {
  Rate base_rate = 0.03;       // bond rate when neither capital nor a central bank sets it
  Rate risky_premium = 0.02;   // mean of rho over the last deposit rate
  double risky_volatility = 0.1;
  double education_persistence = 0.9;  // Ramsey AR(1) in log education
  double education_shock = 0.1;
};

struct FiscalParams {
  FiscalObjective objective = FiscalObjective::gdp_growth;
  double tau = 0.2;
  double xi = 0.0;
  double tau_a = 0.0;
  double xi_a = 0.0;
  double spending_share = 0.15;
  Money initial_debt = 0.0;
  double debt_cap = 10.0;  // termination when B / Y exceeds this
};

struct CentralBankParams {
  Rate policy_rate = 0.03;
  double reserve_ratio = 0.1;
  Rate target_inflation = 0.02;
  Rate target_growth = 0.05;
  double growth_weight = 0.5;
};

struct PensionParams {
  Money initial_fund_per_capita = 20000.0;
  Rate contribution_rate = 0.08;
  int retirement_age = 65;
  Rate target_growth = 0.0;
  std::optional<Rate> fund_return;  // defaults to the deposit rate
  bool hard_stop = true;
};

struct PopulationParams {
  int size = 1000;
  int min_age = 18;
  int max_age = 64;
  double pyramid_taper = 0.5;  // weight of the oldest initial cohort relative to the youngest
  int work_entry_age = 22;
  double education_log_mean = 0.0;
  double education_log_sd = 0.4;
  double wealth_log_mean = 8.5;
  double wealth_log_sd = 1.0;
  double risky_share = 0.3;
  std::string csv;  // optional initial population file
};

struct TerminationParams {
  int horizon = 300;
  double insolvent_share = 0.95;
};

struct RuntimeParams {
  unsigned threads = 1;
  std::size_t grain = 4096;
};

/// A role's decision rule: kind plus free-form parameters read by the policy.
struct PolicyBinding {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

struct PolicyBindings {
  PolicyBinding households{"heuristic-household", nlohmann::json::object()};
  PolicyBinding fiscal{"constant", nlohmann::json::object()};
  PolicyBinding central_bank{"taylor", nlohmann::json::object()};
  PolicyBinding pension{"constant", nlohmann::json::object()};
  PolicyBinding bank{"constant", nlohmann::json::object()};
  PolicyBinding firms{"markup", nlohmann::json::object()};
};

struct EconomyConfig {
  Roles roles;
  Preferences preferences;
  TechnologyParams technology;
  ReturnsParams returns;
  Demographics demographics;
  FiscalParams fiscal;
  CentralBankParams central_bank;
  PensionParams pension;
  PopulationParams population;
  TerminationParams termination;
  RuntimeParams runtime;
  PolicyBindings policies;
};

namespace detail {
inline bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}
inline bool valid_rate(double r) { return std::isfinite(r) && r >= -1.0 && r <= 10.0; }
inline bool valid_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }
}  // namespace detail

/// Checks parameter ranges and the role grammar. Returns one message per
/// violation; an empty list means the config can be reset.
inline std::vector<std::string> validate_config(const EconomyConfig& c) {
  using detail::valid_prob;
  using detail::valid_rate;
  std::vector<std::string> v;
  const auto& r = c.roles;
  const bool olg = r.individual == IndividualKind::olg;
  const bool fiscal = r.has(GovKind::fiscal);
  const bool cb = r.has(GovKind::central_bank);
  const bool pension = r.has(GovKind::pension);

  // Role grammar.
  for (std::size_t i = 0; i < r.governments.size(); ++i)
    for (std::size_t j = i + 1; j < r.governments.size(); ++j)
      if (r.governments[i] == r.governments[j])
        v.push_back("government " + std::string(to_string(r.governments[i])) + " listed twice");
  if (pension && !olg) v.push_back("pension requires OLG");
  // Allowed (individual, firm, bank) cells; governments are free apart from
  // the pension rule above.
  if (r.firm != FirmKind::perfect && (olg || r.bank == BankKind::commercial))
    v.push_back("strategic firms require Ramsey individuals and the non-profit bank");
  if (r.firm_count < 1) v.push_back("firm count must be >= 1");
  if (r.firm == FirmKind::monopoly && r.firm_count != 1) v.push_back("monopoly has exactly one firm");
  if (r.firm == FirmKind::oligopoly && r.firm_count < 2) v.push_back("oligopoly needs N_f >= 2");
  if (r.firm == FirmKind::monopolistic && r.firm_count < 2)
    v.push_back("monopolistic competition needs N_f >= 2");

  // Preferences.
  const auto& p = c.preferences;
  if (!(p.beta > 0.0 && p.beta < 1.0)) v.push_back("β ∈ (0,1)");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) v.push_back("σ > 0");
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) v.push_back("γ > 0");
  if (!(p.max_hours > 0.0) || !std::isfinite(p.max_hours)) v.push_back("h_max > 0");
  if (!detail::finite_all({p.asset_floor, p.floor_utility, p.subsistence}) || p.subsistence < 0.0)
    v.push_back("asset floor, floor utility and subsistence must be finite (subsistence >= 0)");

  // Technology.
  const auto& t = c.technology;
  if (!(t.alpha > 0.0 && t.alpha < 1.0)) v.push_back("α ∈ (0,1)");
  if (!valid_prob(t.delta)) v.push_back("δ ∈ [0,1]");
  if (!(t.tfp_volatility >= 0.0) || !std::isfinite(t.tfp_volatility)) v.push_back("σ_z >= 0");
  if (r.firm != FirmKind::perfect && !(t.elasticity > 1.0)) v.push_back("ε > 1");
  if (!(t.price_gain >= 0.0 && t.price_gain < 1.0)) v.push_back("price gain κ ∈ [0,1)");
  if (!(t.choice_temperature >= 0.0)) v.push_back("choice temperature >= 0");

  // Returns.
  const auto& ret = c.returns;
  if (!valid_rate(ret.base_rate)) v.push_back("base rate outside [-1,10]");
  if (!valid_rate(ret.risky_premium)) v.push_back("risky premium outside [-1,10]");
  if (!(ret.risky_volatility >= 0.0)) v.push_back("risky volatility >= 0");
  if (!(std::abs(ret.education_persistence) < 1.0)) v.push_back("education persistence in (-1,1)");
  if (!(ret.education_shock >= 0.0)) v.push_back("education shock >= 0");

  // Demographics only matter for OLG.
  if (olg) {
    for (auto& m : validate_demographics(c.demographics)) v.push_back(std::move(m));
    if (c.population.max_age > c.demographics.age_max)
      v.push_back("initial ages exceed age_max");
  }

  if (fiscal) {
    const auto& f = c.fiscal;
    if (!valid_prob(f.tau)) v.push_back("τ ∈ [0,1]");
    if (!valid_prob(f.tau_a)) v.push_back("τ_a ∈ [0,1]");
    if (std::abs(f.xi - 1.0) < 1e-12) v.push_back("ξ ≠ 1");
    if (std::abs(f.xi_a - 1.0) < 1e-12) v.push_back("ξ_a ≠ 1");
    if (!valid_prob(f.spending_share)) v.push_back("spending share ∈ [0,1]");
    if (!(f.debt_cap > 0.0)) v.push_back("debt cap > 0");
  }
  if (cb) {
    const auto& b = c.central_bank;
    if (!valid_rate(b.policy_rate)) v.push_back("policy rate outside [-1,10]");
    if (!valid_prob(b.reserve_ratio)) v.push_back("φ ∈ [0,1]");
    if (!(b.growth_weight >= 0.0)) v.push_back("λ_π >= 0");
    if (!detail::finite_all({b.target_inflation, b.target_growth}))
      v.push_back("central bank targets must be finite");
  }
  if (pension) {
    const auto& ps = c.pension;
    if (!valid_prob(ps.contribution_rate)) v.push_back("τ_p ∈ [0,1]");
    if (ps.retirement_age < kAnnuityMinAge || ps.retirement_age > kAnnuityMaxAge)
      v.push_back("retirement age outside annuity table [40,70]");
    if (ps.fund_return && !valid_rate(*ps.fund_return)) v.push_back("fund return outside [-1,10]");
    if (!std::isfinite(ps.initial_fund_per_capita)) v.push_back("initial fund must be finite");
  }

  const auto& pop = c.population;
  if (pop.size < 1) v.push_back("N >= 1");
  if (pop.min_age < 0 || pop.max_age < pop.min_age) v.push_back("initial age range is empty");
  if (!(pop.pyramid_taper > 0.0)) v.push_back("pyramid taper > 0");
  if (!(pop.education_log_sd >= 0.0) || !(pop.wealth_log_sd >= 0.0))
    v.push_back("initial distribution spreads must be >= 0");
  if (!valid_prob(pop.risky_share)) v.push_back("initial risky share ∈ [0,1]");

  if (c.termination.horizon < 0) v.push_back("horizon >= 0");
  if (!valid_prob(c.termination.insolvent_share)) v.push_back("insolvent share ∈ [0,1]");
  if (c.runtime.threads < 1) v.push_back("threads >= 1");
  return v;
}

}  // namespace econsim
