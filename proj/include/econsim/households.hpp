#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "econsim/rng.hpp"
#include "econsim/taxes.hpp"
#include "econsim/types.hpp"

namespace econsim {

struct HouseholdState {
  AgentId id = 0;
  Money savings = 0.0;
  Money risky = 0.0;
  double education = 1.0;
  std::optional<int> age;  // OLG only
  bool alive = true;
  bool retired = false;
  bool insolvent = false;

  // Pension record (OLG).
  int contribution_years = 0;
  Money personal_account = 0.0;
  Money wage_history_mean = 0.0;

  // Realizations of the last step this agent acted in.
  double consumption = 0.0;
  double hours = 0.0;
  Money income = 0.0;  // pre-tax labor + capital income
  double utility = 0.0;

  Money assets() const noexcept { return savings + risky; }
  bool operator==(const HouseholdState&) const = default;
};

/// allocation: share of resources not consumed; labor: fraction of h_max;
/// investment: risky share of next-period assets.
struct HouseholdAction {
  double allocation = 0.0;
  double labor = 0.0;
  double investment = 0.0;

  bool operator==(const HouseholdAction&) const = default;
};

inline bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

inline void validate_action(const HouseholdAction& a) {
  if (!in_unit_interval(a.allocation) || !in_unit_interval(a.labor) ||
      !in_unit_interval(a.investment))
    throw ActionError("household action components must lie in [0,1]");
}

struct Preferences {
  double beta = 0.96;
  double sigma = 2.0;
  double gamma = 2.0;
  double max_hours = 2512.0;
  Money asset_floor = 0.0;
  double floor_utility = -1e10;
  double subsistence = 0.0;
};

/// Prices and policy terms one household faces in a step.
struct MarketTerms {
  Money price = 1.0;
  Money wage = 0.0;
  Rate deposit_return = 0.0;
  Rate risky_return = 0.0;
  const TaxSchedule* tax = nullptr;  // null: no fiscal authority
  Rate contribution_rate = 0.0;      // applied to labor income of contributors
  Money pension_benefit = 0.0;       // paid to retirees
};

/// Period utility c^(1-sigma)/(1-sigma) - h^(1+gamma)/(1+gamma), with the
/// log limit at sigma = 1. Non-positive consumption returns the floor.
inline double utility(double c, double h, double sigma, double gamma,
                      double floor_utility = -1e10) {
  if (!(c > 0.0)) return floor_utility;
  const double consume = std::abs(sigma - 1.0) < 1e-9
                             ? std::log(c)
                             : std::pow(c, 1.0 - sigma) / (1.0 - sigma);
  const double work = h > 0.0 ? std::pow(h, 1.0 + gamma) / (1.0 + gamma) : 0.0;
  return consume - work;
}

/// Components of m for one household-step.
struct Resources {
  Money carried = 0.0;         // (1+r)s + (1+rho)v
  Money capital_income = 0.0;  // r s + rho v
  Money labor_income = 0.0;
  Money tax = 0.0;
  Money contribution = 0.0;
  Money benefit = 0.0;
  Money total = 0.0;

  Money pretax_income() const noexcept { return capital_income + labor_income; }
};

inline Resources resource_breakdown(const HouseholdState& s, const MarketTerms& terms,
                                    double hours) {
  Resources r;
  const Money deposit_gain = terms.deposit_return * s.savings;
  const Money risky_gain = terms.risky_return * s.risky;
  r.carried = (1.0 + terms.deposit_return) * s.savings + (1.0 + terms.risky_return) * s.risky;
  r.capital_income = deposit_gain + risky_gain;
  r.labor_income = terms.wage * s.education * hours;
  if (terms.tax) {
    const Money taxable =
        r.labor_income + std::max(0.0, deposit_gain) + std::max(0.0, risky_gain);
    r.tax = terms.tax->income_tax(taxable) + terms.tax->asset_tax(s.assets());
  }
  r.contribution = terms.contribution_rate * r.labor_income;
  r.benefit = terms.pension_benefit;
  r.total = r.carried + r.labor_income - r.tax - r.contribution + r.benefit;
  return r;
}

inline Money disposable_resources(const HouseholdState& s, const MarketTerms& terms,
                                  double hours) {
  return resource_breakdown(s, terms, hours).total;
}

struct HouseholdDiagnostics {
  bool insolvent = false;
  bool asset_clamped = false;
  bool floor_utility = false;
  Money writeoff = 0.0;         // resources created by the insolvency floor
  double budget_residual = 0.0;  // p c + s' + v' - m - writeoff
};

struct HouseholdOutcome {
  HouseholdState next;
  double consumption = 0.0;
  double hours = 0.0;
  double reward = 0.0;
  Resources resources;
  HouseholdDiagnostics diagnostics;
};

/// Applies the allocation rule a' = alpha m, s' = (1-theta) a', v' = theta a',
/// with consumption the residual (1-alpha) m / p. Pension bookkeeping is left
/// to the caller.
inline HouseholdOutcome apply_household_action(const HouseholdState& state,
                                               const HouseholdAction& action,
                                               const MarketTerms& terms,
                                               const Preferences& prefs) {
  validate_action(action);
  if (!state.alive) throw ActionError("household " + std::to_string(state.id) + " is not alive");
  if (!(terms.price > 0.0)) throw std::invalid_argument("price must be positive");

  HouseholdOutcome out;
  out.hours = state.retired ? 0.0 : action.labor * prefs.max_hours;
  out.resources = resource_breakdown(state, terms, out.hours);
  const Money m = out.resources.total;

  Money next_assets = 0.0;
  auto& diag = out.diagnostics;
  if (m <= 0.0 || m < prefs.asset_floor) {
    diag.insolvent = true;
    out.consumption = prefs.subsistence;
    next_assets = prefs.asset_floor;
    diag.writeoff = terms.price * out.consumption + next_assets - m;
  } else {
    next_assets = action.allocation * m;
    if (next_assets < prefs.asset_floor) {
      next_assets = prefs.asset_floor;
      diag.asset_clamped = true;
    }
    out.consumption = (m - next_assets) / terms.price;
  }

  out.next = state;
  out.next.savings = (1.0 - action.investment) * next_assets;
  out.next.risky = next_assets - out.next.savings;
  out.next.insolvent = diag.insolvent;
  out.next.consumption = out.consumption;
  out.next.hours = out.hours;
  out.next.income = out.resources.pretax_income();

  out.reward = utility(out.consumption, out.hours, prefs.sigma, prefs.gamma, prefs.floor_utility);
  diag.floor_utility = !(out.consumption > 0.0);
  out.next.utility = out.reward;

  diag.budget_residual = terms.price * out.consumption + out.next.savings + out.next.risky - m -
                         diag.writeoff;
  return out;
}

// ---------------------------------------------------------------------------
// Demographics

struct MortalityBracket {
  int lo = 0;
  int hi = 0;  // inclusive
  double per_100k = 0.0;
};

using MortalityTable = std::vector<MortalityBracket>;

/// CDC 2022 stepwise death rates per 100,000. The open 85+ bracket is
/// closed at `age_max`.
inline MortalityTable cdc_2022_mortality(int age_max = 100) {
  return {
      {0, 0, 560.0},     {1, 4, 28.0},      {5, 14, 15.3},     {15, 24, 79.5},
      {25, 34, 163.4},   {35, 44, 255.4},   {45, 54, 453.3},   {55, 64, 992.1},
      {65, 74, 1978.7},  {75, 84, 4708.2},  {85, age_max, 14389.6},
  };
}

struct Demographics {
  Rate birth_rate = 0.011;
  MortalityTable mortality = cdc_2022_mortality();
  int age_max = 100;
  int retirement_age = 65;
};

inline std::vector<std::string> validate_demographics(const Demographics& d) {
  std::vector<std::string> v;
  if (!(d.birth_rate >= 0.0 && d.birth_rate <= 1.0)) v.push_back("birth rate must lie in [0,1]");
  if (d.age_max < 1) v.push_back("age_max must be positive");
  int expect = 0;
  for (const auto& b : d.mortality) {
    if (b.lo != expect || b.hi < b.lo) {
      v.push_back("mortality table must cover ages contiguously from 0");
      break;
    }
    if (!(b.per_100k >= 0.0 && b.per_100k <= 100000.0))
      v.push_back("mortality rate outside [0, 100000] per 100k");
    expect = b.hi + 1;
  }
  if (expect <= d.age_max) v.push_back("mortality table must cover ages 0..age_max");
  return v;
}

inline Rate mortality_probability(int age, const Demographics& d) {
  if (age < 0 || age > d.age_max)
    throw std::out_of_range("mortality_probability: age " + std::to_string(age) +
                            " outside table");
  for (const auto& b : d.mortality)
    if (age >= b.lo && age <= b.hi) return b.per_100k / 100000.0;
  throw std::out_of_range("mortality_probability: age " + std::to_string(age) +
                          " not covered by table");
}

struct InheritanceSplit {
  Money per_newborn = 0.0;
  Money routed = 0.0;  // goes to the fiscal ledger
};

/// Splits the estate of the deceased equally across newborns. The rounding
/// remainder (and the whole estate when nobody is born) is routed to the
/// fiscal ledger, so per_newborn summed n times plus routed reproduces the
/// estate exactly.
inline InheritanceSplit distribute_inheritance(std::span<const HouseholdState> deceased,
                                               int newborns) {
  Money estate = 0.0;
  for (const auto& d : deceased) estate += d.savings + d.risky;
  InheritanceSplit out;
  if (newborns <= 0) {
    out.routed = estate;
    return out;
  }
  out.per_newborn = estate / newborns;
  Money paid = 0.0;
  for (int k = 0; k < newborns; ++k) paid += out.per_newborn;
  out.routed = estate - paid;
  return out;
}

struct DemographicOutcome {
  std::vector<HouseholdState> deceased;
  int births = 0;
  InheritanceSplit inheritance;
  int population_before = 0;
};

/// Ages every agent by one year, draws deaths from the mortality table, adds
/// round(birth_rate * N) newborns endowed by distribute_inheritance, and
/// compacts the population in place. Each agent's death draw comes from its
/// own stream derived from `step_stream`, so the outcome does not depend on
/// iteration order.
///
/// `newborn_education` samples an education level from a per-newborn stream.
inline DemographicOutcome advance_demographics(
    std::vector<HouseholdState>& population, const Demographics& demo,
    const RngStream& step_stream, AgentId& next_id,
    const std::function<double(RngStream&)>& newborn_education) {
  DemographicOutcome out;
  out.population_before = static_cast<int>(population.size());
  const RngStream deaths_stream = step_stream.derive("death");
  const RngStream births_stream = step_stream.derive("birth");

  std::vector<Rate> death_rate(static_cast<std::size_t>(demo.age_max) + 1);
  for (int a = 0; a <= demo.age_max; ++a) death_rate[static_cast<std::size_t>(a)] = mortality_probability(a, demo);

  std::vector<HouseholdState> survivors;
  survivors.reserve(population.size() + 8);
  for (auto& h : population) {
    if (!h.age) throw std::logic_error("advance_demographics requires OLG agents");
    h.age = *h.age + 1;
    bool dies = *h.age > demo.age_max;
    if (!dies) {
      RngStream s = deaths_stream.derive(h.id);
      dies = s.uniform() < death_rate[static_cast<std::size_t>(*h.age)];
    }
    if (dies) {
      h.alive = false;
      out.deceased.push_back(h);
    } else {
      survivors.push_back(h);
    }
  }

  out.births = static_cast<int>(std::lround(demo.birth_rate * out.population_before));
  out.inheritance = distribute_inheritance(out.deceased, out.births);
  for (int k = 0; k < out.births; ++k) {
    HouseholdState baby;
    baby.id = next_id++;
    baby.age = 0;
    RngStream s = births_stream.derive(baby.id);
    baby.education = newborn_education(s);
    baby.savings = out.inheritance.per_newborn;
    survivors.push_back(baby);
  }
  population = std::move(survivors);
  return out;
}

}  // namespace econsim
