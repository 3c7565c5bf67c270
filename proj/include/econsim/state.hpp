#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "econsim/banks.hpp"
#include "econsim/firms.hpp"
#include "econsim/governments.hpp"
#include "econsim/households.hpp"
#include "econsim/metrics.hpp"
#include "econsim/types.hpp"

namespace econsim {

/// Aggregates of the last completed step (or of the initial state at t = 0).
struct MacroState {
  Money price = 1.0;       // price level households face next step
  Money price_prev = 1.0;
  Rate inflation = 0.0;
  double gdp = 0.0;        // real output
  double gdp_prev = 0.0;
  Money nominal_gdp = 0.0;
  Rate growth = 0.0;
  Money wage = 0.0;        // labor-weighted wage index
  double consumption = 0.0;
  Money spending = 0.0;    // government purchases G
  Money investment = 0.0;
  Money tax_revenue = 0.0;
  Rate deposit_rate = 0.0;
  Rate lending_rate = 0.0;
  Rate bond_rate = 0.0;
  Rate risky_return = 0.0;
  double goods_residual = 0.0;  // p Y - (p C + G + I)
  int population = 0;
  double young_share = 0.0;
  double dependency_ratio = 0.0;
  double avg_hours = 0.0;
  double gini_income = 0.0;
  double gini_wealth = 0.0;
  double welfare = 0.0;

  bool operator==(const MacroState&) const = default;
};

struct EconomySnapshot {
  EpisodeClock clock;
  std::uint64_t seed = 0;
  std::vector<HouseholdState> households;  // ascending id
  FiscalState fiscal;
  std::optional<CentralBankState> central_bank;
  std::optional<PensionState> pension;
  BankState bank;
  std::vector<FirmState> firms;
  MacroState macro;
  AgentId next_agent_id = 0;
  bool depleted = false;
  std::optional<int> depletion_year;

  bool operator==(const EconomySnapshot& o) const {
    return clock.t == o.clock.t && clock.horizon == o.clock.horizon && seed == o.seed &&
           households == o.households && fiscal == o.fiscal &&
           central_bank == o.central_bank && pension == o.pension && bank == o.bank &&
           firms == o.firms && macro == o.macro && next_agent_id == o.next_agent_id &&
           depleted == o.depleted && depletion_year == o.depletion_year;
  }
};

// ---------------------------------------------------------------------------
// Observations

/// Asset-ranked subgroup means: top 10% and bottom 50%, sizes rounded up.
struct GlobalStats {
  Money top_assets = 0.0;
  Money top_income = 0.0;
  double top_education = 0.0;
  Money bottom_assets = 0.0;
  Money bottom_income = 0.0;
  double bottom_education = 0.0;

  bool operator==(const GlobalStats&) const = default;
};

inline GlobalStats global_stats(std::span<const HouseholdState> hs) {
  if (hs.empty()) throw std::invalid_argument("global_stats: no households");
  const std::size_t n = hs.size();
  struct Key {
    double assets, income, education;
  };
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = {hs[i].assets(), hs[i].income, hs[i].education};
  // Descending by assets; income then education break ties so the result does
  // not depend on input order.
  const auto richer = [](const Key& x, const Key& y) {
    if (x.assets != y.assets) return x.assets > y.assets;
    if (x.income != y.income) return x.income > y.income;
    return x.education > y.education;
  };
  const auto top_n = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
  const auto bot_n = static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(n)));
  // Only the two cut points matter; selection keeps this linear in n.
  const auto at = [&](std::size_t k) { return keys.begin() + static_cast<std::ptrdiff_t>(k); };
  if (n - bot_n <= top_n) {
    std::sort(keys.begin(), keys.end(), richer);
  } else {
    std::nth_element(keys.begin(), at(top_n), keys.end(), richer);
    std::nth_element(at(top_n), at(n - bot_n), keys.end(), richer);
  }
  GlobalStats g;
  for (std::size_t k = 0; k < top_n; ++k) {
    g.top_assets += keys[k].assets;
    g.top_income += keys[k].income;
    g.top_education += keys[k].education;
  }
  for (std::size_t k = n - bot_n; k < n; ++k) {
    g.bottom_assets += keys[k].assets;
    g.bottom_income += keys[k].income;
    g.bottom_education += keys[k].education;
  }
  const double tn = static_cast<double>(top_n), bn = static_cast<double>(bot_n);
  g.top_assets /= tn;
  g.top_income /= tn;
  g.top_education /= tn;
  g.bottom_assets /= bn;
  g.bottom_income /= bn;
  g.bottom_education /= bn;
  return g;
}

struct HouseholdObservation {
  AgentId id = 0;
  Money assets = 0.0;
  double education = 0.0;
  std::optional<int> age;
  bool retired = false;  // not part of the flat vector; retirement is enforced by the env
};

inline constexpr std::size_t kIncomeQuantiles = 10;

/// Shared by every active government agent.
struct GovernmentObservation {
  Money debt = 0.0;
  Money wage = 0.0;
  Money price = 0.0;
  Rate inflation = 0.0;
  double gdp = 0.0;
  std::array<double, kIncomeQuantiles> income_quantiles{};  // at 10%, 20%, ..., 100%

  bool operator==(const GovernmentObservation&) const = default;
};

struct BankObservation {
  Rate benchmark = 0.0;
  double reserve_ratio = 0.0;
  Money deposits = 0.0;
  Money loans = 0.0;
  Money bonds = 0.0;
};

struct FirmObservation {
  Money capital = 0.0;
  double labor = 0.0;
  double tfp = 1.0;
  Money price = 1.0;
  Money wage = 0.0;
};

struct Observations {
  GlobalStats global;
  std::vector<HouseholdObservation> households;
  std::optional<GovernmentObservation> government;
  std::optional<BankObservation> bank;
  std::vector<FirmObservation> firms;
};

// ---------------------------------------------------------------------------
// Actions and results

struct JointAction {
  std::optional<FiscalAction> fiscal;
  std::optional<CentralBankAction> central_bank;
  std::optional<PensionAction> pension;
  std::optional<BankAction> bank;
  std::vector<FirmAction> firms;
  std::vector<HouseholdAction> households;  // aligned with snapshot.households

  bool operator==(const JointAction&) const = default;
};

struct Rewards {
  std::optional<double> fiscal;
  std::optional<double> central_bank;
  std::optional<double> pension;
  std::optional<double> bank;
  std::vector<double> firms;
  std::vector<double> households;  // aligned with the acting households

  bool operator==(const Rewards&) const = default;
};

struct StepResult {
  EconomySnapshot next;
  Rewards rewards;
  bool done = false;
  std::string reason;
  std::map<std::string, double> info;
};

}  // namespace econsim
