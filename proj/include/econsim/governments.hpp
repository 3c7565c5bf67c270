#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "econsim/households.hpp"
#include "econsim/metrics.hpp"
#include "econsim/taxes.hpp"
#include "econsim/types.hpp"

namespace econsim {

enum class FiscalObjective { gdp_growth, equality, welfare };

constexpr std::string_view to_string(FiscalObjective o) {
  switch (o) {
    case FiscalObjective::gdp_growth: return "gdp-growth";
    case FiscalObjective::equality: return "equality";
    case FiscalObjective::welfare: return "welfare";
  }
  return "?";
}

/// The public-sector ledger. It always exists so estates and interest have a
/// home; taxes and spending only apply while the fiscal authority is active.
struct FiscalState {
  bool active = false;
  Money debt = 0.0;
  TaxSchedule tax;
  double spending_share = 0.0;  // fraction of lagged GDP
  Money revenue = 0.0;          // realized in the last step
  Money spending = 0.0;
  FiscalObjective objective = FiscalObjective::gdp_growth;

  bool operator==(const FiscalState&) const = default;
};

struct FiscalAction {
  double tau = 0.0;
  double xi = 0.0;
  double tau_a = 0.0;
  double xi_a = 0.0;
  double spending_share = 0.0;
  BracketSchedule brackets;  // empty: HSV income tax

  bool operator==(const FiscalAction&) const = default;
};

struct CentralBankState {
  Rate policy_rate = 0.03;
  double reserve_ratio = 0.1;
  Rate target_inflation = 0.02;
  Rate target_growth = 0.05;
  double growth_weight = 0.5;

  bool operator==(const CentralBankState&) const = default;
};

struct CentralBankAction {
  Rate policy_rate = 0.0;
  double reserve_ratio = 0.0;

  bool operator==(const CentralBankAction&) const = default;
};

struct PensionState {
  Money fund = 0.0;
  Rate fund_return = 0.0;
  Rate contribution_rate = 0.08;
  int retirement_age = 65;
  Rate target_growth = 0.0;
  Money average_wage = 0.0;
  bool solvent = true;  // F' >= (1+k) F held in the last step
  std::vector<Money> fund_history;  // most recent last, bounded window

  bool operator==(const PensionState&) const = default;
};

struct PensionAction {
  int retirement_age = 65;
  Rate contribution_rate = 0.0;
  Rate target_growth = 0.0;

  bool operator==(const PensionAction&) const = default;
};

/// Reward plus a flag for collapsed economies (non-positive lagged GDP).
struct RewardValue {
  double value = 0.0;
  bool collapse = false;
};

// ---------------------------------------------------------------------------
// Fiscal authority

/// (1 + r) B + G = B' + T.
inline Money fiscal_budget_step(Money debt, Rate rate, Money spending, Money revenue) {
  return (1.0 + rate) * debt + spending - revenue;
}

inline RewardValue gdp_growth_reward(Money gdp, Money gdp_prev) {
  if (!(gdp_prev > 0.0)) return {0.0, true};
  return {gdp / gdp_prev - 1.0, false};
}

inline RewardValue fiscal_reward(FiscalObjective objective, Money gdp, Money gdp_prev,
                                 std::span<const double> incomes,
                                 std::span<const double> utilities) {
  switch (objective) {
    case FiscalObjective::gdp_growth:
      return gdp_growth_reward(gdp, gdp_prev);
    case FiscalObjective::equality:
      return {1.0 - gini(incomes).value, false};
    case FiscalObjective::welfare:
      return {social_welfare(utilities), false};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Central bank

/// exp(-[(pi - pi*)^2 + lambda (g - g*)^2]); in (0, 1], maximal on target.
inline double central_bank_reward(Rate inflation, Rate growth, const CentralBankState& cb) {
  const double di = inflation - cb.target_inflation;
  const double dg = growth - cb.target_growth;
  return std::exp(-(di * di + cb.growth_weight * dg * dg));
}

/// Quadratic loss the bank minimizes; reported as a diagnostic only.
inline double central_bank_loss(Rate inflation, Rate growth, const CentralBankState& cb) {
  const double di = inflation - cb.target_inflation;
  const double dg = growth - cb.target_growth;
  return di * di + cb.growth_weight * dg * dg;
}

// ---------------------------------------------------------------------------
// Pension authority

struct PensionFundUpdate {
  Money fund = 0.0;
  bool solvent = true;   // F' >= (1+k) F
  bool depleted = false;  // F' < 0
};

/// F' = (1 + r^f) F + contributions - payouts. The growth floor is reported,
/// not enforced.
inline PensionFundUpdate pension_fund_step(const PensionState& ps, Money contributions,
                                           Money payouts) {
  PensionFundUpdate u;
  u.fund = (1.0 + ps.fund_return) * ps.fund + contributions - payouts;
  u.solvent = u.fund >= (1.0 + ps.target_growth) * ps.fund;
  u.depleted = u.fund < 0.0;
  return u;
}

inline constexpr int kAnnuityMinAge = 40;
inline constexpr int kAnnuityMaxAge = 70;

/// Annuity divisor M by retirement age, ages 40 through 70.
inline constexpr std::array<int, 31> kAnnuityFactors = {
    233, 230, 226, 223, 220, 216, 212, 208, 204, 199, 195,  // 40-50
    190, 185, 180, 175, 170, 164, 158, 152, 145, 139,       // 51-60
    132, 125, 117, 109, 101, 93,  84,  75,  65,  56,        // 61-70
};

inline int annuity_factor(int retirement_age) {
  if (retirement_age < kAnnuityMinAge || retirement_age > kAnnuityMaxAge)
    throw ConfigError("retirement age " + std::to_string(retirement_age) +
                      " outside annuity table [40,70]");
  return kAnnuityFactors[static_cast<std::size_t>(retirement_age - kAnnuityMinAge)];
}

struct PensionBenefit {
  Money basic = 0.0;
  Money personal = 0.0;
  Money total() const noexcept { return basic + personal; }
};

/// Basic benefit ((E_avg + E_ind) / 2) * T^p * 1% plus the personal account
/// annuitized over M. Paid once per model year.
inline PensionBenefit pension_benefit(const HouseholdState& agent, const PensionState& ps) {
  PensionBenefit b;
  b.basic = 0.5 * (ps.average_wage + agent.wage_history_mean) * agent.contribution_years * 0.01;
  b.personal = agent.personal_account / annuity_factor(ps.retirement_age);
  return b;
}

/// Recursive form of A_t = sum_s P^y_s (1 + r^f)^(t - s).
inline Money accumulate_personal_account(Money account, Money contribution, Rate fund_return) {
  return (1.0 + fund_return) * account + contribution;
}

inline RewardValue pension_reward(Money gdp, Money gdp_prev) {
  return gdp_growth_reward(gdp, gdp_prev);
}

}  // namespace econsim
