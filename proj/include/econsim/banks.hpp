#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "econsim/types.hpp"

namespace econsim {

struct BankState {
  BankKind kind = BankKind::non_profit;
  Money deposits = 0.0;  // A = sum of household savings
  Money loans = 0.0;     // K lent to firms
  Money bonds = 0.0;     // government bonds held
  Money reserves = 0.0;
  Rate deposit_rate = 0.0;
  Rate lending_rate = 0.0;
  bool distress = false;

  bool operator==(const BankState&) const = default;
};

struct BankAction {
  Rate deposit_rate = 0.0;
  Rate lending_rate = 0.0;

  bool operator==(const BankAction&) const = default;
};

inline constexpr double kCorridorDepositBelow = 0.01;
inline constexpr double kCorridorLendingLow = 0.01;
inline constexpr double kCorridorLendingHigh = 0.03;

/// R' = r + delta.
inline Rate noarbitrage_capital_return(Rate rate, double delta) { return rate + delta; }

struct PlatformAllocation {
  Money loans = 0.0;
  Money bonds = 0.0;
  double residual = 0.0;  // identity residual, zero unless distressed
  bool distress = false;
};

/// Law of motion of the platform's net position
///   K' + B' - A' = (R + 1 - delta) K + (1 + r)(B - A).
/// Bonds absorb outstanding government debt first; the rest is lent as
/// capital.
inline PlatformAllocation platform_balance_step(const BankState& bank, Rate rental, Rate bond_rate,
                                                double delta, Money new_deposits,
                                                Money bond_demand) {
  const Money net = (rental + 1.0 - delta) * bank.loans +
                    (1.0 + bond_rate) * (bank.bonds - bank.deposits);
  const Money lendable = new_deposits + net;
  PlatformAllocation out;
  if (lendable < 0.0) {
    out.distress = true;
  } else {
    out.bonds = std::clamp(bond_demand, 0.0, lendable);
    out.loans = lendable - out.bonds;
  }
  out.residual = out.loans + out.bonds - new_deposits - net;
  return out;
}

/// Clamps proposed rates into the central-bank corridor
/// iota - 0.01 <= r^d <= iota and iota + 0.01 <= r^l <= iota + 0.03.
inline std::pair<Rate, Rate> clamp_rates_to_corridor(Rate policy_rate, const BankAction& proposal) {
  const Rate rd =
      std::clamp(proposal.deposit_rate, policy_rate - kCorridorDepositBelow, policy_rate);
  const Rate rl = std::clamp(proposal.lending_rate, policy_rate + kCorridorLendingLow,
                             policy_rate + kCorridorLendingHigh);
  return {rd, rl};
}

struct ReserveAllocation {
  Money loans = 0.0;
  Money bonds = 0.0;
  Money reserves = 0.0;
  bool failed = false;  // negative deposits
};

/// K + B <= (1 - phi) A with bonds served before loans.
inline ReserveAllocation reserve_feasible_allocation(Money deposits, double reserve_ratio,
                                                     Money loan_demand, Money bond_demand) {
  ReserveAllocation out;
  if (deposits < 0.0) {
    out.failed = true;
    return out;
  }
  const Money capacity = (1.0 - reserve_ratio) * deposits;
  out.bonds = std::clamp(bond_demand, 0.0, capacity);
  out.loans = std::clamp(loan_demand, 0.0, capacity - out.bonds);
  out.reserves = deposits - out.loans - out.bonds;
  return out;
}

/// Interest margin r^l (K' + B') - r^d A'.
inline Money commercial_profit(Rate lending_rate, Money loans, Money bonds, Rate deposit_rate,
                               Money deposits) {
  return lending_rate * (loans + bonds) - deposit_rate * deposits;
}

}  // namespace econsim
