#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "econsim/types.hpp"

namespace econsim {

/// Nonlinear HSV income tax: T(i) = i - (1 - tau) i^(1-xi) / (1 - xi).
/// Negative values are transfers.
inline Money hsv_income_tax(Money income, double tau, double xi) {
  if (std::abs(xi - 1.0) < 1e-12) throw ConfigError("HSV curvature xi must differ from 1");
  if (income < 0.0) throw std::invalid_argument("hsv_income_tax: negative income");
  if (income == 0.0) return 0.0;
  return income - (1.0 - tau) * std::pow(income, 1.0 - xi) / (1.0 - xi);
}

/// HSV asset tax: T^a(a) = a - (1 - tau_a) / (1 - xi_a) * a^(1-xi_a).
inline Money hsv_asset_tax(Money assets, double tau_a, double xi_a) {
  if (std::abs(xi_a - 1.0) < 1e-12) throw ConfigError("HSV curvature xi_a must differ from 1");
  if (assets < 0.0) throw std::invalid_argument("hsv_asset_tax: negative assets");
  if (assets == 0.0) return 0.0;
  return assets - (1.0 - tau_a) / (1.0 - xi_a) * std::pow(assets, 1.0 - xi_a);
}

struct TaxBracket {
  Money lower = 0.0;
  Rate rate = 0.0;

  bool operator==(const TaxBracket&) const = default;
};

/// Piecewise-linear marginal schedule. Bracket k covers
/// [lower_k, lower_{k+1}); the last bracket is open-ended.
class BracketSchedule {
 public:
  BracketSchedule() = default;
  explicit BracketSchedule(std::vector<TaxBracket> brackets) : brackets_(std::move(brackets)) {
    if (brackets_.empty()) throw ConfigError("bracket schedule is empty");
    if (brackets_.front().lower != 0.0) throw ConfigError("first bracket must start at 0");
    for (std::size_t k = 0; k < brackets_.size(); ++k) {
      const auto& b = brackets_[k];
      if (!(b.rate >= 0.0 && b.rate <= 1.0))
        throw ConfigError("bracket " + std::to_string(k) + ": marginal rate outside [0,1]");
      if (k > 0 && !(b.lower > brackets_[k - 1].lower))
        throw ConfigError("bracket " + std::to_string(k) + ": lower bounds must strictly increase");
    }
  }

  const std::vector<TaxBracket>& brackets() const noexcept { return brackets_; }
  bool empty() const noexcept { return brackets_.empty(); }

  BracketSchedule scaled(double income_scale) const {
    auto out = brackets_;
    for (auto& b : out) b.lower *= income_scale;
    return BracketSchedule(std::move(out));
  }

  bool operator==(const BracketSchedule&) const = default;

 private:
  std::vector<TaxBracket> brackets_;
};

inline Money progressive_bracket_tax(Money income, const BracketSchedule& schedule) {
  if (income <= 0.0) return 0.0;
  const auto& b = schedule.brackets();
  Money tax = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const Money lo = b[k].lower;
    if (income <= lo) break;
    const Money hi = k + 1 < b.size() ? b[k + 1].lower : income;
    tax += b[k].rate * (std::min(income, hi) - lo);
  }
  return tax;
}

/// The tax system households face in one step: an income tax (HSV or a
/// bracket schedule) plus an HSV asset tax.
struct TaxSchedule {
  double tau = 0.0;
  double xi = 0.0;
  double tau_a = 0.0;
  double xi_a = 0.0;
  BracketSchedule brackets;  // used instead of HSV income tax when non-empty

  Money income_tax(Money income) const {
    if (income <= 0.0) return 0.0;
    return brackets.empty() ? hsv_income_tax(income, tau, xi)
                            : progressive_bracket_tax(income, brackets);
  }

  Money asset_tax(Money assets) const {
    if (assets <= 0.0 || (tau_a == 0.0 && xi_a == 0.0)) return 0.0;
    return hsv_asset_tax(assets, tau_a, xi_a);
  }

  bool operator==(const TaxSchedule&) const = default;
};

}  // namespace econsim
