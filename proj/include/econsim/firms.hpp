#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "econsim/rng.hpp"
#include "econsim/types.hpp"

namespace econsim {

struct FirmState {
  Money capital = 0.0;
  double labor = 0.0;  // efficiency-hours
  double tfp = 1.0;
  Money price = 1.0;
  Money wage = 0.0;
  double output = 0.0;
  double demand = 0.0;  // goods demanded from this firm last step
  Money profit = 0.0;

  bool operator==(const FirmState&) const = default;
};

struct FirmAction {
  Money price = 1.0;
  Money wage = 0.0;

  bool operator==(const FirmAction&) const = default;
};

struct TechnologyParams {
  double alpha = 0.36;
  double delta = 0.06;
  double tfp_volatility = 0.01;
  double elasticity = 6.0;  // CES epsilon
  double price_gain = 0.2;  // tatonnement kappa
  double choice_temperature = 50.0;
};

/// Y = Z K^alpha L^(1-alpha).
inline double produce(double tfp, Money capital, double labor, double alpha) {
  if (capital < 0.0 || labor < 0.0) throw std::invalid_argument("produce: negative input");
  if (capital == 0.0 || labor == 0.0) return 0.0;
  return tfp * std::pow(capital, alpha) * std::pow(labor, 1.0 - alpha);
}

/// log Z' = log Z + sigma_z eps.
inline double tfp_step(double tfp, double volatility, RngStream& rng) {
  if (!(tfp > 0.0)) throw std::invalid_argument("tfp_step: TFP must be positive");
  if (volatility == 0.0) return tfp;
  return tfp * std::exp(volatility * rng.normal());
}

struct FactorPrices {
  Money wage = 0.0;
  Rate rental = 0.0;
};

/// Marginal-product wage and rental rate for a price-taking firm.
inline FactorPrices competitive_factor_prices(Money price, double tfp, Money capital, double labor,
                                              double alpha) {
  if (!(capital > 0.0) || !(labor > 0.0))
    throw DegenerateMarket("competitive factor prices need positive capital and labor");
  const double ratio = capital / labor;
  return {(1.0 - alpha) * price * tfp * std::pow(ratio, alpha),
          alpha * price * tfp * std::pow(ratio, alpha - 1.0)};
}

inline Money firm_profit(Money price, double output, Money wage, double labor, Rate rental,
                         Money capital) {
  return price * output - wage * labor - rental * capital;
}

/// K' = I + (1 - delta) K.
inline Money capital_step(Money capital, Money investment, double delta) {
  return investment + (1.0 - delta) * capital;
}

/// MC = W^(1-alpha) R^alpha / (Z alpha^alpha (1-alpha)^(1-alpha)).
inline Money marginal_cost(Money wage, Rate rental, double tfp, double alpha) {
  if (!(wage > 0.0) || !(rental > 0.0) || !(tfp > 0.0))
    throw std::invalid_argument("marginal_cost: inputs must be positive");
  return std::pow(wage, 1.0 - alpha) * std::pow(rental, alpha) /
         (tfp * std::pow(alpha, alpha) * std::pow(1.0 - alpha, 1.0 - alpha));
}

inline Money markup_price(Money marginal_cost, double elasticity) {
  if (!(elasticity > 1.0)) throw ConfigError("markup pricing needs elasticity > 1");
  return elasticity / (elasticity - 1.0) * marginal_cost;
}

/// P = (sum p_j^(1-eps))^(1/(1-eps)).
inline Money ces_price_index(std::span<const double> prices, double elasticity) {
  if (prices.empty()) throw std::invalid_argument("ces_price_index: no prices");
  if (!(elasticity > 1.0)) throw ConfigError("CES aggregation needs elasticity > 1");
  double acc = 0.0;
  for (double p : prices) {
    if (!(p > 0.0)) throw std::invalid_argument("ces_price_index: prices must be positive");
    acc += std::pow(p, 1.0 - elasticity);
  }
  return std::pow(acc, 1.0 / (1.0 - elasticity));
}

/// q_j = (p_j / P)^(-eps) * spend / P.
inline std::vector<double> ces_demand_split(Money spend, std::span<const double> prices,
                                            double elasticity) {
  if (spend < 0.0) throw std::invalid_argument("ces_demand_split: negative spend");
  const double index = ces_price_index(prices, elasticity);
  std::vector<double> q(prices.size());
  for (std::size_t j = 0; j < prices.size(); ++j)
    q[j] = std::pow(prices[j] / index, -elasticity) * spend / index;
  return q;
}

struct InputDemand {
  double labor = 0.0;
  Money capital = 0.0;
};

/// Cost-minimizing inputs for output y: K/L = alpha W / ((1-alpha) R) and
/// L = (y / Z) ((1-alpha) R / (alpha W))^alpha.
inline InputDemand monocomp_labor_demand(double output, double tfp, Money wage, Rate rental,
                                         double alpha) {
  if (!(output >= 0.0) || !(tfp > 0.0) || !(wage > 0.0) || !(rental > 0.0))
    throw std::invalid_argument("monocomp_labor_demand: inputs must be positive");
  InputDemand d;
  d.labor = output / tfp * std::pow((1.0 - alpha) * rental / (alpha * wage), alpha);
  d.capital = d.labor * alpha * wage / ((1.0 - alpha) * rental);
  return d;
}

struct FirmOffer {
  Money price = 1.0;
  Money wage = 0.0;
};

/// Logit choice probabilities over the one-step surplus W_j e h - p_j c.
inline std::vector<double> firm_choice_probabilities(std::span<const FirmOffer> offers,
                                                     double education, double hours,
                                                     double consumption, double temperature) {
  if (offers.empty()) throw std::invalid_argument("firm choice: no firms");
  std::vector<double> score(offers.size());
  for (std::size_t j = 0; j < offers.size(); ++j)
    score[j] = offers[j].wage * education * hours - offers[j].price * consumption;
  const double best = *std::max_element(score.begin(), score.end());
  std::vector<double> p(offers.size());
  if (!(temperature > 0.0)) {
    std::size_t ties = 0;
    for (double s : score) ties += s == best;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = score[j] == best ? 1.0 / ties : 0.0;
    return p;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = std::exp((score[j] - best) / temperature);
    total += p[j];
  }
  for (double& x : p) x /= total;
  return p;
}

inline std::size_t household_firm_choice(std::span<const FirmOffer> offers, double education,
                                         double hours, double consumption, double temperature,
                                         RngStream& rng) {
  const auto p = firm_choice_probabilities(offers, education, hours, consumption, temperature);
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    cum += p[j];
    if (u < cum) return j;
  }
  // Rounding left a sliver above the last cumulative value.
  for (std::size_t j = p.size(); j-- > 0;)
    if (p[j] > 0.0) return j;
  return p.size() - 1;
}

/// p' = p (1 + kappa (D - Y) / Y), kept strictly positive.
inline Money goods_market_price_update(Money price, double demand, double supply, double gain) {
  if (!(supply > 0.0)) throw std::invalid_argument("price update needs positive supply");
  const Money next = price * (1.0 + gain * (demand - supply) / supply);
  return std::max(next, price * 1e-3);
}

}  // namespace econsim
