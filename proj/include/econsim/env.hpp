#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "econsim/banks.hpp"
#include "econsim/config.hpp"
#include "econsim/csv.hpp"
#include "econsim/firms.hpp"
#include "econsim/governments.hpp"
#include "econsim/households.hpp"
#include "econsim/metrics.hpp"
#include "econsim/parallel.hpp"
#include "econsim/rng.hpp"
#include "econsim/state.hpp"
#include "econsim/taxes.hpp"
#include "econsim/types.hpp"

namespace econsim {

inline constexpr std::size_t kPensionHistoryWindow = 10;
inline constexpr double kInitialLaborShare = 0.4;  // labor ratio assumed when sizing firms at reset

inline int effective_retirement_age(const EconomyConfig& cfg, const EconomySnapshot& s) {
  return s.pension ? s.pension->retirement_age : cfg.demographics.retirement_age;
}

inline bool is_olg(const EconomyConfig& cfg) { return cfg.roles.individual == IndividualKind::olg; }

inline int firm_count(const EconomyConfig& cfg) {
  return cfg.roles.firm == FirmKind::perfect ? 1 : cfg.roles.firm_count;
}

/// Policy rate seen by banks: the central bank's when one is active, the
/// configured default otherwise.
inline Rate benchmark_rate(const EconomyConfig& cfg, const EconomySnapshot& s) {
  return s.central_bank ? s.central_bank->policy_rate : cfg.central_bank.policy_rate;
}

inline double reserve_ratio(const EconomyConfig& cfg, const EconomySnapshot& s) {
  return s.central_bank ? s.central_bank->reserve_ratio : cfg.central_bank.reserve_ratio;
}

inline double markup_factor(double elasticity) { return elasticity / (elasticity - 1.0); }

// ---------------------------------------------------------------------------
// Reset

/// Discrete age draw with linearly tapering cohort weights.
inline int sample_pyramid_age(const PopulationParams& p, RngStream& rng) {
  const int span = p.max_age - p.min_age;
  if (span == 0) return p.min_age;
  double total = 0.0;
  for (int k = 0; k <= span; ++k) total += 1.0 - (1.0 - p.pyramid_taper) * k / span;
  double u = rng.uniform() * total;
  for (int k = 0; k <= span; ++k) {
    u -= 1.0 - (1.0 - p.pyramid_taper) * k / span;
    if (u < 0.0) return p.min_age + k;
  }
  return p.max_age;
}

inline std::vector<HouseholdState> initial_population(const EconomyConfig& cfg,
                                                      const RngStream& root) {
  const auto& p = cfg.population;
  const bool olg = is_olg(cfg);
  std::vector<HouseholdState> hs;
  if (!p.csv.empty()) {
    hs = population_from_csv(read_csv_file(p.csv), p.csv);
    if (hs.empty()) throw ConfigError(p.csv + ": no households");
  } else {
    const RngStream init = root.derive("init");
    hs.resize(static_cast<std::size_t>(p.size));
    for (std::size_t i = 0; i < hs.size(); ++i) {
      RngStream s = init.derive(static_cast<AgentId>(i));
      auto& h = hs[i];
      h.id = i;
      h.age = sample_pyramid_age(p, s);
      h.education = s.lognormal(p.education_log_mean, p.education_log_sd);
      const Money wealth = s.lognormal(p.wealth_log_mean, p.wealth_log_sd);
      h.risky = p.risky_share * wealth;
      h.savings = wealth - h.risky;
    }
  }
  for (auto& h : hs) {
    if (!olg) {
      h.age.reset();
      continue;
    }
    if (*h.age > cfg.demographics.age_max) throw ConfigError("initial age exceeds age_max");
    h.contribution_years = std::max(0, *h.age - p.work_entry_age);
    h.retired = *h.age > (cfg.roles.has(GovKind::pension) ? cfg.pension.retirement_age
                                                           : cfg.demographics.retirement_age);
  }
  return hs;
}

inline EconomySnapshot reset(const EconomyConfig& cfg, std::uint64_t seed) {
  if (auto v = validate_config(cfg); !v.empty()) {
    std::string msg = "invalid config:";
    for (const auto& m : v) msg += "\n  - " + m;
    throw ConfigError(msg);
  }
  const RngStream root(seed);
  EconomySnapshot s;
  s.seed = seed;
  s.clock.horizon = cfg.termination.horizon;
  s.households = initial_population(cfg, root);
  s.next_agent_id = s.households.size();

  const auto& tech = cfg.technology;
  s.fiscal.active = cfg.roles.has(GovKind::fiscal);
  s.fiscal.debt = cfg.fiscal.initial_debt;
  s.fiscal.tax = {cfg.fiscal.tau, cfg.fiscal.xi, cfg.fiscal.tau_a, cfg.fiscal.xi_a, {}};
  s.fiscal.spending_share = cfg.fiscal.spending_share;
  s.fiscal.objective = cfg.fiscal.objective;
  if (cfg.roles.has(GovKind::central_bank)) {
    const auto& c = cfg.central_bank;
    s.central_bank = CentralBankState{c.policy_rate, c.reserve_ratio, c.target_inflation,
                                      c.target_growth, c.growth_weight};
  }

  // Balance sheet: all deposits lent out, bonds first.
  Money deposits = 0.0, labor = 0.0, edu_sum = 0.0;
  std::size_t workers = 0;
  for (const auto& h : s.households) {
    deposits += h.savings;
    const bool works = !h.retired && (!h.age || *h.age >= 18);
    if (works) {
      labor += h.education * kInitialLaborShare * cfg.preferences.max_hours;
      edu_sum += h.education;
      ++workers;
    }
  }
  auto& bank = s.bank;
  bank.kind = cfg.roles.bank;
  bank.deposits = deposits;
  const Rate iota = benchmark_rate(cfg, s);
  const double phi = cfg.roles.bank == BankKind::commercial ? reserve_ratio(cfg, s) : 0.0;
  const Money capacity = (1.0 - phi) * deposits;
  bank.bonds = std::clamp(s.fiscal.debt, 0.0, capacity);
  bank.loans = capacity - bank.bonds;
  bank.reserves = deposits - bank.loans - bank.bonds;

  const int nf = firm_count(cfg);
  s.firms.assign(static_cast<std::size_t>(nf), FirmState{});
  Rate rental = 0.0;
  if (cfg.roles.firm == FirmKind::perfect) {
    auto& f = s.firms[0];
    f.capital = bank.loans;
    f.labor = labor;
    if (f.capital > 0.0 && f.labor > 0.0) {
      const auto fp = competitive_factor_prices(1.0, 1.0, f.capital, f.labor, tech.alpha);
      f.wage = fp.wage;
      rental = fp.rental;
    }
  } else {
    const Rate r = s.central_bank ? iota : cfg.returns.base_rate;
    rental = noarbitrage_capital_return(r, tech.delta);
    const double mu = markup_factor(tech.elasticity);
    for (auto& f : s.firms) {
      f.capital = bank.loans / nf;
      f.labor = labor / nf;
      if (f.capital > 0.0 && f.labor > 0.0)
        f.wage = (1.0 - tech.alpha) / mu * std::pow(f.capital / f.labor, tech.alpha);
    }
  }
  double gdp = 0.0, wage_bill = 0.0;
  for (auto& f : s.firms) {
    f.output = produce(f.tfp, f.capital, f.labor, tech.alpha);
    f.demand = f.output;
    gdp += f.output;
    wage_bill += f.wage * f.labor;
  }

  if (cfg.roles.bank == BankKind::commercial) {
    const auto [rd, rl] = clamp_rates_to_corridor(iota, BankAction{0.0, 1.0});
    bank.deposit_rate = rd;
    bank.lending_rate = rl;
  } else {
    bank.deposit_rate = bank.lending_rate = rental - tech.delta;
  }

  auto& m = s.macro;
  m.gdp = m.gdp_prev = gdp;
  m.nominal_gdp = gdp;
  m.wage = labor > 0.0 ? wage_bill / labor : 0.0;
  m.deposit_rate = bank.deposit_rate;
  m.lending_rate = bank.lending_rate;
  m.bond_rate = cfg.roles.bank == BankKind::commercial ? iota : bank.deposit_rate;
  m.population = static_cast<int>(s.households.size());

  if (cfg.roles.has(GovKind::pension)) {
    PensionState ps;
    ps.fund = cfg.pension.initial_fund_per_capita * static_cast<double>(s.households.size());
    ps.contribution_rate = cfg.pension.contribution_rate;
    ps.retirement_age = cfg.pension.retirement_age;
    ps.target_growth = cfg.pension.target_growth;
    ps.fund_return = cfg.pension.fund_return.value_or(bank.deposit_rate);
    ps.average_wage = workers ? m.wage * edu_sum / workers * kInitialLaborShare *
                                    cfg.preferences.max_hours
                              : 0.0;
    ps.fund_history = {ps.fund};
    s.pension = ps;
  }

  const int age_r = effective_retirement_age(cfg, s);
  if (is_olg(cfg)) {
    std::vector<int> ages;
    ages.reserve(s.households.size());
    for (const auto& h : s.households) ages.push_back(*h.age);
    const auto dr = dependency_ratio(ages, age_r);
    m.dependency_ratio = dr.value;
    std::size_t young = 0;
    for (int a : ages) young += a <= age_r;
    m.young_share = static_cast<double>(young) / static_cast<double>(ages.size());
  } else {
    m.young_share = 1.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Observations

inline std::array<double, kIncomeQuantiles> income_quantiles(std::span<const HouseholdState> hs) {
  std::array<double, kIncomeQuantiles> q{};
  if (hs.empty()) return q;
  std::vector<double> inc;
  inc.reserve(hs.size());
  for (const auto& h : hs) inc.push_back(h.income);
  // Same interpolation as sorted_quantile, from order statistics only.
  const std::size_t n = inc.size();
  auto from = inc.begin();
  for (std::size_t k = 0; k < kIncomeQuantiles; ++k) {
    const double pos = static_cast<double>(k + 1) / kIncomeQuantiles * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto it = inc.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(from, it, inc.end());
    const double a = *it;
    const double b = lo + 1 < n ? *std::min_element(it + 1, inc.end()) : a;
    q[k] = a + (pos - static_cast<double>(lo)) * (b - a);
    from = it;
  }
  return q;
}

inline Observations build_observations(const EconomyConfig& cfg, const EconomySnapshot& s) {
  Observations o;
  if (!s.households.empty()) o.global = global_stats(s.households);
  o.households.reserve(s.households.size());
  for (const auto& h : s.households)
    o.households.push_back({h.id, h.assets(), h.education, h.age, h.retired});
  if (s.fiscal.active || s.central_bank || s.pension) {
    GovernmentObservation g;
    g.debt = s.fiscal.debt;
    g.wage = s.macro.wage;
    g.price = s.macro.price;
    g.inflation = s.macro.inflation;
    g.gdp = s.macro.gdp;
    g.income_quantiles = income_quantiles(s.households);
    o.government = g;
  }
  if (cfg.roles.bank == BankKind::commercial)
    o.bank = BankObservation{benchmark_rate(cfg, s), reserve_ratio(cfg, s), s.bank.deposits,
                             s.bank.loans, s.bank.bonds};
  if (is_strategic(cfg.roles.firm))
    for (const auto& f : s.firms) o.firms.push_back({f.capital, f.labor, f.tfp, f.price, f.wage});
  return o;
}

// ---------------------------------------------------------------------------
// Action validation

inline void validate_joint_action(const EconomyConfig& cfg, const EconomySnapshot& s,
                                  const JointAction& a) {
  auto need = [](bool want, bool have, const char* who) {
    if (want != have)
      throw ActionError(std::string(who) + (want ? " action missing" : " action not expected"));
  };
  need(s.fiscal.active, a.fiscal.has_value(), "fiscal");
  need(s.central_bank.has_value(), a.central_bank.has_value(), "central bank");
  need(s.pension.has_value(), a.pension.has_value(), "pension");
  need(cfg.roles.bank == BankKind::commercial, a.bank.has_value(), "bank");
  const std::size_t nf = is_strategic(cfg.roles.firm) ? s.firms.size() : 0;
  if (a.firms.size() != nf)
    throw ActionError("expected " + std::to_string(nf) + " firm actions, got " +
                      std::to_string(a.firms.size()));
  if (a.households.size() != s.households.size())
    throw ActionError("expected " + std::to_string(s.households.size()) +
                      " household actions, got " + std::to_string(a.households.size()));
  for (const auto& h : a.households) validate_action(h);
  if (a.fiscal) {
    const auto& f = *a.fiscal;
    if (!in_unit_interval(f.tau) || !in_unit_interval(f.tau_a) || !in_unit_interval(f.spending_share))
      throw ActionError("fiscal rates and spending share must lie in [0,1]");
    if (std::abs(f.xi - 1.0) < 1e-12 || std::abs(f.xi_a - 1.0) < 1e-12 || !std::isfinite(f.xi) ||
        !std::isfinite(f.xi_a))
      throw ActionError("fiscal curvature must be finite and differ from 1");
  }
  if (a.central_bank) {
    const auto& c = *a.central_bank;
    if (!(c.policy_rate >= -1.0 && c.policy_rate <= 10.0))
      throw ActionError("policy rate outside [-1,10]");
    if (!in_unit_interval(c.reserve_ratio)) throw ActionError("reserve ratio outside [0,1]");
  }
  if (a.pension) {
    const auto& p = *a.pension;
    if (p.retirement_age < kAnnuityMinAge || p.retirement_age > kAnnuityMaxAge)
      throw ActionError("retirement age outside [40,70]");
    if (!in_unit_interval(p.contribution_rate)) throw ActionError("contribution rate outside [0,1]");
    if (!std::isfinite(p.target_growth)) throw ActionError("target growth must be finite");
  }
  if (a.bank && (!std::isfinite(a.bank->deposit_rate) || !std::isfinite(a.bank->lending_rate)))
    throw ActionError("bank rates must be finite");
  for (const auto& f : a.firms)
    if (!(f.price > 0.0) || !(f.wage >= 0.0) || !std::isfinite(f.price) || !std::isfinite(f.wage))
      throw ActionError("firm actions need price > 0 and wage >= 0");
}

// ---------------------------------------------------------------------------
// Termination

struct Termination {
  bool done = false;
  std::string reason;
};

inline Termination check_termination(const EconomyConfig& cfg, const EconomySnapshot& s) {
  if (s.households.empty()) return {true, "population extinct"};
  if (!(s.macro.gdp > 0.0)) return {true, "output collapse"};
  if (s.bank.distress) return {true, "bank failure"};
  if (s.pension && cfg.pension.hard_stop && s.pension->fund < 0.0)
    return {true, "pension depleted"};
  if (s.fiscal.active && s.macro.nominal_gdp > 0.0 &&
      s.fiscal.debt / s.macro.nominal_gdp > cfg.fiscal.debt_cap)
    return {true, "debt cap"};
  std::size_t insolvent = 0;
  for (const auto& h : s.households) insolvent += h.insolvent;
  if (static_cast<double>(insolvent) > cfg.termination.insolvent_share *
                                           static_cast<double>(s.households.size()))
    return {true, "household insolvency"};
  if (s.clock.at_horizon()) return {true, "horizon"};
  return {};
}

// ---------------------------------------------------------------------------
// Step

namespace detail {

/// Per-household slot written by the parallel phase.
struct HouseholdSlot {
  double education = 0.0;  // before this step's update
  double consumption = 0.0;
  double hours = 0.0;
  double reward = 0.0;
  Money tax = 0.0;
  Money pretax_income = 0.0;
  Money resources = 0.0;
  HouseholdDiagnostics diagnostics;
  std::size_t firm = 0;
  Money contribution = 0.0;
  Money benefit = 0.0;
  Money wage_income = 0.0;
};

inline std::vector<double> shares_or_equal(const std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> s(w.size(), 1.0 / static_cast<double>(w.size()));
  if (total > 0.0)
    for (std::size_t j = 0; j < w.size(); ++j) s[j] = w[j] / total;
  return s;
}

}  // namespace detail

/// Advances one model year. Phases: governments set policy; rates and the
/// capital rental are fixed; firms post prices and wages; households act;
/// production and pension accounting; demographics; fiscal and bank
/// balance sheets; rewards and termination. The input snapshot is never
/// modified.
inline StepResult step(const EconomyConfig& cfg, const EconomySnapshot& snap,
                       const JointAction& actions) {
  validate_joint_action(cfg, snap, actions);
  const auto& tech = cfg.technology;
  const auto& prefs = cfg.preferences;
  const FirmKind market = cfg.roles.firm;
  const bool commercial = cfg.roles.bank == BankKind::commercial;
  const std::size_t n = snap.households.size();
  const std::size_t nf = snap.firms.size();

  StepResult res;
  res.next = snap;
  EconomySnapshot& nx = res.next;
  const RngStream step_stream = RngStream(snap.seed).derive("step").derive(
      static_cast<std::uint64_t>(snap.clock.t));

  // (1) Governments. Spending is a share of last year's nominal output.
  Money spending = 0.0;
  if (actions.fiscal) {
    const auto& f = *actions.fiscal;
    nx.fiscal.tax = {f.tau, f.xi, f.tau_a, f.xi_a, f.brackets};
    nx.fiscal.spending_share = f.spending_share;
    spending = f.spending_share * snap.macro.nominal_gdp;
  }
  if (actions.central_bank) {
    nx.central_bank->policy_rate = actions.central_bank->policy_rate;
    nx.central_bank->reserve_ratio = actions.central_bank->reserve_ratio;
  }
  if (actions.pension) {
    nx.pension->retirement_age = actions.pension->retirement_age;
    nx.pension->contribution_rate = actions.pension->contribution_rate;
    nx.pension->target_growth = actions.pension->target_growth;
  }
  const int age_r = effective_retirement_age(cfg, nx);
  if (is_olg(cfg))
    for (auto& h : nx.households) h.retired = h.retired || *h.age > age_r;

  // Hours are known from the actions alone.
  std::vector<double> hours(n);
  double labor = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    hours[i] = nx.households[i].retired ? 0.0 : actions.households[i].labor * prefs.max_hours;
    labor += nx.households[i].education * hours[i];
  }

  // (2)-(3) Rates, rental and posted prices.
  const Rate iota = benchmark_rate(cfg, nx);
  Rate deposit_rate = 0.0, bond_rate = 0.0, lending_rate = 0.0, rental = 0.0;
  std::vector<FirmOffer> offers(nf);
  Money capital = 0.0;
  for (const auto& f : snap.firms) capital += f.capital;
  if (commercial) {
    const auto [rd, rl] = clamp_rates_to_corridor(iota, *actions.bank);
    deposit_rate = rd;
    lending_rate = rl;
    bond_rate = iota;
    rental = rl + tech.delta;
  }
  if (market == FirmKind::perfect) {
    FactorPrices fp;
    try {
      fp = competitive_factor_prices(snap.macro.price, snap.firms[0].tfp, snap.firms[0].capital,
                                     labor, tech.alpha);
    } catch (const DegenerateMarket&) {
      res.next = snap;
      res.done = true;
      res.reason = "degenerate market";
      return res;
    }
    offers[0] = {snap.macro.price, fp.wage};
    if (!commercial) {
      rental = fp.rental;
      deposit_rate = bond_rate = lending_rate = rental - tech.delta;
    }
  } else {
    deposit_rate = bond_rate = lending_rate = nx.central_bank ? iota : cfg.returns.base_rate;
    rental = noarbitrage_capital_return(deposit_rate, tech.delta);
    for (std::size_t j = 0; j < nf; ++j) offers[j] = {actions.firms[j].price, actions.firms[j].wage};
  }
  RngStream risky_stream = step_stream.derive("risky");
  const Rate risky_return = std::clamp(
      risky_stream.normal(deposit_rate + cfg.returns.risky_premium, cfg.returns.risky_volatility),
      -1.0, 10.0);

  // Monopolistic competition: CES price index and labor split by input demand.
  std::vector<double> labor_share(nf, 1.0 / static_cast<double>(nf));
  std::vector<double> prices(nf);
  for (std::size_t j = 0; j < nf; ++j) prices[j] = offers[j].price;
  Money household_price = offers[0].price;
  Money household_wage = offers[0].wage;
  if (market == FirmKind::monopolistic) {
    household_price = ces_price_index(prices, tech.elasticity);
    std::vector<double> demand_labor(nf, 0.0);
    for (std::size_t j = 0; j < nf; ++j) {
      const auto& f = snap.firms[j];
      if (f.demand > 0.0 && offers[j].wage > 0.0 && rental > 0.0)
        demand_labor[j] =
            monocomp_labor_demand(f.demand, f.tfp, offers[j].wage, rental, tech.alpha).labor;
    }
    labor_share = detail::shares_or_equal(demand_labor);
    household_wage = 0.0;
    for (std::size_t j = 0; j < nf; ++j) household_wage += labor_share[j] * offers[j].wage;
  }

  // (4) Households. Oligopoly choice and wage income first, so the national
  // average wage is known before any budget is evaluated.
  std::vector<detail::HouseholdSlot> slots(n);
  const RngStream choice_stream = step_stream.derive("choice");
  const unsigned threads = cfg.runtime.threads;
  const std::size_t grain = cfg.runtime.grain;
  parallel_for(n, threads, grain, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& h = nx.households[i];
      auto& slot = slots[i];
      Money w = household_wage;
      if (market == FirmKind::oligopoly) {
        RngStream rs = choice_stream.derive(h.id);
        slot.firm = household_firm_choice(offers, h.education, hours[i], h.consumption,
                                          tech.choice_temperature, rs);
        w = offers[slot.firm].wage;
      }
      slot.wage_income = w * h.education * hours[i];
    }
  });

  std::optional<PensionState> pension_terms = nx.pension;
  if (pension_terms) {
    double wage_sum = 0.0;
    std::size_t contributors = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!nx.households[i].retired && slots[i].wage_income > 0.0) {
        wage_sum += slots[i].wage_income;
        ++contributors;
      }
    if (contributors) pension_terms->average_wage = wage_sum / static_cast<double>(contributors);
  }
  const Rate fund_return = cfg.pension.fund_return.value_or(deposit_rate);
  const TaxSchedule* tax = nx.fiscal.active ? &nx.fiscal.tax : nullptr;
  const RngStream edu_stream = step_stream.derive("education");

  parallel_for(n, threads, grain, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& h = nx.households[i];
      auto& slot = slots[i];
      MarketTerms terms;
      terms.price = household_price;
      terms.wage = household_wage;
      if (market == FirmKind::oligopoly) {
        terms.price = offers[slot.firm].price;
        terms.wage = offers[slot.firm].wage;
      }
      terms.deposit_return = deposit_rate;
      terms.risky_return = risky_return;
      terms.tax = tax;
      const bool contributes = pension_terms && !h.retired && slot.wage_income > 0.0;
      if (contributes) terms.contribution_rate = pension_terms->contribution_rate;
      if (pension_terms && h.retired) terms.pension_benefit = pension_benefit(h, *pension_terms).total();
      auto out = apply_household_action(h, actions.households[i], terms, prefs);
      slot.education = h.education;
      slot.consumption = out.consumption;
      slot.hours = out.hours;
      slot.reward = out.reward;
      slot.tax = out.resources.tax;
      slot.pretax_income = out.resources.pretax_income();
      slot.resources = out.resources.total;
      slot.diagnostics = out.diagnostics;
      slot.contribution = out.resources.contribution;
      slot.benefit = out.resources.benefit;

      auto& next = out.next;
      if (contributes) {
        next.personal_account =
            accumulate_personal_account(next.personal_account, slot.contribution, fund_return);
        next.contribution_years += 1;
        next.wage_history_mean =
            next.wage_history_mean == 0.0
                ? slot.wage_income
                : next.wage_history_mean +
                      (slot.wage_income - next.wage_history_mean) / next.contribution_years;
      }
      if (!is_olg(cfg)) {
        RngStream es = edu_stream.derive(h.id);
        const double shock = cfg.returns.education_shock * es.normal();
        next.education = std::exp(cfg.returns.education_persistence * std::log(h.education) + shock);
      }
      nx.households[i] = next;  // last use of h
    }
  });

  // Serial reductions in index order.
  Money tax_revenue = 0.0, contributions = 0.0, payouts = 0.0, writeoff = 0.0, spend = 0.0;
  double consumption = 0.0, hours_total = 0.0, residual_max = 0.0;
  std::size_t clamps = 0, insolvent = 0, floor_hits = 0;
  std::vector<double> firm_consumption(nf, 0.0), firm_labor(nf, 0.0);
  std::vector<double> incomes(n), utilities(n);
  res.rewards.households.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = slots[i];
    tax_revenue += o.tax;
    contributions += slots[i].contribution;
    payouts += slots[i].benefit;
    writeoff += o.diagnostics.writeoff;
    consumption += o.consumption;
    hours_total += o.hours;
    const Money price_i =
        market == FirmKind::oligopoly ? offers[slots[i].firm].price : household_price;
    spend += price_i * o.consumption;
    residual_max = std::max(residual_max, std::abs(o.diagnostics.budget_residual) /
                                              std::max(1.0, std::abs(o.resources)));
    clamps += o.diagnostics.asset_clamped;
    insolvent += o.diagnostics.insolvent;
    floor_hits += o.diagnostics.floor_utility;
    if (market == FirmKind::oligopoly) {
      firm_consumption[slots[i].firm] += o.consumption;
      firm_labor[slots[i].firm] += o.education * o.hours;
    }
    incomes[i] = std::max(0.0, o.pretax_income);
    utilities[i] = o.reward;
    res.rewards.households[i] = o.reward;
  }
  if (market == FirmKind::perfect || market == FirmKind::monopoly) {
    firm_consumption[0] = consumption;
    firm_labor[0] = labor;
  } else if (market == FirmKind::monopolistic) {
    firm_consumption = ces_demand_split(spend, prices, tech.elasticity);
    for (std::size_t j = 0; j < nf; ++j) firm_labor[j] = labor_share[j] * labor;
  }

  // (5a) Production and pension fund.
  double output = 0.0;
  Money nominal_output = 0.0, wage_bill = 0.0;
  std::vector<double> revenue_weight(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    auto& f = nx.firms[j];
    f.labor = firm_labor[j];
    // Capital is rented within the step, in proportion to the labor each firm
    // actually hired.
    if (nf > 1) f.capital = labor > 0.0 ? capital * firm_labor[j] / labor : capital / static_cast<double>(nf);
    f.price = offers[j].price;
    f.wage = offers[j].wage;
    f.output = produce(f.tfp, f.capital, f.labor, tech.alpha);
    f.profit = firm_profit(f.price, f.output, f.wage, f.labor, rental, f.capital);
    output += f.output;
    nominal_output += f.price * f.output;
    wage_bill += f.wage * f.labor;
    revenue_weight[j] = snap.firms[j].price * snap.firms[j].demand;
  }
  if (nx.pension) {
    auto& ps = *nx.pension;
    ps.average_wage = pension_terms->average_wage;
    ps.fund_return = fund_return;
    const auto up = pension_fund_step(ps, contributions, payouts);
    ps.fund = up.fund;
    ps.solvent = up.solvent;
    ps.fund_history.push_back(up.fund);
    if (ps.fund_history.size() > kPensionHistoryWindow)
      ps.fund_history.erase(ps.fund_history.begin());
    if (up.depleted && !nx.depletion_year) nx.depletion_year = snap.clock.t + 1;
    nx.depleted = nx.depleted || up.depleted;
  }

  // (6) Demographics.
  Money routed_estate = 0.0;
  int births = 0, deaths = 0;
  if (is_olg(cfg)) {
    const auto& pop = cfg.population;
    auto newborn_education = [&](RngStream& rs) {
      return rs.lognormal(pop.education_log_mean, pop.education_log_sd);
    };
    auto demo = advance_demographics(nx.households, cfg.demographics, step_stream,
                                     nx.next_agent_id, newborn_education);
    routed_estate = demo.inheritance.routed;
    births = demo.births;
    deaths = static_cast<int>(demo.deceased.size());
    for (auto& h : nx.households) h.retired = h.retired || *h.age > age_r;
  }

  // (5b) Fiscal budget, bank balance sheet, investment, TFP, goods market.
  const Money revenue = tax_revenue + routed_estate;
  nx.fiscal.revenue = revenue;
  nx.fiscal.spending = spending;
  nx.fiscal.debt = fiscal_budget_step(snap.fiscal.debt, bond_rate, spending, revenue);

  Money new_deposits = 0.0;
  for (const auto& h : nx.households) new_deposits += h.savings;
  const Money bond_demand = std::max(0.0, nx.fiscal.debt);
  auto& bank = nx.bank;
  double platform_residual = 0.0;
  Money next_capital = 0.0;
  if (commercial) {
    const double phi = reserve_ratio(cfg, nx);
    const auto& f0 = nx.firms[0];
    const Money loan_demand =
        labor * std::pow(tech.alpha * snap.macro.price * f0.tfp / (lending_rate + tech.delta),
                         1.0 / (1.0 - tech.alpha));
    const auto alloc = reserve_feasible_allocation(new_deposits, phi, loan_demand, bond_demand);
    bank.distress = alloc.failed;
    bank.loans = alloc.loans;
    bank.bonds = alloc.bonds;
    bank.reserves = alloc.reserves;
    res.rewards.bank = commercial_profit(lending_rate, alloc.loans, alloc.bonds, deposit_rate,
                                         new_deposits);
  } else {
    BankState before = snap.bank;
    before.loans = capital;
    const auto alloc =
        platform_balance_step(before, rental, bond_rate, tech.delta, new_deposits, bond_demand);
    platform_residual = std::abs(alloc.residual) /
                        std::max({1.0, std::abs(new_deposits), std::abs(capital)});
    bank.distress = alloc.distress;
    bank.loans = alloc.loans;
    bank.bonds = alloc.bonds;
    bank.reserves = 0.0;
  }
  bank.deposits = new_deposits;
  bank.deposit_rate = deposit_rate;
  bank.lending_rate = lending_rate;
  next_capital = bank.loans;
  const Money investment = next_capital - (1.0 - tech.delta) * capital;

  const auto spend_share = detail::shares_or_equal(revenue_weight);
  if (market == FirmKind::perfect) {
    nx.firms[0].capital = next_capital;
  } else {
    const auto cap_share = detail::shares_or_equal(firm_labor);
    for (std::size_t j = 0; j < nf; ++j) nx.firms[j].capital = cap_share[j] * next_capital;
  }
  const RngStream tfp_stream = step_stream.derive("tfp");
  double goods_residual = 0.0;
  for (std::size_t j = 0; j < nf; ++j) {
    auto& f = nx.firms[j];
    const Money other = (spending + investment) * spend_share[j];
    f.demand = firm_consumption[j] + other / f.price;
    goods_residual += f.price * (f.output - f.demand);
    RngStream ts = tfp_stream.derive(static_cast<std::uint64_t>(j));
    f.tfp = tfp_step(f.tfp, tech.tfp_volatility, ts);
  }

  auto& m = nx.macro;
  const Money price_now = snap.macro.price;
  Money price_next = price_now;
  if (market == FirmKind::perfect) {
    if (output > 0.0)
      price_next = goods_market_price_update(price_now, nx.firms[0].demand, output, tech.price_gain);
    nx.firms[0].price = price_next;
    m.inflation = (price_next - price_now) / price_now;
  } else {
    if (market == FirmKind::monopoly) {
      price_next = prices[0];
    } else if (market == FirmKind::oligopoly) {
      price_next = std::accumulate(prices.begin(), prices.end(), 0.0) / static_cast<double>(nf);
    } else {
      price_next = household_price;
    }
    m.inflation = (price_next - price_now) / price_now;
  }
  m.price_prev = price_now;
  m.price = price_next;
  m.gdp_prev = snap.macro.gdp;
  m.gdp = output;
  m.nominal_gdp = nominal_output;
  m.growth = snap.macro.gdp > 0.0 ? output / snap.macro.gdp - 1.0 : 0.0;
  m.wage = labor > 0.0 ? wage_bill / labor : 0.0;
  m.consumption = consumption;
  m.spending = spending;
  m.investment = investment;
  m.tax_revenue = revenue;
  m.deposit_rate = deposit_rate;
  m.lending_rate = lending_rate;
  m.bond_rate = bond_rate;
  m.risky_return = risky_return;
  m.goods_residual = goods_residual;
  m.population = static_cast<int>(nx.households.size());
  m.avg_hours = n ? hours_total / static_cast<double>(n) : 0.0;
  m.gini_income = gini(incomes).value;
  {
    std::vector<double> wealth;
    wealth.reserve(nx.households.size());
    for (const auto& h : nx.households) wealth.push_back(std::max(0.0, h.assets()));
    m.gini_wealth = gini(wealth).value;
  }
  m.welfare = social_welfare(utilities);
  if (is_olg(cfg) && !nx.households.empty()) {
    std::vector<int> ages;
    ages.reserve(nx.households.size());
    std::size_t young = 0;
    for (const auto& h : nx.households) {
      ages.push_back(*h.age);
      young += *h.age <= age_r;
    }
    const auto dr = dependency_ratio(ages, age_r);
    m.dependency_ratio = dr.value;
    m.young_share = static_cast<double>(young) / static_cast<double>(ages.size());
  } else {
    m.dependency_ratio = 0.0;
    m.young_share = nx.households.empty() ? 0.0 : 1.0;
  }

  // (7) Rewards and termination.
  if (nx.fiscal.active)
    res.rewards.fiscal =
        fiscal_reward(nx.fiscal.objective, output, snap.macro.gdp, incomes, utilities).value;
  if (nx.central_bank) res.rewards.central_bank = central_bank_reward(m.inflation, m.growth, *nx.central_bank);
  if (nx.pension) res.rewards.pension = pension_reward(output, snap.macro.gdp).value;
  if (is_strategic(market))
    for (const auto& f : nx.firms) res.rewards.firms.push_back(f.profit);

  nx.clock.t = snap.clock.t + 1;
  const auto term = check_termination(cfg, nx);
  res.done = term.done;
  res.reason = term.reason;

  auto& info = res.info;
  info["budget_residual_max"] = residual_max;
  info["platform_residual"] = platform_residual;
  info["asset_clamps"] = static_cast<double>(clamps);
  info["insolvent"] = static_cast<double>(insolvent);
  info["floor_utility"] = static_cast<double>(floor_hits);
  info["writeoff"] = writeoff;
  info["births"] = births;
  info["deaths"] = deaths;
  info["routed_estate"] = routed_estate;
  info["contributions"] = contributions;
  info["payouts"] = payouts;
  info["goods_residual"] = goods_residual;
  info["collapse"] = snap.macro.gdp > 0.0 ? 0.0 : 1.0;
  if (nx.pension) info["pension_solvent"] = nx.pension->solvent ? 1.0 : 0.0;
  if (commercial) info["bank_distress"] = bank.distress ? 1.0 : 0.0;
  if (nx.central_bank) info["central_bank_loss"] = central_bank_loss(m.inflation, m.growth, *nx.central_bank);
  return res;
}

/// Owns one episode's state.
class MarketEnv {
 public:
  explicit MarketEnv(EconomyConfig cfg) : cfg_(std::move(cfg)) {}

  const EconomySnapshot& reset(std::uint64_t seed) {
    snap_ = econsim::reset(cfg_, seed);
    done_ = false;
    return snap_;
  }

  Observations observations() const { return build_observations(cfg_, snap_); }

  StepResult step(const JointAction& a) {
    if (done_) throw std::logic_error("step called on a finished episode");
    auto r = econsim::step(cfg_, snap_, a);
    snap_ = r.next;
    done_ = r.done;
    return r;
  }

  const EconomySnapshot& snapshot() const noexcept { return snap_; }
  const EconomyConfig& config() const noexcept { return cfg_; }
  bool done() const noexcept { return done_; }

 private:
  EconomyConfig cfg_;
  EconomySnapshot snap_;
  bool done_ = false;
};

}  // namespace econsim
