#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "econsim/config.hpp"
#include "econsim/env.hpp"
#include "econsim/policies.hpp"
#include "econsim/state.hpp"

namespace econsim {

// Flat-vector surface for driving agents from outside the process. Agents are
// ordered: fiscal, central bank, pension (those active), then the commercial
// bank, then firms by index (strategic structures only), then households by
// ascending id. Observations, actions and rewards all follow that order.

inline constexpr int kBridgeVersion = 1;

enum class AgentRole { fiscal, central_bank, pension, bank, firm, household };

constexpr std::string_view to_string(AgentRole r) {
  switch (r) {
    case AgentRole::fiscal: return "fiscal";
    case AgentRole::central_bank: return "central_bank";
    case AgentRole::pension: return "pension";
    case AgentRole::bank: return "bank";
    case AgentRole::firm: return "firm";
    case AgentRole::household: return "household";
  }
  return "?";
}

struct KindSpec {
  AgentRole role = AgentRole::household;
  std::vector<std::string> obs_fields;
  std::vector<std::string> act_fields;
  std::vector<double> act_low;
  std::vector<double> act_high;

  std::size_t obs_len() const noexcept { return obs_fields.size(); }
  std::size_t act_len() const noexcept { return act_fields.size(); }
};

struct VectorSpec {
  int version = kBridgeVersion;
  std::vector<KindSpec> kinds;  // active kinds only, in agent order

  const KindSpec& of(AgentRole r) const {
    for (const auto& k : kinds)
      if (k.role == r) return k;
    throw std::out_of_range("no agents of kind " + std::string(to_string(r)));
  }

  bool has(AgentRole r) const {
    return std::any_of(kinds.begin(), kinds.end(), [&](const KindSpec& k) { return k.role == r; });
  }

  /// Plain-text field order, one kind per block.
  std::string document() const {
    std::ostringstream out;
    out << "econsim bridge v" << version << "\n";
    for (const auto& k : kinds) {
      out << "[" << to_string(k.role) << "]\n  obs (" << k.obs_len() << "):";
      for (const auto& f : k.obs_fields) out << ' ' << f;
      out << "\n  act (" << k.act_len() << "):";
      for (std::size_t i = 0; i < k.act_len(); ++i)
        out << ' ' << k.act_fields[i] << '[' << k.act_low[i] << ',' << k.act_high[i] << ']';
      out << '\n';
    }
    return out.str();
  }
};

inline VectorSpec make_vector_spec(const EconomyConfig& cfg) {
  constexpr double big = 1e12;
  VectorSpec v;
  std::vector<std::string> gov_obs = {"debt", "wage", "price", "inflation", "gdp"};
  for (std::size_t k = 1; k <= kIncomeQuantiles; ++k) gov_obs.push_back("income_q" + std::to_string(k * 10));
  if (cfg.roles.has(GovKind::fiscal))
    v.kinds.push_back({AgentRole::fiscal, gov_obs,
                       {"tau", "xi", "tau_a", "xi_a", "spending_share"},
                       {0.0, -1.0, 0.0, -1.0, 0.0},
                       {1.0, 0.99, 1.0, 0.99, 1.0}});
  if (cfg.roles.has(GovKind::central_bank))
    v.kinds.push_back({AgentRole::central_bank, gov_obs, {"policy_rate", "reserve_ratio"}, {-1.0, 0.0}, {10.0, 1.0}});
  if (cfg.roles.has(GovKind::pension))
    v.kinds.push_back({AgentRole::pension, gov_obs,
                       {"retirement_age", "contribution_rate", "target_growth"},
                       {double(kAnnuityMinAge), 0.0, -1.0},
                       {double(kAnnuityMaxAge), 1.0, 1.0}});
  if (cfg.roles.bank == BankKind::commercial)
    v.kinds.push_back({AgentRole::bank,
                       {"benchmark", "reserve_ratio", "deposits", "loans", "bonds"},
                       {"deposit_rate", "lending_rate"},
                       {-1.0, -1.0},
                       {10.0, 10.0}});
  if (is_strategic(cfg.roles.firm))
    v.kinds.push_back({AgentRole::firm,
                       {"capital", "labor", "tfp", "price", "wage"},
                       {"price", "wage"},
                       {1e-9, 0.0},
                       {big, big}});
  std::vector<std::string> hh = {"assets", "education"};
  if (is_olg(cfg)) hh.push_back("age");
  for (const char* g : {"top_assets", "top_income", "top_education", "bottom_assets", "bottom_income",
                        "bottom_education"})
    hh.push_back(g);
  v.kinds.push_back({AgentRole::household, hh, {"allocation", "labor", "investment"}, {0, 0, 0}, {1, 1, 1}});
  return v;
}

struct AgentSlot {
  AgentRole role = AgentRole::household;
  std::size_t index = 0;  // position within its kind
  AgentId id = 0;         // household id; index otherwise
};

inline std::vector<AgentSlot> agent_order(const EconomyConfig& cfg, const EconomySnapshot& s) {
  std::vector<AgentSlot> out;
  if (s.fiscal.active) out.push_back({AgentRole::fiscal, 0, 0});
  if (s.central_bank) out.push_back({AgentRole::central_bank, 0, 0});
  if (s.pension) out.push_back({AgentRole::pension, 0, 0});
  if (cfg.roles.bank == BankKind::commercial) out.push_back({AgentRole::bank, 0, 0});
  if (is_strategic(cfg.roles.firm))
    for (std::size_t j = 0; j < s.firms.size(); ++j) out.push_back({AgentRole::firm, j, j});
  for (std::size_t i = 0; i < s.households.size(); ++i)
    out.push_back({AgentRole::household, i, s.households[i].id});
  return out;
}

inline std::vector<double> observation_vector(const Observations& o, const AgentSlot& a) {
  std::vector<double> v;
  switch (a.role) {
    case AgentRole::fiscal:
    case AgentRole::central_bank:
    case AgentRole::pension: {
      const auto& g = o.government.value();
      v = {g.debt, g.wage, g.price, g.inflation, g.gdp};
      v.insert(v.end(), g.income_quantiles.begin(), g.income_quantiles.end());
      break;
    }
    case AgentRole::bank: {
      const auto& b = o.bank.value();
      v = {b.benchmark, b.reserve_ratio, b.deposits, b.loans, b.bonds};
      break;
    }
    case AgentRole::firm: {
      const auto& f = o.firms.at(a.index);
      v = {f.capital, f.labor, f.tfp, f.price, f.wage};
      break;
    }
    case AgentRole::household: {
      const auto& h = o.households.at(a.index);
      v = {h.assets, h.education};
      if (h.age) v.push_back(static_cast<double>(*h.age));
      const auto& g = o.global;
      v.insert(v.end(), {g.top_assets, g.top_income, g.top_education, g.bottom_assets, g.bottom_income,
                         g.bottom_education});
      break;
    }
  }
  return v;
}

inline std::vector<double> action_vector(const JointAction& j, const AgentSlot& a) {
  switch (a.role) {
    case AgentRole::fiscal: {
      const auto& f = j.fiscal.value();
      return {f.tau, f.xi, f.tau_a, f.xi_a, f.spending_share};
    }
    case AgentRole::central_bank: {
      const auto& c = j.central_bank.value();
      return {c.policy_rate, c.reserve_ratio};
    }
    case AgentRole::pension: {
      const auto& p = j.pension.value();
      return {static_cast<double>(p.retirement_age), p.contribution_rate, p.target_growth};
    }
    case AgentRole::bank: {
      const auto& b = j.bank.value();
      return {b.deposit_rate, b.lending_rate};
    }
    case AgentRole::firm: {
      const auto& f = j.firms.at(a.index);
      return {f.price, f.wage};
    }
    case AgentRole::household: {
      const auto& h = j.households.at(a.index);
      return {h.allocation, h.labor, h.investment};
    }
  }
  return {};
}

/// Clamps `v` into the kind's bounds in place; NaN goes to the lower bound.
/// Returns the number of entries changed.
inline int clamp_to_spec(std::vector<double>& v, const KindSpec& k) {
  if (v.size() != k.act_len())
    throw ActionError(std::string(to_string(k.role)) + " action needs " + std::to_string(k.act_len()) +
                      " values, got " + std::to_string(v.size()));
  int n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = std::isnan(v[i]) ? k.act_low[i] : std::clamp(v[i], k.act_low[i], k.act_high[i]);
    if (std::isnan(v[i]) || x != v[i]) ++n;
    v[i] = x;
  }
  return n;
}

/// Writes a (clamped) flat action into the joint action slot for `a`.
inline void write_action(JointAction& j, const AgentSlot& a, const std::vector<double>& v) {
  switch (a.role) {
    case AgentRole::fiscal:
      j.fiscal = FiscalAction{v[0], v[1], v[2], v[3], v[4], {}};
      break;
    case AgentRole::central_bank:
      j.central_bank = CentralBankAction{v[0], v[1]};
      break;
    case AgentRole::pension:
      j.pension = PensionAction{static_cast<int>(std::lround(v[0])), v[1], v[2]};
      break;
    case AgentRole::bank:
      j.bank = BankAction{v[0], v[1]};
      break;
    case AgentRole::firm:
      j.firms.at(a.index) = FirmAction{v[0], v[1]};
      break;
    case AgentRole::household:
      j.households.at(a.index) = HouseholdAction{v[0], v[1], v[2]};
      break;
  }
}

inline std::vector<double> reward_vector(const Rewards& r, std::span<const AgentSlot> order) {
  std::vector<double> out;
  out.reserve(order.size());
  for (const auto& a : order) {
    switch (a.role) {
      case AgentRole::fiscal: out.push_back(r.fiscal.value()); break;
      case AgentRole::central_bank: out.push_back(r.central_bank.value()); break;
      case AgentRole::pension: out.push_back(r.pension.value()); break;
      case AgentRole::bank: out.push_back(r.bank.value_or(0.0)); break;
      case AgentRole::firm: out.push_back(r.firms.at(a.index)); break;
      case AgentRole::household: out.push_back(r.households.at(a.index)); break;
    }
  }
  return out;
}

struct BridgeFrame {
  std::vector<AgentSlot> agents;                // order of `observations`
  std::vector<std::vector<double>> observations;
  std::vector<AgentSlot> acted;                 // order of `rewards`; empty after reset
  std::vector<double> rewards;
  bool done = false;
  std::string reason;
  std::map<std::string, double> info;
};

/// One environment driven partly from outside. Internal roles act through
/// their bindings; roles bound to "external" take the flat actions passed to
/// step(), one vector per external agent in agent order.
class BridgeSession {
 public:
  explicit BridgeSession(EconomyConfig cfg)
      : env_(cfg), policies_(cfg), spec_(make_vector_spec(cfg)) {
    if (!policies_.any_external()) throw ConfigError("bridge: no agent is bound to \"external\"");
  }

  const VectorSpec& spec() const noexcept { return spec_; }
  const MarketEnv& env() const noexcept { return env_; }

  BridgeFrame reset(std::uint64_t seed) {
    env_.reset(seed);
    return frame();
  }

  bool is_external(AgentRole r) const {
    const auto& b = env_.config().policies;
    switch (r) {
      case AgentRole::fiscal: return b.fiscal.kind == "external";
      case AgentRole::central_bank: return b.central_bank.kind == "external";
      case AgentRole::pension: return b.pension.kind == "external";
      case AgentRole::bank: return b.bank.kind == "external";
      case AgentRole::firm: return b.firms.kind == "external";
      case AgentRole::household: return b.households.kind == "external";
    }
    return false;
  }

  /// Agents whose actions step() expects, in order.
  std::vector<AgentSlot> external_agents() const {
    std::vector<AgentSlot> out;
    for (const auto& a : agent_order(env_.config(), env_.snapshot()))
      if (is_external(a.role)) out.push_back(a);
    return out;
  }

  BridgeFrame step(const std::vector<std::vector<double>>& actions) {
    const auto& cfg = env_.config();
    const auto& snap = env_.snapshot();
    const auto order = agent_order(cfg, snap);
    const auto ext = external_agents();
    if (actions.size() != ext.size())
      throw ActionError("bridge: expected " + std::to_string(ext.size()) + " external actions, got " +
                        std::to_string(actions.size()));
    // Seed the external slots so decide() can copy them; sizes follow the snapshot.
    JointAction injected;
    if (is_external(AgentRole::household)) injected.households.resize(snap.households.size());
    if (is_external(AgentRole::firm) && is_strategic(cfg.roles.firm)) injected.firms.resize(snap.firms.size());
    int clamps = 0;
    for (std::size_t k = 0; k < ext.size(); ++k) {
      auto v = actions[k];
      clamps += clamp_to_spec(v, spec_.of(ext[k].role));
      write_action(injected, ext[k], v);
    }
    const auto joint = policies_.decide(snap, env_.observations(), &injected);
    const int t_before = snap.clock.t;
    auto r = env_.step(joint);
    BridgeFrame f = frame();
    if (r.next.clock.t != t_before) {  // a refused step (degenerate market) pays no rewards
      f.acted = order;
      f.rewards = reward_vector(r.rewards, order);
    }
    f.done = r.done;
    f.reason = r.reason;
    f.info = std::move(r.info);
    f.info["action_clamps"] = clamps;
    return f;
  }

 private:
  BridgeFrame frame() const {
    BridgeFrame f;
    f.agents = agent_order(env_.config(), env_.snapshot());
    const auto obs = env_.observations();
    f.observations.reserve(f.agents.size());
    for (const auto& a : f.agents) f.observations.push_back(observation_vector(obs, a));
    f.done = env_.done();
    return f;
  }

  MarketEnv env_;
  PolicySet policies_;
  VectorSpec spec_;
};

}  // namespace econsim
