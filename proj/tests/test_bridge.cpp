#include <gtest/gtest.h>

#include "econsim/bridge.hpp"
#include "econsim/presets.hpp"
#include "econsim/scenario.hpp"

using namespace econsim;

namespace {

EconomyConfig preset(const std::string& name, int n) {
  auto doc = preset_document(name);
  doc["population"]["size"] = n;
  return parse_scenario_json(doc).config;
}

// Native actions of `native` for the bridge's external agents, in order.
std::vector<std::vector<double>> native_external_actions(const BridgeSession& b, const PolicySet& native) {
  const auto& env = b.env();
  const auto joint = native.decide(env.snapshot(), env.observations());
  std::vector<std::vector<double>> out;
  for (const auto& a : b.external_agents()) out.push_back(action_vector(joint, a));
  return out;
}

}  // namespace

TEST(Bridge, ObservationLengths) {
  auto cfg = preset("optimal-tax", 20);
  cfg.policies.fiscal.kind = "external";
  BridgeSession b(cfg);
  const auto spec = b.spec();
  EXPECT_EQ(spec.of(AgentRole::fiscal).obs_fields.size(), 15u);
  EXPECT_EQ(spec.of(AgentRole::household).obs_fields.size(), 8u);
  const auto f = b.reset(1);
  ASSERT_EQ(f.agents[0].role, AgentRole::fiscal);
  EXPECT_EQ(f.observations[0].size(), 15u);
  EXPECT_EQ(f.observations[1].size(), 8u);

  auto olg = preset("aging-pension", 20);
  olg.policies.households.kind = "external";
  BridgeSession o(olg);
  EXPECT_EQ(o.spec().of(AgentRole::household).obs_fields.size(), 9u);
  EXPECT_EQ(o.reset(1).observations.back().size(), 9u);
}

TEST(Bridge, VectorsMatchObservations) {
  auto cfg = preset("multi-government", 30);
  cfg.policies.pension.kind = "external";
  BridgeSession b(cfg);
  const auto f = b.reset(2);
  const auto obs = b.env().observations();
  // Governments share one observation.
  EXPECT_EQ(f.observations[0], f.observations[1]);
  EXPECT_EQ(f.observations[1], f.observations[2]);
  EXPECT_EQ(f.observations[0][0], obs.government->debt);
  EXPECT_EQ(f.observations[0][4], obs.government->gdp);
  const auto& h = f.observations[3];
  EXPECT_EQ(h[0], obs.households[0].assets);
  EXPECT_EQ(h[1], obs.households[0].education);
  EXPECT_EQ(h[2], static_cast<double>(*obs.households[0].age));
  EXPECT_EQ(h[3], obs.global.top_assets);
}

TEST(Bridge, RequiresAnExternalAgent) {
  EXPECT_THROW(BridgeSession(preset("aging-pension", 10)), ConfigError);
}

TEST(Bridge, ResetIsDeterministic) {
  auto cfg = preset("aging-pension", 40);
  cfg.policies.households.kind = "external";
  BridgeSession a(cfg), b(cfg);
  EXPECT_EQ(a.reset(5).observations, b.reset(5).observations);
}

TEST(Bridge, ParityWithNativeRun) {
  const auto native_cfg = preset("aging-pension", 100);
  for (const char* role : {"households", "pension"}) {
    SCOPED_TRACE(role);
    auto cfg = native_cfg;
    if (std::string(role) == "households") cfg.policies.households.kind = "external";
    else cfg.policies.pension.kind = "external";
    BridgeSession b(cfg);
    b.reset(9);
    MarketEnv env(native_cfg);
    env.reset(9);
    const PolicySet native(native_cfg);
    for (int t = 0; t < 30; ++t) {
      const auto f = b.step(native_external_actions(b, native));
      const auto r = env.step(native.decide(env.snapshot(), env.observations()));
      ASSERT_TRUE(b.env().snapshot() == env.snapshot()) << "t=" << t;
      EXPECT_EQ(f.rewards, reward_vector(r.rewards, f.acted));
      EXPECT_EQ(f.info.at("action_clamps"), 0.0);
      if (r.done) break;
    }
  }
}

TEST(Bridge, OutOfBoundsActionsAreClampedAndCounted) {
  auto cfg = preset("aging-pension", 30);
  cfg.policies.households.kind = "external";
  BridgeSession a(cfg), b(cfg);
  a.reset(3);
  b.reset(3);
  const auto n = a.external_agents().size();
  std::vector<std::vector<double>> wild(n, {-0.2, 1.3, 0.5}), tame(n, {0.0, 1.0, 0.5});
  const auto fa = a.step(wild);
  const auto fb = b.step(tame);
  EXPECT_EQ(fa.info.at("action_clamps"), 2.0 * static_cast<double>(n));
  EXPECT_EQ(fb.info.at("action_clamps"), 0.0);
  EXPECT_TRUE(a.env().snapshot() == b.env().snapshot());
  EXPECT_EQ(fa.rewards, fb.rewards);
  EXPECT_THROW(a.step({}), ActionError);
}

TEST(Bridge, RefusedStepPaysNoRewards) {
  auto cfg = preset("aging-pension", 30);
  cfg.policies.households.kind = "external";
  BridgeSession b(cfg);
  const auto before = b.reset(3);
  const auto n = b.external_agents().size();
  // Nobody works: the competitive market has no factor prices.
  const auto f = b.step(std::vector<std::vector<double>>(n, {0.5, 0.0, 0.5}));
  EXPECT_TRUE(f.done);
  EXPECT_EQ(f.reason, "degenerate market");
  EXPECT_TRUE(f.rewards.empty());
  EXPECT_TRUE(f.acted.empty());
  EXPECT_EQ(f.observations, before.observations);
}

TEST(Bridge, RewardOrderingFollowsAgentOrder) {
  const auto native_cfg = preset("multi-government", 25);
  auto cfg = native_cfg;
  cfg.policies.fiscal.kind = "external";
  BridgeSession b(cfg);
  b.reset(4);
  MarketEnv env(native_cfg);
  env.reset(4);
  const PolicySet native(native_cfg);
  const auto f = b.step(native_external_actions(b, native));
  const auto r = env.step(native.decide(env.snapshot(), env.observations()));
  ASSERT_EQ(f.acted.size(), f.rewards.size());
  EXPECT_EQ(f.acted[0].role, AgentRole::fiscal);
  EXPECT_EQ(f.acted[1].role, AgentRole::central_bank);
  EXPECT_EQ(f.acted[2].role, AgentRole::pension);
  for (std::size_t k = 1; k < f.acted.size(); ++k)
    EXPECT_LE(static_cast<int>(f.acted[k - 1].role), static_cast<int>(f.acted[k].role));
  EXPECT_EQ(f.acted.back().role, AgentRole::household);
  EXPECT_EQ(f.rewards[0], *r.rewards.fiscal);
  EXPECT_EQ(f.rewards[1], *r.rewards.central_bank);
  EXPECT_EQ(f.rewards.back(), r.rewards.households.back());
}

TEST(Bridge, DonePropagatesReason) {
  auto doc = preset_document("aging-pension");
  doc["population"]["size"] = 30;
  doc["termination"]["horizon"] = 3;
  const auto native_cfg = parse_scenario_json(doc).config;
  auto cfg = native_cfg;
  cfg.policies.pension.kind = "external";
  BridgeSession b(cfg);
  b.reset(0);
  const PolicySet native(native_cfg);
  BridgeFrame f;
  for (int t = 0; t < 3; ++t) f = b.step(native_external_actions(b, native));
  EXPECT_TRUE(f.done);
  EXPECT_EQ(f.reason, "horizon");
}
