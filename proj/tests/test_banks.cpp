#include <gtest/gtest.h>

#include <cmath>

#include "econsim/banks.hpp"
#include "econsim/rng.hpp"

using namespace econsim;

TEST(NoArbitrage, Examples) {
  EXPECT_DOUBLE_EQ(noarbitrage_capital_return(0.03, 0.05), 0.08);
  EXPECT_EQ(noarbitrage_capital_return(0.03, 0.0), 0.03);
}

TEST(Platform, AllToCapital) {
  BankState b;
  const auto a = platform_balance_step(b, 0.1, 0.04, 0.06, 100.0, 0.0);
  EXPECT_EQ(a.loans, 100.0);
  EXPECT_EQ(a.bonds, 0.0);
  EXPECT_EQ(a.residual, 0.0);
}

TEST(Platform, EmptyBalanceSheet) {
  const auto a = platform_balance_step(BankState{}, 0.1, 0.04, 0.06, 0.0, 0.0);
  EXPECT_EQ(a.loans, 0.0);
  EXPECT_EQ(a.bonds, 0.0);
}

TEST(Platform, BondsServedFirst) {
  const auto a = platform_balance_step(BankState{}, 0.1, 0.04, 0.06, 100.0, 30.0);
  EXPECT_EQ(a.bonds, 30.0);
  EXPECT_EQ(a.loans, 70.0);
  const auto b = platform_balance_step(BankState{}, 0.1, 0.04, 0.06, 100.0, 300.0);
  EXPECT_EQ(b.bonds, 100.0);
  EXPECT_EQ(b.loans, 0.0);
}

TEST(Platform, IdentityOnRandomSequences) {
  RngStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    BankState b;
    b.deposits = 1e4 * rng.uniform();
    b.loans = b.deposits;
    for (int t = 0; t < 50; ++t) {
      const double delta = 0.1 * rng.uniform();
      const double r = 0.05 * rng.uniform();
      const double R = r + delta;  // no-arbitrage
      const double a_next = b.deposits * (0.9 + 0.3 * rng.uniform());
      const double debt = 1e3 * rng.uniform();
      const auto a = platform_balance_step(b, R, r, delta, a_next, debt);
      if (a.distress) break;
      const double lhs = a.loans + a.bonds - a_next;
      const double rhs = (R + 1 - delta) * b.loans + (1 + r) * (b.bonds - b.deposits);
      ASSERT_LT(std::abs(lhs - rhs) / std::max({1.0, a_next, b.loans}), 1e-9);
      b.loans = a.loans;
      b.bonds = a.bonds;
      b.deposits = a_next;
    }
  }
}

TEST(Corridor, Examples) {
  auto [rd, rl] = clamp_rates_to_corridor(0.03, {0.05, 0.02});
  EXPECT_DOUBLE_EQ(rd, 0.03);
  EXPECT_DOUBLE_EQ(rl, 0.04);
  auto [d2, l2] = clamp_rates_to_corridor(0.03, {0.025, 0.05});
  EXPECT_EQ(d2, 0.025);
  EXPECT_EQ(l2, 0.05);
}

TEST(Corridor, PropertyScan) {
  RngStream rng(12);
  for (int k = 0; k < 10000; ++k) {
    const double iota = -0.05 + 0.2 * rng.uniform();
    const BankAction p{-1.0 + 2.0 * rng.uniform(), -1.0 + 2.0 * rng.uniform()};
    const auto [rd, rl] = clamp_rates_to_corridor(iota, p);
    ASSERT_GE(rd, iota - 0.01 - 1e-15);
    ASSERT_LE(rd, iota);
    ASSERT_GE(rl, iota + 0.01);
    ASSERT_LE(rl, iota + 0.03 + 1e-15);
    ASSERT_GE(rl - rd, 0.01 - 1e-12);
  }
}

TEST(Reserves, Examples) {
  const auto full = reserve_feasible_allocation(100.0, 1.0, 50.0, 50.0);
  EXPECT_EQ(full.loans, 0.0);
  EXPECT_EQ(full.bonds, 0.0);
  EXPECT_EQ(full.reserves, 100.0);
  const auto bind = reserve_feasible_allocation(100.0, 0.1, 200.0, 0.0);
  EXPECT_NEAR(bind.loans + bind.bonds, 90.0, 1e-12);
  EXPECT_TRUE(reserve_feasible_allocation(-1.0, 0.1, 1.0, 1.0).failed);
}

TEST(Reserves, FeasibilityScan) {
  RngStream rng(13);
  for (int k = 0; k < 10000; ++k) {
    const double a = 1e4 * rng.uniform(), phi = rng.uniform();
    const auto x = reserve_feasible_allocation(a, phi, 2e4 * rng.uniform(), 2e4 * rng.uniform());
    ASSERT_LE(x.loans + x.bonds, (1 - phi) * a + 1e-9 * std::max(1.0, a));
    ASSERT_GE(x.loans, 0.0);
    ASSERT_GE(x.bonds, 0.0);
    ASSERT_NEAR(x.loans + x.bonds + x.reserves, a, 1e-9 * std::max(1.0, a));
  }
}

TEST(CommercialProfit, Examples) {
  EXPECT_NEAR(commercial_profit(0.05, 60.0, 40.0, 0.02, 100.0), 3.0, 1e-12);
  EXPECT_EQ(commercial_profit(0.05, 0.0, 0.0, 0.02, 0.0), 0.0);
}

TEST(CommercialProfit, MaximizedAtCorridorExtremes) {
  const double iota = 0.03, lent = 80.0, deposits = 100.0;
  double best = -1e300, best_d = 0.0, best_l = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      const auto [rd, rl] = clamp_rates_to_corridor(iota, {iota - 0.01 + 0.0001 * i, iota + 0.01 + 0.0002 * j});
      const double p = commercial_profit(rl, lent, 0.0, rd, deposits);
      if (p > best) {
        best = p;
        best_d = rd;
        best_l = rl;
      }
    }
  EXPECT_NEAR(best_d, iota - 0.01, 1e-12);
  EXPECT_NEAR(best_l, iota + 0.03, 1e-12);
}
