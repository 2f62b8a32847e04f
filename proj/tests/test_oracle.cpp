#include <gtest/gtest.h>

#include <dynalloc/verify.hpp>

#include "fixtures.hpp"

using namespace dynalloc;
using fx::q;
using fx::Q;

namespace {

Filtration<Q> deterministic(int H) {
  auto sp = std::make_shared<FiniteSpace<Q>>(std::vector<std::string>{"w"}, std::vector<Q>{q(1)});
  return Filtration<Q>(sp, std::vector<Partition>(H + 1, Partition::trivial(1)));
}

std::uint64_t rules(const Filtration<Q>& f, int t) {
  return enumerate_stopping_rules(f, t, f.horizon(), [](const StoppingRule&) {});
}

}  // namespace

TEST(OracleCensus, StoppingRules) {
  EXPECT_EQ(rules(deterministic(2), 0), 4u);
  EXPECT_EQ(rules(deterministic(0), 0), 2u);
  EXPECT_EQ(stopping_rule_count(deterministic(2), 0, 2, all_atoms(1)), 4.0);
  auto b = fx::scenario_b();
  std::uint64_t n = 0;
  auto V = oracle_V(b.rp, b.filt, 0, q(1), {}, &n);
  EXPECT_EQ(n, 10u);
  EXPECT_EQ(V, RandomVariable<Q>(2, q(15, 8)));
}

TEST(OracleCensus, RulesAreDistinctAndAdapted) {
  auto b = fx::scenario_b();
  std::set<RandomTime> seen;
  enumerate_stopping_rules(b.filt, 0, 2, [&](const StoppingRule& r) {
    EXPECT_TRUE(seen.insert(r.time).second);
    // {tau = 0} and {tau = 1} must be F(0)- and F(1)-events
    for (int u = 0; u < 2; ++u) {
      std::vector<char> ev(2);
      for (std::size_t a = 0; a < 2; ++a) ev[a] = r.time[a] == u;
      EXPECT_TRUE(b.filt.at[u].contains_event(ev));
    }
  });
  EXPECT_EQ(seen.size(), 10u);
}

TEST(OracleV, ScenarioA) {
  auto a = fx::scenario_a();
  EXPECT_EQ(oracle_V(a.rp, a.filt, 0, q(0)), RandomVariable<Q>(2, q(1)));
  EXPECT_EQ(oracle_V(a.rp, a.filt, 1, q(3, 2)), RandomVariable<Q>(2, q(3, 2)));
}

TEST(OracleV, BudgetIsEnforced) {
  auto b = fx::scenario_b();
  EnumerationBudget tight;
  tight.max_rules = 5;
  EXPECT_THROW(oracle_V(b.rp, b.filt, 0, q(1), tight), BudgetExceeded);
  tight = {};
  tight.max_horizon = 1;
  EXPECT_THROW(oracle_V(b.rp, b.filt, 0, q(1), tight), BudgetExceeded);
}

TEST(OraclePhi, ScenarioC) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto o = oracle_Phi(b, {0, 0}, std::optional<Q>{});
  EXPECT_EQ(o.value, RandomVariable<Q>{q(13, 10)});
  EXPECT_EQ(o.count, 2u);
  // retirement worth more than K: retire at once
  EXPECT_EQ(oracle_Phi(b, {0, 0}, std::optional<Q>{q(5)}).value, RandomVariable<Q>{q(5)});
}

TEST(OraclePhi, ScenarioDWithAndWithoutRetirement) {
  auto b = fx::load<Q>("scenario_d").bandit;
  auto o = oracle_Phi(b, {0, 0}, std::optional<Q>{});
  EXPECT_EQ(o.value, RandomVariable<Q>(4, q(123, 64)));
  EXPECT_EQ(o.count, 50u);
  auto r = oracle_Phi(b, {0, 0}, std::optional<Q>{q(1)});
  EXPECT_EQ(r.value, RandomVariable<Q>(4, q(129, 64)));
  EXPECT_EQ(r.count, 7201u);
  auto mid = oracle_Phi(b, {1, 1}, std::optional<Q>{});
  EXPECT_EQ(mid.value, (RandomVariable<Q>{q(5, 2), q(9, 4), q(1), q(1, 2)}));
}

TEST(OraclePhi, SurrogateRewardsChangeTheValue) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto o = oracle_Phi(b, {0, 0}, surrogate_rewards(b, idx, {0, 0}), std::optional<Q>{});
  EXPECT_EQ(o.value, RandomVariable<Q>{q(13, 10)});
}

// property: brute-force optimum equals the Snell envelope on seeded random projects
TEST(OracleProperty, OracleMatchesSnell) {
  gen::Rng rng(51);
  for (int k = 0; k < 50; ++k) {
    auto s = gen::single<Q>(rng);
    Q m = s.rp.reward_bound * q(gen::uniform(rng, 0, 4), 4);
    for (int t = 0; t <= s.rp.horizon(); ++t)
      EXPECT_EQ(oracle_V(s.rp, s.filt, t, m), snell_value(s.rp, s.filt, t, m)) << "instance " << k << " t " << t;
  }
}

TEST(OracleProperty, OracleMatchesWhittleWithRetirement) {
  gen::Rng rng(52);
  for (int k = 0; k < 20; ++k) {
    auto b = gen::product<Q>(rng);
    LatticePoint s(b.dim(), 0);
    if (strategy_count(b.lat, s, all_atoms(b.space().size()), true) > 2e4) continue;
    auto idx = compute_indices(b);
    Q M = b.K * q(gen::uniform(rng, 0, 4), 4);
    EXPECT_EQ(oracle_Phi(b, s, std::optional<Q>{M}).value, whittle_value(b, idx, s, M)) << "instance " << k;
  }
}
