#include <gtest/gtest.h>

#include <dynalloc/verify.hpp>

#include "fixtures.hpp"

using namespace dynalloc;
using fx::q;
using fx::Q;

namespace {

// one atom per project, rewards listed per step
Bandit<Q> deterministic(const std::vector<std::vector<Q>>& h, Q beta, Q K) {
  std::vector<ProjectTree<Q>> trees;
  for (const auto& hi : h)
    trees.push_back({FiniteSpace<Q>({"w"}, {q(1)}), std::vector<Partition>(hi.size() + 1, Partition::trivial(1))});
  auto lat = build_product_lattice(trees);
  std::vector<RewardsProcess<Q>> rps;
  for (const auto& hi : h) {
    RewardsProcess<Q> rp{beta, K, {}};
    for (const auto& v : hi) rp.h.push_back({v});
    rps.push_back(rp);
  }
  return make_bandit(lat, rps);
}

AllocationStrategy fixed(const LatticePoint& s, std::vector<int> choice) {
  return AllocationStrategy{s, {1}, {std::move(choice)}};
}

std::vector<AllocationStrategy> all_strategies(const Bandit<Q>& b, const LatticePoint& s) {
  std::vector<AllocationStrategy> out;
  for (const auto& blk : root_blocks(b.lat, s))
    enumerate_strategies(b.lat, s, [&](const AllocationStrategy& S) { out.push_back(S); }, {}, blk);
  return out;
}

}  // namespace

TEST(Bandit, SharedBetaAndBound) {
  auto c = fx::load<Q>("scenario_c").bandit;
  EXPECT_EQ(c.beta, q(1, 2));
  EXPECT_EQ(c.K, q(2));
  auto rps = c.rewards;
  rps[1].beta = q(1, 3);
  EXPECT_THROW(make_bandit(c.lat, rps), InputError);
  rps = c.rewards;
  rps.pop_back();
  EXPECT_THROW(make_bandit(c.lat, rps), InputError);
}

TEST(Clock, ScenarioC) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  EXPECT_EQ(idx[0].M[0][0], q(2));
  EXPECT_EQ(idx[1].M[0][0], q(6, 5));
  auto c = operational_clock(b, idx, {0, 0});
  EXPECT_TRUE(c.consistent);
  EXPECT_EQ(c.t_exh, 2);
  EXPECT_EQ(c.N(0), RandomVariable<Q>{q(2)});
  EXPECT_EQ(c.N(1), RandomVariable<Q>{q(6, 5)});
  EXPECT_EQ(c.N(2), RandomVariable<Q>{q(0)});
  ASSERT_EQ(c.values, (std::vector<Q>{q(0), q(6, 5), q(2)}));
  // codes: 1 = (0, 6/5), 2 = 6/5, 3 = (6/5, 2), 4 = 2, 5 = above 2
  EXPECT_EQ(c.tau(0, 1), 2);
  EXPECT_EQ(c.tau(0, 2), 1);
  EXPECT_EQ(c.tau(0, 3), 1);
  EXPECT_EQ(c.tau(0, 4), 0);
  EXPECT_EQ(c.tau(0, 5), 0);
  EXPECT_EQ(c.tau(0, 0), kNever);
  EXPECT_EQ(c.tau_minus(0, 2), 2);
  EXPECT_EQ(c.grid_value(3), q(8, 5));
  auto j = c.jumps(0);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[1], (std::pair<int, Q>{1, q(6, 5)}));
}

TEST(Clock, NAndTauAreRightInverses) {
  auto b = fx::load<Q>("scenario_d").bandit;
  auto idx = compute_indices(b);
  for (const auto& s : {LatticePoint{0, 0}, LatticePoint{1, 1}, LatticePoint{2, 0}}) {
    auto c = operational_clock(b, idx, s);
    for (std::size_t a = 0; a < b.space().size(); ++a)
      for (int t = 0; t < c.t_exh; ++t)
        for (int g = 1; g <= c.max_code(); ++g)
          EXPECT_EQ(c.tau(a, g) > t, c.grid_value(g) < c.N(a, t)) << to_string(s) << " atom " << a << " t " << t;
  }
}

TEST(SyncStrategy, ScenarioCEngagesProjectOneFirst) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto c = operational_clock(b, idx, {0, 0});
  auto T = build_sync_strategy(c);
  EXPECT_EQ(T.choice[0], (std::vector<int>{0, 1}));
  EXPECT_TRUE(validate_strategy(T, b.lat).pass);
  auto f = classify_strategy(T, c);
  EXPECT_TRUE(f.sync);
  EXPECT_TRUE(f.index_type);
  EXPECT_TRUE(f.minimal_switching);
  EXPECT_TRUE(f.consistent());
  EXPECT_EQ(reward_of(T, b.rewards, b.beta), RandomVariable<Q>{q(13, 10)});
}

TEST(SyncStrategy, ProjectTwoFirstIsNotSynchronized) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto c = operational_clock(b, idx, {0, 0});
  auto S = fixed({0, 0}, {1, 0});
  EXPECT_EQ(reward_of(S, b.rewards, b.beta), RandomVariable<Q>{q(11, 10)});
  auto f = classify_strategy(S, c);
  EXPECT_FALSE(f.sync);
  EXPECT_FALSE(f.index_type);
  EXPECT_TRUE(f.five_agree());
  EXPECT_TRUE(f.dual_inequality);
  // at m = 3/2: tau = 1 and sigma = (1, 0), but S sits at (0, 1) after one step
  EXPECT_EQ(c.grid_value(3), q(8, 5));
  EXPECT_EQ(c.tau(0, 3), 1);
  EXPECT_EQ(c.sigma(0, 0, 3), 1);
  EXPECT_EQ(c.sigma(1, 0, 3), 0);
  EXPECT_EQ(S.paths()[0][1], (LatticePoint{0, 1}));
}

TEST(SyncStrategy, ExtraSwitchingOnTiesStaysIndexType) {
  auto b = deterministic({{q(1), q(1)}, {q(1), q(1)}}, q(1, 2), q(2));
  auto idx = compute_indices(b);
  auto c = operational_clock(b, idx, {0, 0});
  auto alt = classify_strategy(fixed({0, 0}, {0, 1, 0, 1}), c);
  EXPECT_TRUE(alt.sync);
  EXPECT_TRUE(alt.index_type);
  EXPECT_FALSE(alt.minimal_switching);
  EXPECT_TRUE(alt.consistent());
  auto block = classify_strategy(fixed({0, 0}, {0, 0, 1, 1}), c);
  EXPECT_TRUE(block.minimal_switching);
}

TEST(AllocationCensus, StrategyCounts) {
  auto one = deterministic({{q(1), q(0)}}, q(1, 2), q(2));
  EXPECT_EQ(all_strategies(one, {0}).size(), 1u);
  auto c = fx::load<Q>("scenario_c").bandit;
  EXPECT_EQ(all_strategies(c, {0, 0}).size(), 2u);
  auto d = fx::load<Q>("scenario_d").bandit;
  auto all = all_strategies(d, {0, 0});
  EXPECT_EQ(all.size(), 50u);
  EXPECT_EQ(strategy_count(d.lat, LatticePoint{0, 0}, all_atoms(4), false), 50.0);
  auto idx = compute_indices(d);
  auto clock = operational_clock(d, idx, {0, 0});
  int sync = 0;
  for (const auto& S : all) {
    EXPECT_TRUE(validate_strategy(S, d.lat).pass);
    auto f = classify_strategy(S, clock);
    EXPECT_TRUE(f.consistent());
    sync += f.sync;
  }
  EXPECT_EQ(sync, 1);
}

TEST(Validation, PeekingStrategyIsRejected) {
  auto d = fx::load<Q>("scenario_d").bandit;
  // engage project 1 or 2 first depending on project 1's coin: not adapted
  std::size_t n = d.space().size();
  AllocationStrategy S{{0, 0}, std::vector<char>(n, 1), std::vector<std::vector<int>>(n)};
  for (std::size_t a = 0; a < n; ++a) S.choice[a] = a < 2 ? std::vector<int>{0, 0, 1, 1} : std::vector<int>{1, 1, 0, 0};
  EXPECT_FALSE(validate_strategy(S, d.lat).pass);
  EXPECT_TRUE(validate_strategy(round_robin(d.lat, LatticePoint{0, 0}), d.lat).pass);
}

TEST(LemmaY, HoldsOnCAndD) {
  for (const char* name : {"scenario_c", "scenario_d"}) {
    auto b = fx::load<Q>(name).bandit;
    auto idx = compute_indices(b);
    auto c = operational_clock(b, idx, LatticePoint(b.dim(), 0));
    auto r = check_lemma_y(b, idx, c, build_sync_strategy(c));
    EXPECT_TRUE(r.pass) << name << ": " << r.witness.value_or("");
    EXPECT_GT(r.checked, 0);
  }
}

TEST(Surrogate, RewardsFollowTheLowerEnvelope) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto sr = surrogate_rewards(b, idx, {0, 0});
  EXPECT_EQ(sr[0].h[0], RandomVariable<Q>{q(1)});
  EXPECT_EQ(sr[1].h[0], RandomVariable<Q>{q(3, 5)});
  auto mid = surrogate_rewards(b, idx, {1, 0});
  EXPECT_EQ(mid[0].h[0], RandomVariable<Q>{q(1)});  // K(1-beta) before the start
}

// property: synchronization identity, meta-equivalence and the implications, per strategy
TEST(AllocationProperty, RandomProductInstances) {
  gen::Rng rng(31);
  for (int k = 0; k < 25; ++k) {
    auto b = gen::product<Q>(rng);
    if (strategy_count(b.lat, LatticePoint(b.dim(), 0), all_atoms(b.space().size()), false) > 2e4) continue;
    auto idx = compute_indices(b);
    auto v = verify_index_properties(b, idx, LatticePoint(b.dim(), 0), {});
    for (const auto& c : v.checks) EXPECT_TRUE(c.pass) << "instance " << k << ": " << c.name << " " << c.detail;
  }
}

TEST(AllocationProperty, RandomSheetInstances) {
  gen::Rng rng(32);
  for (int k = 0; k < 15; ++k) {
    auto b = gen::sheet<Q>(rng, k % 3 == 0);
    auto idx = compute_indices(b);
    EnumerationBudget budget;
    budget.max_rules = 2e4;
    auto v = verify_index_properties(b, idx, LatticePoint(b.dim(), 0), budget);
    for (const auto& c : v.checks) EXPECT_TRUE(c.pass) << "instance " << k << ": " << c.name << " " << c.detail;
  }
}
