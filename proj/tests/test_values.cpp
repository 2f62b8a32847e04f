#include <gtest/gtest.h>

#include <dynalloc/verify.hpp>

#include "fixtures.hpp"

using namespace dynalloc;
using fx::q;
using fx::Q;

namespace {

void expect_all_pass(const Verdict& v, const std::string& what) {
  for (const auto& c : v.checks) EXPECT_TRUE(c.pass) << what << ": " << c.name << " " << c.detail;
}

}  // namespace

TEST(Whittle, ScenarioC) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  EXPECT_TRUE(is_product_lattice(b));
  EXPECT_EQ(whittle_value(b, idx, {0, 0}), RandomVariable<Q>{q(13, 10)});
  EXPECT_EQ(whittle_value(b, idx, {0, 0}, q(5)), RandomVariable<Q>{q(5)});
  EXPECT_EQ(whittle_value(b, idx, {1, 1}), RandomVariable<Q>{q(0)});
  EXPECT_EQ(whittle_value(b, idx, {1, 1}, q(1, 3)), RandomVariable<Q>{q(1, 3)});
}

TEST(Whittle, ScenarioD) {
  auto b = fx::load<Q>("scenario_d").bandit;
  auto idx = compute_indices(b);
  EXPECT_EQ(whittle_value(b, idx, {0, 0}), RandomVariable<Q>(4, q(123, 64)));
  EXPECT_EQ(whittle_value(b, idx, {0, 0}, q(1)), RandomVariable<Q>(4, q(129, 64)));
  // atoms in product order: (u,u) (u,d) (d,u) (d,d)
  EXPECT_EQ(whittle_value(b, idx, {1, 1}), (RandomVariable<Q>{q(5, 2), q(9, 4), q(1), q(1, 2)}));
}

TEST(Whittle, ProductWithInformativeRoot) {
  // project 1 already reveals part of its outcome at time 0
  std::vector<ProjectTree<Q>> trees{
      {FiniteSpace<Q>({"a", "b", "c"}, {q(1, 2), q(1, 3), q(1, 6)}),
       {Partition::from_blocks(3, {{0}, {1, 2}}), Partition::discrete(3)}},
      {FiniteSpace<Q>({"w"}, {q(1)}), {Partition::trivial(1), Partition::trivial(1)}}};
  auto lat = build_product_lattice(trees);
  RewardsProcess<Q> r1{q(1, 2), q(2), {{q(1), q(1, 4), q(1, 4)}}}, r2{q(1, 2), q(2), {{q(1, 2), q(1, 2), q(1, 2)}}};
  auto b = make_bandit(lat, {r1, r2});
  EXPECT_TRUE(is_product_lattice(b));
  auto idx = compute_indices(b);
  auto o = oracle_Phi(b, {0, 0}, std::optional<Q>{});
  EXPECT_EQ(whittle_value(b, idx, {0, 0}), o.value);
  EXPECT_EQ(o.value, (RandomVariable<Q>{q(5, 4), q(5, 8), q(5, 8)}));
}

TEST(GeneralValue, AllRoutesAgreeOnC) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto g = general_value(b, idx, {0, 0});
  EXPECT_TRUE(g.agree);
  for (const auto& x : {g.product_integral, g.decreasing, g.decreasing_n_form, g.replay, g.replay_surrogate})
    EXPECT_EQ(x, RandomVariable<Q>{q(13, 10)});
}

TEST(GeneralValue, SheetValuesOnE) {
  auto sc = fx::load<Q>("scenario_e");
  const auto& b = sc.bandit;
  EXPECT_FALSE(is_product_lattice(b));
  auto idx = compute_indices(b);
  EXPECT_THROW(whittle_value(b, idx, {0, 0}), InputError);
  auto g = general_value(b, idx, {0, 0});
  EXPECT_TRUE(g.agree);
  std::set<Q> seen(g.product_integral.begin(), g.product_integral.end());
  EXPECT_EQ(seen, (std::set<Q>{q(17, 16), q(11, 8)}));
  auto o = oracle_Phi(b, {0, 0}, std::optional<Q>{});
  EXPECT_EQ(o.value, g.product_integral);
  EXPECT_EQ(o.count, 10u);
}

TEST(Decreasing, ScenarioCBothForms) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto dv = decreasing_value(b, {0, 0});
  EXPECT_TRUE(dv.agree);
  EXPECT_EQ(dv.integral, RandomVariable<Q>{q(13, 10)});
  EXPECT_EQ(dv.n_form, RandomVariable<Q>{q(13, 10)});
}

TEST(Decreasing, RejectsIncreasingRewards) {
  // scenario D's project 1 pays 1 then 2 on u
  auto b = fx::load<Q>("scenario_d").bandit;
  EXPECT_THROW(decreasing_value(b, {0, 0}), InputError);
  auto idx = compute_indices(b);
  EXPECT_NO_THROW(decreasing_value(surrogate_bandit(b, idx, {0, 0}), {0, 0}));
}

TEST(Processes, KLWOnC) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto c = operational_clock(b, idx, {0, 0});
  auto k = klw_processes(build_sync_strategy(c), b, idx, c);
  EXPECT_TRUE(k.pass());
  EXPECT_EQ(k.K.back(), RandomVariable<Q>{q(0)});
  EXPECT_EQ(k.W.back(), RandomVariable<Q>{q(0)});
  EXPECT_EQ(k.Lambda.back(), k.K.back());
}

TEST(Processes, QStartsAtTheValue) {
  auto b = fx::load<Q>("scenario_c").bandit;
  auto idx = compute_indices(b);
  auto f = value_field(b, idx, q(0));
  auto c = operational_clock(b, idx, {0, 0});
  auto qs = q_process(build_sync_strategy(c), f, b);
  EXPECT_EQ(qs.X.front(), RandomVariable<Q>{q(13, 10)});
  EXPECT_TRUE(qs.martingale);
  auto other = q_process(AllocationStrategy{{0, 0}, {1}, {{1, 0}}}, f, b);
  EXPECT_TRUE(other.supermartingale);
  EXPECT_FALSE(other.martingale);
}

TEST(Bellman, ValueFieldSolvesTheEquation) {
  for (const char* name : {"scenario_c", "scenario_d"}) {
    auto b = fx::load<Q>(name).bandit;
    auto idx = compute_indices(b);
    for (const auto& M : retirement_grid(b, idx)) {
      auto r = bellman_residual(value_field(b, idx, M), b, idx, M);
      EXPECT_TRUE(r.pass()) << name << " M=" << M;
      EXPECT_EQ(r.worst, q(0));
    }
  }
}

TEST(Bellman, PerturbationIsLocated) {
  auto sc = fx::load<Q>("bellman_perturbed");
  ASSERT_TRUE(sc.perturb);
  const auto& b = sc.bandit;
  auto idx = compute_indices(b);
  auto f = value_field(b, idx, q(0));
  f[b.lat.index(sc.perturb->cell)][sc.perturb->atom] += sc.perturb->delta;
  auto r = bellman_residual(f, b, idx, q(0));
  EXPECT_FALSE(r.equation);
  EXPECT_EQ(r.worst, q(1, 100));
  ASSERT_TRUE(r.where);
  EXPECT_EQ(*r.where, (LatticePoint{1, 0}));
  EXPECT_EQ(*r.atom, 0u);
  auto v = verify_bellman(b, idx, sc.perturb);
  EXPECT_FALSE(v.pass());
  EXPECT_NE(v.checks.front().detail.find("(1,0)"), std::string::npos);
}

TEST(Bellman, IterationContracts) {
  auto b = fx::load<Q>("scenario_d").bandit;
  auto idx = compute_indices(b);
  auto err = bellman_iteration_errors(b, value_field(b, idx, q(0)), q(0), 6);
  ASSERT_EQ(err.size(), 7u);
  for (std::size_t n = 1; n < err.size(); ++n) EXPECT_LE(err[n], err[0] * ipow(b.beta, static_cast<int>(n)));
  EXPECT_GT(err[0], q(0));
}

TEST(Suites, ScenarioDPassesEverything) {
  auto sc = fx::load<Q>("scenario_d");
  for (const auto& s : sc.suites)
    for (const auto& [name, pt] : sc.starts) {
      auto v = run_suite(sc, s, pt, {});
      expect_all_pass(v, s + " from " + name);
    }
}

TEST(Suites, ScenarioEPassesEverything) {
  auto sc = fx::load<Q>("scenario_e");
  for (const auto& s : sc.suites) expect_all_pass(run_suite(sc, s, sc.starts.at("origin"), {}), s);
}

// property: value routes, oracle and the K/Lambda/W identities on seeded instances
TEST(ValuesProperty, RandomProductMain) {
  gen::Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    auto b = gen::product<Q>(rng);
    auto idx = compute_indices(b);
    expect_all_pass(verify_main(b, idx, LatticePoint(b.dim(), 0), {}), "product " + std::to_string(k));
  }
}

TEST(ValuesProperty, RandomSheetMain) {
  gen::Rng rng(42);
  for (int k = 0; k < 15; ++k) {
    auto b = gen::sheet<Q>(rng, k % 2 == 0);
    auto idx = compute_indices(b);
    expect_all_pass(verify_main(b, idx, LatticePoint(b.dim(), 0), {}), "sheet " + std::to_string(k));
  }
}

TEST(ValuesProperty, RandomProductBellmanAndQ) {
  gen::Rng rng(43);
  for (int k = 0; k < 15; ++k) {
    auto b = gen::product<Q>(rng);
    auto idx = compute_indices(b);
    expect_all_pass(verify_bellman(b, idx, std::optional<Perturbation<Q>>{}), "bellman " + std::to_string(k));
    expect_all_pass(verify_lemma_q(b, idx, LatticePoint(b.dim(), 0), {}), "lemma-q " + std::to_string(k));
  }
}

TEST(ValuesFloatMode, ScenarioDValue) {
  auto b = fx::load<double>("scenario_d").bandit;
  auto idx = compute_indices(b);
  auto g = general_value(b, idx, {0, 0}, 1e-9);
  EXPECT_TRUE(g.agree);
  for (double x : g.product_integral) EXPECT_NEAR(x, 123.0 / 64, 1e-12);
}
