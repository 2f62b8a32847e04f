#include <gtest/gtest.h>

#include <dynalloc/verify.hpp>

#include "fixtures.hpp"

using namespace dynalloc;
using fx::q;
using fx::Q;

TEST(Partition, BlocksAreOrderedByLeastAtom) {
  auto p = Partition::from_blocks(4, {{3, 1}, {0}, {2}});
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.block_of(0), 0);
  EXPECT_EQ(p.block_of(1), 1);
  EXPECT_EQ(p.block_of(3), 1);
  EXPECT_EQ(p, Partition::from_labels({7, 5, 9, 5}));
}

TEST(Partition, RejectsBadBlocks) {
  EXPECT_THROW(Partition::from_blocks(3, {{0, 1}}), InputError);
  EXPECT_THROW(Partition::from_blocks(3, {{0, 1}, {1, 2}}), InputError);
  EXPECT_THROW(Partition::from_blocks(3, {{0, 1, 2}, {}}), InputError);
  EXPECT_THROW(Partition::from_blocks(2, {{0, 2}}), InputError);
}

TEST(Partition, JoinAndMeet) {
  auto a = Partition::from_blocks(4, {{0, 1}, {2, 3}});
  auto b = Partition::from_blocks(4, {{0, 2}, {1, 3}});
  EXPECT_EQ(join(a, b), Partition::discrete(4));
  EXPECT_EQ(meet(a, b), Partition::trivial(4));
  EXPECT_TRUE(Partition::discrete(4).refines(a));
  EXPECT_FALSE(a.refines(b));
  auto c = Partition::from_blocks(4, {{0, 1}, {2}, {3}});
  EXPECT_EQ(meet(a, c), a);
  EXPECT_EQ(join(a, c), c);
}

TEST(Space, ProbabilitiesMustSumToOne) {
  EXPECT_THROW(FiniteSpace<Q>({"a", "b"}, {q(1, 2), q(1, 3)}), InputError);
  EXPECT_THROW(FiniteSpace<Q>({"a", "b"}, {q(1), q(0)}), InputError);
  EXPECT_THROW(FiniteSpace<Q>({"a"}, {q(1, 2), q(1, 2)}), InputError);
  EXPECT_NO_THROW(FiniteSpace<Q>({"a", "b", "c"}, {q(1, 6), q(1, 3), q(1, 2)}));
}

TEST(CondExpect, AveragesOverBlocks) {
  FiniteSpace<Q> sp({"a", "b", "c"}, {q(1, 6), q(1, 3), q(1, 2)});
  RandomVariable<Q> x{q(6), q(3), q(1)};
  auto e = cond_expect(sp, x, Partition::from_blocks(3, {{0, 1}, {2}}));
  EXPECT_EQ(e, (RandomVariable<Q>{q(4), q(4), q(1)}));
  EXPECT_EQ(cond_expect(sp, x, Partition::trivial(3)), RandomVariable<Q>(3, q(5, 2)));
  EXPECT_EQ(cond_expect(sp, x, Partition::discrete(3)), x);
  EXPECT_TRUE(is_measurable(e, Partition::from_blocks(3, {{0, 1}, {2}})));
  EXPECT_FALSE(is_measurable(x, Partition::from_blocks(3, {{0, 1}, {2}})));
}

TEST(CondExpect, TowerPropertyOnRandomChains) {
  gen::Rng rng(11);
  for (int k = 0; k < 40; ++k) {
    auto s = gen::single<Q>(rng);
    const auto& sp = *s.filt.space;
    RandomVariable<Q> x(sp.size());
    for (auto& v : x) v = q(gen::uniform(rng, -5, 5), 3);
    for (int t = 0; t + 1 <= s.filt.horizon(); ++t) {
      auto fine = cond_expect(sp, x, s.filt.at[t + 1]);
      EXPECT_EQ(cond_expect(sp, fine, s.filt.at[t]), cond_expect(sp, x, s.filt.at[t]));
    }
  }
}

TEST(Filtration, MustRefine) {
  auto sp = fx::coin<Q>();
  EXPECT_THROW(Filtration<Q>(sp, {Partition::discrete(2), Partition::trivial(2)}), InputError);
  EXPECT_NO_THROW(Filtration<Q>(sp, {Partition::trivial(2), Partition::trivial(2), Partition::discrete(2)}));
}

TEST(Lattice, RejectsNonRefiningCells) {
  auto sp = fx::coin<Q>();
  try {
    FiltrationLattice<Q>(sp, {1}, {Partition::discrete(2), Partition::trivial(2)});
    FAIL() << "accepted a lattice that coarsens";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("(F1)"), std::string::npos);
  }
  EXPECT_THROW(FiltrationLattice<Q>(sp, {1, 1}, {Partition::trivial(2)}), InputError);
}

TEST(Lattice, IndexAndPointRoundTrip) {
  auto sc = fx::load<Q>("scenario_d");
  const auto& lat = sc.bandit.lat;
  EXPECT_EQ(lat.num_cells(), 9u);
  for (std::size_t k = 0; k < lat.num_cells(); ++k) EXPECT_EQ(lat.index(lat.point(k)), k);
  EXPECT_EQ(lat.point(5), (LatticePoint{1, 2}));
  EXPECT_EQ(wedge({2, 0}, {1, 1}), (LatticePoint{1, 0}));
}

TEST(Lattice, ProductCellsAreJoinsOfAxisCells) {
  auto sc = fx::load<Q>("scenario_d");
  const auto& lat = sc.bandit.lat;
  for (std::size_t k = 0; k < lat.num_cells(); ++k) {
    auto p = lat.point(k);
    auto j = join(lat.at({p[0], 0}), lat.at({0, p[1]}));
    EXPECT_EQ(lat.cell(k), j) << to_string(p);
  }
  auto ax = derive_axis_filtrations(lat, 0);
  EXPECT_EQ(ax.small.size(), 3u);
  EXPECT_EQ(ax.small[0], Partition::trivial(4));
  EXPECT_EQ(ax.large[0], lat.at({0, 2}));
}

TEST(Lattice, ProductAndSheetSatisfyF4) {
  for (const char* name : {"scenario_c", "scenario_d", "scenario_e"}) {
    auto sc = fx::load<Q>(name);
    auto r = check_F4(sc.bandit.lat);
    EXPECT_TRUE(r.pass) << name << ": " << r.witness.value_or("");
  }
}

TEST(Lattice, CounterexampleFailsF4WithWitness) {
  auto sc = fx::load<Q>("f4_counterexample");
  auto r = check_F4(sc.bandit.lat);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.cond_indep);
  ASSERT_TRUE(r.witness);
  EXPECT_FALSE(r.witness->empty());
  auto v = verify_f4(sc.bandit);
  EXPECT_FALSE(v.pass());
}

TEST(Lattice, SheetAxisOrder) {
  auto sc = fx::load<Q>("scenario_e");
  const auto& lat = sc.bandit.lat;
  EXPECT_EQ(lat.bounds(), (std::vector<int>{2, 1}));
  EXPECT_EQ(lat.space().size(), 64u);
  // anchored: the origin site is already revealed at (0,0)
  EXPECT_EQ(lat.at({0, 0}).size(), 2u);
  EXPECT_EQ(lat.at({1, 0}).size(), 4u);
  EXPECT_EQ(lat.at({2, 1}).size(), 64u);
  EXPECT_EQ(lat.at(lat.top()), Partition::discrete(lat.space().size()));
}

TEST(StoppingPoint, StoppedPartitionOfConstantPointIsTheCell) {
  auto sc = fx::load<Q>("scenario_d");
  const auto& lat = sc.bandit.lat;
  StoppingPoint nu(lat.space().size(), LatticePoint{1, 1});
  EXPECT_TRUE(is_stopping_point(nu, lat));
  EXPECT_EQ(stopped_partition(lat, nu), lat.at({1, 1}));
  // peeking at project 1's coin before deciding where to go
  StoppingPoint peek{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  EXPECT_FALSE(is_stopping_point(peek, lat));
}

TEST(Field, FixtureSupermartingaleOnDAndE) {
  for (const char* name : {"scenario_d", "scenario_e"}) {
    auto sc = fx::load<Q>(name);
    auto v = verify_f4(sc.bandit);
    for (const auto& c : v.checks) EXPECT_TRUE(c.pass) << name << ": " << c.name << " " << c.detail;
  }
}

TEST(Field, OptionalSamplingDetectsAFalseSupermartingale) {
  auto sc = fx::load<Q>("scenario_c");
  const auto& lat = sc.bandit.lat;
  Field<Q> x;
  for (std::size_t k = 0; k < lat.num_cells(); ++k) {
    auto p = lat.point(k);
    x.push_back(RandomVariable<Q>(1, Q(p[0] + p[1])));
  }
  auto fr = check_field_supermartingale(x, lat);
  EXPECT_FALSE(fr.supermartingale());
  EXPECT_TRUE(fr.forms_agree());
  StoppingPoint s{LatticePoint{0, 0}}, t{LatticePoint{1, 1}};
  EXPECT_FALSE(check_optional_sampling(x, s, t, lat).pass);
}

// property: random product lattices satisfy F4 and pass the supermartingale fixture
TEST(ProbCoreProperty, RandomProductLatticesSatisfyF4) {
  gen::Rng rng(2024);
  for (int k = 0; k < 30; ++k) {
    auto b = gen::product<Q>(rng);
    auto v = verify_f4(b);
    for (const auto& c : v.checks) EXPECT_TRUE(c.pass) << "instance " << k << ": " << c.name << " " << c.detail;
  }
}

TEST(ProbCoreProperty, RandomSheetsSatisfyF4) {
  gen::Rng rng(77);
  for (int k = 0; k < 20; ++k) {
    auto b = gen::sheet<Q>(rng, k % 2 == 1);
    auto r = check_F4(b.lat);
    EXPECT_TRUE(r.pass) << "instance " << k << ": " << r.witness.value_or("");
  }
}

TEST(ProbCoreFloatMode, DLoadsAndPassesF4) {
  auto sc = fx::load<double>("scenario_d");
  EXPECT_TRUE(check_F4(sc.bandit.lat).pass);
  EXPECT_NEAR(sc.bandit.beta, 0.5, 1e-15);
}
