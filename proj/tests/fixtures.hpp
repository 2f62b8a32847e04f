#pragma once

#include <dynalloc/oracle.hpp>
#include <dynalloc/random.hpp>
#include <dynalloc/scenario.hpp>
#include <dynalloc/values.hpp>

#include <fstream>

namespace fx {

using dynalloc::Rational;
using Q = Rational;

inline Q q(long p, long d = 1) { return Q(p) / Q(d); }

template <class Real = Q>
struct Single {
  dynalloc::Filtration<Real> filt;
  dynalloc::RewardsProcess<Real> rp;
};

template <class Real = Q>
dynalloc::SpacePtr<Real> coin() {
  return std::make_shared<dynalloc::FiniteSpace<Real>>(std::vector<std::string>{"u", "d"},
                                                        std::vector<Real>{Real(1) / 2, Real(1) / 2});
}

template <class Real = Q>
dynalloc::Filtration<Real> coin_filtration(int H) {
  std::vector<dynalloc::Partition> parts{dynalloc::Partition::trivial(2)};
  for (int t = 1; t <= H; ++t) parts.push_back(dynalloc::Partition::discrete(2));
  return dynalloc::Filtration<Real>(coin<Real>(), parts);
}

// beta = 1/2, h = (1, 0), K = 2
template <class Real = Q>
Single<Real> scenario_a() {
  Real half = Real(1) / 2;
  return {coin_filtration<Real>(2), {half, Real(2), {{Real(1), Real(1)}, {Real(0), Real(0)}}}};
}

// beta = 1/2, h(1) = 1, h(2) = 2 on u and 0 on d, K = 4
template <class Real = Q>
Single<Real> scenario_b() {
  Real half = Real(1) / 2;
  return {coin_filtration<Real>(2), {half, Real(4), {{Real(1), Real(1)}, {Real(2), Real(0)}}}};
}

template <class Real = Q>
dynalloc::Scenario<Real> load(const std::string& name) {
  std::ifstream in(std::string(DYNALLOC_SCENARIO_DIR) + "/" + name + ".json");
  return dynalloc::scenario_from_json<Real>(dynalloc::json::parse(in));
}

template <class Real>
dynalloc::RandomVariable<Real> rv(std::initializer_list<Real> v) {
  return dynalloc::RandomVariable<Real>(v);
}

}  // namespace fx
