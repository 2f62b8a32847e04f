#pragma once

#include "allocation.hpp"

#include <random>

namespace dynalloc::gen {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// F(0) <= ... <= F(H) on n atoms; F(0) trivial unless `free_root`
inline std::vector<Partition> random_chain(Rng& rng, std::size_t n, int H, bool free_root) {
  std::vector<long> lab(n);
  int k = uniform(rng, 1, static_cast<int>(n));
  for (auto& l : lab) l = uniform(rng, 0, k - 1);
  std::vector<Partition> parts{Partition::from_labels(lab)};
  for (int t = H - 1; t >= 0; --t) {
    const Partition& fine = parts.front();
    int blocks = static_cast<int>(fine.size());
    std::vector<long> merge(blocks);
    int kk = uniform(rng, 1, blocks);
    for (auto& m : merge) m = uniform(rng, 0, kk - 1);
    for (std::size_t a = 0; a < n; ++a) lab[a] = merge[fine.block_of(a)];
    parts.insert(parts.begin(), Partition::from_labels(lab));
  }
  if (!free_root) parts.front() = Partition::trivial(n);
  return parts;
}

template <class Real>
std::vector<Real> random_probs(Rng& rng, std::size_t n) {
  std::vector<long> w(n);
  long tot = 0;
  for (auto& x : w) tot += (x = uniform(rng, 1, 4));
  std::vector<Real> p;
  for (long x : w) p.push_back(from_ratio<Real>(x, tot));
  if constexpr (!Num<Real>::exact) {
    // keep the float total at 1 to the last bit
    Real s = 0;
    for (std::size_t a = 0; a + 1 < n; ++a) s += p[a];
    p.back() = 1 - s;
  }
  return p;
}

template <class Real>
Real random_beta(Rng& rng) {
  static const long den[3][2] = {{1, 4}, {1, 2}, {9, 10}};
  int k = uniform(rng, 0, 2);
  return from_ratio<Real>(den[k][0], den[k][1]);
}

// h(t) constant on blocks of parts[t-1], values in {0, 1/4, ..., 1} * K(1-beta)
template <class Real>
std::vector<RandomVariable<Real>> random_rewards(Rng& rng, const std::vector<Partition>& parts, const Real& cap) {
  std::vector<RandomVariable<Real>> h;
  for (std::size_t t = 0; t + 1 < parts.size(); ++t) {
    std::vector<Real> per(parts[t].size());
    for (auto& v : per) v = cap * from_ratio<Real>(uniform(rng, 0, 4), 4);
    RandomVariable<Real> x(parts[t].atoms());
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = per[parts[t].block_of(a)];
    h.push_back(x);
  }
  return h;
}

template <class Real>
struct SingleInstance {
  Filtration<Real> filt;
  RewardsProcess<Real> rp;
};

// atoms <= 8, H <= 3
template <class Real>
SingleInstance<Real> single(Rng& rng, int max_atoms = 8, int max_H = 3) {
  std::size_t n = static_cast<std::size_t>(uniform(rng, 1, max_atoms));
  int H = uniform(rng, 1, max_H);
  std::vector<std::string> names;
  for (std::size_t a = 0; a < n; ++a) names.push_back("w" + std::to_string(a));
  auto sp = std::make_shared<FiniteSpace<Real>>(names, random_probs<Real>(rng, n));
  Filtration<Real> filt(sp, random_chain(rng, n, H, uniform(rng, 0, 3) == 0));
  Real beta = random_beta<Real>(rng), K = Real(uniform(rng, 1, 3));
  return {filt, {beta, K, random_rewards(rng, filt.at, K * (Real(1) - beta))}};
}

template <class Real>
Bandit<Real> bandit_from_trees(Rng& rng, const std::vector<ProjectTree<Real>>& trees) {
  auto lat = build_product_lattice(trees);
  Real beta = random_beta<Real>(rng), K = Real(uniform(rng, 1, 3));
  std::vector<std::size_t> sizes;
  for (const auto& tr : trees) sizes.push_back(tr.space.size());
  std::vector<RewardsProcess<Real>> rps;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    auto h = random_rewards(rng, trees[i].parts, K * (Real(1) - beta));
    for (auto& x : h) x = pull_back(sizes, i, x);
    rps.push_back({beta, K, h});
  }
  return make_bandit(lat, rps);
}

// d <= 2 independent projects, atoms <= 4 and H_i <= 2 each
template <class Real>
Bandit<Real> product(Rng& rng, int max_d = 2, int max_atoms = 4, int max_H = 2) {
  int d = uniform(rng, 1, max_d);
  std::vector<ProjectTree<Real>> trees;
  for (int i = 0; i < d; ++i) {
    std::size_t n = static_cast<std::size_t>(uniform(rng, 1, max_atoms));
    std::vector<std::string> names;
    for (std::size_t a = 0; a < n; ++a) names.push_back(std::string(1, static_cast<char>('a' + i)) + std::to_string(a));
    int H = uniform(rng, 1, max_H);
    trees.push_back({FiniteSpace<Real>(names, random_probs<Real>(rng, n)), random_chain(rng, n, H, uniform(rng, 0, 3) == 0)});
  }
  return bandit_from_trees(rng, trees);
}

// two-axis sheet with +-1 increments; plain sheets keep <= 4 sites, anchored ones <= 6
template <class Real>
Bandit<Real> sheet(Rng& rng, bool anchored) {
  static const int plain[][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 3}, {3, 1}, {1, 4}, {4, 1}};
  static const int anch[][2] = {{1, 1}, {1, 2}, {2, 1}};
  std::vector<int> dims(2);
  if (anchored) {
    int k = uniform(rng, 0, 2);
    dims = {anch[k][0], anch[k][1]};
  } else {
    int k = uniform(rng, 0, 7);
    dims = {plain[k][0], plain[k][1]};
  }
  static const long pu[][2] = {{1, 2}, {1, 3}, {2, 3}, {1, 4}};
  int k = uniform(rng, 0, 3);
  Real p = from_ratio<Real>(pu[k][0], pu[k][1]);
  auto lat = build_sheet_lattice(dims, Increments<Real>{{Real(1), Real(-1)}, {p, Real(1) - p}}, anchored);
  Real beta = random_beta<Real>(rng), K = Real(uniform(rng, 1, 3));
  std::vector<RewardsProcess<Real>> rps;
  for (std::size_t i = 0; i < 2; ++i)
    rps.push_back({beta, K, random_rewards(rng, derive_axis_filtrations(lat, i).small, K * (Real(1) - beta))});
  return make_bandit(lat, rps);
}

}  // namespace dynalloc::gen
