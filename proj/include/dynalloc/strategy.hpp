#pragma once

#include "prob_core.hpp"

namespace dynalloc {

// Decisions are stored per atom and calendar time; adaptedness is a property checked by
// validate_strategy, not assumed. `support` restricts the strategy to an F(start)-event.
struct AllocationStrategy {
  LatticePoint start;
  std::vector<char> support;             // atoms the strategy is defined on
  std::vector<std::vector<int>> choice;  // [atom][t] project engaged at calendar t

  std::size_t atoms() const { return choice.size(); }
  int horizon() const { return choice.empty() ? 0 : static_cast<int>(choice.front().size()); }

  // T(t) per atom for t = 0..horizon
  std::vector<std::vector<LatticePoint>> paths() const {
    std::vector<std::vector<LatticePoint>> P(atoms());
    for (std::size_t a = 0; a < atoms(); ++a) {
      P[a].push_back(start);
      for (int j : choice[a]) {
        LatticePoint p = P[a].back();
        if (j >= 0) ++p[j];
        P[a].push_back(p);
      }
    }
    return P;
  }

  static AllocationStrategy from_paths(const LatticePoint& s, const std::vector<std::vector<LatticePoint>>& P) {
    AllocationStrategy T{s, std::vector<char>(P.size(), 1), std::vector<std::vector<int>>(P.size())};
    for (std::size_t a = 0; a < P.size(); ++a)
      for (std::size_t t = 0; t + 1 < P[a].size(); ++t) {
        int j = -1, moved = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          int d = P[a][t + 1][i] - P[a][t][i];
          if (d != 0) {
            j = static_cast<int>(i);
            moved += d;
          }
        }
        if (moved != 1) throw std::logic_error("path is not a unit-step path");
        T.choice[a].push_back(j);
      }
    return T;
  }
};

template <class Real>
int exhaustion_time(const FiltrationLattice<Real>& lat, const LatticePoint& s) {
  int t = 0;
  for (std::size_t i = 0; i < lat.dim(); ++i) t += lat.bounds()[i] - s[i];
  return t;
}

// deterministic strategy engaging projects cyclically, skipping exhausted ones
template <class Real>
AllocationStrategy round_robin(const FiltrationLattice<Real>& lat, const LatticePoint& s) {
  std::size_t n = lat.space().size();
  AllocationStrategy T{s, std::vector<char>(n, 1), std::vector<std::vector<int>>(n)};
  LatticePoint p = s;
  std::size_t next = 0;
  std::vector<int> seq;
  for (int t = 0; t < exhaustion_time(lat, s); ++t) {
    while (p[next] >= lat.bounds()[next]) next = (next + 1) % lat.dim();
    seq.push_back(static_cast<int>(next));
    ++p[next];
    next = (next + 1) % lat.dim();
  }
  for (auto& c : T.choice) c = seq;
  return T;
}

struct StrategyReport {
  bool pass = true;
  int condition = 0;  // 1: start, 2: unit steps in bounds, 3: non-anticipativity, 4: derived properties
  std::string message;
  std::optional<std::size_t> atom;
  std::optional<int> time;
};

template <class Real>
StrategyReport validate_strategy(const AllocationStrategy& T, const FiltrationLattice<Real>& lat) {
  StrategyReport rep;
  const auto& sp = lat.space();
  std::size_t n = sp.size();
  auto fail = [&](int cond, std::string msg, std::optional<std::size_t> a = {}, std::optional<int> t = {}) {
    rep.pass = false;
    rep.condition = cond;
    rep.message = std::move(msg);
    rep.atom = a;
    rep.time = t;
    return rep;
  };
  if (T.atoms() != n || T.support.size() != n) return fail(1, "strategy size does not match the space");
  if (!lat.contains(T.start)) return fail(1, "start point outside the lattice");
  if (!lat.at(T.start).contains_event(T.support)) return fail(3, "support is not an F(start)-event");
  int hor = -1;
  for (std::size_t a = 0; a < n; ++a)
    if (T.support[a]) {
      if (hor < 0) hor = static_cast<int>(T.choice[a].size());
      if (static_cast<int>(T.choice[a].size()) != hor) return fail(2, "decision sequences of unequal length", a);
    }
  if (hor < 0) return rep;
  auto P = T.paths();
  for (std::size_t a = 0; a < n; ++a) {
    if (!T.support[a]) continue;
    for (int t = 0; t < hor; ++t) {
      int j = T.choice[a][t];
      if (j < 0 || static_cast<std::size_t>(j) >= lat.dim()) return fail(2, "decision is not a project index", a, t);
      if (!lat.contains(P[a][t + 1])) return fail(2, "step leaves the lattice", a, t);
    }
  }
  std::vector<Partition> stopped;
  for (int t = 0; t <= hor; ++t) {
    // {T(t) = r} must be a union of F(r)-blocks, and the decision constant on each such block
    std::map<LatticePoint, std::vector<char>> ev;
    for (std::size_t a = 0; a < n; ++a)
      if (T.support[a]) {
        auto& m = ev[P[a][t]];
        if (m.empty()) m.assign(n, 0);
        m[a] = 1;
      }
    for (const auto& [r, mask] : ev) {
      const Partition& F = lat.at(r);
      if (!F.contains_event(mask)) {
        for (std::size_t a = 0; a < n; ++a)
          if (mask[a]) return fail(3, "{T(t)=" + to_string(r) + "} is not an F" + to_string(r) + "-event", a, t);
      }
      if (t < hor)
        for (const auto& blk : F.blocks()) {
          if (!mask[blk.front()]) continue;
          for (int a : blk)
            if (T.choice[a][t] != T.choice[blk.front()][t])
              return fail(3, "decision differs within a block of F" + to_string(r), static_cast<std::size_t>(a), t);
        }
    }
    StoppingPoint nu(n, T.start);
    for (std::size_t a = 0; a < n; ++a)
      if (T.support[a]) nu[a] = P[a][t];
    Partition sp_t = stopped_partition(lat, nu);
    if (!stopped.empty() && !sp_t.refines(stopped.back())) return fail(4, "F(T(t)) is not increasing", {}, t);
    stopped.push_back(sp_t);
  }
  // T_i(t) is an F^i stopping time
  for (std::size_t i = 0; i < lat.dim(); ++i) {
    auto large = derive_axis_filtrations(lat, i).large;
    for (int t = 0; t <= hor; ++t)
      for (int k = T.start[i]; k <= lat.bounds()[i]; ++k) {
        std::vector<char> mask(n, 0);
        for (std::size_t a = 0; a < n; ++a) mask[a] = T.support[a] && P[a][t][i] == k;
        if (!large[k].contains_event(mask))
          return fail(4, "T_" + std::to_string(i + 1) + "(" + std::to_string(t) + ") is not an F^i stopping time", {}, t);
      }
  }
  return rep;
}

}  // namespace dynalloc
