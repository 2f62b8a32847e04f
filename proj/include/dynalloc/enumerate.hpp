#pragma once

#include "stopping.hpp"
#include "strategy.hpp"

#include <cstdint>
#include <functional>

namespace dynalloc {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnumerationBudget {
  double max_rules = 4e6;
  std::size_t max_atoms = 256;
  int max_horizon = 8;
  std::size_t max_d = 4;
};

// Realised stopping rule: start plus per-atom random time.
struct StoppingRule {
  int start = 0;
  RandomTime time;
};

namespace detail {

struct Node {
  int t;
  LatticePoint at;  // only used by strategy enumeration
  std::vector<int> atoms;
};

inline std::vector<Node> split(const Partition& P, const std::vector<int>& atoms, int t, const LatticePoint& at) {
  std::map<int, std::vector<int>> g;
  for (int a : atoms) g[P.block_of(a)].push_back(a);
  std::vector<Node> out;
  for (auto& [b, v] : g) out.push_back({t, at, std::move(v)});
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- stopping rules

// Number of rules: a node stops or continues; at the horizon, continuing means never.
template <class Real>
double stopping_rule_count(const Filtration<Real>& filt, int t, int horizon, const std::vector<int>& atoms) {
  std::function<double(const detail::Node&)> count = [&](const detail::Node& nd) -> double {
    if (nd.t >= horizon) return 2.0;
    double prod = 1;
    for (const auto& ch : detail::split(filt.at[nd.t + 1], nd.atoms, nd.t + 1, {})) prod *= count(ch);
    return 1.0 + prod;
  };
  double total = 1;
  for (const auto& r : detail::split(filt.at[std::min(t, horizon)], atoms, t, {})) total *= count(r);
  return total;
}

inline std::vector<int> all_atoms(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Streams every adapted rule on `atoms` (an F(t)-event) exactly once; atoms outside get kNever.
template <class Real, class Visit>
std::uint64_t enumerate_stopping_rules(const Filtration<Real>& filt, int t, int horizon, Visit&& visit,
                                       const EnumerationBudget& budget = {}, std::vector<int> atoms = {}) {
  if (horizon > filt.horizon()) throw InputError("rule enumeration: horizon beyond the filtration");
  if (t > horizon) throw InputError("rule enumeration: start after horizon");
  if (atoms.empty()) atoms = all_atoms(filt.space->size());
  double est = stopping_rule_count(filt, t, horizon, atoms);
  if (est > budget.max_rules) throw BudgetExceeded("stopping-rule enumeration needs " + std::to_string(est) + " rules");
  StoppingRule rule{t, RandomTime(filt.space->size(), kNever)};
  std::vector<detail::Node> pending = detail::split(filt.at[t], atoms, t, {});
  std::uint64_t count = 0;
  std::function<void()> rec = [&]() {
    if (pending.empty()) {
      ++count;
      visit(static_cast<const StoppingRule&>(rule));
      return;
    }
    detail::Node nd = std::move(pending.back());
    pending.pop_back();
    for (int a : nd.atoms) rule.time[a] = nd.t;
    rec();
    if (nd.t >= horizon) {
      for (int a : nd.atoms) rule.time[a] = kNever;
      rec();
    } else {
      auto kids = detail::split(filt.at[nd.t + 1], nd.atoms, nd.t + 1, {});
      std::size_t base = pending.size();
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) pending.push_back(*it);
      rec();
      pending.resize(base);
    }
    for (int a : nd.atoms) rule.time[a] = kNever;
    pending.push_back(std::move(nd));
  };
  rec();
  return count;
}

// ---------------------------------------------------------------- allocation strategies

// retire[a] = calendar time of retirement (kNever if none); choice entries after it are -1
struct Policy {
  AllocationStrategy strategy;
  std::vector<int> retire;
};

template <class Real>
double strategy_count(const FiltrationLattice<Real>& lat, const LatticePoint& s, const std::vector<int>& atoms,
                      bool allow_retire) {
  int hor = exhaustion_time(lat, s);
  std::function<double(const detail::Node&)> count = [&](const detail::Node& nd) -> double {
    if (nd.t >= hor) return allow_retire ? 2.0 : 1.0;
    double sum = allow_retire ? 1.0 : 0.0;
    for (std::size_t j = 0; j < lat.dim(); ++j) {
      if (nd.at[j] >= lat.bounds()[j]) continue;
      LatticePoint nx = step(nd.at, j);
      double prod = 1;
      for (const auto& ch : detail::split(lat.at(nx), nd.atoms, nd.t + 1, nx)) prod *= count(ch);
      sum += prod;
    }
    return sum;
  };
  double total = 1;
  for (const auto& r : detail::split(lat.at(s), atoms, 0, s)) total *= count(r);
  return total;
}

// Streams every adapted decision table on `atoms` (an F(s)-event) exactly once.
template <class Real, class Visit>
std::uint64_t enumerate_policies(const FiltrationLattice<Real>& lat, const LatticePoint& s, bool allow_retire,
                                 Visit&& visit, const EnumerationBudget& budget = {}, std::vector<int> atoms = {}) {
  if (!lat.contains(s)) throw InputError("strategy enumeration: start outside the lattice");
  std::size_t n = lat.space().size();
  if (atoms.empty()) atoms = all_atoms(n);
  if (lat.dim() > budget.max_d || n > budget.max_atoms) throw BudgetExceeded("instance exceeds enumeration caps");
  double est = strategy_count(lat, s, atoms, allow_retire);
  if (est > budget.max_rules) throw BudgetExceeded("strategy enumeration needs " + std::to_string(est) + " tables");
  int hor = exhaustion_time(lat, s);
  Policy pol{AllocationStrategy{s, std::vector<char>(n, 0), std::vector<std::vector<int>>(n, std::vector<int>(hor, -1))},
             std::vector<int>(n, kNever)};
  for (int a : atoms) pol.strategy.support[a] = 1;
  std::vector<detail::Node> pending = detail::split(lat.at(s), atoms, 0, s);
  std::uint64_t count = 0;
  std::function<void()> rec = [&]() {
    if (pending.empty()) {
      ++count;
      visit(static_cast<const Policy&>(pol));
      return;
    }
    detail::Node nd = std::move(pending.back());
    pending.pop_back();
    if (allow_retire) {
      for (int a : nd.atoms) pol.retire[a] = nd.t;
      rec();
      for (int a : nd.atoms) pol.retire[a] = kNever;
    }
    if (nd.t >= hor) {
      rec();  // with retirement allowed this is the never-retire branch
    } else {
      for (std::size_t j = 0; j < lat.dim(); ++j) {
        if (nd.at[j] >= lat.bounds()[j]) continue;
        for (int a : nd.atoms) pol.strategy.choice[a][nd.t] = static_cast<int>(j);
        LatticePoint nx = step(nd.at, j);
        auto kids = detail::split(lat.at(nx), nd.atoms, nd.t + 1, nx);
        std::size_t base = pending.size();
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) pending.push_back(*it);
        rec();
        pending.resize(base);
      }
      for (int a : nd.atoms) pol.strategy.choice[a][nd.t] = -1;
    }
    pending.push_back(std::move(nd));
  };
  rec();
  return count;
}

template <class Real, class Visit>
std::uint64_t enumerate_strategies(const FiltrationLattice<Real>& lat, const LatticePoint& s, Visit&& visit,
                                   const EnumerationBudget& budget = {}, std::vector<int> atoms = {}) {
  return enumerate_policies(
      lat, s, false, [&](const Policy& p) { visit(p.strategy); }, budget, std::move(atoms));
}

// Blocks of F(s) as atom lists; oracles enumerate each block separately.
template <class Real>
std::vector<std::vector<int>> root_blocks(const FiltrationLattice<Real>& lat, const LatticePoint& s) {
  return lat.at(s).blocks();
}

// ---------------------------------------------------------------- stopping points

// all stopping points with values in the lattice
template <class Real, class Visit>
std::uint64_t enumerate_stopping_points(const FiltrationLattice<Real>& lat, Visit&& visit, double cap = 1e6) {
  std::size_t n = lat.space().size();
  StoppingPoint nu(n);
  std::vector<char> free(n, 1);
  std::uint64_t count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (static_cast<double>(count) > cap) throw BudgetExceeded("too many stopping points");
    bool left = std::find(free.begin(), free.end(), 1) != free.end();
    if (!left) {
      ++count;
      visit(static_cast<const StoppingPoint&>(nu));
      return;
    }
    if (k == lat.num_cells()) return;
    // blocks of F(point k) made only of unassigned atoms
    std::vector<int> cand;
    const Partition& F = lat.cell(k);
    for (std::size_t b = 0; b < F.size(); ++b) {
      bool ok = true;
      for (int a : F.block(b)) ok = ok && free[a];
      if (ok) cand.push_back(static_cast<int>(b));
    }
    if (cand.size() > 16) throw BudgetExceeded("too many stopping points");
    LatticePoint p = lat.point(k);
    for (std::uint64_t mask = 0; mask < (1ull << cand.size()); ++mask) {
      for (std::size_t c = 0; c < cand.size(); ++c)
        if (mask >> c & 1ull)
          for (int a : F.block(cand[c])) {
            free[a] = 0;
            nu[a] = p;
          }
      rec(k + 1);
      for (std::size_t c = 0; c < cand.size(); ++c)
        if (mask >> c & 1ull)
          for (int a : F.block(cand[c])) free[a] = 1;
    }
  };
  rec(0);
  return count;
}

}  // namespace dynalloc
