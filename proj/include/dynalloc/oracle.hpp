#pragma once

#include "allocation.hpp"
#include "enumerate.hpp"

namespace dynalloc {

// esssup over S(t) of E[sum_{u=t}^{tau-1} beta^(u-t) h(u+1) + beta^(tau-t) m | F(t)], block by block
template <class Real>
RandomVariable<Real> oracle_V(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t, const Real& m,
                              const EnumerationBudget& budget = {}, std::uint64_t* count = nullptr) {
  const auto& sp = *filt.space;
  int H = rp.horizon();
  if (sp.size() > budget.max_atoms || H > budget.max_horizon) throw BudgetExceeded("instance exceeds enumeration caps");
  std::size_t n = sp.size();
  RandomVariable<Real> out(n, m);
  if (t >= H) return out;
  if (count) *count = 0;
  for (const auto& blk : filt.at[t].blocks()) {
    std::optional<Real> best;
    auto c = enumerate_stopping_rules(
        filt, t, H,
        [&](const StoppingRule& r) {
          Real tot = 0;
          for (int a : blk) {
            int stop = r.time[a] == kNever ? H : r.time[a];
            Real b = 1, y = 0;
            for (int u = t; u < stop; ++u) {
              y += b * rp.h[u][a];
              b *= rp.beta;
            }
            if (r.time[a] != kNever) y += b * m;
            tot += sp.prob[a] * y;
          }
          if (!best || tot > *best) best = tot;
        },
        budget, blk);
    if (count) *count += c;
    Real v = *best / block_prob(sp, blk);
    for (int a : blk) out[a] = v;
  }
  return out;
}

template <class Real>
struct OracleResult {
  RandomVariable<Real> value;
  std::uint64_t count = 0;  // policies scored, summed over root blocks
  std::vector<Policy> argmax;  // first maximiser per root block
};

// discounted reward of one policy on one atom, with lump M at retirement
template <class Real>
Real policy_reward(const Policy& p, const std::vector<LatticePoint>& path, std::size_t a,
                   const std::vector<RewardsProcess<Real>>& rewards, const Real& beta, const std::optional<Real>& M) {
  Real b = 1, r = 0;
  int hor = p.strategy.horizon();
  for (int t = 0; t <= hor; ++t) {
    if (p.retire[a] == t) {
      r += b * *M;
      break;
    }
    if (t == hor) break;
    int j = p.strategy.choice[a][t];
    r += b * rewards[j].at(path[t][j] + 1, a);
    b *= beta;
  }
  return r;
}

// esssup over A(s) (or over pairs with a retirement time when M is given)
template <class Real>
OracleResult<Real> oracle_Phi(const Bandit<Real>& b, const LatticePoint& s, const std::vector<RewardsProcess<Real>>& rewards,
                              std::optional<Real> M = std::nullopt, const EnumerationBudget& budget = {}) {
  const auto& sp = b.space();
  std::size_t n = sp.size();
  OracleResult<Real> res{RandomVariable<Real>(n, Real(0)), 0, {}};
  for (const auto& blk : root_blocks(b.lat, s)) {
    std::optional<Real> best;
    Policy arg;
    res.count += enumerate_policies(
        b.lat, s, M.has_value(),
        [&](const Policy& p) {
          auto P = p.strategy.paths();
          Real tot = 0;
          for (int a : blk) tot += sp.prob[a] * policy_reward(p, P[a], a, rewards, b.beta, M);
          if (!best || tot > *best) {
            best = tot;
            arg = p;
          }
        },
        budget, blk);
    Real v = *best / block_prob(sp, blk);
    for (int a : blk) res.value[a] = v;
    res.argmax.push_back(arg);
  }
  return res;
}

template <class Real>
OracleResult<Real> oracle_Phi(const Bandit<Real>& b, const LatticePoint& s, std::optional<Real> M = std::nullopt,
                              const EnumerationBudget& budget = {}) {
  return oracle_Phi(b, s, b.rewards, M, budget);
}

}  // namespace dynalloc
