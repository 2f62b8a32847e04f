#pragma once

#include "gittins.hpp"
#include "strategy.hpp"

namespace dynalloc {

// d projects on one filtration lattice; project i is driven by its axis filtration F_i.
template <class Real>
struct Bandit {
  FiltrationLattice<Real> lat;
  std::vector<RewardsProcess<Real>> rewards;
  std::vector<Filtration<Real>> axis;
  Real beta = 0, K = 0;

  std::size_t dim() const { return lat.dim(); }
  const FiniteSpace<Real>& space() const { return lat.space(); }
};

template <class Real>
Bandit<Real> make_bandit(FiltrationLattice<Real> lat, std::vector<RewardsProcess<Real>> rewards,
                         double tol = Num<Real>::default_tol) {
  if (rewards.size() != lat.dim())
    throw InputError("bandit: " + std::to_string(rewards.size()) + " reward sequences for " +
                     std::to_string(lat.dim()) + " projects");
  Bandit<Real> b{std::move(lat), std::move(rewards), {}, 0, 0};
  b.beta = b.rewards.front().beta;
  b.K = b.rewards.front().reward_bound;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (b.rewards[i].beta != b.beta || b.rewards[i].reward_bound != b.K)
      throw InputError("bandit: beta and reward bound must be shared by all projects");
    b.axis.push_back(axis_filtration(b.lat, i));
    try {
      validate_rewards(b.rewards[i], b.axis[i], tol);
    } catch (const InputError& e) {
      throw InputError("project " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return b;
}

template <class Real>
std::vector<IndexSequence<Real>> compute_indices(const Bandit<Real>& b) {
  std::vector<IndexSequence<Real>> out;
  for (std::size_t i = 0; i < b.dim(); ++i) out.push_back(index_sequence(b.rewards[i], b.axis[i]));
  return out;
}

// tau, N and sigma_i relative to a start point, all per atom. Index values are replaced by ranks in
// the sorted value set v_0 = 0 < v_1 < ... < v_L; an m-grid point is coded g = 2k for m = v_k and
// g = 2k+1 for m strictly between v_k and v_{k+1} (above v_L when k = L).
template <class Real>
struct OperationalClock {
  LatticePoint start;
  std::vector<int> bounds;
  int t_exh = 0;
  Real K = 0;
  std::vector<Real> values;
  std::vector<std::vector<std::vector<int>>> lower_rank;  // [i][atom][theta - s_i]
  std::vector<std::vector<std::vector<int>>> index_rank;  // [i][atom][theta - s_i]
  std::vector<std::vector<int>> N_rank;                   // [atom][t], t = 0..t_exh
  bool consistent = true;  // N/tau relations verified at construction

  int levels() const { return static_cast<int>(values.size()) - 1; }
  int max_code() const { return 2 * levels() + 1; }
  std::size_t dim() const { return start.size(); }

  Real grid_value(int g) const {
    int k = g / 2;
    if (g % 2 == 0) return values[k];
    if (k == levels()) return K + 1 > values[k] ? K + 1 : values[k] + 1;
    return (values[k] + values[k + 1]) / 2;
  }

  int lower_at(std::size_t i, std::size_t a, int theta) const { return lower_rank[i][a][theta - start[i]]; }
  int index_at(std::size_t i, std::size_t a, int theta) const { return index_rank[i][a][theta - start[i]]; }

  // sigma_i(s_i; m) for code g >= 1; the envelope hits 0 at H_i so this is always finite
  int sigma(std::size_t i, std::size_t a, int g) const {
    if (g == 0) return kNever;
    const auto& lr = lower_rank[i][a];
    for (std::size_t k = 0; k < lr.size(); ++k)
      if (2 * lr[k] <= g) return start[i] + static_cast<int>(k);
    return bounds[i];
  }
  int sigma_minus(std::size_t i, std::size_t a, int g) const {
    if (g % 2 == 1) return sigma(i, a, g);
    const auto& lr = lower_rank[i][a];
    for (std::size_t k = 0; k < lr.size(); ++k)
      if (2 * lr[k] < g) return start[i] + static_cast<int>(k);
    return bounds[i];
  }
  int tau(std::size_t a, int g) const {
    if (g == 0) return kNever;
    int s = 0;
    for (std::size_t i = 0; i < dim(); ++i) s += sigma(i, a, g) - start[i];
    return s;
  }
  int tau_minus(std::size_t a, int g) const {
    int s = 0;
    for (std::size_t i = 0; i < dim(); ++i) s += sigma_minus(i, a, g) - start[i];
    return s;
  }
  Real N(std::size_t a, int t) const { return values[N_rank[a][std::min(t, t_exh)]]; }
  RandomVariable<Real> N(int t) const {
    RandomVariable<Real> x(N_rank.size());
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = N(a, t);
    return x;
  }
  // (t_j, m_j) with N = m_j on [t_{j-1}, t_j): the jump lists of the step function N
  std::vector<std::pair<int, Real>> jumps(std::size_t a) const {
    std::vector<std::pair<int, Real>> out;
    for (int t = 0; t <= t_exh; ++t)
      if (t == 0 || N_rank[a][t] != N_rank[a][t - 1]) out.emplace_back(t, values[N_rank[a][t]]);
    return out;
  }
  int rank_of(const Real& v, double tol = Num<Real>::default_tol) const {
    for (std::size_t k = 0; k < values.size(); ++k)
      if (Num<Real>::eq(values[k], v, tol)) return static_cast<int>(k);
    throw std::logic_error("value not in the clock's index set");
  }
};

template <class Real>
OperationalClock<Real> operational_clock(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                                         const LatticePoint& s, double tol = Num<Real>::default_tol) {
  if (!b.lat.contains(s)) throw InputError("clock: start point outside the lattice");
  std::size_t n = b.space().size(), d = b.dim();
  OperationalClock<Real> c;
  c.start = s;
  c.bounds = b.lat.bounds();
  c.t_exh = exhaustion_time(b.lat, s);
  c.K = b.K;
  std::vector<Real> vals{Real(0)};
  for (std::size_t i = 0; i < d; ++i)
    for (int th = s[i]; th <= c.bounds[i]; ++th) vals.insert(vals.end(), idx[i].M[th].begin(), idx[i].M[th].end());
  std::sort(vals.begin(), vals.end());
  for (const auto& v : vals)
    if (!Num<Real>::eq(v, c.values.empty() ? Real(-1) : c.values.back(), tol) || c.values.empty()) c.values.push_back(v);
  c.lower_rank.assign(d, std::vector<std::vector<int>>(n));
  c.index_rank.assign(d, std::vector<std::vector<int>>(n));
  for (std::size_t i = 0; i < d; ++i)
    for (int th = s[i]; th <= c.bounds[i]; ++th) {
      auto low = idx[i].lower(s[i], th);
      for (std::size_t a = 0; a < n; ++a) {
        c.lower_rank[i][a].push_back(c.rank_of(low[a], tol));
        c.index_rank[i][a].push_back(c.rank_of(idx[i].M[th][a], tol));
      }
    }
  c.N_rank.assign(n, std::vector<int>(c.t_exh + 1, 0));
  for (std::size_t a = 0; a < n; ++a)
    for (int t = 0; t <= c.t_exh; ++t) {
      int k = 0;
      while (c.tau(a, k == 0 ? 1 : 2 * k) > t) ++k;
      c.N_rank[a][t] = k;
    }
  // tau(m) > t  <=>  m < N(t), and N = m on [tau(m), tau(m-)) at every jump of tau
  for (std::size_t a = 0; a < n && c.consistent; ++a) {
    for (int t = 0; t <= c.t_exh; ++t)
      for (int g = 1; g <= c.max_code(); ++g)
        if ((c.tau(a, g) > t) != (g < 2 * c.N_rank[a][t])) c.consistent = false;
    for (int k = 1; k <= c.levels(); ++k) {
      int lo = c.tau(a, 2 * k), hi = c.tau_minus(a, 2 * k);
      for (int t = lo; t < hi && t <= c.t_exh; ++t)
        if (c.N_rank[a][t] != k) c.consistent = false;
    }
  }
  return c;
}

// ---------------------------------------------------------------- synchronization strategy

// T*(t) on one atom; phase receives k(t) (1-based project being traversed, 0 in the m = 0 tail)
template <class Real>
LatticePoint sync_point(const OperationalClock<Real>& c, std::size_t a, int t, int* phase = nullptr) {
  std::size_t d = c.dim();
  LatticePoint T(d);
  int k = c.N_rank[a][std::min(t, c.t_exh)];
  if (k == 0) {
    // all envelopes are 0: fill project 1, then 2, ... up to the bounds
    int rem = t - c.tau(a, 1);
    for (std::size_t i = 0; i < d; ++i) {
      T[i] = c.sigma(i, a, 1);
      int add = std::min(rem, c.bounds[i] - T[i]);
      T[i] += add;
      rem -= add;
    }
    if (phase) *phase = 0;
    return T;
  }
  int g = 2 * k;
  std::vector<int> y(d + 1);
  y[0] = c.tau(a, g);
  for (std::size_t i = 0; i < d; ++i) y[i + 1] = y[i] + c.sigma_minus(i, a, g) - c.sigma(i, a, g);
  std::size_t kk = 1;
  while (kk <= d && !(y[kk - 1] <= t && t < y[kk])) ++kk;
  if (kk > d) throw std::logic_error("sync strategy: no phase contains t");
  for (std::size_t i = 0; i < d; ++i) {
    if (i + 1 < kk) T[i] = c.sigma_minus(i, a, g);
    else if (i + 1 == kk) T[i] = c.sigma(i, a, g) + t - y[kk - 1];
    else T[i] = c.sigma(i, a, g);
  }
  if (phase) *phase = static_cast<int>(kk);
  return T;
}

template <class Real>
AllocationStrategy build_sync_strategy(const OperationalClock<Real>& c) {
  std::size_t n = c.N_rank.size();
  std::vector<std::vector<LatticePoint>> P(n);
  for (std::size_t a = 0; a < n; ++a)
    for (int t = 0; t <= c.t_exh; ++t) P[a].push_back(sync_point(c, a, t));
  return AllocationStrategy::from_paths(c.start, P);
}

struct StrategyFlags {
  bool sync = true;         // (a)
  bool sync_minus = true;   // (a) with left limits
  bool per_m_split = true;  // (b)
  bool bracket = true;      // (c)
  bool dual_opt = true;     // (d)
  bool lower_index = true;  // (e)
  bool index_type = true;
  bool minimal_switching = true;
  bool dual_inequality = true;  // max_i lower_i >= N, which every strategy satisfies

  bool five_agree() const {
    return sync == per_m_split && sync == bracket && sync == dual_opt && sync == lower_index;
  }
  bool consistent() const {
    return five_agree() && sync == sync_minus && dual_inequality && (!index_type || sync) &&
           (!(sync && minimal_switching) || index_type);
  }
};

template <class Real>
StrategyFlags classify_strategy(const AllocationStrategy& T, const OperationalClock<Real>& c) {
  StrategyFlags f;
  std::size_t d = c.dim();
  const LatticePoint& s = c.start;
  int hor = T.horizon();
  std::vector<std::vector<LatticePoint>> P = T.paths();
  for (std::size_t a = 0; a < T.atoms(); ++a) {
    if (!T.support[a]) continue;
    const auto& path = P[a];
    auto max_lower = [&](int t) {
      int m = 0;
      for (std::size_t i = 0; i < d; ++i) m = std::max(m, c.lower_at(i, a, path[t][i]));
      return m;
    };
    for (int t = 0; t <= hor; ++t) {
      for (int g = 1; g <= c.max_code(); ++g) {
        int lhs = 0, lhs_m = 0;
        for (std::size_t i = 0; i < d; ++i) {
          lhs += std::min(path[t][i] - s[i], c.sigma(i, a, g) - s[i]);
          lhs_m += std::min(path[t][i] - s[i], c.sigma_minus(i, a, g) - s[i]);
        }
        if (lhs != std::min(t, c.tau(a, g))) f.sync = false;
        if (lhs_m != std::min(t, c.tau_minus(a, g))) f.sync_minus = false;
      }
      int k = c.N_rank[a][std::min(t, c.t_exh)];
      for (std::size_t i = 0; i < d; ++i) {
        int lo = c.sigma(i, a, k == 0 ? 1 : 2 * k);
        if (path[t][i] < lo) f.bracket = false;
        if (k > 0 && path[t][i] > c.sigma_minus(i, a, 2 * k)) f.bracket = false;
      }
      int ml = max_lower(t);
      if (ml != k) f.dual_opt = false;
      if (ml < k) f.dual_inequality = false;
      if (t < hor) {
        int j = T.choice[a][t];
        if (c.lower_at(j, a, path[t][j]) != ml) f.lower_index = false;
        int mi = 0;
        for (std::size_t i = 0; i < d; ++i) mi = std::max(mi, c.index_at(i, a, path[t][i]));
        if (c.index_at(j, a, path[t][j]) != mi) f.index_type = false;
        // repeating j must be feasible for minimal switching to bind
        if (t + 2 <= hor && path[t + 1][j] < c.bounds[j] && c.lower_at(j, a, path[t + 1][j]) == max_lower(t + 1) &&
            T.choice[a][t + 1] != j)
          f.minimal_switching = false;
      }
    }
    for (int g = 1; g <= c.max_code(); ++g) {
      int tg = c.tau(a, g);
      if (tg > hor) continue;
      for (std::size_t i = 0; i < d; ++i)
        if (path[tg][i] != c.sigma(i, a, g)) f.per_m_split = false;
    }
  }
  return f;
}

template <class Real>
bool satisfies_synchronization(const AllocationStrategy& T, const OperationalClock<Real>& c) {
  return classify_strategy(T, c).sync;
}

// sum_t beta^t h_j(T_j(t)+1) over engagements; zero off the support
template <class Real>
RandomVariable<Real> reward_of(const AllocationStrategy& T, const std::vector<RewardsProcess<Real>>& rewards,
                               const Real& beta) {
  RandomVariable<Real> r(T.atoms(), Real(0));
  auto P = T.paths();
  for (std::size_t a = 0; a < T.atoms(); ++a) {
    if (!T.support[a]) continue;
    Real b = 1;
    for (int t = 0; t < T.horizon(); ++t) {
      int j = T.choice[a][t];
      if (j < 0) break;
      r[a] += b * rewards[j].at(P[a][t][j] + 1, a);
      b *= beta;
    }
  }
  return r;
}

// h'_i(t+1) = (1 - beta) lower_i(s_i, t); before s_i the (unused) entries are pinned at the cap
template <class Real>
std::vector<RewardsProcess<Real>> surrogate_rewards(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                                                    const LatticePoint& s) {
  std::vector<RewardsProcess<Real>> out;
  Real one_minus = Real(1) - b.beta;
  std::size_t n = b.space().size();
  for (std::size_t i = 0; i < b.dim(); ++i) {
    RewardsProcess<Real> rp{b.beta, b.K, {}};
    for (int t = 0; t < b.lat.bounds()[i]; ++t) {
      if (t < s[i]) {
        rp.h.emplace_back(n, b.K * one_minus);
      } else {
        auto low = idx[i].lower(s[i], t);
        for (auto& x : low) x *= one_minus;
        rp.h.push_back(low);
      }
    }
    out.push_back(std::move(rp));
  }
  return out;
}

template <class Real>
Bandit<Real> with_rewards(const Bandit<Real>& b, std::vector<RewardsProcess<Real>> rewards) {
  Bandit<Real> c = b;
  c.rewards = std::move(rewards);
  return c;
}

struct LemmaYReport {
  bool pass = true;
  int checked = 0;
  std::optional<std::string> witness;
};

// Y_i(t) = V_i(T_i; lower_i(s_i,T_i)) - lower_i(s_i,T_i) on the windows where project i is not moving
template <class Real>
LemmaYReport check_lemma_y(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                           const OperationalClock<Real>& c, const AllocationStrategy& T) {
  LemmaYReport rep;
  std::size_t d = b.dim(), n = b.space().size();
  const auto& s = c.start;
  std::vector<std::vector<RandomVariable<Real>>> Y(d);
  for (std::size_t i = 0; i < d; ++i)
    for (int th = s[i]; th <= c.bounds[i]; ++th) {
      auto low = idx[i].lower(s[i], th);
      auto v = snell_value_random(b.rewards[i], b.axis[i], th, low);
      for (std::size_t a = 0; a < n; ++a) v[a] -= low[a];
      Y[i].push_back(v);
    }
  auto P = T.paths();
  for (std::size_t a = 0; a < n; ++a) {
    if (!T.support[a]) continue;
    for (int u = 0; u <= c.t_exh; ++u) {
      int k = c.N_rank[a][u];
      if (k == 0) continue;
      int g = 2 * k;
      std::vector<int> y(d + 1);
      y[0] = c.tau(a, g);
      for (std::size_t i = 0; i < d; ++i) y[i + 1] = y[i] + c.sigma_minus(i, a, g) - c.sigma(i, a, g);
      for (std::size_t i = 0; i < d; ++i)
        for (int t = y[0]; t <= std::min(y[d], c.t_exh); ++t) {
          if (t > y[i] && t < y[i + 1]) continue;
          ++rep.checked;
          const auto& v = Y[i][P[a][t][i] - s[i]][a];
          if (v != 0 && !(Num<Real>::le(abs_val<Real>(v), Real(0)))) {
            rep.pass = false;
            if (!rep.witness)
              rep.witness = "Y_" + std::to_string(i + 1) + "(" + std::to_string(t) + ") = " + Num<Real>::str(v) +
                            " at atom " + b.space().atoms[a];
          }
        }
    }
  }
  return rep;
}

}  // namespace dynalloc
