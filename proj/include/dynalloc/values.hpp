#pragma once

#include "allocation.hpp"

namespace dynalloc {

// breakpoints of every per-project step function in m, clipped to [lo, hi]
template <class Real>
std::vector<Real> m_breakpoints(const std::vector<IndexSequence<Real>>& idx, const Real& lo, const Real& hi) {
  std::vector<Real> pts{lo, hi};
  for (const auto& seq : idx)
    for (const auto& x : seq.M)
      for (const auto& v : x)
        if (v > lo && v < hi) pts.push_back(v);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// K - int_M^K prod_i dV_i(s_i;m)/dm+ dm, integrated exactly piece by piece
template <class Real>
RandomVariable<Real> product_integral_value(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                                            const LatticePoint& s, const Real& M = Real(0)) {
  std::size_t n = b.space().size();
  if (M < 0) throw InputError("retirement reward must be >= 0");
  if (!(M < b.K)) return RandomVariable<Real>(n, M);
  auto pts = m_breakpoints(idx, M, b.K);
  RandomVariable<Real> out(n, b.K);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    Real mid = (pts[k] + pts[k + 1]) / 2, w = pts[k + 1] - pts[k];
    RandomVariable<Real> prod(n, Real(1));
    for (std::size_t i = 0; i < b.dim(); ++i) {
      auto dv = right_derivative_V(b.rewards[i], b.axis[i], s[i], mid);
      for (std::size_t a = 0; a < n; ++a) prod[a] *= dv[a];
    }
    for (std::size_t a = 0; a < n; ++a) out[a] -= w * prod[a];
  }
  return cond_expect(b.space(), out, b.lat.at(s));
}

// F(s) is generated by the F_i(s_i) and the F_i(H_i) are independent
template <class Real>
bool is_product_lattice(const Bandit<Real>& b) {
  const auto& lat = b.lat;
  for (std::size_t k = 0; k < lat.num_cells(); ++k) {
    LatticePoint p = lat.point(k);
    Partition J = b.axis[0].at[p[0]];
    for (std::size_t i = 1; i < b.dim(); ++i) J = join(J, b.axis[i].at[p[i]]);
    if (!(J == lat.cell(k))) return false;
  }
  // independence of the terminal axis blocks given F(0): every axis also sees the origin cell
  const auto& sp = b.space();
  std::vector<std::vector<std::vector<int>>> blocks;
  for (std::size_t i = 0; i < b.dim(); ++i) blocks.push_back(b.axis[i].at[lat.bounds()[i]].blocks());
  for (const auto& root : lat.at(LatticePoint(b.dim(), 0)).blocks()) {
    Real pr = block_prob(sp, root);
    std::vector<std::size_t> pick(b.dim(), 0);
    while (true) {
      std::vector<char> in(sp.size(), 0);
      for (int a : root) in[a] = 1;
      Real prod = 1;
      for (std::size_t i = 0; i < b.dim(); ++i) {
        std::vector<char> mine(sp.size(), 0);
        for (int a : blocks[i][pick[i]]) mine[a] = 1;
        Real pi = 0;
        for (int a : root)
          if (mine[a]) pi += sp.prob[a];
        for (std::size_t a = 0; a < sp.size(); ++a) in[a] = in[a] && mine[a];
        prod *= pi / pr;
      }
      Real joint = 0;
      for (std::size_t a = 0; a < sp.size(); ++a)
        if (in[a]) joint += sp.prob[a];
      if (!Num<Real>::eq(joint / pr, prod)) return false;
      std::size_t i = 0;
      while (i < b.dim() && ++pick[i] == blocks[i].size()) pick[i++] = 0;
      if (i == b.dim()) break;
    }
  }
  return true;
}

template <class Real>
RandomVariable<Real> whittle_value(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                                   const LatticePoint& s, const Real& M = Real(0)) {
  if (!is_product_lattice(b)) throw InputError("whittle value needs a product lattice of independent projects");
  return product_integral_value(b, idx, s, M);
}

template <class Real>
Field<Real> whittle_field(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const Real& M = Real(0)) {
  if (!is_product_lattice(b)) throw InputError("whittle value needs a product lattice of independent projects");
  Field<Real> f;
  for (std::size_t k = 0; k < b.lat.num_cells(); ++k) f.push_back(product_integral_value(b, idx, b.lat.point(k), M));
  return f;
}

// ---------------------------------------------------------------- Bellman

// value of engaging j at s (a wasted move if project j is exhausted)
template <class Real>
RandomVariable<Real> continuation(const Field<Real>& f, const Bandit<Real>& b, const LatticePoint& s, std::size_t j) {
  const auto& lat = b.lat;
  std::size_t n = b.space().size();
  RandomVariable<Real> c(n);
  if (s[j] >= lat.bounds()[j]) {
    const auto& cur = f[lat.index(s)];
    for (std::size_t a = 0; a < n; ++a) c[a] = b.beta * cur[a];
    return c;
  }
  auto e = cond_expect(b.space(), f[lat.index(step(s, j))], lat.at(s));
  for (std::size_t a = 0; a < n; ++a) c[a] = b.rewards[j].at(s[j] + 1, a) + b.beta * e[a];
  return c;
}

template <class Real>
Field<Real> bellman_operator(const Field<Real>& f, const Bandit<Real>& b, const Real& M) {
  Field<Real> g(f.size());
  std::size_t n = b.space().size();
  for (std::size_t k = 0; k < f.size(); ++k) {
    LatticePoint s = b.lat.point(k);
    g[k].assign(n, M);
    for (std::size_t j = 0; j < b.dim(); ++j) {
      auto c = continuation(f, b, s, j);
      for (std::size_t a = 0; a < n; ++a)
        if (c[a] > g[k][a]) g[k][a] = c[a];
    }
  }
  return g;
}

template <class Real>
struct BellmanReport {
  bool equation = true, q1 = true, q2 = true, q3 = true, q4 = true;
  Real worst = 0;
  std::optional<LatticePoint> where;
  std::optional<std::size_t> atom;
  std::map<std::string, std::string> witness;  // first failure per check

  bool pass() const { return equation && q1 && q2 && q3 && q4; }
};

template <class Real>
BellmanReport<Real> bellman_residual(const Field<Real>& f, const Bandit<Real>& b,
                                     const std::vector<IndexSequence<Real>>& idx, const Real& M,
                                     double tol = Num<Real>::default_tol) {
  BellmanReport<Real> rep;
  auto g = bellman_operator(f, b, M);
  std::size_t n = b.space().size();
  auto note = [&](bool& flag, const char* key, const LatticePoint& s, std::size_t a, const std::string& what) {
    flag = false;
    rep.witness.emplace(key, what + " at " + to_string(s) + " atom " + b.space().atoms[a]);
  };
  for (std::size_t k = 0; k < f.size(); ++k) {
    LatticePoint s = b.lat.point(k);
    std::vector<RandomVariable<Real>> cont;
    for (std::size_t j = 0; j < b.dim(); ++j) cont.push_back(continuation(f, b, s, j));
    for (std::size_t a = 0; a < n; ++a) {
      Real r = abs_val<Real>(g[k][a] - f[k][a]);
      if (r > rep.worst || (!rep.where && r > 0)) {
        rep.worst = r;
        rep.where = s;
        rep.atom = a;
      }
      if (!Num<Real>::le(r, Real(0), tol)) note(rep.equation, "equation", s, a, "Bellman residual " + Num<Real>::str(r));
      if (!Num<Real>::le(M, f[k][a], tol)) note(rep.q1, "q1", s, a, "F < M");
      Real top = 0;
      for (std::size_t j = 0; j < b.dim(); ++j) {
        if (!Num<Real>::le(cont[j][a], f[k][a], tol)) note(rep.q2, "q2", s, a, "F below continuation");
        top = std::max(top, idx[j].M[s[j]][a]);
      }
      if (!(M < top)) {
        if (!Num<Real>::eq(f[k][a], M, tol)) note(rep.q3, "q3", s, a, "F != M with all indices <= M");
      } else {
        for (std::size_t j = 0; j < b.dim(); ++j)
          if (idx[j].M[s[j]][a] == top && !Num<Real>::eq(f[k][a], cont[j][a], tol))
            note(rep.q4, "q4", s, a, "engaging a top-index project is not optimal");
      }
    }
  }
  return rep;
}

// sup-norm distance to `target` after each Bellman iteration started from the constant-K field
template <class Real>
std::vector<Real> bellman_iteration_errors(const Bandit<Real>& b, const Field<Real>& target, const Real& M, int iters) {
  Field<Real> f(target.size(), RandomVariable<Real>(b.space().size(), b.K + M));
  std::vector<Real> err;
  for (int it = 0; it <= iters; ++it) {
    Real e = 0;
    for (std::size_t k = 0; k < f.size(); ++k)
      for (std::size_t a = 0; a < f[k].size(); ++a) e = std::max(e, abs_val<Real>(f[k][a] - target[k][a]));
    err.push_back(e);
    if (it < iters) f = bellman_operator(f, b, M);
  }
  return err;
}

// ---------------------------------------------------------------- decreasing rewards

template <class Real>
struct DecreasingValue {
  RandomVariable<Real> integral, n_form;
  bool agree = true;  // atomwise, before conditioning
};

template <class Real>
void require_decreasing(const Bandit<Real>& b) {
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const auto& h = b.rewards[i].h;
    for (std::size_t t = 1; t < h.size(); ++t)
      for (std::size_t a = 0; a < h[t].size(); ++a)
        if (h[t][a] > h[t - 1][a])
          throw InputError("project " + std::to_string(i + 1) + ": rewards increase at t=" + std::to_string(t + 1) +
                           " on atom '" + b.space().atoms[a] + "'");
  }
}

// int_0^K (1 - beta^tau(m)) dm and (1 - beta) sum_t beta^t N(t), each conditioned on F(s)
template <class Real>
DecreasingValue<Real> decreasing_value(const Bandit<Real>& b, const LatticePoint& s,
                                       const std::vector<IndexSequence<Real>>* idx_in = nullptr) {
  require_decreasing(b);
  std::vector<IndexSequence<Real>> own;
  if (!idx_in) {
    own = compute_indices(b);
    idx_in = &own;
  }
  auto c = operational_clock(b, *idx_in, s);
  std::size_t n = b.space().size();
  DecreasingValue<Real> out{RandomVariable<Real>(n, Real(0)), RandomVariable<Real>(n, Real(0)), true};
  Real one_minus = Real(1) - b.beta;
  for (std::size_t a = 0; a < n; ++a) {
    for (int k = 0; k <= c.levels(); ++k) {
      Real hi = k < c.levels() ? c.values[k + 1] : b.K;
      out.integral[a] += (hi - c.values[k]) * (Real(1) - ipow(b.beta, c.tau(a, 2 * k + 1)));
    }
    Real bt = 1;
    for (int t = 0; t < c.t_exh; ++t) {
      out.n_form[a] += one_minus * bt * c.N(a, t);
      bt *= b.beta;
    }
    if (out.integral[a] != out.n_form[a] && !Num<Real>::eq(out.integral[a], out.n_form[a])) out.agree = false;
  }
  out.integral = cond_expect(b.space(), out.integral, b.lat.at(s));
  out.n_form = cond_expect(b.space(), out.n_form, b.lat.at(s));
  return out;
}

template <class Real>
Bandit<Real> surrogate_bandit(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const LatticePoint& s) {
  return with_rewards(b, surrogate_rewards(b, idx, s));
}

template <class Real>
struct GeneralValue {
  RandomVariable<Real> product_integral, decreasing, decreasing_n_form, replay, replay_surrogate;
  AllocationStrategy sync;
  bool agree = true;
};

template <class Real>
bool rv_eq(const RandomVariable<Real>& x, const RandomVariable<Real>& y, double tol = Num<Real>::default_tol) {
  if (x.size() != y.size()) return false;
  for (std::size_t a = 0; a < x.size(); ++a)
    if (!Num<Real>::eq(x[a], y[a], tol)) return false;
  return true;
}

template <class Real>
GeneralValue<Real> general_value(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                                 const LatticePoint& s, double tol = Num<Real>::default_tol) {
  GeneralValue<Real> g;
  g.product_integral = product_integral_value(b, idx, s);
  auto sb = surrogate_bandit(b, idx, s);
  auto dv = decreasing_value(sb, s);
  g.decreasing = dv.integral;
  g.decreasing_n_form = dv.n_form;
  auto clock = operational_clock(b, idx, s);
  g.sync = build_sync_strategy(clock);
  g.replay = cond_expect(b.space(), reward_of(g.sync, b.rewards, b.beta), b.lat.at(s));
  g.replay_surrogate = cond_expect(b.space(), reward_of(g.sync, sb.rewards, b.beta), b.lat.at(s));
  g.agree = dv.agree && rv_eq(g.product_integral, g.decreasing, tol) && rv_eq(g.decreasing, g.decreasing_n_form, tol) &&
            rv_eq(g.decreasing, g.replay, tol) && rv_eq(g.replay, g.replay_surrogate, tol);
  return g;
}

// (1 - beta) E[sum_t beta^t max_i lower_i(s_i, T_i(t)) | F(s)]
template <class Real>
RandomVariable<Real> envelope_value(const AllocationStrategy& T, const Bandit<Real>& b,
                                    const std::vector<IndexSequence<Real>>& idx) {
  std::size_t n = b.space().size();
  RandomVariable<Real> x(n, Real(0));
  auto P = T.paths();
  Real one_minus = Real(1) - b.beta;
  std::vector<std::vector<RandomVariable<Real>>> low(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (int th = 0; th <= b.lat.bounds()[i]; ++th)
      low[i].push_back(th < T.start[i] ? RandomVariable<Real>(n, Real(0)) : idx[i].lower(T.start[i], th));
  for (std::size_t a = 0; a < n; ++a) {
    Real bt = 1;
    for (int t = 0; t < T.horizon(); ++t) {
      Real m = 0;
      for (std::size_t i = 0; i < b.dim(); ++i) m = std::max(m, low[i][P[a][t][i]][a]);
      x[a] += one_minus * bt * m;
      bt *= b.beta;
    }
  }
  return cond_expect(b.space(), x, b.lat.at(T.start));
}

// ---------------------------------------------------------------- processes along a strategy

template <class Real>
Partition stopped_at(const AllocationStrategy& T, const std::vector<std::vector<LatticePoint>>& P,
                     const FiltrationLattice<Real>& lat, int t) {
  StoppingPoint nu(T.atoms(), T.start);
  for (std::size_t a = 0; a < T.atoms(); ++a)
    if (T.support[a]) nu[a] = P[a][t];
  return stopped_partition(lat, nu);
}

template <class Real>
struct ProcessReport {
  std::vector<RandomVariable<Real>> X;
  bool supermartingale = true;
  bool martingale = true;
  Real worst = 0;  // largest |E[X(t+1)|F(T(t))] - X(t)|
  std::optional<int> first_time;
};

template <class Real>
void residuals_along(ProcessReport<Real>& rep, const AllocationStrategy& T, const FiltrationLattice<Real>& lat,
                     double tol) {
  auto P = T.paths();
  const auto& sp = lat.space();
  for (int t = 0; t + 1 < static_cast<int>(rep.X.size()); ++t) {
    auto e = cond_expect(sp, rep.X[t + 1], stopped_at(T, P, lat, t));
    for (std::size_t a = 0; a < e.size(); ++a) {
      if (!T.support[a]) continue;
      Real r = e[a] - rep.X[t][a];
      rep.worst = std::max(rep.worst, abs_val<Real>(r));
      if (!Num<Real>::le(abs_val<Real>(r), Real(0), tol)) {
        rep.martingale = false;
        if (!rep.first_time) rep.first_time = t;
      }
      if (!Num<Real>::le(r, Real(0), tol)) rep.supermartingale = false;
    }
  }
}

// Q(t) = beta^t F(T(t)) + sum_{u<t} beta^u h_j(T_j(u)+1)
template <class Real>
ProcessReport<Real> q_process(const AllocationStrategy& T, const Field<Real>& f, const Bandit<Real>& b,
                              double tol = Num<Real>::default_tol) {
  ProcessReport<Real> rep;
  auto P = T.paths();
  std::size_t n = b.space().size();
  RandomVariable<Real> run(n, Real(0));
  Real bt = 1;
  for (int t = 0; t <= T.horizon(); ++t) {
    RandomVariable<Real> q(n);
    for (std::size_t a = 0; a < n; ++a) q[a] = bt * f[b.lat.index(P[a][t])][a] + run[a];
    rep.X.push_back(q);
    if (t < T.horizon())
      for (std::size_t a = 0; a < n; ++a) {
        int j = T.choice[a][t];
        if (T.support[a] && j >= 0) run[a] += bt * b.rewards[j].at(P[a][t][j] + 1, a);
      }
    bt *= b.beta;
  }
  residuals_along(rep, T, b.lat, tol);
  return rep;
}

template <class Real>
struct KLWReport {
  std::vector<RandomVariable<Real>> K, Lambda, W;
  ProcessReport<Real> k_mart;
  bool w_telescopes = true;  // W(t) = beta^t Y_j(t) for the project j engaged at t-1
  bool w_terminal_zero = true;
  bool terminal_equal = true;
  bool rewards_agree = true;  // E[R(T*)|F(s)] = E[R'(T*)|F(s)]
  LemmaYReport lemma;

  bool pass() const {
    return k_mart.martingale && w_telescopes && w_terminal_zero && terminal_equal && rewards_agree && lemma.pass;
  }
};

template <class Real>
KLWReport<Real> klw_processes(const AllocationStrategy& T, const Bandit<Real>& b,
                              const std::vector<IndexSequence<Real>>& idx, const OperationalClock<Real>& c,
                              double tol = Num<Real>::default_tol) {
  KLWReport<Real> rep;
  const auto& s = T.start;
  std::size_t n = b.space().size(), d = b.dim();
  auto P = T.paths();
  Real one_minus = Real(1) - b.beta;
  std::vector<std::vector<RandomVariable<Real>>> U(d), low(d), Y(d);
  for (std::size_t i = 0; i < d; ++i) {
    U[i] = u_martingale(b.rewards[i], b.axis[i], s[i], &idx[i]);
    low[i].resize(b.lat.bounds()[i] + 1);
    Y[i].resize(b.lat.bounds()[i] + 1);
    for (int th = s[i]; th <= b.lat.bounds()[i]; ++th) {
      low[i][th] = idx[i].lower(s[i], th);
      Y[i][th] = snell_value_random(b.rewards[i], b.axis[i], th, low[i][th]);
      for (std::size_t a = 0; a < n; ++a) Y[i][th][a] -= low[i][th][a];
    }
  }
  RandomVariable<Real> k(n, Real(0)), l(n, Real(0));
  for (int t = 0; t <= T.horizon(); ++t) {
    rep.K.push_back(k);
    rep.Lambda.push_back(l);
    RandomVariable<Real> w(n);
    for (std::size_t a = 0; a < n; ++a) {
      w[a] = k[a] - l[a];
      Real expect = 0;
      if (t > 0 && T.support[a]) {
        int j = T.choice[a][t - 1];
        expect = ipow(b.beta, t) * Y[j][P[a][t][j]][a];
      }
      if (!Num<Real>::eq(w[a], expect, tol)) rep.w_telescopes = false;
    }
    rep.W.push_back(w);
    if (t == T.horizon()) break;
    Real bt = ipow(b.beta, t);
    for (std::size_t a = 0; a < n; ++a) {
      if (!T.support[a]) continue;
      int j = T.choice[a][t];
      int r = P[a][t][j];
      k[a] += ipow(b.beta, t - r) * (U[j][r + 1][a] - U[j][r][a]);
      l[a] += bt * (b.rewards[j].at(r + 1, a) - one_minus * low[j][r][a]);
    }
  }
  rep.k_mart.X = rep.K;
  residuals_along(rep.k_mart, T, b.lat, tol);
  for (std::size_t a = 0; a < n; ++a) {
    if (!Num<Real>::eq(rep.W.back()[a], Real(0), tol)) rep.w_terminal_zero = false;
    if (!Num<Real>::eq(rep.Lambda.back()[a], rep.K.back()[a], tol)) rep.terminal_equal = false;
  }
  auto R = cond_expect(b.space(), reward_of(T, b.rewards, b.beta), b.lat.at(s));
  auto Rp = cond_expect(b.space(), reward_of(T, surrogate_rewards(b, idx, s), b.beta), b.lat.at(s));
  rep.rewards_agree = rv_eq(R, Rp, tol);
  rep.lemma = check_lemma_y(b, idx, c, T);
  return rep;
}

}  // namespace dynalloc
