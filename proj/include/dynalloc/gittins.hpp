#pragma once

#include "enumerate.hpp"
#include "stopping.hpp"

namespace dynalloc {

template <class Real>
struct IndexSequence {
  std::vector<RandomVariable<Real>> M;  // t = 0..H

  int horizon() const { return static_cast<int>(M.size()) - 1; }

  // min_{u in [t, theta]} M(u); constant past H
  RandomVariable<Real> lower(int t, int theta) const {
    int H = horizon();
    theta = std::min(theta, H);
    RandomVariable<Real> out = M[std::min(t, H)];
    for (int u = t + 1; u <= theta; ++u)
      for (std::size_t a = 0; a < out.size(); ++a)
        if (M[u][a] < out[a]) out[a] = M[u][a];
    return out;
  }
};

namespace detail {

template <class Real>
Real restrict_value(const RandomVariable<Real>& x, const std::vector<int>& blk) {
  return x[blk.front()];
}

// Newton walk over the affine pieces of V(t;.) on one block: the tangent from the right stays
// below the convex V, so each iterate lands at or below the root and the last piece hits it exactly.
template <class Real>
Real index_on_block(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t, const std::vector<int>& blk) {
  const auto& sp = *filt.space;
  int H = rp.horizon();
  Real pb = block_prob(sp, blk);
  if constexpr (Num<Real>::exact) {
    Real m = 0;
    for (int iter = 0; iter < 10000; ++iter) {
      auto V = snell_table(rp, filt, m, t);
      Real v = restrict_value(V[t], blk);
      if (v == m) return m;
      auto s = first_contact(V, t, m, H);
      Real d = 0;
      for (int a : blk) d += sp.prob[a] * ipow(rp.beta, s[a] - t);
      d /= pb;
      m = (v - d * m) / (Real(1) - d);
    }
    throw std::logic_error("gittins index iteration did not terminate");
  } else {
    auto gap = [&](double m) { return restrict_value(snell_table(rp, filt, m, t)[t], blk) - m; };
    double tiny = 1e-14 * std::max(1.0, rp.reward_bound);
    if (gap(0.0) <= tiny) return 0.0;
    double lo = 0, hi = std::max(rp.reward_bound, 1.0);
    while (gap(hi) > tiny) hi *= 2;
    while (hi - lo > 1e-12) {
      double mid = 0.5 * (lo + hi);
      (gap(mid) > tiny ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
}

}  // namespace detail

template <class Real>
RandomVariable<Real> gittins_index(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t) {
  std::size_t n = filt.space->size();
  RandomVariable<Real> M(n, Real(0));
  if (t >= rp.horizon()) return M;
  for (const auto& blk : filt.at[t].blocks()) {
    Real v = detail::index_on_block(rp, filt, t, blk);
    for (int a : blk) M[a] = v;
  }
  return M;
}

template <class Real>
IndexSequence<Real> index_sequence(const RewardsProcess<Real>& rp, const Filtration<Real>& filt) {
  IndexSequence<Real> seq;
  for (int t = 0; t <= rp.horizon(); ++t) seq.M.push_back(gittins_index(rp, filt, t));
  return seq;
}

// max over tau in S(t+1) of the fair-charge ratio, divided by (1 - beta)
template <class Real>
RandomVariable<Real> gittins_forward_induction(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t,
                                               const EnumerationBudget& budget = {}) {
  const auto& sp = *filt.space;
  int H = rp.horizon();
  std::size_t n = sp.size();
  RandomVariable<Real> out(n, Real(0));
  if (t >= H) return out;
  Real one_minus = Real(1) - rp.beta;
  for (const auto& blk : filt.at[t].blocks()) {
    std::optional<Real> best;
    enumerate_stopping_rules(
        filt, t + 1, H,
        [&](const StoppingRule& r) {
          Real num = 0, den = 0;
          for (int a : blk) {
            int stop = r.time[a] == kNever ? H : std::min(r.time[a], H);
            Real b = ipow(rp.beta, t), rw = 0;
            for (int u = t; u < stop; ++u) {
              rw += b * rp.h[u][a];
              b *= rp.beta;
            }
            Real w = r.time[a] == kNever ? ipow(rp.beta, t) / one_minus
                                         : (ipow(rp.beta, t) - ipow(rp.beta, r.time[a])) / one_minus;
            num += sp.prob[a] * rw;
            den += sp.prob[a] * w;
          }
          Real lam = num / den;
          if (!best || lam > *best) best = lam;
        },
        budget, blk);
    for (int a : blk) out[a] = *best / one_minus;
  }
  return out;
}

template <class Real>
struct RightInverseReport {
  bool equivalence = true;    // sigma(t;m) > theta <=> lower(t,theta) > m
  bool sigma_bracket = true;  // sigma(t;lower) <= theta < sigma(t;lower-)
  bool jump_constancy = true; // lower(t,.) = m on [sigma(t;m), sigma(t;m-)) at every jump
  std::optional<std::string> witness;
  int jumps_certified = 0;

  bool pass() const { return equivalence && sigma_bracket && jump_constancy; }
};

namespace detail {

// a point strictly below m and above every grid/index value below m
template <class Real>
Real just_below(const Real& m, const std::vector<Real>& marks) {
  Real lo = 0;
  for (const auto& v : marks)
    if (v < m && v > lo) lo = v;
  return (lo + m) / 2;
}

}  // namespace detail

// `env` defaults to the computed index sequence; pass a tampered one to see the check fail
template <class Real>
RightInverseReport<Real> check_right_inverse(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t,
                                             const std::vector<Real>& grid,
                                             std::optional<IndexSequence<Real>> env = std::nullopt) {
  RightInverseReport<Real> rep;
  if (!env) env = index_sequence(rp, filt);
  int H = rp.horizon();
  std::size_t n = filt.space->size();
  std::vector<Real> marks = grid;
  for (const auto& x : env->M) marks.insert(marks.end(), x.begin(), x.end());
  auto fail = [&](bool& flag, const std::string& w) {
    flag = false;
    if (!rep.witness) rep.witness = w;
  };
  for (const auto& m : grid) {
    if (!(m > 0)) continue;  // sigma(t;0) = +inf by convention, outside the equivalence
    auto sig = sigma_opt(rp, filt, t, m);
    for (int th = t; th <= H; ++th) {
      auto low = env->lower(t, th);
      for (std::size_t a = 0; a < n; ++a)
        if ((sig[a] > th) != (low[a] > m))
          fail(rep.equivalence, "m=" + Num<Real>::str(m) + " theta=" + std::to_string(th) + " atom " +
                                    filt.space->atoms[a]);
    }
    // jumps of sigma(t;.) at m
    {
      auto sig_minus = sigma_opt(rp, filt, t, detail::just_below(m, marks));
      for (std::size_t a = 0; a < n; ++a) {
        if (sig_minus[a] == sig[a]) continue;
        ++rep.jumps_certified;
        int hi = sig_minus[a] == kNever ? H : sig_minus[a] - 1;
        for (int th = sig[a]; th <= hi; ++th)
          if (env->lower(t, th)[a] != m)
            fail(rep.jump_constancy, "jump at m=" + Num<Real>::str(m) + " atom " + filt.space->atoms[a]);
      }
    }
  }
  std::map<Real, RandomTime> cache;
  auto sigma_at = [&](const Real& m) -> const RandomTime& {
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, sigma_opt(rp, filt, t, m)).first;
    return it->second;
  };
  Real eps = 1;
  for (const auto& v : marks)
    if (v > 0 && v < eps) eps = v;
  eps /= 2;
  for (int th = t; th <= H; ++th) {
    auto low = env->lower(t, th);
    for (std::size_t a = 0; a < n; ++a) {
      const Real& l = low[a];
      // sigma(t;0) is +inf by convention, so at l = 0 the right limit sigma(t;0+) carries the inequality
      if (sigma_at(l > 0 ? l : eps)[a] > th)
        fail(rep.sigma_bracket, "sigma(t;lower) > theta at theta=" + std::to_string(th) + " atom " +
                                    filt.space->atoms[a]);
      if (l > 0 && !(th < sigma_at(detail::just_below(l, marks))[a]))
        fail(rep.sigma_bracket, "theta >= sigma(t;lower-) at theta=" + std::to_string(th) + " atom " +
                                    filt.space->atoms[a]);
    }
  }
  return rep;
}

template <class Real>
struct RestartSides {
  RandomVariable<Real> lhs, rhs;
};

template <class Real>
RestartSides<Real> restart_representation(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t,
                                          const Real& m, const IndexSequence<Real>* idx = nullptr) {
  IndexSequence<Real> own;
  if (!idx) {
    own = index_sequence(rp, filt);
    idx = &own;
  }
  int H = rp.horizon();
  std::size_t n = filt.space->size();
  RestartSides<Real> out{snell_value(rp, filt, t, m), RandomVariable<Real>(n, Real(0))};
  Real one_minus = Real(1) - rp.beta;
  RandomVariable<Real> sum(n, Real(0));
  Real b = 1;  // beta^(theta - t)
  int top = std::max(t, H);
  for (int th = t; th <= top; ++th) {
    auto low = idx->lower(t, th);
    for (std::size_t a = 0; a < n; ++a) {
      Real v = low[a] > m ? low[a] : m;
      // lower is frozen past H, so the tail from `top` on sums to v b / (1 - beta)
      sum[a] += th == top ? v * b : one_minus * v * b;
    }
    b *= rp.beta;
  }
  out.rhs = cond_expect(*filt.space, sum, filt.at[std::min(t, H)]);
  return out;
}

// U(theta) for theta = t..H; entries below t are empty
template <class Real>
std::vector<RandomVariable<Real>> u_martingale(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t,
                                               const IndexSequence<Real>* idx = nullptr) {
  IndexSequence<Real> own;
  if (!idx) {
    own = index_sequence(rp, filt);
    idx = &own;
  }
  int H = rp.horizon();
  std::size_t n = filt.space->size();
  Real one_minus = Real(1) - rp.beta;
  std::vector<RandomVariable<Real>> U(std::max(H, t) + 1);
  RandomVariable<Real> run(n, Real(0));
  for (int th = t; th <= std::max(H, t); ++th) {
    auto low = idx->lower(t, th);
    auto v = snell_value_random(rp, filt, th, low);
    Real bth = ipow(rp.beta, th);
    U[th].resize(n);
    for (std::size_t a = 0; a < n; ++a) U[th][a] = bth * (v[a] - low[a]) + run[a];
    for (std::size_t a = 0; a < n; ++a) run[a] += bth * (rp.at(th + 1, a) - one_minus * low[a]);
  }
  return U;
}

// one-step residuals of a one-parameter process X(theta), theta = from..to
template <class Real>
MartingaleReport<Real> check_martingale(const std::vector<RandomVariable<Real>>& X, const Filtration<Real>& filt,
                                        int from, double tol = Num<Real>::default_tol) {
  MartingaleReport<Real> rep;
  int to = static_cast<int>(X.size()) - 1;
  for (int th = from; th < to; ++th) {
    auto e = cond_expect(*filt.space, X[th + 1], filt.at[std::min(th, filt.horizon())]);
    for (std::size_t a = 0; a < e.size(); ++a) {
      Real r = e[a] - X[th][a];
      Real ar = abs_val<Real>(r);
      if (ar > rep.worst) rep.worst = ar;
      if (!Num<Real>::le(ar, Real(0), tol) && rep.pass) {
        rep.pass = false;
        rep.first_time = th;
        rep.first_atom = a;
        rep.first_residual = r;
      }
    }
  }
  return rep;
}

}  // namespace dynalloc
