#pragma once

#include "prob_core.hpp"

namespace dynalloc {

template <class Real>
struct RewardsProcess {
  Real beta = 0;
  Real reward_bound = 0;  // K
  std::vector<RandomVariable<Real>> h;  // h[t-1] = h(t), t = 1..H

  int horizon() const { return static_cast<int>(h.size()); }
  // h(t), zero past the horizon
  Real at(int t, std::size_t atom) const { return t >= 1 && t <= horizon() ? h[t - 1][atom] : Real(0); }
};

using RandomTime = std::vector<int>;  // kNever for +inf

template <class Real>
void validate_rewards(const RewardsProcess<Real>& rp, const Filtration<Real>& filt,
                      double tol = Num<Real>::default_tol) {
  if (!(rp.beta > 0 && rp.beta < 1)) throw InputError("rewards: beta must lie in (0,1)");
  if (rp.horizon() != filt.horizon())
    throw InputError("rewards: horizon " + std::to_string(rp.horizon()) + " does not match filtration horizon " +
                     std::to_string(filt.horizon()));
  Real cap = rp.reward_bound * (Real(1) - rp.beta);
  for (int t = 1; t <= rp.horizon(); ++t) {
    const auto& x = rp.h[t - 1];
    if (x.size() != filt.space->size()) throw InputError("rewards: h(" + std::to_string(t) + ") has wrong size");
    if (!is_measurable(x, filt.at[t - 1], tol))
      throw InputError("rewards: h(" + std::to_string(t) + ") is not F(" + std::to_string(t - 1) + ")-measurable");
    for (std::size_t a = 0; a < x.size(); ++a)
      if (x[a] < 0 || !Num<Real>::le(x[a], cap, tol))
        throw InputError("rewards: h(" + std::to_string(t) + ") at atom '" + filt.space->atoms[a] +
                         "' outside [0, K(1-beta)] = [0, " + Num<Real>::str(cap) + "]");
  }
}

// V(theta;m) for theta = from..H; entries below `from` are left empty.
template <class Real>
std::vector<RandomVariable<Real>> snell_table(const RewardsProcess<Real>& rp, const Filtration<Real>& filt,
                                              const Real& m, int from = 0) {
  if (m < 0) throw InputError("snell: exit reward m must be >= 0");
  int H = rp.horizon();
  std::size_t n = filt.space->size();
  std::vector<RandomVariable<Real>> V(H + 1);
  V[H].assign(n, m);
  for (int th = H - 1; th >= std::max(from, 0); --th) {
    auto e = cond_expect(*filt.space, V[th + 1], filt.at[th]);
    V[th].resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      Real c = rp.h[th][a] + rp.beta * e[a];
      V[th][a] = c > m ? c : m;
    }
  }
  return V;
}

template <class Real>
RandomVariable<Real> snell_value(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t, const Real& m) {
  if (t >= rp.horizon()) return RandomVariable<Real>(filt.space->size(), m);
  return snell_table(rp, filt, m, t)[t];
}

// least theta >= t with V(theta;m) = m, ignoring the m = 0 convention
template <class Real>
RandomTime first_contact(const std::vector<RandomVariable<Real>>& V, int t, const Real& m, int H,
                         double tol = Num<Real>::default_tol) {
  std::size_t n = V[H].size();
  RandomTime s(n, H);
  for (std::size_t a = 0; a < n; ++a)
    for (int th = std::min(t, H); th <= H; ++th)
      if (Num<Real>::eq(V[th][a], m, tol)) {
        s[a] = th;
        break;
      }
  return s;
}

template <class Real>
RandomTime sigma_opt(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t, const Real& m) {
  if (m < 0) throw InputError("sigma: exit reward m must be >= 0");
  if (m == 0) return RandomTime(filt.space->size(), kNever);
  auto V = snell_table(rp, filt, m, std::min(t, rp.horizon()));
  auto s = first_contact(V, t, m, rp.horizon());
  for (auto& x : s) x = std::max(x, t);
  return s;
}

template <class Real>
RandomVariable<Real> discount_at(const Real& beta, const RandomTime& s, int offset) {
  RandomVariable<Real> x(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) x[a] = s[a] == kNever ? Real(0) : ipow(beta, s[a] - offset);
  return x;
}

template <class Real>
RandomVariable<Real> right_derivative_V(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t,
                                        const Real& m) {
  auto s = sigma_opt(rp, filt, t, m);
  return cond_expect(*filt.space, discount_at(rp.beta, s, t), filt.at[std::min(t, rp.horizon())]);
}

// Y(tau;m) = sum_{u<tau} beta^u h(u+1) + m beta^tau
template <class Real>
RandomVariable<Real> stopped_reward(const RewardsProcess<Real>& rp, const RandomTime& tau, const Real& m) {
  std::size_t n = tau.size();
  RandomVariable<Real> y(n, Real(0));
  for (std::size_t a = 0; a < n; ++a) {
    int stop = tau[a] == kNever ? rp.horizon() : std::min(tau[a], rp.horizon());
    Real b = 1;
    for (int u = 0; u < stop; ++u) {
      y[a] += b * rp.h[u][a];
      b *= rp.beta;
    }
    if (tau[a] != kNever) y[a] += m * ipow(rp.beta, tau[a]);
  }
  return y;
}

template <class Real>
struct StoppedValueTable {
  Real m;
  std::vector<RandomVariable<Real>> V;  // theta = 0..H
  std::vector<RandomVariable<Real>> Z;
  std::vector<RandomTime> sigma;        // sigma(t;m), t = 0..H
};

template <class Real>
StoppedValueTable<Real> stopped_value_table(const RewardsProcess<Real>& rp, const Filtration<Real>& filt,
                                            const Real& m) {
  StoppedValueTable<Real> T{m, snell_table(rp, filt, m), {}, {}};
  int H = rp.horizon();
  std::size_t n = filt.space->size();
  RandomVariable<Real> run(n, Real(0));
  Real b = 1;
  for (int th = 0; th <= H; ++th) {
    RandomVariable<Real> z(n);
    for (std::size_t a = 0; a < n; ++a) z[a] = run[a] + b * T.V[th][a];
    T.Z.push_back(z);
    if (th < H)
      for (std::size_t a = 0; a < n; ++a) run[a] += b * rp.h[th][a];
    b *= rp.beta;
  }
  for (int t = 0; t <= H; ++t) {
    if (m == 0) {
      T.sigma.emplace_back(n, kNever);
    } else {
      T.sigma.push_back(first_contact(T.V, t, m, H));
    }
  }
  return T;
}

template <class Real>
struct MartingaleReport {
  bool pass = true;
  Real worst = 0;
  std::optional<int> first_time;  // theta of the first failing step theta -> theta+1
  std::optional<std::size_t> first_atom;
  Real first_residual = 0;
};

// Z(theta ^ sigma(t;m)) one-step residuals for theta = t..H-1; past H the stopped process is constant
template <class Real>
MartingaleReport<Real> check_stopped_martingale(const StoppedValueTable<Real>& T, const Filtration<Real>& filt,
                                                int t, double tol = Num<Real>::default_tol) {
  MartingaleReport<Real> rep;
  int H = static_cast<int>(T.V.size()) - 1;
  const auto& sig = T.sigma[std::min(t, H)];
  std::size_t n = sig.size();
  auto X = [&](int th) {
    RandomVariable<Real> x(n);
    for (std::size_t a = 0; a < n; ++a) {
      int u = sig[a] == kNever ? th : std::min(th, sig[a]);
      x[a] = T.Z[std::min(u, H)][a];
    }
    return x;
  };
  for (int th = t; th < H; ++th) {
    auto cur = X(th);
    auto e = cond_expect(*filt.space, X(th + 1), filt.at[th]);
    for (std::size_t a = 0; a < n; ++a) {
      Real r = abs_val<Real>(e[a] - cur[a]);
      if (r > rep.worst) rep.worst = r;
      if (!Num<Real>::le(r, Real(0), tol) && rep.pass) {
        rep.pass = false;
        rep.first_time = th;
        rep.first_atom = a;
        rep.first_residual = e[a] - cur[a];
      }
    }
  }
  return rep;
}

template <class Real>
MartingaleReport<Real> check_stopped_martingale(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int t,
                                                const Real& m, double tol = Num<Real>::default_tol) {
  return check_stopped_martingale(stopped_value_table(rp, filt, m), filt, t, tol);
}

// V(theta; X) for an F(theta)-measurable exit reward X
template <class Real>
RandomVariable<Real> snell_value_random(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, int theta,
                                        const RandomVariable<Real>& X) {
  std::size_t n = X.size();
  RandomVariable<Real> out(n);
  std::vector<char> done(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    if (done[a]) continue;
    auto v = snell_value(rp, filt, theta, X[a]);
    for (std::size_t b = a; b < n; ++b)
      if (!done[b] && X[b] == X[a]) {
        out[b] = v[b];
        done[b] = 1;
      }
  }
  return out;
}

}  // namespace dynalloc
