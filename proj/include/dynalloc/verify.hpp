#pragma once

#include "oracle.hpp"
#include "scenario.hpp"
#include "values.hpp"

namespace dynalloc {

struct Check {
  std::string name;
  bool pass = true;
  bool skipped = false;  // budget exceeded
  std::string detail;
};

struct Verdict {
  std::vector<Check> checks;

  Check& add(std::string name, bool pass, std::string detail = {}) {
    checks.push_back({std::move(name), pass, false, std::move(detail)});
    return checks.back();
  }
  void skip(std::string name, std::string why) { checks.push_back({std::move(name), true, true, std::move(why)}); }
  void absorb(const Verdict& v, const std::string& prefix = {}) {
    for (auto c : v.checks) {
      c.name = prefix + c.name;
      checks.push_back(std::move(c));
    }
  }
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  bool any_skipped() const {
    for (const auto& c : checks)
      if (c.skipped) return true;
    return false;
  }
  json to_json() const {
    json a = json::array();
    for (const auto& c : checks) {
      json o{{"name", c.name}, {"pass", c.pass}};
      if (c.skipped) o["skipped"] = true;
      if (!c.detail.empty()) o["detail"] = c.detail;
      a.push_back(o);
    }
    return json{{"pass", pass()}, {"checks", a}};
  }
};

// counts agreeing cases and keeps the first disagreement
struct Tally {
  long total = 0, bad = 0;
  std::string first;

  void operator()(bool ok, const std::function<std::string()>& why) {
    ++total;
    if (!ok && bad++ == 0) first = why();
  }
  bool pass() const { return bad == 0; }
  std::string detail() const {
    return std::to_string(total - bad) + "/" + std::to_string(total) + (bad ? "; first failure: " + first : "");
  }
  void report(Verdict& v, const std::string& name) const { v.add(name, pass(), detail()); }
};

template <class Real>
std::string rv_str(const RandomVariable<Real>& x) {
  std::string s = "[";
  for (std::size_t a = 0; a < x.size(); ++a) s += (a ? ", " : "") + Num<Real>::str(x[a]);
  return s + "]";
}

// index values of a single project plus midpoints, 0 and K + 1
template <class Real>
std::vector<Real> m_grid(const IndexSequence<Real>& seq, const Real& K) {
  std::vector<Real> v{Real(0), K + 1};
  for (const auto& x : seq.M) v.insert(v.end(), x.begin(), x.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::size_t n = v.size();
  for (std::size_t k = 0; k + 1 < n; ++k) v.push_back((v[k] + v[k + 1]) / 2);
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------- single project

template <class Real>
Verdict verify_stopping(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, const EnumerationBudget& budget,
                        double tol = Num<Real>::default_tol) {
  Verdict v;
  int H = rp.horizon();
  auto seq = index_sequence(rp, filt);
  auto grid = m_grid(seq, rp.reward_bound);
  Tally oracle, mart, secant;
  bool skipped = false;
  for (int t = 0; t <= H; ++t)
    for (const auto& m : grid) {
      auto V = snell_value(rp, filt, t, m);
      if (!skipped) {
        try {
          auto O = oracle_V(rp, filt, t, m, budget);
          oracle(rv_eq(V, O, tol), [&] { return "t=" + std::to_string(t) + " m=" + Num<Real>::str(m) + " snell " +
                                                 rv_str(V) + " oracle " + rv_str(O); });
        } catch (const BudgetExceeded& e) {
          skipped = true;
          v.skip("snell = oracle", e.what());
        }
      }
      auto mr = check_stopped_martingale(rp, filt, t, m, tol);
      mart(mr.pass, [&] { return "t=" + std::to_string(t) + " m=" + Num<Real>::str(m); });
      if (m > 0) {
        // secant over a step shorter than the gap to the next breakpoint
        Real next = m + 1;
        for (const auto& g : grid)
          if (g > m && g < next) next = g;
        Real h = (next - m) / 2;
        auto Vh = snell_value(rp, filt, t, Real(m + h));
        auto D = right_derivative_V(rp, filt, t, m);
        RandomVariable<Real> sl(V.size());
        for (std::size_t a = 0; a < V.size(); ++a) sl[a] = (Vh[a] - V[a]) / h;
        secant(rv_eq(sl, D, Num<Real>::exact ? 0.0 : 1e-6),
               [&] { return "t=" + std::to_string(t) + " m=" + Num<Real>::str(m) + " slope " + rv_str(sl) + " E[beta^(sigma-t)] " + rv_str(D); });
      }
    }
  if (!skipped) oracle.report(v, "snell = oracle");
  mart.report(v, "stopped Snell process is a martingale");
  secant.report(v, "secant slope = E[beta^(sigma-t)|F(t)]");
  return v;
}

template <class Real>
Verdict verify_gittins(const RewardsProcess<Real>& rp, const Filtration<Real>& filt, const EnumerationBudget& budget,
                       double tol = Num<Real>::default_tol) {
  Verdict v;
  int H = rp.horizon();
  auto seq = index_sequence(rp, filt);
  auto grid = m_grid(seq, rp.reward_bound);
  Tally fwd, rinv, restart, umart;
  bool skipped = false;
  for (int t = 0; t <= H; ++t) {
    if (!skipped) {
      try {
        auto F = gittins_forward_induction(rp, filt, t, budget);
        fwd(rv_eq(F, seq.M[t], tol), [&] { return "t=" + std::to_string(t) + " index " + rv_str(seq.M[t]) + " forward " + rv_str(F); });
      } catch (const BudgetExceeded& e) {
        skipped = true;
        v.skip("index = forward induction", e.what());
      }
    }
    auto ri = check_right_inverse<Real>(rp, filt, t, grid, seq);
    rinv(ri.pass(), [&] { return "t=" + std::to_string(t) + ": " + ri.witness.value_or(""); });
    for (const auto& m : grid) {
      auto rs = restart_representation(rp, filt, t, m, &seq);
      restart(rv_eq(rs.lhs, rs.rhs, tol), [&] { return "t=" + std::to_string(t) + " m=" + Num<Real>::str(m) + " V " + rv_str(rs.lhs) + " restart " + rv_str(rs.rhs); });
    }
    auto U = u_martingale(rp, filt, t, &seq);
    auto mr = check_martingale(U, filt, t, tol);
    umart(mr.pass, [&] { return "t=" + std::to_string(t) + " residual " + Num<Real>::str(mr.first_residual); });
  }
  if (!skipped) fwd.report(v, "index = forward induction");
  rinv.report(v, "lower envelope is the right inverse of sigma");
  restart.report(v, "restart representation");
  umart.report(v, "U is a martingale");
  return v;
}

// ---------------------------------------------------------------- lattice

template <class Real>
Verdict verify_f4(const Bandit<Real>& b, double tol = Num<Real>::default_tol, double sp_cap = 400) {
  Verdict v;
  const auto& lat = b.lat;
  auto f4 = check_F4(lat, tol);
  v.add("(F4)", f4.pass, f4.witness.value_or(""));
  if (!f4.pass) return v;
  // F_i-martingales stay martingales in the larger F^i
  Tally enl;
  auto idx = compute_indices(b);
  for (std::size_t i = 0; i < b.dim(); ++i) {
    Filtration<Real> big(lat.space_ptr(), derive_axis_filtrations(lat, i).large);
    for (int t = 0; t <= lat.bounds()[i]; ++t) {
      auto U = u_martingale(b.rewards[i], b.axis[i], t, &idx[i]);
      auto r = check_martingale(U, big, t, tol);
      enl(r.pass, [&] { return "U_" + std::to_string(i + 1) + " from " + std::to_string(t); });
    }
    RandomVariable<Real> xi(b.space().size(), Real(0));
    for (int t = 1; t <= lat.bounds()[i]; ++t)
      for (std::size_t a = 0; a < xi.size(); ++a) xi[a] += Real(t) * b.rewards[i].at(t, a);
    std::vector<RandomVariable<Real>> X;
    for (int t = 0; t <= lat.bounds()[i]; ++t) X.push_back(cond_expect(b.space(), xi, b.axis[i].at[t]));
    auto r = check_martingale(X, big, 0, tol);
    enl(r.pass, [&] { return "E[xi|F_" + std::to_string(i + 1) + "]"; });
  }
  enl.report(v, "enlargement: F_i-martingales are F^i-martingales");
  // optional sampling for a supermartingale field x(s) = E[xi|F(s)] - |s| / 8
  bool small = true;
  for (int h : lat.bounds()) small = small && h <= 3;
  if (!small) return v;
  RandomVariable<Real> xi(b.space().size(), Real(0));
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (int t = 1; t <= lat.bounds()[i]; ++t)
      for (std::size_t a = 0; a < xi.size(); ++a) xi[a] += b.rewards[i].at(t, a) * Real(static_cast<int>(i + 1));
  Field<Real> x;
  for (std::size_t k = 0; k < lat.num_cells(); ++k) {
    auto e = cond_expect(b.space(), xi, lat.cell(k));
    int sum = 0;
    for (int c : lat.point(k)) sum += c;
    for (auto& y : e) y -= from_ratio<Real>(sum, 8);
    x.push_back(e);
  }
  auto fr = check_field_supermartingale(x, lat, tol);
  v.add("fixture field is a supermartingale in all three forms", fr.supermartingale() && fr.super_b && fr.super_c,
        fr.witness.value_or(""));
  std::vector<StoppingPoint> pts;
  try {
    enumerate_stopping_points(lat, [&](const StoppingPoint& p) { pts.push_back(p); }, sp_cap);
  } catch (const BudgetExceeded& e) {
    v.skip("optional sampling", e.what());
    return v;
  }
  Tally os;
  for (const auto& s : pts)
    for (const auto& t : pts) {
      bool le = true;
      for (std::size_t a = 0; a < s.size(); ++a) le = le && leq(s[a], t[a]);
      if (!le) continue;
      auto r = check_optional_sampling(x, s, t, lat, tol);
      os(r.pass, [&] { return r.witness.value_or(""); });
    }
  os.report(v, "optional sampling over " + std::to_string(pts.size()) + " stopping points");
  return v;
}

// ---------------------------------------------------------------- strategies

template <class Real>
bool on_support_eq(const RandomVariable<Real>& x, const RandomVariable<Real>& y, const std::vector<char>& sup,
                   double tol) {
  for (std::size_t a = 0; a < x.size(); ++a)
    if (sup[a] && !Num<Real>::eq(x[a], y[a], tol)) return false;
  return true;
}

template <class Real>
Verdict verify_index_properties(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const LatticePoint& s,
                                const EnumerationBudget& budget, double tol = Num<Real>::default_tol) {
  Verdict v;
  auto c = operational_clock(b, idx, s, tol);
  v.add("clock: N and tau are right inverses", c.consistent);
  auto T = build_sync_strategy(c);
  auto rep = validate_strategy(T, b.lat);
  v.add("T* is an allocation strategy", rep.pass, rep.message);
  auto f = classify_strategy(T, c);
  v.add("T* satisfies the synchronization identity", f.sync && f.sync_minus);
  v.add("T* flags are consistent", f.consistent());
  auto ly = check_lemma_y(b, idx, c, T);
  v.add("Y_i vanishes where project i waits", ly.pass, ly.witness.value_or(std::to_string(ly.checked) + " points"));
  v.add("T* is of index type", true, f.index_type ? "yes" : "no (reported only)");
  Tally meta, dual, idx_sync, ms_idx;
  long count = 0, n_sync = 0, n_index = 0;
  double census = 0;
  try {
    for (const auto& blk : root_blocks(b.lat, s)) {
      census += strategy_count(b.lat, s, blk, false);
      enumerate_strategies(
          b.lat, s,
          [&](const AllocationStrategy& S) {
            ++count;
            auto g = classify_strategy(S, c);
            n_sync += g.sync;
            n_index += g.index_type;
            auto where = [&] {
              std::string w = "strategy #" + std::to_string(count) + " choices";
              for (int j : S.choice[blk.front()]) w += " " + std::to_string(j + 1);
              return w;
            };
            meta(g.five_agree() && g.sync == g.sync_minus, where);
            dual(g.dual_inequality, where);
            idx_sync(!g.index_type || g.sync, where);
            ms_idx(!(g.sync && g.minimal_switching) || g.index_type, where);
          },
          budget, blk);
    }
  } catch (const BudgetExceeded& e) {
    v.skip("strategy enumeration", e.what());
    return v;
  }
  v.add("strategy census", static_cast<double>(count) == census,
        std::to_string(count) + " enumerated, " + std::to_string(static_cast<long>(census)) + " expected; " +
            std::to_string(n_sync) + " synchronized, " + std::to_string(n_index) + " index type");
  meta.report(v, "five equivalent conditions agree");
  dual.report(v, "max lower envelope >= N");
  idx_sync.report(v, "index type => synchronized");
  ms_idx.report(v, "synchronized and minimal switching => index type");
  return v;
}

template <class Real>
Verdict verify_decreasing(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const LatticePoint& s,
                          const EnumerationBudget& budget, double tol = Num<Real>::default_tol) {
  Verdict v;
  auto sb = surrogate_bandit(b, idx, s);
  auto sidx = compute_indices(sb);
  auto dv = decreasing_value(sb, s, &sidx);
  v.add("integral form = N form", dv.agree && rv_eq(dv.integral, dv.n_form, tol),
        rv_str(dv.integral) + " vs " + rv_str(dv.n_form));
  const auto& phi = dv.integral;
  auto c = operational_clock(sb, sidx, s, tol);
  auto T = build_sync_strategy(c);
  auto r = cond_expect(sb.space(), reward_of(T, sb.rewards, sb.beta), sb.lat.at(s));
  v.add("T* attains the decreasing value", rv_eq(r, phi, tol), rv_str(r) + " vs " + rv_str(phi));
  Tally iff;
  long attained = 0, strict = 0;
  try {
    for (const auto& blk : root_blocks(sb.lat, s))
      enumerate_strategies(
          sb.lat, s,
          [&](const AllocationStrategy& S) {
            auto g = classify_strategy(S, c);
            auto e = cond_expect(sb.space(), reward_of(S, sb.rewards, sb.beta), sb.lat.at(s));
            bool hit = on_support_eq(e, phi, S.support, tol);
            attained += hit;
            strict += !hit;
            iff(hit == g.sync, [&] {
              return std::string(g.sync ? "synchronized strategy misses" : "unsynchronized strategy attains") +
                     " the value on block of atom " + sb.space().atoms[blk.front()];
            });
          },
          budget, blk);
    iff.report(v, "value attained iff synchronized");
    v.add("attainment census", true, std::to_string(attained) + " attain, " + std::to_string(strict) + " fall short");
    auto o = oracle_Phi(sb, s, std::optional<Real>{}, budget);
    v.add("decreasing value = oracle", rv_eq(o.value, phi, tol), rv_str(o.value) + " vs " + rv_str(phi));
  } catch (const BudgetExceeded& e) {
    v.skip("strategy enumeration", e.what());
  }
  return v;
}

template <class Real>
Verdict verify_main(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const LatticePoint& s,
                    const EnumerationBudget& budget, double tol = Num<Real>::default_tol) {
  Verdict v;
  auto g = general_value(b, idx, s, tol);
  v.add("three value routes agree", g.agree,
        "product integral " + rv_str(g.product_integral) + ", decreasing " + rv_str(g.decreasing) + ", N form " +
            rv_str(g.decreasing_n_form) + ", T* replay " + rv_str(g.replay));
  auto c = operational_clock(b, idx, s, tol);
  auto k = klw_processes(g.sync, b, idx, c, tol);
  v.add("K is an F(T*)-martingale", k.k_mart.martingale, "worst residual " + Num<Real>::str(k.k_mart.worst));
  v.add("W telescopes to beta^t Y", k.w_telescopes);
  v.add("terminal W = 0", k.w_terminal_zero);
  v.add("terminal Lambda = terminal K", k.terminal_equal);
  v.add("E[R(T*)|F(s)] = E[R'(T*)|F(s)]", k.rewards_agree);
  if (is_product_lattice(b)) {
    auto ev = envelope_value(g.sync, b, idx);
    v.add("value = discounted max lower envelope along T*", rv_eq(ev, g.product_integral, tol),
          rv_str(ev) + " vs " + rv_str(g.product_integral));
  }
  try {
    auto o = oracle_Phi(b, s, std::optional<Real>{}, budget);
    v.add("value = oracle", rv_eq(o.value, g.product_integral, tol),
          rv_str(o.value) + " over " + std::to_string(o.count) + " strategies");
  } catch (const BudgetExceeded& e) {
    v.skip("value = oracle", e.what());
  }
  return v;
}

template <class Real>
Field<Real> value_field(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const Real& M) {
  Field<Real> f;
  for (std::size_t k = 0; k < b.lat.num_cells(); ++k) f.push_back(product_integral_value(b, idx, b.lat.point(k), M));
  return f;
}

// retirement levels: 0, every index value, K and K + 1 for product lattices; 0 otherwise
template <class Real>
std::vector<Real> retirement_grid(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx) {
  std::vector<Real> g{Real(0)};
  if (!is_product_lattice(b)) return g;
  auto pts = m_breakpoints(idx, Real(0), b.K);
  g.insert(g.end(), pts.begin(), pts.end());
  g.push_back(b.K + 1);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

template <class Real>
Verdict verify_bellman(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx,
                       const std::optional<Perturbation<Real>>& perturb, double tol = Num<Real>::default_tol) {
  Verdict v;
  Tally eq, q1, q2, q3, q4, probe;
  Real worst = 0;
  std::string where;
  for (const auto& M : retirement_grid(b, idx)) {
    auto f = value_field(b, idx, M);
    auto clean = f;
    if (perturb) f[b.lat.index(perturb->cell)][perturb->atom] += perturb->delta;
    auto r = bellman_residual(f, b, idx, M, tol);
    auto at = [&, M](const char* key) {
      return [&, M, key] { return "M=" + Num<Real>::str(M) + ": " + r.witness[key]; };
    };
    eq(r.equation, at("equation"));
    q1(r.q1, at("q1"));
    q2(r.q2, at("q2"));
    q3(r.q3, at("q3"));
    q4(r.q4, at("q4"));
    if (r.worst > worst || where.empty()) {
      worst = r.worst;
      where = "M=" + Num<Real>::str(M) + " at " + (r.where ? to_string(*r.where) : "-") + " atom " +
              (r.atom ? b.space().atoms[*r.atom] : "-");
    }
    auto err = bellman_iteration_errors(b, clean, M, 6);
    bool geo = true;
    for (std::size_t n = 0; n < err.size(); ++n)
      geo = geo && Num<Real>::le(err[n], ipow(b.beta, static_cast<int>(n)) * err[0], tol);
    probe(geo, [&, M] { return "M=" + Num<Real>::str(M); });
  }
  v.add("Bellman equation", eq.pass(), eq.detail() + "; worst residual " + Num<Real>::str(worst) + " (" + where + ")");
  q1.report(v, "F >= M");
  q2.report(v, "F >= engage-and-continue");
  q3.report(v, "F = M where all indices <= M");
  q4.report(v, "engaging a top-index project is optimal");
  probe.report(v, "Bellman iteration contracts at rate beta");
  return v;
}

template <class Real>
Verdict verify_lemma_q(const Bandit<Real>& b, const std::vector<IndexSequence<Real>>& idx, const LatticePoint& s,
                       const EnumerationBudget& budget, double tol = Num<Real>::default_tol) {
  Verdict v;
  auto f = value_field(b, idx, Real(0));
  Tally anchored;
  for (std::size_t k = 0; k < b.lat.num_cells(); ++k) {
    LatticePoint r = b.lat.point(k);
    auto sb = surrogate_bandit(b, idx, r);
    auto dv = decreasing_value(sb, r);
    anchored(rv_eq(dv.integral, f[k], tol), [&] { return "at " + to_string(r); });
  }
  anchored.report(v, "value field = decreasing value anchored at each point");
  auto c = operational_clock(b, idx, s, tol);
  auto T = build_sync_strategy(c);
  auto q = q_process(T, f, b, tol);
  v.add("Q(T*) is a martingale", q.martingale, "worst residual " + Num<Real>::str(q.worst));
  bool product = is_product_lattice(b);
  Tally super, mart;
  try {
    for (const auto& blk : root_blocks(b.lat, s))
      enumerate_strategies(
          b.lat, s,
          [&](const AllocationStrategy& S) {
            auto qs = q_process(S, f, b, tol);
            super(qs.supermartingale, [&] { return "block of atom " + b.space().atoms[blk.front()]; });
            if (product && classify_strategy(S, c).index_type)
              mart(qs.martingale, [&] { return "index-type strategy on block of atom " + b.space().atoms[blk.front()]; });
          },
          budget, blk);
  } catch (const BudgetExceeded& e) {
    v.skip("strategy enumeration", e.what());
    return v;
  }
  super.report(v, "Q is a supermartingale for every strategy");
  if (product) mart.report(v, "Q is a martingale for index-type strategies");
  return v;
}

// ---------------------------------------------------------------- suites

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"stopping", "prop-ui", "f4", "thm-index-properties",
                                              "thm-decreasing", "thm-main", "bellman", "lemma-q"};
  return names;
}

template <class Real>
Verdict run_suite(const Scenario<Real>& sc, const std::string& suite, const LatticePoint& s,
                  const EnumerationBudget& budget, double tol = Num<Real>::default_tol) {
  const auto& b = sc.bandit;
  auto idx = compute_indices(b);
  Verdict v;
  if (suite == "stopping" || suite == "prop-ui") {
    for (std::size_t i = 0; i < b.dim(); ++i) {
      std::string p = b.dim() > 1 ? "project " + std::to_string(i + 1) + ": " : "";
      v.absorb(suite == "stopping" ? verify_stopping(b.rewards[i], b.axis[i], budget, tol)
                                   : verify_gittins(b.rewards[i], b.axis[i], budget, tol),
               p);
    }
  } else if (suite == "f4") {
    v = verify_f4(b, tol);
  } else if (suite == "thm-index-properties") {
    v = verify_index_properties(b, idx, s, budget, tol);
  } else if (suite == "thm-decreasing") {
    v = verify_decreasing(b, idx, s, budget, tol);
  } else if (suite == "thm-main") {
    v = verify_main(b, idx, s, budget, tol);
  } else if (suite == "bellman") {
    v = verify_bellman(b, idx, sc.perturb, tol);
  } else if (suite == "lemma-q") {
    v = verify_lemma_q(b, idx, s, budget, tol);
  } else {
    throw InputError("unknown suite '" + suite + "'");
  }
  return v;
}

}  // namespace dynalloc
