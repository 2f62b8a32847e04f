#pragma once

#include "numeric.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dynalloc {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Real>
struct FiniteSpace {
  std::vector<std::string> atoms;
  std::vector<Real> prob;

  FiniteSpace() = default;
  FiniteSpace(std::vector<std::string> names, std::vector<Real> p) : atoms(std::move(names)), prob(std::move(p)) {
    if (atoms.size() != prob.size()) throw InputError("space: atom/probability count mismatch");
    if (atoms.empty()) throw InputError("space: no atoms");
    Real total = 0;
    for (std::size_t a = 0; a < prob.size(); ++a) {
      if (!(prob[a] > 0)) throw InputError("space: atom '" + atoms[a] + "' has non-positive probability");
      total += prob[a];
    }
    if (std::fabs(Num<Real>::to_double(total) - 1.0) > 1e-12) throw InputError("space: probabilities do not sum to 1");
  }

  std::size_t size() const { return prob.size(); }
};

template <class Real>
using SpacePtr = std::shared_ptr<const FiniteSpace<Real>>;

template <class Real>
using RandomVariable = std::vector<Real>;

// Blocks are numbered in order of their least atom, so == is structural.
class Partition {
 public:
  Partition() = default;

  static Partition from_labels(const std::vector<long>& labels) {
    Partition p;
    std::map<long, int> ids;
    p.label_.resize(labels.size());
    for (std::size_t a = 0; a < labels.size(); ++a) {
      auto [it, fresh] = ids.emplace(labels[a], static_cast<int>(ids.size()));
      if (fresh) p.blocks_.emplace_back();
      p.label_[a] = it->second;
      p.blocks_[it->second].push_back(static_cast<int>(a));
    }
    return p;
  }

  static Partition trivial(std::size_t n) { return from_labels(std::vector<long>(n, 0)); }
  static Partition discrete(std::size_t n) {
    std::vector<long> l(n);
    std::iota(l.begin(), l.end(), 0L);
    return from_labels(l);
  }

  static Partition from_blocks(std::size_t n, const std::vector<std::vector<int>>& blocks) {
    std::vector<long> l(n, -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw InputError("partition: empty block");
      for (int a : blocks[b]) {
        if (a < 0 || static_cast<std::size_t>(a) >= n) throw InputError("partition: atom index out of range");
        if (l[a] != -1) throw InputError("partition: blocks overlap at atom " + std::to_string(a));
        l[a] = static_cast<long>(b);
      }
    }
    for (std::size_t a = 0; a < n; ++a)
      if (l[a] == -1) throw InputError("partition: atom " + std::to_string(a) + " not covered");
    return from_labels(l);
  }

  std::size_t atoms() const { return label_.size(); }
  std::size_t size() const { return blocks_.size(); }
  int block_of(std::size_t a) const { return label_[a]; }
  const std::vector<int>& labels() const { return label_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  const std::vector<int>& block(std::size_t b) const { return blocks_[b]; }

  // every block of *this sits inside a block of `coarser`
  bool refines(const Partition& coarser) const {
    for (const auto& b : blocks_)
      for (int a : b)
        if (coarser.label_[a] != coarser.label_[b.front()]) return false;
    return true;
  }

  // event given as atom mask is a union of blocks
  bool contains_event(const std::vector<char>& mask) const {
    for (const auto& b : blocks_)
      for (int a : b)
        if (mask[a] != mask[b.front()]) return false;
    return true;
  }

  bool operator==(const Partition& o) const { return label_ == o.label_; }

 private:
  std::vector<int> label_;
  std::vector<std::vector<int>> blocks_;
};

inline Partition join(const Partition& a, const Partition& b) {
  std::vector<long> l(a.atoms());
  for (std::size_t w = 0; w < l.size(); ++w)
    l[w] = static_cast<long>(a.block_of(w)) * static_cast<long>(b.size() + 1) + b.block_of(w);
  return Partition::from_labels(l);
}

// finest common coarsening (the intersection of the two sigma-algebras)
inline Partition meet(const Partition& a, const Partition& b) {
  std::vector<int> parent(a.atoms());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](const Partition& p) {
    for (const auto& blk : p.blocks())
      for (int w : blk) parent[find(w)] = find(blk.front());
  };
  unite(a);
  unite(b);
  std::vector<long> l(a.atoms());
  for (std::size_t w = 0; w < l.size(); ++w) l[w] = find(static_cast<int>(w));
  return Partition::from_labels(l);
}

template <class Real>
RandomVariable<Real> cond_expect(const FiniteSpace<Real>& sp, const RandomVariable<Real>& x, const Partition& p) {
  RandomVariable<Real> out(x.size());
  for (const auto& blk : p.blocks()) {
    Real num = 0, den = 0;
    for (int a : blk) {
      num += sp.prob[a] * x[a];
      den += sp.prob[a];
    }
    Real v = num / den;
    for (int a : blk) out[a] = v;
  }
  return out;
}

template <class Real>
bool is_measurable(const RandomVariable<Real>& x, const Partition& p, double tol = Num<Real>::default_tol) {
  for (const auto& blk : p.blocks())
    for (int a : blk)
      if (!Num<Real>::eq(x[a], x[blk.front()], tol)) return false;
  return true;
}

template <class Real>
Real block_prob(const FiniteSpace<Real>& sp, const std::vector<int>& blk) {
  Real s = 0;
  for (int a : blk) s += sp.prob[a];
  return s;
}

// One-parameter filtration: at[t] for t = 0..H.
template <class Real>
struct Filtration {
  SpacePtr<Real> space;
  std::vector<Partition> at;

  Filtration() = default;
  Filtration(SpacePtr<Real> sp, std::vector<Partition> parts) : space(std::move(sp)), at(std::move(parts)) {
    if (at.empty()) throw InputError("filtration: no partitions");
    for (std::size_t t = 0; t < at.size(); ++t) {
      if (at[t].atoms() != space->size()) throw InputError("filtration: partition size mismatch");
      if (t > 0 && !at[t].refines(at[t - 1]))
        throw InputError("filtration: F(" + std::to_string(t) + ") does not refine F(" + std::to_string(t - 1) + ")");
    }
  }
  int horizon() const { return static_cast<int>(at.size()) - 1; }
};

// ---------------------------------------------------------------- lattice

using LatticePoint = std::vector<int>;

inline bool leq(const LatticePoint& a, const LatticePoint& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}
inline LatticePoint wedge(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::min(a[i], b[i]);
  return r;
}
inline LatticePoint step(LatticePoint a, std::size_t i) {
  ++a[i];
  return a;
}
inline std::string to_string(const LatticePoint& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s + ")";
}

template <class Real>
class FiltrationLattice {
 public:
  FiltrationLattice() = default;
  FiltrationLattice(SpacePtr<Real> sp, std::vector<int> bounds, std::vector<Partition> cells)
      : space_(std::move(sp)), bounds_(std::move(bounds)), cells_(std::move(cells)) {
    if (bounds_.empty()) throw InputError("lattice: dimension must be positive");
    std::size_t n = 1;
    for (int b : bounds_) {
      if (b < 0) throw InputError("lattice: negative bound");
      n *= static_cast<std::size_t>(b + 1);
    }
    if (cells_.size() != n) throw InputError("lattice: incomplete, expected " + std::to_string(n) + " cells");
    for (const auto& c : cells_)
      if (c.atoms() != space_->size()) throw InputError("lattice: partition size mismatch");
    // (F1), one axis step at a time
    for (std::size_t k = 0; k < n; ++k) {
      LatticePoint p = point(k);
      for (std::size_t i = 0; i < bounds_.size(); ++i)
        if (p[i] < bounds_[i] && !at(step(p, i)).refines(cells_[k]))
          throw InputError("lattice: (F1) fails between " + to_string(p) + " and " + to_string(step(p, i)));
    }
  }

  std::size_t dim() const { return bounds_.size(); }
  const std::vector<int>& bounds() const { return bounds_; }
  const FiniteSpace<Real>& space() const { return *space_; }
  const SpacePtr<Real>& space_ptr() const { return space_; }
  std::size_t num_cells() const { return cells_.size(); }

  bool contains(const LatticePoint& p) const {
    if (p.size() != bounds_.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < 0 || p[i] > bounds_[i]) return false;
    return true;
  }
  std::size_t index(const LatticePoint& p) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) k = k * static_cast<std::size_t>(bounds_[i] + 1) + p[i];
    return k;
  }
  LatticePoint point(std::size_t k) const {
    LatticePoint p(bounds_.size());
    for (std::size_t i = bounds_.size(); i-- > 0;) {
      p[i] = static_cast<int>(k % static_cast<std::size_t>(bounds_[i] + 1));
      k /= static_cast<std::size_t>(bounds_[i] + 1);
    }
    return p;
  }
  const Partition& at(const LatticePoint& p) const { return cells_[index(p)]; }
  const Partition& cell(std::size_t k) const { return cells_[k]; }
  LatticePoint top() const { return bounds_; }

 private:
  SpacePtr<Real> space_;
  std::vector<int> bounds_;
  std::vector<Partition> cells_;
};

// Per-project partition sequence on its own coordinate space.
template <class Real>
struct ProjectTree {
  FiniteSpace<Real> space;
  std::vector<Partition> parts;  // t = 0..H_i
};

// strides for product atom <-> factor coordinates (project 0 most significant)
inline std::vector<std::size_t> product_strides(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> st(sizes.size(), 1);
  for (std::size_t i = sizes.size(); i-- > 1;) st[i - 1] = st[i] * sizes[i];
  return st;
}

template <class Real>
FiltrationLattice<Real> build_product_lattice(const std::vector<ProjectTree<Real>>& trees) {
  if (trees.empty()) throw InputError("product lattice: no projects");
  std::vector<std::size_t> sizes;
  std::vector<int> bounds;
  for (const auto& tr : trees) {
    Filtration<Real> check(std::make_shared<FiniteSpace<Real>>(tr.space), tr.parts);  // throws if not a filtration
    sizes.push_back(tr.space.size());
    bounds.push_back(check.horizon());
  }
  auto st = product_strides(sizes);
  std::size_t n = st[0] * sizes[0];
  std::vector<std::string> names(n);
  std::vector<Real> prob(n);
  for (std::size_t a = 0; a < n; ++a) {
    Real p = 1;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      std::size_t c = (a / st[i]) % sizes[i];
      names[a] += (i ? "." : "") + trees[i].space.atoms[c];
      p *= trees[i].space.prob[c];
    }
    prob[a] = p;
  }
  auto sp = std::make_shared<FiniteSpace<Real>>(std::move(names), std::move(prob));

  FiltrationLattice<Real> shape(sp, bounds, std::vector<Partition>(
                                               [&] {
                                                 std::size_t c = 1;
                                                 for (int b : bounds) c *= static_cast<std::size_t>(b + 1);
                                                 return c;
                                               }(),
                                               Partition::trivial(n)));
  std::vector<Partition> cells;
  for (std::size_t k = 0; k < shape.num_cells(); ++k) {
    LatticePoint p = shape.point(k);
    std::vector<long> lab(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      long l = 0;
      for (std::size_t i = 0; i < trees.size(); ++i) {
        const Partition& f = trees[i].parts[p[i]];
        l = l * static_cast<long>(f.size()) + f.block_of((a / st[i]) % sizes[i]);
      }
      lab[a] = l;
    }
    cells.push_back(Partition::from_labels(lab));
  }
  return FiltrationLattice<Real>(sp, bounds, std::move(cells));
}

// Lift a variable on factor i's space to the product space.
template <class Real>
RandomVariable<Real> pull_back(const std::vector<std::size_t>& sizes, std::size_t i, const RandomVariable<Real>& x) {
  auto st = product_strides(sizes);
  std::size_t n = st[0] * sizes[0];
  RandomVariable<Real> out(n);
  for (std::size_t a = 0; a < n; ++a) out[a] = x[(a / st[i]) % sizes[i]];
  return out;
}

// Sites of the discrete sheet: coordinates in [lo, dims_i], lo = 1 (default) or 0 when anchored.
inline std::vector<LatticePoint> sheet_sites(const std::vector<int>& dims, bool anchored) {
  int lo = anchored ? 0 : 1;
  std::vector<LatticePoint> out;
  LatticePoint s(dims.size(), lo);
  for (int d : dims)
    if (d < lo) return out;
  while (true) {
    out.push_back(s);
    std::size_t i = dims.size();
    while (i-- > 0) {
      if (++s[i] <= dims[i]) break;
      s[i] = lo;
      if (i == 0) return out;
    }
  }
}

template <class Real>
struct Increments {
  std::vector<Real> values;
  std::vector<Real> prob;
};

// atom -> index of the increment value at site k (first site most significant)
inline std::size_t sheet_digit(std::size_t atom, std::size_t site, std::size_t nsites, std::size_t base) {
  for (std::size_t k = site + 1; k < nsites; ++k) atom /= base;
  return atom % base;
}

template <class Real>
FiltrationLattice<Real> build_sheet_lattice(const std::vector<int>& dims, const Increments<Real>& inc,
                                            bool anchored = false) {
  if (inc.values.size() != inc.prob.size()) throw InputError("sheet: increment value/probability mismatch");
  if (inc.values.size() < 2) throw InputError("sheet: increment distribution needs at least two support points");
  for (std::size_t a = 0; a < inc.values.size(); ++a)
    for (std::size_t b = a + 1; b < inc.values.size(); ++b)
      if (inc.values[a] == inc.values[b]) throw InputError("sheet: repeated increment value");
  for (int d : dims)
    if (d < 0) throw InputError("sheet: negative dimension");
  auto sites = sheet_sites(dims, anchored);
  if (sites.size() > 12) throw InputError("sheet: too many sites for an explicit space");
  std::size_t base = inc.values.size(), n = 1;
  for (std::size_t k = 0; k < sites.size(); ++k) n *= base;

  std::vector<std::string> names(n);
  std::vector<Real> prob(n);
  for (std::size_t a = 0; a < n; ++a) {
    Real p = 1;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      std::size_t dgt = sheet_digit(a, k, sites.size(), base);
      names[a] += (k ? " " : "") + Num<Real>::str(inc.values[dgt]);
      p *= inc.prob[dgt];
    }
    if (sites.empty()) names[a] = "*";
    prob[a] = p;
  }
  auto sp = std::make_shared<FiniteSpace<Real>>(std::move(names), std::move(prob));

  std::size_t ncell = 1;
  for (int d : dims) ncell *= static_cast<std::size_t>(d + 1);
  std::vector<Partition> cells;
  LatticePoint r(dims.size(), 0);
  for (std::size_t k = 0; k < ncell; ++k) {
    // row-major over r, same order as FiltrationLattice::point
    std::size_t rem = k;
    for (std::size_t i = dims.size(); i-- > 0;) {
      r[i] = static_cast<int>(rem % static_cast<std::size_t>(dims[i] + 1));
      rem /= static_cast<std::size_t>(dims[i] + 1);
    }
    std::vector<long> lab(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      long l = 0;
      for (std::size_t s = 0; s < sites.size(); ++s)
        if (leq(sites[s], r)) l = l * static_cast<long>(base) + static_cast<long>(sheet_digit(a, s, sites.size(), base));
      lab[a] = l;
    }
    cells.push_back(Partition::from_labels(lab));
  }
  return FiltrationLattice<Real>(sp, dims, std::move(cells));
}

template <class Real>
struct AxisFiltrations {
  std::vector<Partition> small;  // F_i(t)
  std::vector<Partition> large;  // F^i(t)
};

template <class Real>
AxisFiltrations<Real> derive_axis_filtrations(const FiltrationLattice<Real>& lat, std::size_t i) {
  if (i >= lat.dim()) throw InputError("axis index out of range");
  AxisFiltrations<Real> out;
  int H = lat.bounds()[i];
  for (int t = 0; t <= H; ++t) {
    LatticePoint p(lat.dim(), 0);
    p[i] = t;
    out.small.push_back(lat.at(p));
    Partition big = Partition::trivial(lat.space().size());
    for (std::size_t k = 0; k < lat.num_cells(); ++k)
      if (lat.point(k)[i] <= t) big = join(big, lat.cell(k));
    out.large.push_back(big);
  }
  return out;
}

template <class Real>
Filtration<Real> axis_filtration(const FiltrationLattice<Real>& lat, std::size_t i) {
  return Filtration<Real>(lat.space_ptr(), derive_axis_filtrations(lat, i).small);
}

// ---------------------------------------------------------------- (F4)

template <class Real>
struct F4Report {
  bool pass = true;
  bool cond_indep = true;
  bool commutation = true;
  bool intersection = true;
  Real worst_violation = 0;
  std::optional<std::string> witness;
};

template <class Real>
F4Report<Real> check_F4(const FiltrationLattice<Real>& lat, double tol = Num<Real>::default_tol) {
  F4Report<Real> rep;
  const auto& sp = lat.space();
  auto note = [&](const std::string& w) {
    if (!rep.witness) rep.witness = w;
  };
  for (std::size_t ks = 0; ks < lat.num_cells(); ++ks)
    for (std::size_t kr = ks + 1; kr < lat.num_cells(); ++kr) {
      LatticePoint s = lat.point(ks), r = lat.point(kr);
      if (leq(s, r) || leq(r, s)) continue;  // comparable pairs hold trivially
      const Partition &A = lat.cell(ks), &B = lat.cell(kr), &G = lat.at(wedge(s, r));
      std::vector<Real> pa(A.size()), pb(B.size());
      std::map<std::pair<int, int>, Real> pab;
      for (std::size_t w = 0; w < sp.size(); ++w) {
        pa[A.block_of(w)] += sp.prob[w];
        pb[B.block_of(w)] += sp.prob[w];
        pab[{A.block_of(w), B.block_of(w)}] += sp.prob[w];
      }
      for (std::size_t a = 0; a < A.size(); ++a)
        for (std::size_t b = 0; b < B.size(); ++b) {
          int ca = G.block_of(A.block(a).front()), cb = G.block_of(B.block(b).front());
          if (ca != cb) continue;  // disjoint, both sides 0
          Real pc = block_prob(sp, G.block(ca));
          auto it = pab.find({static_cast<int>(a), static_cast<int>(b)});
          Real joint = it == pab.end() ? Real(0) : it->second;
          Real v = abs_val<Real>(joint / pc - (pa[a] / pc) * (pb[b] / pc));
          if (v > rep.worst_violation) rep.worst_violation = v;
          if (!Num<Real>::le(v, Real(0), tol)) {
            rep.cond_indep = false;
            std::ostringstream os;
            os << "s=" << to_string(s) << " r=" << to_string(r) << " A=block " << a << " of F(s) (first atom "
               << sp.atoms[A.block(a).front()] << ") B=block " << b << " of F(r) (first atom "
               << sp.atoms[B.block(b).front()] << ")";
            note(os.str());
          }
        }
      // commutation: E[1_A | F(r)] = E[1_A | F(s^r)] for blocks A of F(s), and symmetrically
      auto commute = [&](const Partition& P, const Partition& Q) {
        for (const auto& blk : P.blocks()) {
          RandomVariable<Real> ind(sp.size(), Real(0));
          for (int w : blk) ind[w] = 1;
          auto e1 = cond_expect(sp, ind, Q), e2 = cond_expect(sp, ind, G);
          for (std::size_t w = 0; w < sp.size(); ++w)
            if (!Num<Real>::eq(e1[w], e2[w], tol)) return false;
        }
        return true;
      };
      if (!commute(A, B) || !commute(B, A)) {
        rep.commutation = false;
        note("commutation fails for s=" + to_string(s) + " r=" + to_string(r));
      }
      if (!(meet(A, B) == G)) {
        rep.intersection = false;
        note("F(s) cap F(r) != F(s^r) for s=" + to_string(s) + " r=" + to_string(r));
      }
    }
  rep.pass = rep.cond_indep && rep.commutation && rep.intersection;
  return rep;
}

// ---------------------------------------------------------------- stopping points

using StoppingPoint = std::vector<LatticePoint>;  // one point per atom

template <class Real>
bool is_stopping_point(const StoppingPoint& nu, const FiltrationLattice<Real>& lat) {
  if (nu.size() != lat.space().size()) return false;
  std::map<LatticePoint, std::vector<char>> events;
  for (std::size_t w = 0; w < nu.size(); ++w) {
    if (!lat.contains(nu[w])) return false;
    auto& m = events[nu[w]];
    if (m.empty()) m.assign(nu.size(), 0);
    m[w] = 1;
  }
  for (const auto& [p, mask] : events)
    if (!lat.at(p).contains_event(mask)) return false;
  return true;
}

// F(nu): on {nu = r} the blocks of F(r)
template <class Real>
Partition stopped_partition(const FiltrationLattice<Real>& lat, const StoppingPoint& nu) {
  std::vector<long> lab(nu.size());
  long stride = 1;
  for (std::size_t k = 0; k < lat.num_cells(); ++k) stride = std::max<long>(stride, lat.cell(k).size());
  for (std::size_t w = 0; w < nu.size(); ++w)
    lab[w] = static_cast<long>(lat.index(nu[w])) * stride + lat.at(nu[w]).block_of(w);
  return Partition::from_labels(lab);
}

// ---------------------------------------------------------------- field martingale checks

template <class Real>
using Field = std::vector<RandomVariable<Real>>;  // indexed by lattice cell index

template <class Real>
struct FieldReport {
  bool adapted = true;
  std::optional<std::string> adapt_witness;
  // verdicts per form: (a) s<=r, (b) all pairs against s^r, (c) axis processes
  bool super_a = true, super_b = true, super_c = true;
  bool sub_a = true, sub_b = true, sub_c = true;
  Real worst_super = 0;  // largest E[x(r)|F(s)] - x(s) seen in form (a)
  std::optional<std::string> witness;

  bool supermartingale() const { return adapted && super_a; }
  bool martingale() const { return adapted && super_a && sub_a; }
  bool forms_agree() const { return super_a == super_b && super_b == super_c && sub_a == sub_b && sub_b == sub_c; }
};

template <class Real>
FieldReport<Real> check_field_supermartingale(const Field<Real>& x, const FiltrationLattice<Real>& lat,
                                              double tol = Num<Real>::default_tol) {
  FieldReport<Real> rep;
  const auto& sp = lat.space();
  for (std::size_t k = 0; k < lat.num_cells(); ++k)
    if (!is_measurable(x[k], lat.cell(k), tol)) {
      rep.adapted = false;
      rep.adapt_witness = "x" + to_string(lat.point(k)) + " not F-measurable";
      return rep;
    }
  auto cmp = [&](const RandomVariable<Real>& e, const RandomVariable<Real>& ref, bool& sup, bool& sub,
                 const std::string& where, bool track) {
    for (std::size_t w = 0; w < sp.size(); ++w) {
      Real d = e[w] - ref[w];
      if (track && d > rep.worst_super) rep.worst_super = d;
      if (!Num<Real>::le(d, Real(0), tol)) {
        if (sup && !rep.witness) rep.witness = "supermartingale fails at " + where + ", atom " + sp.atoms[w];
        sup = false;
      }
      if (!Num<Real>::le(Real(-d), Real(0), tol)) sub = false;
    }
  };
  for (std::size_t ks = 0; ks < lat.num_cells(); ++ks)
    for (std::size_t kr = 0; kr < lat.num_cells(); ++kr) {
      LatticePoint s = lat.point(ks), r = lat.point(kr);
      auto e = cond_expect(sp, x[kr], lat.cell(ks));
      std::string where = "s=" + to_string(s) + " r=" + to_string(r);
      if (leq(s, r)) cmp(e, x[ks], rep.super_a, rep.sub_a, where, true);
      cmp(e, x[lat.index(wedge(s, r))], rep.super_b, rep.sub_b, where, false);
    }
  for (std::size_t i = 0; i < lat.dim(); ++i) {
    auto large = derive_axis_filtrations(lat, i).large;
    for (std::size_t k = 0; k < lat.num_cells(); ++k) {
      LatticePoint s = lat.point(k);
      if (s[i] >= lat.bounds()[i]) continue;
      auto e = cond_expect(sp, x[lat.index(step(s, i))], large[s[i]]);
      cmp(e, x[k], rep.super_c, rep.sub_c, "axis " + std::to_string(i) + " at " + to_string(s), false);
    }
  }
  return rep;
}

template <class Real>
struct SamplingReport {
  bool pass = true;
  Real worst = 0;  // max of E[x(tau)|F(sigma)] - x(sigma)
  std::optional<std::string> witness;
};

template <class Real>
SamplingReport<Real> check_optional_sampling(const Field<Real>& x, const StoppingPoint& sigma,
                                             const StoppingPoint& tau, const FiltrationLattice<Real>& lat,
                                             double tol = Num<Real>::default_tol) {
  const auto& sp = lat.space();
  for (std::size_t w = 0; w < sp.size(); ++w)
    if (!leq(sigma[w], tau[w])) throw InputError("optional sampling: sigma <= tau fails at atom " + sp.atoms[w]);
  if (!is_stopping_point(sigma, lat) || !is_stopping_point(tau, lat))
    throw InputError("optional sampling: argument is not a stopping point");
  SamplingReport<Real> rep;
  RandomVariable<Real> xt(sp.size()), xs(sp.size());
  for (std::size_t w = 0; w < sp.size(); ++w) {
    xt[w] = x[lat.index(tau[w])][w];
    xs[w] = x[lat.index(sigma[w])][w];
  }
  auto e = cond_expect(sp, xt, stopped_partition(lat, sigma));
  for (std::size_t w = 0; w < sp.size(); ++w) {
    Real d = e[w] - xs[w];
    if (d > rep.worst) rep.worst = d;
    if (!Num<Real>::le(d, Real(0), tol)) {
      rep.pass = false;
      if (!rep.witness) rep.witness = "atom " + sp.atoms[w];
    }
  }
  return rep;
}

}  // namespace dynalloc
