#pragma once

#include "allocation.hpp"

#include <json.hpp>

namespace dynalloc {

using json = nlohmann::json;

template <class Real>
struct Perturbation {
  LatticePoint cell;
  std::size_t atom = 0;
  Real delta = 0;
};

template <class Real>
struct Scenario {
  std::string name;
  std::string kind;  // product | sheet | explicit
  Bandit<Real> bandit;
  std::map<std::string, LatticePoint> starts;
  std::vector<std::string> suites;
  std::optional<Perturbation<Real>> perturb;
};

namespace io {

template <class Real>
Real number(const json& j, const std::string& what) {
  try {
    if (j.is_string()) return Num<Real>::parse(j.get<std::string>());
    if (j.is_number_integer()) return Real(j.get<long long>());
    if (j.is_number()) return Num<Real>::parse(j.dump());
  } catch (const std::invalid_argument& e) {
    throw InputError(what + ": " + e.what());
  }
  throw InputError(what + ": expected a number or a numeric string");
}

template <class Real>
std::vector<Real> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected an array");
  std::vector<Real> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number<Real>(j[k], what + "[" + std::to_string(k) + "]"));
  return v;
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing '" + key + "'");
  return j.at(key);
}

inline Partition partition(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected a list of blocks");
  try {
    return Partition::from_blocks(n, j.get<std::vector<std::vector<int>>>());
  } catch (const json::exception&) {
    throw InputError(what + ": blocks must be lists of atom indices");
  } catch (const InputError& e) {
    throw InputError(what + ": " + e.what());
  }
}

// rewards are listed per block of F(t-1), blocks in order of their least atom
template <class Real>
std::vector<RandomVariable<Real>> rewards_on_blocks(const json& j, const std::vector<Partition>& parts,
                                                    const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected one list per reward step");
  if (j.size() + 1 != parts.size())
    throw InputError(what + ": " + std::to_string(j.size()) + " reward steps for horizon " +
                     std::to_string(parts.size() - 1));
  std::vector<RandomVariable<Real>> h;
  for (std::size_t t = 0; t < j.size(); ++t) {
    std::string w = what + " h(" + std::to_string(t + 1) + ")";
    auto vals = numbers<Real>(j[t], w);
    const Partition& P = parts[t];
    if (vals.size() != P.size())
      throw InputError(w + ": " + std::to_string(vals.size()) + " values for " + std::to_string(P.size()) + " blocks");
    RandomVariable<Real> x(P.atoms());
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = vals[P.block_of(a)];
    h.push_back(std::move(x));
  }
  return h;
}

inline std::vector<std::string> atom_names(const json& j, std::size_t n) {
  std::vector<std::string> names;
  if (j.contains("atoms")) return j.at("atoms").get<std::vector<std::string>>();
  for (std::size_t a = 0; a < n; ++a) names.push_back(std::to_string(a));
  return names;
}

inline LatticePoint point(const json& j, std::size_t d, const std::string& what) {
  if (!j.is_array() || j.size() != d) throw InputError(what + ": expected " + std::to_string(d) + " coordinates");
  return j.get<LatticePoint>();
}

}  // namespace io

template <class Real>
Scenario<Real> scenario_from_json(const json& j) {
  using namespace io;
  Scenario<Real> sc;
  sc.name = j.value("name", std::string("scenario"));
  Real beta = number<Real>(field(j, "beta", "scenario"), "beta");
  Real K = number<Real>(field(j, "reward_bound", "scenario"), "reward_bound");
  const json& L = field(j, "lattice", "scenario");
  sc.kind = field(L, "kind", "lattice").get<std::string>();
  const json& projects = field(L, "projects", "lattice");
  if (!projects.is_array() || projects.empty()) throw InputError("lattice: 'projects' must be a non-empty list");

  FiltrationLattice<Real> lat;
  std::vector<std::vector<RandomVariable<Real>>> h;
  if (sc.kind == "product") {
    std::vector<ProjectTree<Real>> trees;
    for (std::size_t i = 0; i < projects.size(); ++i) {
      std::string w = "project " + std::to_string(i + 1);
      const json& p = projects[i];
      auto probs = numbers<Real>(field(p, "probs", w), w + " probs");
      FiniteSpace<Real> sp(atom_names(p, probs.size()), probs);
      std::vector<Partition> parts;
      const json& pj = field(p, "partitions", w);
      for (std::size_t t = 0; t < pj.size(); ++t)
        parts.push_back(partition(pj[t], sp.size(), w + " F(" + std::to_string(t) + ")"));
      trees.push_back({sp, parts});
    }
    lat = build_product_lattice(trees);
    std::vector<std::size_t> sizes;
    for (const auto& tr : trees) sizes.push_back(tr.space.size());
    for (std::size_t i = 0; i < trees.size(); ++i) {
      auto own = rewards_on_blocks<Real>(field(projects[i], "rewards", "project"), trees[i].parts,
                                         "project " + std::to_string(i + 1));
      for (auto& x : own) x = pull_back(sizes, i, x);
      h.push_back(std::move(own));
    }
  } else if (sc.kind == "sheet" || sc.kind == "explicit") {
    if (sc.kind == "sheet") {
      const json& inc = field(L, "increments", "sheet");
      Increments<Real> in{numbers<Real>(field(inc, "values", "increments"), "increments values"),
                          numbers<Real>(field(inc, "probs", "increments"), "increments probs")};
      lat = build_sheet_lattice(field(L, "dims", "sheet").get<std::vector<int>>(), in, L.value("anchored", false));
    } else {
      auto probs = numbers<Real>(field(L, "probs", "lattice"), "probs");
      auto sp = std::make_shared<FiniteSpace<Real>>(atom_names(L, probs.size()), probs);
      auto bounds = field(L, "bounds", "lattice").get<std::vector<int>>();
      std::vector<Partition> cells;
      const json& cj = field(L, "cells", "lattice");
      for (std::size_t k = 0; k < cj.size(); ++k) cells.push_back(partition(cj[k], sp->size(), "cell " + std::to_string(k)));
      lat = FiltrationLattice<Real>(sp, bounds, std::move(cells));
    }
    if (projects.size() != lat.dim())
      throw InputError("lattice has " + std::to_string(lat.dim()) + " axes but " + std::to_string(projects.size()) +
                       " projects are given");
    for (std::size_t i = 0; i < lat.dim(); ++i)
      h.push_back(rewards_on_blocks<Real>(field(projects[i], "rewards", "project"),
                                          derive_axis_filtrations(lat, i).small, "project " + std::to_string(i + 1)));
  } else {
    throw InputError("lattice: unknown kind '" + sc.kind + "'");
  }
  std::vector<RewardsProcess<Real>> rps;
  for (auto& x : h) rps.push_back({beta, K, std::move(x)});
  sc.bandit = make_bandit(std::move(lat), std::move(rps));

  sc.starts["origin"] = LatticePoint(sc.bandit.dim(), 0);
  if (j.contains("starts"))
    for (const auto& [k, v] : j.at("starts").items()) {
      sc.starts[k] = point(v, sc.bandit.dim(), "start '" + k + "'");
      if (!sc.bandit.lat.contains(sc.starts[k])) throw InputError("start '" + k + "' lies outside the lattice");
    }
  if (j.contains("suites")) sc.suites = j.at("suites").get<std::vector<std::string>>();
  if (j.contains("perturb")) {
    const json& p = j.at("perturb");
    Perturbation<Real> pt{point(field(p, "cell", "perturb"), sc.bandit.dim(), "perturb cell"),
                          field(p, "atom", "perturb").get<std::size_t>(), number<Real>(field(p, "delta", "perturb"), "delta")};
    if (!sc.bandit.lat.contains(pt.cell) || pt.atom >= sc.bandit.space().size())
      throw InputError("perturb: cell or atom out of range");
    sc.perturb = pt;
  }
  return sc;
}

}  // namespace dynalloc
