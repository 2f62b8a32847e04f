#include <dynalloc/random.hpp>
#include <dynalloc/verify.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

using namespace dynalloc;

namespace {

enum Exit { kPass = 0, kFail = 1, kInput = 2, kBudget = 3 };

struct Options {
  std::string path;
  std::string mode = "rational";
  double tol = 1e-9;
  double budget = 4e6;
  std::uint64_t seed = 1;
  int count = 100;
  std::string kind = "mixed";
  std::vector<std::string> suites;
  std::string start = "origin";
  std::string retirement = "0";
  bool timing = false;
  bool text = false;
  int max_d = 2, max_atoms = 4, max_H = 2;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON parse error");
  }
}

template <class Real>
LatticePoint resolve_start(const Scenario<Real>& sc, const std::string& s) {
  auto it = sc.starts.find(s);
  if (it != sc.starts.end()) return it->second;
  LatticePoint p;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      p.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InputError("unknown start '" + s + "'");
    }
  }
  if (!sc.bandit.lat.contains(p)) throw InputError("start " + s + " lies outside the lattice");
  return p;
}

template <class Real>
json rv_json(const RandomVariable<Real>& x, const FiniteSpace<Real>& sp) {
  json o = json::object();
  for (std::size_t a = 0; a < x.size(); ++a) o[sp.atoms[a]] = Num<Real>::str(x[a]);
  return o;
}

void render_text(const json& rep, std::ostream& os) {
  os << rep.value("command", "") << " " << rep.value("scenario", "") << ": " << (rep.value("pass", false) ? "PASS" : "FAIL")
     << "\n";
  auto rows = [&](const json& checks, const std::string& indent) {
    for (const auto& c : checks)
      os << indent << (c.value("skipped", false) ? "SKIP" : c.value("pass", false) ? "ok  " : "FAIL") << "  "
         << c.value("name", "") << (c.contains("detail") ? "  [" + c["detail"].get<std::string>() + "]" : "") << "\n";
  };
  if (rep.contains("checks")) rows(rep["checks"], "  ");
  if (rep.contains("suites"))
    for (const auto& [name, s] : rep["suites"].items()) {
      os << "  " << name << "\n";
      rows(s["checks"], "    ");
    }
  if (rep.contains("routes"))
    for (const auto& [name, r] : rep["routes"].items()) os << "  " << name << ": " << r.dump() << "\n";
}

int emit(json rep, const Options& o, int code, std::chrono::steady_clock::time_point t0) {
  if (o.timing)
    rep["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.text)
    render_text(rep, std::cout);
  else
    std::cout << rep.dump(2) << "\n";
  return code;
}

EnumerationBudget budget_of(const Options& o) {
  EnumerationBudget b;
  b.max_rules = o.budget;
  return b;
}

template <class Real>
double tol_of(const Options& o) {
  return Num<Real>::exact ? 0.0 : o.tol;
}

template <class Real>
int cmd_validate(const Options& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto sc = scenario_from_json<Real>(read_json(o.path));
  Verdict v;
  v.add("(F1) refinement along every axis", true);
  v.add("(F2) every cell is a partition of the space", true);
  v.add("rewards predictable and within [0, K(1-beta)]", true);
  auto f4 = check_F4(sc.bandit.lat, tol_of<Real>(o));
  v.add("(F4) conditional independence", f4.cond_indep, f4.witness.value_or(""));
  v.add("(F4) commuting conditional expectations", f4.commutation);
  v.add("(F4) F(s) meet F(r) = F(s^r)", f4.intersection);
  json rep = v.to_json();
  rep["command"] = "validate";
  rep["scenario"] = sc.name;
  rep["kind"] = sc.kind;
  rep["atoms"] = sc.bandit.space().size();
  rep["bounds"] = sc.bandit.lat.bounds();
  return emit(rep, o, v.pass() ? kPass : kFail, t0);
}

template <class Real>
int cmd_value(const Options& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto sc = scenario_from_json<Real>(read_json(o.path));
  const auto& b = sc.bandit;
  auto s = resolve_start(sc, o.start);
  Real M = Num<Real>::parse(o.retirement);
  if (M < 0) throw InputError("retirement reward must be >= 0");
  double tol = tol_of<Real>(o);
  auto idx = compute_indices(b);
  bool f4 = check_F4(b.lat, tol).pass;
  json routes = json::object();
  Verdict v;
  std::vector<RandomVariable<Real>> vals;
  if (f4) {
    auto pi = product_integral_value(b, idx, s, M);
    routes[is_product_lattice(b) ? "whittle" : "product_integral"] = rv_json(pi, b.space());
    vals.push_back(pi);
    if (M == 0) {
      auto g = general_value(b, idx, s, tol);
      routes["decreasing_integral"] = rv_json(g.decreasing, b.space());
      routes["decreasing_n_form"] = rv_json(g.decreasing_n_form, b.space());
      routes["sync_replay"] = rv_json(g.replay, b.space());
      vals.insert(vals.end(), {g.decreasing, g.decreasing_n_form, g.replay});
    }
  }
  bool skipped = false;
  try {
    auto orc = oracle_Phi(b, s, M > 0 ? std::optional<Real>(M) : std::nullopt, budget_of(o));
    routes["oracle"] = rv_json(orc.value, b.space());
    routes["oracle_count"] = orc.count;
    vals.push_back(orc.value);
  } catch (const BudgetExceeded& e) {
    routes["oracle"] = "skipped";
    v.skip("oracle", e.what());
    skipped = true;
  }
  bool agree = true;
  for (const auto& x : vals) agree = agree && rv_eq(x, vals.front(), tol);
  v.add("routes agree", agree && !vals.empty(), f4 ? "" : "lattice fails (F4); only the oracle route applies");
  json rep = v.to_json();
  rep["command"] = "value";
  rep["scenario"] = sc.name;
  rep["start"] = s;
  rep["retirement"] = Num<Real>::str(M);
  rep["routes"] = routes;
  int code = !v.pass() ? kFail : skipped ? kBudget : kPass;
  return emit(rep, o, code, t0);
}

template <class Real>
int cmd_verify(const Options& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto sc = scenario_from_json<Real>(read_json(o.path));
  auto s = resolve_start(sc, o.start);
  std::vector<std::string> suites = o.suites;
  if (suites.empty()) suites = sc.suites;
  if (suites.empty() || (suites.size() == 1 && suites[0] == "all")) suites = suite_names();
  for (const auto& name : suites)
    if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
      throw InputError("unknown suite '" + name + "'");
  json rep{{"command", "verify"}, {"scenario", sc.name}, {"start", s}};
  bool pass = true, skipped = false;
  for (const auto& name : suites) {
    auto v = run_suite(sc, name, s, budget_of(o), tol_of<Real>(o));
    rep["suites"][name] = v.to_json();
    pass = pass && v.pass();
    skipped = skipped || v.any_skipped();
  }
  rep["pass"] = pass;
  return emit(rep, o, !pass ? kFail : skipped ? kBudget : kPass, t0);
}

template <class Real>
int cmd_random(const Options& o) {
  auto t0 = std::chrono::steady_clock::now();
  if (o.count < 0) throw InputError("count must be >= 0");
  EnumerationBudget bud = budget_of(o);
  double atoms = 1;
  for (int i = 0; i < o.max_d; ++i) atoms *= o.max_atoms;
  if (o.max_d < 1 || o.max_atoms < 1 || o.max_H < 1) throw InputError("caps must be positive");
  if (static_cast<std::size_t>(o.max_d) > bud.max_d || atoms > static_cast<double>(bud.max_atoms) ||
      o.max_d * o.max_H > bud.max_horizon) {
    json rep{{"command", "random"}, {"pass", false}, {"error", "caps exceed the enumeration budget"}};
    return emit(rep, o, kBudget, t0);
  }
  static const std::vector<std::string> kinds{"mixed", "product", "sheet", "anchored"};
  if (std::find(kinds.begin(), kinds.end(), o.kind) == kinds.end()) throw InputError("unknown kind '" + o.kind + "'");
  std::vector<std::string> suites = o.suites;
  if (suites.empty() || (suites.size() == 1 && suites[0] == "all")) suites = suite_names();
  gen::Rng rng(o.seed);
  std::map<std::string, std::pair<int, int>> per_suite;
  json failures = json::array();
  int passed = 0, skipped = 0;
  for (int k = 0; k < o.count; ++k) {
    std::string kind = o.kind;
    if (kind == "mixed") kind = k % 4 == 3 ? "sheet" : "product";
    Scenario<Real> sc;
    sc.kind = kind;
    sc.name = "random-" + std::to_string(k);
    // redraw instances whose strategy tree would not fit the budget
    for (int tries = 0;; ++tries) {
      sc.bandit = kind == "product" ? gen::product<Real>(rng, o.max_d, o.max_atoms, o.max_H)
                                    : gen::sheet<Real>(rng, kind == "anchored");
      LatticePoint s0(sc.bandit.dim(), 0);
      double c = 0;
      for (const auto& blk : root_blocks(sc.bandit.lat, s0)) c += strategy_count(sc.bandit.lat, s0, blk, true);
      if (c <= std::min(bud.max_rules, 2e4) || tries > 50) break;
    }
    bool ok = true, skip = false;
    LatticePoint s0(sc.bandit.dim(), 0);
    for (const auto& name : suites) {
      auto v = run_suite(sc, name, s0, bud, tol_of<Real>(o));
      auto& ps = per_suite[name];
      ++ps.second;
      if (v.pass()) ++ps.first;
      ok = ok && v.pass();
      skip = skip || v.any_skipped();
      if (!v.pass()) failures.push_back({{"instance", k}, {"kind", kind}, {"suite", name}, {"report", v.to_json()}});
    }
    passed += ok;
    skipped += skip;
  }
  json rep{{"command", "random"}, {"seed", o.seed}, {"count", o.count}, {"kind", o.kind},
           {"passed", passed}, {"with_skips", skipped}, {"pass", passed == o.count}};
  for (const auto& [name, ps] : per_suite) rep["suites"][name] = std::to_string(ps.first) + "/" + std::to_string(ps.second);
  rep["failures"] = failures;
  return emit(rep, o, passed == o.count ? kPass : kFail, t0);
}

template <class Real>
int dispatch(const std::string& verb, const Options& o) {
  if (verb == "validate") return cmd_validate<Real>(o);
  if (verb == "value") return cmd_value<Real>(o);
  if (verb == "verify") return cmd_verify<Real>(o);
  return cmd_random<Real>(o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic allocation on multi-parameter filtrations: exact values, Gittins indices, checks"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--mode", o.mode, "rational or float")->check(CLI::IsMember({"rational", "float"}));
    c->add_option("--tol", o.tol, "comparison tolerance in float mode");
    c->add_option("--budget", o.budget, "maximum number of enumerated rules or strategies");
    c->add_flag("--timing", o.timing, "add wall-clock seconds to the report");
    c->add_flag("--text", o.text, "plain-text rendering instead of JSON");
  };
  auto* val = app.add_subcommand("validate", "check a scenario file");
  val->add_option("path", o.path)->required();
  common(val);
  auto* value = app.add_subcommand("value", "value of the allocation problem by every applicable route");
  value->add_option("path", o.path)->required();
  value->add_option("--start", o.start, "named start or comma-separated coordinates");
  value->add_option("--retirement", o.retirement, "retirement reward M");
  common(value);
  auto* ver = app.add_subcommand("verify", "run verification suites");
  ver->add_option("path", o.path)->required();
  ver->add_option("--suite", o.suites, "suite name, repeatable, or 'all'");
  ver->add_option("--start", o.start, "named start or comma-separated coordinates");
  common(ver);
  auto* rnd = app.add_subcommand("random", "seeded random instances through the verification suites");
  rnd->add_option("--seed", o.seed);
  rnd->add_option("--count", o.count);
  rnd->add_option("--kind", o.kind, "mixed, product, sheet or anchored");
  rnd->add_option("--suite", o.suites);
  rnd->add_option("--max-d", o.max_d);
  rnd->add_option("--max-atoms", o.max_atoms, "atoms per project");
  rnd->add_option("--max-horizon", o.max_H, "horizon per project");
  common(rnd);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInput;
  }
  std::string verb = app.get_subcommands().front()->get_name();
  try {
    return o.mode == "rational" ? dispatch<Rational>(verb, o) : dispatch<double>(verb, o);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  }
}
