#include "tws/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "tws/decompositions.hpp"
#include "tws/errors.hpp"
#include "tws/measure_io.hpp"
#include "tws/parallel.hpp"

namespace tws {

namespace {

void allowed_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ParseError(where + "." + k, "unknown key");
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key, e.what());
  }
}

int positive(int v, const std::string& where) {
  if (v < 0) throw ParseError(where, "must not be negative");
  return v;
}

FamilySpec family_from(const json& j, const std::string& where, FamilySpec f) {
  allowed_keys(j, where, {"depth", "random_count", "shifted", "max_members"});
  f.depth = positive(get(j, "depth", where, f.depth), where + ".depth");
  f.random_count = positive(get(j, "random_count", where, f.random_count), where + ".random_count");
  f.shifted = get(j, "shifted", where, f.shifted);
  f.max_members = get(j, "max_members", where, f.max_members);
  return f;
}

OperatorBudget operator_from(const json& j, const std::string& where, OperatorBudget b) {
  allowed_keys(j, where, {"points_per_decade", "refine", "refine_iterations", "cells_per_cube", "subset_budget",
                          "f_budget", "panels"});
  b.sup.points_per_decade = get(j, "points_per_decade", where, b.sup.points_per_decade);
  if (b.sup.points_per_decade < 1) throw ParseError(where + ".points_per_decade", "must be at least 1");
  b.sup.refine = get(j, "refine", where, b.sup.refine);
  b.sup.refine_iterations = positive(get(j, "refine_iterations", where, b.sup.refine_iterations), where);
  b.cells_per_cube = get(j, "cells_per_cube", where, b.cells_per_cube);
  if (b.cells_per_cube < 1 || b.cells_per_cube > 30) throw ParseError(where + ".cells_per_cube", "must be in [1, 30]");
  b.subset_budget = positive(get(j, "subset_budget", where, b.subset_budget), where + ".subset_budget");
  b.f_budget = positive(get(j, "f_budget", where, b.f_budget), where + ".f_budget");
  b.panels = get(j, "panels", where, b.panels);
  if (b.panels < 1) throw ParseError(where + ".panels", "must be at least 1");
  return b;
}

PartitionSearch partition_from(const json& j, const std::string& where, PartitionSearch s) {
  allowed_keys(j, where, {"depth", "exhaustive_depth", "root_levels"});
  s.depth = positive(get(j, "depth", where, s.depth), where + ".depth");
  s.exhaustive_depth = positive(get(j, "exhaustive_depth", where, s.exhaustive_depth), where + ".exhaustive_depth");
  s.root_levels = positive(get(j, "root_levels", where, s.root_levels), where + ".root_levels");
  return s;
}

StepAtomicMeasure measure_entry(const json& j, const std::string& where, const std::string& base) {
  if (j.is_string()) {
    std::filesystem::path path(j.get<std::string>());
    if (path.is_relative()) path = std::filesystem::path(base) / path;
    return load_measure(path.string());
  }
  return measure_from_json(j, where);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string normalize(std::string s) {
  for (auto& ch : s) {
    if (ch == ' ' || ch == '-') ch = '_';
    ch = char(std::tolower(static_cast<unsigned char>(ch)));
  }
  return s;
}

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

bool close(double a, double b) {
  if (a == b) return true;
  return std::isfinite(a) && std::isfinite(b) && std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b));
}

json verify_reports(const WeightPair& w, const std::vector<TestingReport>& rs, bool& ok) {
  json out = json::array();
  for (const auto& r : rs) {
    const auto back = TestingReport::from_json(json::parse(r.to_json().dump()));
    const double v = reevaluate(w, back);
    const bool good = close(v, r.estimate);
    ok = ok && good;
    out.push_back({{"condition", r.condition}, {"estimate", jnum(r.estimate)}, {"reevaluated", jnum(v)}, {"ok", good}});
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& base_dir) {
  allowed_keys(j, "config",
               {"p", "seed", "sigma", "omega", "family", "operator_family", "operator", "partition", "asym_c0",
                "corpus", "corpus_pairs", "suite", "search", "plot"});
  ExperimentConfig c;
  c.p = get(j, "p", "config", c.p);
  if (!(c.p > 1.0) || !std::isfinite(c.p)) throw ParseError("config.p", "must be a finite number above 1");
  c.seed = get(j, "seed", "config", c.seed);
  if (j.contains("sigma")) c.sigma = measure_entry(j["sigma"], "config.sigma", base_dir);
  if (j.contains("omega")) c.omega = measure_entry(j["omega"], "config.omega", base_dir);
  if (c.sigma.has_value() != c.omega.has_value())
    throw ParseError(c.sigma ? "config.omega" : "config.sigma", "sigma and omega must be given together");
  if (c.sigma && (c.sigma->is_signed() || c.omega->is_signed()))
    throw ParseError("config", "weights must be unsigned measures");
  if (j.contains("family")) c.family = family_from(j["family"], "config.family", c.family);
  if (j.contains("operator_family"))
    c.op_family = family_from(j["operator_family"], "config.operator_family", c.op_family);
  if (j.contains("operator")) c.op = operator_from(j["operator"], "config.operator", c.op);
  if (j.contains("partition")) c.partition = partition_from(j["partition"], "config.partition", c.partition);
  c.asym_c0 = get(j, "asym_c0", "config", c.asym_c0);
  if (!(c.asym_c0 > 2.0)) throw ParseError("config.asym_c0", "must exceed 2");
  if (j.contains("corpus")) {
    allowed_keys(j["corpus"], "config.corpus",
                 {"root_scale", "levels", "left", "factors", "atom_probability", "atom_mass", "total_mass"});
    try {
      c.corpus = CorpusSpec::from_json(j["corpus"]);
    } catch (const json::exception& e) {
      throw ParseError("config.corpus", e.what());
    }
  }
  c.corpus_pairs = positive(get(j, "corpus_pairs", "config", c.corpus_pairs), "config.corpus_pairs");
  c.suite = get(j, "suite", "config", c.suite);
  if (j.contains("search")) {
    const auto& s = j["search"];
    allowed_keys(s, "config.search", {"target", "count", "top_k"});
    c.search.target = get(s, "target", "config.search", c.search.target);
    c.search.count = positive(get(s, "count", "config.search", c.search.count), "config.search.count");
    c.search.top_k = positive(get(s, "top_k", "config.search", c.search.top_k), "config.search.top_k");
  }
  if (j.contains("plot")) {
    c.plot = j["plot"];
    allowed_keys(c.plot, "config.plot",
                 {"quantity", "measure", "lo", "hi", "points", "spacing", "x0", "j_min", "j_max", "k_min", "k_max",
                  "mesh", "depth_max", "points_per_decade"});
  }
  c.reseed(c.seed);
  return c;
}

void ExperimentConfig::reseed(uint64_t s) {
  seed = s;
  family.seed = mix_seed(s, 1);
  op_family.seed = mix_seed(s, 2);
  op.seed = mix_seed(s, 3);
  corpus.seed = mix_seed(s, 4);
}

WeightPair ExperimentConfig::weights() const {
  if (sigma) return WeightPair(*sigma, *omega, p);
  return corpus_pair(corpus, 0, p);
}

CheckOptions ExperimentConfig::check_options() const {
  CheckOptions o;
  o.seed = seed;
  o.corpus = corpus;
  o.corpus_pairs = corpus_pairs;
  o.family = family;
  o.op_family = op_family;
  o.op = op;
  o.partition = partition;
  if (sigma) o.weights.emplace(*sigma, *omega, p);
  return o;
}

json ExperimentConfig::budgets_json() const {
  return {{"family", family.to_json()},
          {"operator_family", op_family.to_json()},
          {"operator", op.to_json()},
          {"partition", partition.to_json()},
          {"asym_c0", asym_c0}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ":byte " + std::to_string(e.byte), e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return ExperimentConfig::from_json(j, dir.empty() ? "." : dir.string());
}

// ---------------------------------------------------------------- constants

json cmd_constants(const ExperimentConfig& c, bool verify) {
  const WeightPair w = c.weights();
  std::vector<TestingReport> rs;
  json skipped = json::array();
  rs.push_back(ap_constant(w, c.family));
  const auto [sf, sh] = strengthened_ap(w, c.family);
  rs.push_back(sf);
  rs.push_back(sh);
  rs.push_back(poisson_condition_search(w, c.partition));
  rs.push_back(pivotal_search(w, c.partition));
  const auto common = w.common_atoms();
  std::optional<TestingReport> dual;
  if (common.empty()) {
    rs.push_back(forward_testing(w, c.op_family, c.op));
    dual = dual_testing(w, c.op_family, c.op);
    rs.push_back(*dual);
  } else {
    for (const char* n : {"forward_testing", "dual_testing", "maximal_norm", "maximal_norm_dual"})
      skipped.push_back({{"condition", n}, {"reason", "sigma and omega share point masses"}});
  }
  const auto ds = doubling_gamma(w.sigma(), c.family, "sigma");
  const auto dw = doubling_gamma(w.omega(), c.family, "omega");
  rs.push_back(ds.report);
  rs.push_back(dw.report);
  if (common.empty()) {
    const auto [m1, m2] = maximal_norms(w, c.op_family, c.op);
    rs.push_back(m1);
    rs.push_back(m2);
  }
  rs.push_back(asym_ap(w, c.asym_c0, c.family));

  json reports = json::array();
  bool converged = true;
  for (const auto& r : rs) {
    reports.push_back(r.to_json());
    converged = converged && r.converged;
  }
  // cross-condition chain: proven relations between the estimates
  const double ap = rs[0].estimate, s = sf.estimate, h = sh.estimate;
  json chain = json::object();
  bool chain_ok = true;
  auto link = [&](const char* name, double lhs, double rhs) {
    const bool ok = lhs <= rhs * (1 + 1e-12);
    chain_ok = chain_ok && ok;
    chain[name] = {{"lhs", jnum(lhs)}, {"rhs", jnum(rhs)}, {"holds", ok}};
  };
  link("ap_le_2_strengthened", ap, 2.0 * s);
  link("half_le_1.5_strengthened", h, 1.5 * s);
  link("ap_le_3/2_half_strengthened", ap, 1.5 * h);
  if (dual) link("one_probe_le_dual", dual->witness.value("one_probe_estimate", 0.0), dual->estimate);
  json ratios = json::object();
  ratios["strengthened_over_ap"] = ap > 0 ? jnum(s / ap) : json(nullptr);
  if (dual) ratios["pivotal_over_dual"] = dual->estimate > 0 ? jnum(rs[4].estimate / dual->estimate) : json(nullptr);
  chain["ratios"] = ratios;

  json common_j = json::array();
  for (double x : common) common_j.push_back(x);
  json out{{"p", c.p},
           {"seed", c.seed},
           {"budgets", c.budgets_json()},
           {"weights", {{"sigma", measure_to_json(w.sigma())}, {"omega", measure_to_json(w.omega())}}},
           {"common_atoms", common_j},
           {"reports", reports},
           {"skipped", skipped},
           {"doubling_infinite", {{"sigma", ds.infinite}, {"omega", dw.infinite}}},
           {"chain", chain},
           {"chain_holds", chain_ok},
           {"converged", converged}};
  if (verify) {
    bool ok = true;
    out["verification"] = verify_reports(w, rs, ok);
    out["verified"] = ok;
  }
  return out;
}

// ------------------------------------------------------------------- search

namespace {

struct Target {
  const char* name;
  const char* alias;
  const char* numerator;
  const char* denominator;
  double lower_bound;  // proven lower bound of the ratio, 0 if none
};

const Target kTargets[] = {
    {"strengthened/ap", "strengthened/plain a_p ratio", "strengthened_ap", "ap", 0.5},
    {"pivotal/dual", "pivotal vs dual_testing", "pivotal", "dual_testing", 0.0},
    {"ap/testing", "a_p vs testing", "ap", "max(forward_testing, dual_testing)", 0.0},
};

const Target& find_target(const std::string& name) {
  const auto n = normalize(name);
  for (const auto& t : kTargets)
    if (n == t.name || n == normalize(t.alias)) return t;
  throw ParseError("search.target", "unknown target '" + name + "'");
}

}  // namespace

const std::vector<std::string>& search_targets() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> out;
    for (const auto& t : kTargets) out.push_back(t.name);
    return out;
  }();
  return v;
}

json cmd_search(const ExperimentConfig& c, bool verify) {
  const Target& t = find_target(c.search.target);
  const std::string name = t.name;
  const std::size_t n = std::size_t(c.search.count);
  struct Row {
    std::vector<TestingReport> num, den;
    double ratio = 0.0;
  };
  std::vector<Row> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const WeightPair w = corpus_pair(c.corpus, i, c.p);
    Row& r = rows[i];
    if (name == "strengthened/ap") {
      r.num.push_back(strengthened_ap(w, c.family).first);
      r.den.push_back(ap_constant(w, c.family));
    } else if (name == "pivotal/dual") {
      r.num.push_back(pivotal_search(w, c.partition));
      r.den.push_back(dual_testing(w, c.op_family, c.op));
    } else {
      r.num.push_back(ap_constant(w, c.family));
      r.den.push_back(forward_testing(w, c.op_family, c.op));
      r.den.push_back(dual_testing(w, c.op_family, c.op));
    }
    double a = r.num[0].estimate, b = 0.0;
    for (const auto& d : r.den) b = std::max(b, d.estimate);
    r.ratio = b > 0 ? a / b : (a > 0 ? INFINITY : 0.0);
  });
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].ratio > rows[b].ratio; });
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  json findings = json::array();
  bool verified = true;
  for (std::size_t k = 0; k < std::min<std::size_t>(n, std::size_t(c.search.top_k)); ++k) {
    const std::size_t i = order[k];
    const WeightPair w = corpus_pair(c.corpus, i, c.p);
    json num = json::array(), den = json::array();
    for (const auto& r : rows[i].num) num.push_back(r.to_json());
    for (const auto& r : rows[i].den) den.push_back(r.to_json());
    json f{{"rank", k + 1},
           {"index", i},
           {"ratio", jnum(rows[i].ratio)},
           {"numerator", num},
           {"denominator", den},
           {"sigma", measure_to_json(w.sigma())},
           {"omega", measure_to_json(w.omega())}};
    if (verify) {
      auto all = rows[i].num;
      all.insert(all.end(), rows[i].den.begin(), rows[i].den.end());
      f["verification"] = verify_reports(w, all, verified);
    }
    findings.push_back(f);
  }
  json out{{"target", name},
           {"numerator", t.numerator},
           {"denominator", t.denominator},
           {"p", c.p},
           {"seed", c.seed},
           {"count", n},
           {"top_k", c.search.top_k},
           {"corpus", c.corpus.to_json()},
           {"budgets", c.budgets_json()},
           {"min_ratio", n ? jnum(lo) : json(nullptr)},
           {"max_ratio", n ? jnum(hi) : json(nullptr)},
           {"findings", findings}};
  if (t.lower_bound > 0) out["bound"] = {{"lower", t.lower_bound}, {"holds", n == 0 || lo >= t.lower_bound * (1 - 1e-12)}};
  if (verify) out["verified"] = verified;
  return out;
}

// ----------------------------------------------------------------- plotdata

const std::vector<std::string>& plot_quantities() {
  static const std::vector<std::string> v{"t_natural_profile", "poisson_profile", "superlevel_sets",
                                          "condition_vs_scale"};
  return v;
}

std::string cmd_plotdata(const ExperimentConfig& c, const std::string& quantity) {
  const auto q = normalize(quantity);
  const json& pl = c.plot;
  const WeightPair w = c.weights();
  const std::string which = get(pl, "measure", "config.plot", std::string("sigma"));
  if (which != "sigma" && which != "omega") throw ParseError("config.plot.measure", "must be sigma or omega");
  const StepAtomicMeasure& nu = which == "sigma" ? w.sigma() : w.omega();
  std::string csv;
  auto row = [&](std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& s : cells) {
      if (!first) csv += ',';
      csv += s;
      first = false;
    }
    csv += '\n';
  };
  if (q == "t_natural_profile") {
    const double lo = get(pl, "lo", "config.plot", 0.1), hi = get(pl, "hi", "config.plot", 10.0);
    const int n = get(pl, "points", "config.plot", 100);
    const std::string spacing = get(pl, "spacing", "config.plot", std::string("log"));
    if (!(lo < hi) || n < 2) throw ParseError("config.plot", "need lo < hi and at least 2 points");
    if (spacing == "log" && !(lo > 0)) throw ParseError("config.plot.lo", "log spacing needs lo > 0");
    if (spacing != "log" && spacing != "linear") throw ParseError("config.plot.spacing", "must be log or linear");
    const SearchBudget b{get(pl, "points_per_decade", "config.plot", 32), true, 20};
    const std::size_t m = static_cast<std::size_t>(n);
    std::vector<double> xs(m), tn(m), tf(m), mx(m);
    for (int i = 0; i < n; ++i)
      xs[i] = spacing == "log" ? lo * std::pow(hi / lo, double(i) / (n - 1)) : lo + (hi - lo) * i / (n - 1);
    const MaximalFunction M(nu);
    parallel_for(xs.size(), [&](std::size_t i) {
      tn[i] = t_natural(nu, xs[i], b);
      tf[i] = t_flat(nu, xs[i], b);
      mx[i] = M(xs[i]);
    });
    row({"x", "t_natural", "t_flat", "maximal"});
    for (std::size_t i = 0; i < xs.size(); ++i) row({fmt(xs[i]), fmt(tn[i]), fmt(tf[i]), fmt(mx[i])});
  } else if (q == "poisson_profile") {
    const auto hull = nu.support_hull();
    const double x0 = get(pl, "x0", "config.plot", hull ? 0.5 * (hull->first + hull->second) : 0.0);
    const int j0 = get(pl, "j_min", "config.plot", -6), j1 = get(pl, "j_max", "config.plot", 8);
    if (j0 > j1) throw ParseError("config.plot", "need j_min <= j_max");
    row({"length", "poisson_std", "poisson_bold", "poisson_redef", "m_q"});
    for (int j = j0; j <= j1; ++j) {
      const double len = std::ldexp(1.0, j);
      const Interval iv(x0 - 0.5 * len, x0 + 0.5 * len);
      row({fmt(len), fmt(poisson_std(iv, nu)), fmt(poisson_bold(iv, nu)), fmt(poisson_redef(iv, nu)),
           fmt(m_q(iv, nu))});
    }
  } else if (q == "superlevel_sets") {
    const int k0 = get(pl, "k_min", "config.plot", 0), k1 = get(pl, "k_max", "config.plot", 3);
    SuperlevelOptions so;
    so.mesh = get(pl, "mesh", "config.plot", 5);
    so.budget = c.op.sup;
    row({"k", "left", "right", "length"});
    for (int k = k0; k <= k1; ++k)
      for (const auto& iv : superlevel_set(nu, k, so).intervals())
        row({std::to_string(k), fmt(iv.left()), fmt(iv.right()), fmt(iv.length())});
  } else if (q == "condition_vs_scale") {
    const int dmax = get(pl, "depth_max", "config.plot", c.family.depth);
    row({"depth", "members", "ap", "strengthened_ap", "half_strengthened_ap"});
    for (int d = 0; d <= dmax; ++d) {
      FamilySpec f = c.family;
      f.depth = d;
      const auto ap = ap_constant(w, f);
      const auto [s, h] = strengthened_ap(w, f);
      row({std::to_string(d), std::to_string(interval_family(w, f).members.size()), fmt(ap.estimate),
           fmt(s.estimate), fmt(h.estimate)});
    }
  } else {
    throw ParseError("plot.quantity", "unknown quantity '" + quantity + "'");
  }
  return csv;
}

}  // namespace tws
