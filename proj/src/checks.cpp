#include "tws/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "tws/decompositions.hpp"
#include "tws/errors.hpp"
#include "tws/measure_io.hpp"
#include "tws/parallel.hpp"

namespace tws {

json Assertion::to_json() const {
  json j{{"suite", suite}, {"name", name}, {"passed", passed}, {"hard", hard}, {"measured", measured}};
  if (criterion > 0) j["criterion"] = criterion;
  return j;
}

bool CheckResult::passed() const {
  for (const auto& a : assertions)
    if (a.hard && !a.passed) return false;
  return true;
}

json CheckResult::to_json() const {
  json list = json::array();
  int failed = 0, soft = 0;
  for (const auto& a : assertions) {
    list.push_back(a.to_json());
    if (!a.passed) (a.hard ? failed : soft)++;
  }
  return {{"suite", suite},
          {"seed", seed},
          {"passed", passed()},
          {"assertions", list},
          {"hard_failures", failed},
          {"soft_failures", soft}};
}

namespace {

using Rng = std::mt19937_64;
using List = std::vector<Assertion>;

// json has no infinity
json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

// wall time since the previous assertion of the suite
thread_local std::chrono::steady_clock::time_point mark;

Assertion make(const char* name, int criterion, bool passed, json measured, bool hard = true) {
  Assertion a;
  const auto now = std::chrono::steady_clock::now();
  a.seconds = std::chrono::duration<double>(now - mark).count();
  mark = now;
  a.name = name;
  a.criterion = criterion;
  a.passed = passed;
  a.hard = hard;
  a.measured = std::move(measured);
  return a;
}

double unif(Rng& r, double lo, double hi) { return lo + (hi - lo) * std::ldexp(double(r() >> 11), -53); }

StepAtomicMeasure random_step(Rng& rng, int L, int64_t span, int atoms) {
  std::vector<std::pair<int64_t, double>> c;
  for (int64_t i = -span; i < span; ++i)
    if (rng() % 3) c.push_back({i, double(rng() % 17) / 4.0});
  std::vector<Atom> a;
  for (int i = 0; i < atoms; ++i)
    a.push_back({std::ldexp(double(int64_t(rng() % uint64_t(2 * span)) - span), -L), double(rng() % 16 + 1) / 8.0});
  return StepAtomicMeasure::from_cells(L, c, a);
}

// cascade on [0, 4) with cells of length 1/2
CorpusSpec small_cascade(uint64_t seed, double atoms) {
  CorpusSpec s;
  s.root_scale = 2;
  s.levels = 3;
  s.atom_probability = atoms;
  s.seed = seed;
  return s;
}

StepAtomicMeasure cascade(uint64_t seed, uint64_t index, double atoms) {
  auto r = stream(seed, index);
  return cascade_measure(small_cascade(seed, atoms), r);
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

// ------------------------------------------------------------------ measure

List measure_suite(const CheckOptions& o) {
  List out;
  {
    Rng rng = stream(o.seed, 11);
    const auto mu = random_step(rng, 6, 200, 30);
    std::uniform_int_distribution<int64_t> k(-300 * 16, 300 * 16);
    long splits = 0, bad = 0;
    while (splits < 100000) {
      int64_t a = k(rng), b = k(rng), c = k(rng);
      if (a > b) std::swap(a, b);
      if (b > c) std::swap(b, c);
      if (a > b) std::swap(a, b);
      if (a == b || b == c) continue;
      const double x = std::ldexp(double(a), -10), y = std::ldexp(double(b), -10), z = std::ldexp(double(c), -10);
      ++splits;
      bad += mu.mass({x, z}) != mu.mass({x, y}) + mu.mass({y, z});
    }
    out.push_back(make("mass_additivity", 1, bad == 0, {{"splits", splits}, {"mismatches", bad}}));
  }
  {
    int bad = 0;
    for (uint64_t i = 0; i < 20; ++i) {
      const auto mu = cascade(o.seed, 20 + i, 0.5);
      const auto back = measure_from_json(json::parse(measure_to_json(mu).dump()));
      bad += !(back == mu);
    }
    out.push_back(make("json_round_trip", 0, bad == 0, {{"measures", 20}, {"mismatches", bad}}));
  }
  {
    Rng rng = stream(o.seed, 12);
    const auto mu = random_step(rng, 3, 24, 3);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double a = unif(rng, -4.0, 4.0), len = std::exp2(unif(rng, -3.0, 3.0));
      const double e = unif(rng, 1.0, 3.0);
      worst = std::max(worst, integrate_power_kernel(mu, Interval(a, a + len), e) / mu.total_mass());
    }
    out.push_back(make("power_kernel_below_mass", 0, worst <= 1.0 + 1e-9, {{"max_ratio", worst}}));
  }
  return out;
}

// ------------------------------------------------------------------- dyadic

List dyadic_suite(const CheckOptions& o) {
  List out;
  Rng rng = stream(o.seed, 21);
  {
    int bad = 0;
    for (int t = 0; t < 5000; ++t) {
      const Shift s = kAllShifts[rng() % 3];
      const DyadicInterval a(int(rng() % 8) - 4, int64_t(rng() % 41) - 20, s);
      const DyadicInterval b(int(rng() % 8) - 4, int64_t(rng() % 41) - 20, s);
      const bool disjoint = a.right_exact() <= b.left_exact() || b.right_exact() <= a.left_exact();
      bad += !(disjoint || a.contains(b) || b.contains(a));
    }
    out.push_back(make("grid_property", 0, bad == 0, {{"pairs", 5000}, {"violations", bad}}));
  }
  {
    int bad = 0;
    for (int t = 0; t < 2000; ++t) {
      const DyadicInterval q(int(rng() % 20) - 10, int64_t(rng() % 2001) - 1000, kAllShifts[rng() % 3]);
      const int l1 = int(rng() % 7), l2 = int(rng() % 7);
      bad += !(q.ancestor(l1 + l2) == q.ancestor(l1).ancestor(l2));
    }
    out.push_back(make("ancestor_consistency", 0, bad == 0, {{"trials", 2000}, {"violations", bad}}));
  }
  {
    int bad = 0;
    double ratio = 0.0, dil = 0.0;
    for (int t = 0; t < 10000; ++t) {
      const double len = std::exp2(unif(rng, -6.0, 3.0)), x = unif(rng, -20.0, 20.0);
      const Interval q(x, x + len);
      const auto sel = select_shifted_grid(q);
      const Interval three = q.dilate(3.0);
      bad += !(sel.hat.interval().left() <= three.left() && three.right() <= sel.hat.interval().right());
      ratio = std::max(ratio, sel.ratio);
      dil = std::max(dil, sel.dilation_bound);
    }
    out.push_back(make("shifted_grid_dilation", 0, bad == 0 && std::isfinite(ratio),
                       {{"samples", 10000}, {"containment_failures", bad}, {"max_ratio", ratio},
                        {"max_dilation", dil}}));
  }
  return out;
}

// ---------------------------------------------------------------- operators

List operators_suite(const CheckOptions& o) {
  List out;
  {
    // domination M nu <= C t_natural nu, at two sup budgets
    const int n = 50, pts = 100;
    std::vector<double> c16(n, 0.0), c32(n, 0.0), sandwich(n, 0.0), gap(n, 0.0);
    std::vector<int> zero(n, 0);
    parallel_for(n, [&](std::size_t i) {
      const auto nu = cascade(o.seed, 1000 + i, 0.5);
      Rng r = stream(o.seed, 2000 + i);
      const MaximalFunction M(nu);
      for (int s = 0; s < pts; ++s) {
        const double x = unif(r, -2.0, 6.0);
        const double m = M(x);
        if (!std::isfinite(m)) continue;
        const double a = t_natural(nu, x, {16, true, 20}), b = t_natural(nu, x, {32, true, 20});
        const double f = t_flat(nu, x, {32, true, 20});
        if (a <= 0.0 || b <= 0.0) {
          zero[i]++;
          continue;
        }
        c16[i] = std::max(c16[i], m / a);
        c32[i] = std::max(c32[i], m / b);
        sandwich[i] = std::max(sandwich[i], (f - b) / b);
        gap[i] = std::max(gap[i], std::fabs(b - f) / m);
      }
    });
    const double C16 = *std::max_element(c16.begin(), c16.end()), C32 = *std::max_element(c32.begin(), c32.end());
    int zeros = 0;
    for (int z : zero) zeros += z;
    const double change = rel_diff(C16, C32);
    out.push_back(make("domination", 10, zeros == 0 && std::isfinite(C32) && change < 0.1,
                       {{"instances", n}, {"points", pts}, {"C_budget16", C16}, {"C_budget32", C32},
                        {"relative_change", change}, {"zero_t_natural", zeros}}));
    const double sw = *std::max_element(sandwich.begin(), sandwich.end());
    out.push_back(make("t_flat_below_t_natural", 0, sw <= 1e-12, {{"max_excess", sw}}));
    const double g = *std::max_element(gap.begin(), gap.end());
    out.push_back(make("natural_flat_gap", 0, std::isfinite(g), {{"C", g}}, false));
  }
  {
    Rng rng = stream(o.seed, 31);
    double worst = 0.0;
    bool ok = true;
    for (double p : {1.5, 2.0, 3.0}) {
      const double bound = 2.0 * std::pow(p / (p - 1.0), p);
      for (int t = 0; t < 8; ++t) {
        std::vector<std::pair<int64_t, double>> c;
        std::vector<double> fv;
        for (int64_t i = 0; i < 32; ++i) {
          c.push_back({i, double(rng() % 4 + 1)});
          fv.push_back(double(rng() % 9) * ((rng() % 3) ? 0.0 : 1.0));
        }
        const auto mu = StepAtomicMeasure::from_cells(3, c);
        const StepFunction f(3, 0, fv);
        const DyadicMaximal M(mu, f);
        double lhs = 0.0, rhs = 0.0;
        for (int64_t i = 0; i < 32; ++i) {
          const double x = (double(i) + 0.5) / 8.0, m = c[i].second / 8.0;
          lhs += std::pow(M(x), p) * m;
          rhs += std::pow(fv[i], p) * m;
        }
        if (rhs > 0) worst = std::max(worst, lhs / rhs / bound);
        ok = ok && lhs <= bound * rhs + 1e-12;
      }
    }
    out.push_back(make("dyadic_maximal_theorem", 0, ok, {{"max_fraction_of_bound", worst}}));
  }
  return out;
}

// ------------------------------------------------------------------ poisson

List poisson_suite(const CheckOptions& o) {
  List out;
  Rng rng = stream(o.seed, 41);
  {
    double err = 0.0, err_direct = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const double a = unif(rng, -10.0, 10.0), len = std::exp2(unif(rng, -5.0, 4.0));
      const Interval q(a, a + len);
      const auto nu = StepAtomicMeasure::dirac(a + len * unif(rng, 0.0, 1.0));
      const double want = 4.0 / 3.0 / len;
      err = std::max(err, rel_diff(poisson_std(q, nu), want));
      err_direct = std::max(err_direct, rel_diff(poisson_std_direct(q, nu, 60), want));
    }
    out.push_back(make("geometric_tail", 3, err <= 1e-12 && err_direct <= 1e-12,
                       {{"trials", 1000}, {"max_rel_error", err}, {"max_rel_error_direct", err_direct}}));
  }
  {
    double c_pm = 0.0, lo = INFINITY, hi = 0.0, hom = 0.0;
    bool mono = true;
    for (int t = 0; t < 400; ++t) {
      const auto nu = cascade(o.seed, 3000 + t, 0.5);
      const double a = unif(rng, -6.0, 6.0), len = std::exp2(unif(rng, -3.0, 2.0));
      const Interval q(a, a + len);
      const double pb = poisson_bold(q, nu), m = m_q(q, nu);
      if (m > 0) c_pm = std::max(c_pm, pb / m);
      const double ps = poisson_std(q, nu);
      double sum = 0.0;
      for (Shift s : kAllShifts) sum += poisson_dyadic(max_subinterval(q, s), nu);
      if (ps > 0) {
        lo = std::min(lo, sum / ps);
        hi = std::max(hi, sum / ps);
      }
      const auto two = nu.scaled(2.0);
      const auto more = nu + StepAtomicMeasure::dirac(a + 3.0 * len, 0.25);
      const auto cube = max_subinterval(q, Shift::Zero);
      const double v[4] = {pb, ps, poisson_dyadic(cube, nu), poisson_redef(q, nu)};
      const double v2[4] = {poisson_bold(q, two), poisson_std(q, two), poisson_dyadic(cube, two),
                            poisson_redef(q, two)};
      const double vm[4] = {poisson_bold(q, more), poisson_std(q, more), poisson_dyadic(cube, more),
                            poisson_redef(q, more)};
      for (int i = 0; i < 4; ++i) {
        hom = std::max(hom, rel_diff(v2[i], 2.0 * v[i]));
        mono = mono && vm[i] >= v[i] * (1 - 1e-12);
      }
    }
    out.push_back(make("poisson_below_m", 0, std::isfinite(c_pm), {{"C", c_pm}}));
    out.push_back(make("grid_comparability", 0, lo >= 1.0 / 64 && hi <= 64.0, {{"min_ratio", num(lo)}, {"max_ratio", hi}}));
    out.push_back(make("homogeneous_and_monotone", 0, hom <= 1e-12 && mono,
                       {{"max_homogeneity_error", hom}, {"monotone", mono}}));
  }
  return out;
}

// --------------------------------------------------------------- conditions

bool same(double a, double b, double tol) {
  if (a == b) return true;
  return std::isfinite(a) && std::isfinite(b) && rel_diff(a, b) <= tol;
}

std::vector<WeightPair> condition_pairs(const CheckOptions& o, double p) {
  std::vector<WeightPair> pairs;
  for (int i = 0; i < o.corpus_pairs; ++i) pairs.push_back(corpus_pair(o.corpus, uint64_t(i), p));
  if (o.weights) pairs.push_back(*o.weights);
  return pairs;
}

List conditions_suite(const CheckOptions& o) {
  List out;
  {
    const auto leb = StepAtomicMeasure::uniform(-1024.0, 1024.0);
    const WeightPair w(leb, leb, 2.0);
    FamilySpec f;
    f.depth = 10;
    f.random_count = 200;
    f.seed = o.seed;
    const auto ap = ap_constant(w, f);
    const auto [s, h] = strengthened_ap(w, f);
    const double ea = std::fabs(ap.estimate - 1.0), es = std::fabs(s.estimate - 2.0) / 2.0;
    out.push_back(make("lebesgue_constants", 2, ea <= 1e-9 && es <= 0.02,
                       {{"ap", ap.estimate}, {"strengthened", s.estimate}, {"half_strengthened", h.estimate},
                        {"ap_error", ea}, {"strengthened_rel_error", es}}));
  }
  const auto pairs = condition_pairs(o, 2.0);
  int reeval_bad = 0, reports = 0, chain_bad = 0, ratio_bad = 0, probe_bad = 0, mono_bad = 0;
  double worst_reeval = 0.0, min_ratio = INFINITY;
  json per_pair = json::array();
  for (const auto& w : pairs) {
    std::vector<TestingReport> rs{ap_constant(w, o.family), asym_ap(w, 3.0, o.family),
                                  doubling_gamma(w.sigma(), o.family).report,
                                  doubling_gamma(w.omega(), o.family, "omega").report};
    const auto [sf, sh] = strengthened_ap(w, o.family);
    rs.push_back(sf);
    rs.push_back(sh);
    rs.push_back(pivotal_search(w, o.partition));
    rs.push_back(poisson_condition_search(w, o.partition));
    rs.push_back(forward_testing(w, o.op_family, o.op));
    const auto dual = dual_testing(w, o.op_family, o.op);
    rs.push_back(dual);
    const auto [m1, m2] = maximal_norms(w, o.op_family, o.op);
    rs.push_back(m1);
    rs.push_back(m2);
    json est = json::object();
    for (const auto& r : rs) {
      const auto back = TestingReport::from_json(json::parse(r.to_json().dump()));
      const double v = reevaluate(w, back);
      ++reports;
      if (!same(v, r.estimate, 1e-9)) ++reeval_bad;
      if (std::isfinite(v) && std::isfinite(r.estimate)) worst_reeval = std::max(worst_reeval, rel_diff(v, r.estimate));
      est[r.condition] = num(r.estimate);
    }
    per_pair.push_back(est);
    chain_bad += !(rs[0].estimate <= 2.0 * sf.estimate * (1 + 1e-12));
    chain_bad += !(sh.estimate <= 1.5 * sf.estimate * (1 + 1e-12));
    for (const auto& m : interval_family(w, o.family).members) {
      const double a = ap_value(w, m.q);
      if (a <= 0) continue;
      const double r = strengthened_ap_value(w, m.q) / a;
      min_ratio = std::min(min_ratio, r);
      ratio_bad += r < 0.5 * (1 - 1e-12);
    }
    const double probe = dual.witness.value("one_probe_estimate", 0.0);
    probe_bad += !(probe <= dual.estimate * (1 + 1e-12));
    FamilySpec bigger = o.family;
    bigger.depth += 2;
    mono_bad += !(ap_constant(w, bigger).estimate >= rs[0].estimate);
    PartitionSearch deeper = o.partition;
    deeper.depth += 1;
    mono_bad += !(pivotal_search(w, deeper).estimate >= rs[6].estimate * (1 - 1e-12));
  }
  out.push_back(make("witness_reevaluation", 0, reeval_bad == 0,
                     {{"reports", reports}, {"mismatches", reeval_bad}, {"max_rel_diff", worst_reeval},
                      {"estimates", per_pair}}));
  out.push_back(make("ap_chain", 0, chain_bad == 0, {{"violations", chain_bad}}));
  out.push_back(make("strengthened_over_ap", 0, ratio_bad == 0, {{"min_ratio", num(min_ratio)}, {"violations", ratio_bad}}));
  out.push_back(make("dual_one_probe", 0, probe_bad == 0, {{"violations", probe_bad}}));
  out.push_back(make("budget_monotonicity", 0, mono_bad == 0, {{"violations", mono_bad}}));
  {
    const WeightPair w(StepAtomicMeasure::uniform(0.0, 4.0), StepAtomicMeasure{}, 2.0);
    const double a = ap_constant(w, o.family).estimate, s = strengthened_ap(w, o.family).first.estimate;
    out.push_back(make("empty_omega", 0, a == 0.0 && s == 0.0, {{"ap", a}, {"strengthened", s}}));
  }
  return out;
}

// ------------------------------------------------------------ decompositions

double dyadic_doubling(const StepAtomicMeasure& s, Shift g, int lo, int hi) {
  const auto hull = s.support_hull();
  double rho = 1.0;
  for (int j = lo; j < hi; ++j) {
    const auto a = locate(g, hull->first, j + 1), b = locate(g, hull->second, j + 1);
    for (int64_t k = a.index(); k <= b.index(); ++k) {
      const DyadicInterval par(j + 1, k, g);
      const double mp = s.mass(par.interval());
      const auto [c0, c1] = par.children();
      for (const auto& c : {c0, c1}) {
        const double mc = s.mass(c.interval());
        if (mc > 0) rho = std::max(rho, mp / mc);
      }
    }
  }
  return rho;
}

List decomp_suite(const CheckOptions& o) {
  List out;
  {
    const int n = 100;
    struct R {
      bool ok = true, nested = true, chain = true;
      int overlap = 0;
      double lo = INFINITY, hi = 0.0, n_req = 0.0, M = 0.0;
      std::size_t cubes = 0;
      json fail;
    };
    std::vector<R> res(n);
    parallel_for(n, [&](std::size_t i) {
      const auto nu = cascade(o.seed, 4000 + i, 0.3);
      const int k = int(mix_seed(o.seed, 4200 + i) % 3);
      SuperlevelOptions so;
      so.mesh = 5;
      const auto om = superlevel_set(nu, k, so);
      const auto wk = whitney(om, 12.0, Shift::Zero, 9, k);
      const auto wk2 = whitney(superlevel_set(nu, k + 2, so), 12.0, Shift::Zero, 9, k + 2);
      const auto rep = verify_whitney(wk);
      R& r = res[i];
      r.ok = rep.ok() && rep.overlap <= 64;
      if (!r.ok) r.fail = rep.to_json();
      r.overlap = rep.overlap;
      r.cubes = wk.cubes.size();
      r.nested = nested_check(wk, wk2).ok();
      const auto cmp = comparability(wk, whitney(om, 12.0, Shift::Third, 5, k), 5);
      if (cmp.pairs > 0) {
        r.lo = cmp.min_ratio;
        r.hi = cmp.max_ratio;
      }
      const auto ch = shifted_chain(wk);
      r.chain = ch.chain_ok();
      r.n_req = ch.n_required;
      r.M = ch.M;
    });
    bool ok = true, nested = true, chain = true;
    int overlap = 0;
    double lo = INFINITY, hi = 0.0, nreq = 0.0, M = 0.0;
    std::size_t cubes = 0;
    json fail = nullptr;
    for (const auto& r : res) {
      if (!r.ok && fail.is_null()) fail = r.fail;
      ok = ok && r.ok;
      nested = nested && r.nested;
      chain = chain && r.chain;
      overlap = std::max(overlap, r.overlap);
      lo = std::min(lo, r.lo);
      hi = std::max(hi, r.hi);
      nreq = std::max(nreq, r.n_req);
      M = std::max(M, r.M);
      cubes += r.cubes;
    }
    out.push_back(make("whitney", 4, ok,
                       {{"sets", n}, {"cubes", cubes}, {"max_overlap_N9", overlap}, {"first_failure", fail}}));
    out.push_back(make("whitney_nested", 0, nested, {{"sets", n}}));
    out.push_back(make("whitney_comparability", 0, lo >= 1.0 / 32 && hi <= 32.0,
                       {{"N", 5}, {"min_ratio", num(lo)}, {"max_ratio", hi}}));
    out.push_back(make("shifted_chain", 0, chain, {{"max_dilation", M}, {"max_N_required", nreq}}));
  }
  {
    const int n = 100;
    struct R {
      bool ok = true, summable = true, bound = true, warn = false;
      double frac = 0.0, worst_mean = 0.0;
      json fail;
    };
    std::vector<R> res(n);
    parallel_for(n, [&](std::size_t i) {
      CorpusSpec cs;
      cs.root_scale = 4;
      cs.levels = 6;
      cs.seed = o.seed;
      auto r1 = stream(o.seed, 5000 + i);
      const auto sigma = cascade_measure(cs, r1);
      Rng r = stream(o.seed, 5200 + i);
      const int64_t first = int64_t(r() % 32);
      std::vector<double> vals(16 + r() % 17);
      for (auto& v : vals) v = unif(r, -8.0, 8.0) * double(r() % 4 != 0);
      const StepFunction f(2, first, vals);
      const Shift g = i % 4 == 3 ? kAllShifts[1 + r() % 2] : Shift::Zero;
      const double p = std::vector<double>{1.5, 2.0, 3.0}[r() % 3];
      // gamma at least the parent/child mass ratio, so one step up stays below gamma^{t+1}
      const double gamma = std::max(2.0, dyadic_doubling(sigma, g, -4, 6)) * double(1 + r() % 2);
      // heights start at the global average: below it no stopping cube exists for a finite sigma
      double global = 0.0;
      for (std::size_t c = 0; c < vals.size(); ++c) {
        const double a = double(first + int64_t(c)) / 4.0;
        global += std::fabs(vals[c]) * sigma.mass({a, a + 0.25});
      }
      global /= sigma.total_mass();
      const int t = (global > 0 ? int(std::ceil(std::log(global) / std::log(gamma) - 1e-12)) : 0) + int(r() % 3);
      const auto cz = cz_split(f, sigma, gamma, t, g);
      const auto rep = verify_cz(cz, f, sigma, p);
      R& x = res[i];
      x.ok = rep.ok() && !cz.root_exceeds;
      if (!x.ok) {
        x.fail = rep.to_json();
        x.fail["root_exceeds"] = cz.root_exceeds;
      }
      x.warn = cz.doubling_warning;
      x.worst_mean = rep.worst_mean;
      if (g == Shift::Zero) {
        const double bound = 2.0 * std::pow(p / (p - 1.0), p);
        x.summable = rep.summability <= rep.maximal_constant * (1 + 1e-12);
        x.bound = rep.maximal_constant <= bound;
        x.frac = rep.maximal_constant / bound;
      }
    });
    bool ok = true, summable = true, bound = true;
    int warnings = 0;
    double frac = 0.0, wm = 0.0;
    json fail = nullptr;
    for (const auto& x : res) {
      if (!x.ok && fail.is_null()) fail = x.fail;
      ok = ok && x.ok;
      summable = summable && x.summable;
      bound = bound && x.bound;
      warnings += x.warn;
      frac = std::max(frac, x.frac);
      wm = std::max(wm, x.worst_mean);
    }
    out.push_back(make("calderon_zygmund", 5, ok && summable && bound,
                       {{"instances", n}, {"invariants", ok}, {"summability_below_measured", summable},
                        {"measured_within_maximal_bound", bound}, {"max_fraction_of_bound", frac},
                        {"worst_mean", wm}, {"doubling_warnings", warnings}, {"first_failure", fail}}));
  }
  {
    const int n = 50;
    std::vector<double> c9(n), c10(n), c10all(n);
    std::vector<int> flagged(n);
    parallel_for(n, [&](std::size_t i) {
      Rng r = stream(o.seed, 6000 + i);
      std::vector<std::pair<int64_t, double>> cells;
      for (int64_t c = 8; c < 12; ++c) cells.push_back({c, unif(r, 0.25, 1.5)});
      const auto nu = StepAtomicMeasure::from_cells(2, cells, {{std::ldexp(double(r() % 16), -4), unif(r, 0.5, 1.5)}});
      const int k = int(r() % 2);
      SuperlevelOptions so;
      so.mesh = 10;
      const auto a = max_principle_check(nu, whitney(superlevel_set(nu, k, so), 12.0, Shift::Zero, 9, k), 4);
      so.mesh = 11;
      const auto b = max_principle_check(nu, whitney(superlevel_set(nu, k, so), 12.0, Shift::Zero, 9, k), 4);
      // same cube scales on both meshes: those admissible on the coarser one
      c9[i] = a.C;
      c10[i] = b.C_from(2 - 10);
      c10all[i] = b.C;
      flagged[i] = a.flagged + b.flagged;
    });
    double worst = 0.0, cmax = 0.0, call = 0.0;
    int fl = 0;
    bool finite = true;
    for (int i = 0; i < n; ++i) {
      finite = finite && std::isfinite(c9[i]) && std::isfinite(c10[i]) && std::isfinite(c10all[i]);
      if (c9[i] > 0) worst = std::max(worst, std::fabs(c10[i] - c9[i]) / c9[i]);
      cmax = std::max(cmax, c10[i]);
      call = std::max(call, c10all[i]);
      fl += flagged[i];
    }
    out.push_back(make("maximum_principle", 6, finite && fl == 0 && worst < 0.2,
                       {{"instances", n}, {"meshes", {10, 11}}, {"min_cube_scale", 2 - 10}, {"max_C", num(cmax)},
                        {"max_C_all_scales_mesh11", num(call)}, {"max_relative_change", num(worst)},
                        {"flagged", fl}}));
  }
  {
    json runs = json::array();
    bool finite = true;
    SuperlevelOptions so;
    so.mesh = 5;
    for (const auto& w : condition_pairs(o, 2.0)) {
      const auto tstar = dual_testing(w, o.op_family, o.op).estimate;
      const auto hull = w.sigma().support_hull();
      const int64_t a = int64_t(std::floor(hull->first * 4)), b = int64_t(std::ceil(hull->second * 4));
      Rng r = stream(o.seed, 7000 + runs.size());
      std::vector<double> vals(std::size_t(b - a));
      for (auto& v : vals) v = unif(r, 0.0, 4.0);
      const StepFunction f(2, a, vals);
      for (double beta : {0.25, 0.0625})
        for (int k : {0, 1}) {
          const auto gl = good_lambda_check(w, f, beta, k, so);
          const double C = gl.needed_constant(beta, tstar, 2.0);
          finite = finite && std::isfinite(C);
          json j = gl.to_json();
          j["beta"] = beta;
          j["k"] = k;
          j["tstar"] = tstar;
          j["C"] = num(C);
          runs.push_back(j);
        }
    }
    out.push_back(make("good_lambda", 0, finite, {{"runs", runs}}, false));
  }
  return out;
}

// ------------------------------------------------------------- inequalities

std::vector<DyadicInterval> random_pieces(Rng& r, const DyadicInterval& root, int depth) {
  std::vector<DyadicInterval> out;
  std::vector<std::pair<DyadicInterval, int>> todo{{root, 0}};
  while (!todo.empty()) {
    const auto [q, d] = todo.back();
    todo.pop_back();
    if (d < depth && r() % 3 != 0) {
      const auto [a, b] = q.children();
      todo.push_back({b, d + 1});
      todo.push_back({a, d + 1});
    } else if (r() % 5 != 0) {
      out.push_back(q);
    }
  }
  if (out.empty()) out.push_back(root);
  return out;
}

List inequalities_suite(const CheckOptions& o) {
  List out;
  {
    const int n = 200;
    const double ps[3] = {1.25, 1.5, 2.0};
    std::vector<double> slack(n, INFINITY);
    std::vector<int> checked(n, 0);
    parallel_for(n, [&](std::size_t i) {
      Rng r = stream(o.seed, 8000 + i);
      const auto s = cascade(o.seed, 8200 + 2 * i, 0.3), w = cascade(o.seed, 8201 + 2 * i, 0.3);
      const Shift g = kAllShifts[r() % 3];
      const auto root = locate(g, unif(r, 0.0, 4.0), int(r() % 3));
      const auto pieces = random_pieces(r, root, 5);
      for (double p : ps) {
        const WeightPair wp(s, w, p);
        for (int ell = 0; ell <= 12; ++ell) {
          const auto e = ell_level(wp, pieces, ell);
          const double b = e.bound();
          if (b > 0) slack[i] = std::min(slack[i], (b - e.lhs) / b);
          else if (e.lhs > 0) slack[i] = -INFINITY;
          ++checked[i];
        }
      }
    });
    const double worst = *std::min_element(slack.begin(), slack.end());
    int total = 0;
    for (int c : checked) total += c;
    out.push_back(make("ell_level_estimate", 7, worst >= -1e-6,
                       {{"families", n}, {"p", {1.25, 1.5, 2.0}}, {"max_ell", 12}, {"evaluations", total},
                        {"min_relative_slack", num(worst)}}));
  }
  {
    Rng r = stream(o.seed, 81);
    double worst = INFINITY, qmin = INFINITY;
    int done = 0;
    for (int t = 0; done < 200 && t < 2000; ++t) {
      const double a = unif(r, -2.0, 6.0), len = std::exp2(unif(r, -3.0, 1.0));
      const Interval I(a, a + len);
      CorpusSpec cs = small_cascade(o.seed, 0.5);
      cs.root_scale = 3;
      cs.levels = 4;
      cs.left = -2.0;
      auto rs = stream(o.seed, 9000 + uint64_t(t));
      const auto nu = cascade_measure(cs, rs).restricted_complement(I);
      if (nu.empty()) continue;
      ++done;
      const auto res = neccinequ(nu, I);
      const double rhs = res.rhs();
      worst = std::min(worst, rhs > 0 ? (rhs - res.poisson) / rhs : (res.poisson > 0 ? -INFINITY : 0.0));
      qmin = std::min(qmin, res.quotient);
    }
    out.push_back(make("neccinequ", 8, done == 200 && worst >= -1e-9,
                       {{"instances", done}, {"min_relative_slack", num(worst)}, {"min_quotient", num(qmin)}}));
  }
  {
    Rng r = stream(o.seed, 82);
    int bad_overlap = 0, bad_mesh = 0, uncovered = 0, worst = 0;
    for (int t = 0; t < 100; ++t) {
      std::vector<DilatedCube> in;
      for (int i = 0; i < 60; ++i) {
        const int j = int(r() % 6) - 3;
        in.push_back({DyadicInterval(j, int64_t(r() % uint64_t(64 >> (j + 3))) - 4), 3});
      }
      const auto kept = besicovitch_maximal(in);
      std::vector<Interval> iv;
      for (const auto& d : kept) iv.push_back(d.interval());
      const int m = max_overlap(iv);
      bad_overlap += m > 3;
      // every mesh point of the endpoint grid
      int mesh_worst = 0;
      for (int64_t k = -1024; k <= 1024; ++k) {
        const double x = std::ldexp(double(k), -5);
        int c = 0;
        for (const auto& q : iv) c += q.contains(x);
        mesh_worst = std::max(mesh_worst, c);
      }
      bad_mesh += mesh_worst > 3;
      worst = std::max(worst, mesh_worst);
      for (const auto& d : in) {
        bool cov = false;
        for (const auto& q : iv) cov = cov || q.contains(d.interval());
        uncovered += !cov;
      }
    }
    out.push_back(make("besicovitch_overlap", 9, bad_overlap == 0 && bad_mesh == 0 && uncovered == 0,
                       {{"families", 100}, {"M", 3}, {"max_mesh_overlap", worst}, {"uncovered_inputs", uncovered}}));
  }
  {
    Rng r = stream(o.seed, 83);
    long bad = 0;
    double margin = INFINITY;
    for (int t = 0; t < 100000; ++t) {
      const double a = unif(r, -50.0, 50.0), len = std::exp2(unif(r, -8.0, 8.0));
      const Interval q(a, a + len);
      double x = unif(r, -100.0, 100.0), y = unif(r, -100.0, 100.0);
      if (x == y) continue;
      if (y > x) std::swap(x, y);
      const double lhs = 1.0 / (x - y), rhs = tail_weight(q, x) * tail_weight(q, y) / len;
      bad += !(lhs >= rhs);
      margin = std::min(margin, lhs / rhs);
    }
    out.push_back(make("kernel_lower_bound", 11, bad == 0, {{"triples", 100000}, {"violations", bad}, {"min_ratio", margin}}));
  }
  {
    int bad = 0;
    double worst = INFINITY;
    for (int t = 0; t < 20; ++t) {
      Rng r = stream(o.seed, 9500 + t);
      const WeightPair w(cascade(o.seed, 9600 + 2 * t, 0.0), cascade(o.seed, 9601 + 2 * t, 0.0),
                         1.5 + double(r() % 3) * 0.5);
      const double a = 1.0 + double(r() % 8) * 0.25, rr = 0.25 * double(r() % 4 + 1);
      const auto pr = strengthened_ap_necessity_probe(w, Interval(a - rr, a), a, rr);
      if (pr.lower > 0) worst = std::min(worst, pr.h_integral / pr.lower);
      bad += !(pr.h_integral >= pr.lower * (1 - 1e-6));
    }
    out.push_back(make("necessity_probe", 0, bad == 0, {{"trials", 20}, {"min_ratio", num(worst)}}));
  }
  return out;
}

struct Suite {
  const char* name;
  List (*run)(const CheckOptions&);
};

const Suite kSuites[] = {{"measure", measure_suite},       {"dyadic", dyadic_suite},
                         {"operators", operators_suite},   {"poisson", poisson_suite},
                         {"conditions", conditions_suite}, {"decomp", decomp_suite},
                         {"inequalities", inequalities_suite}};

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : kSuites) v.push_back(s.name);
    v.push_back("all");
    return v;
  }();
  return names;
}

bool is_suite(const std::string& name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

CheckResult run_check(const std::string& suite, const CheckOptions& o,
                      const std::function<void(const Assertion&)>& progress) {
  if (!is_suite(suite)) throw ParseError("suite", "unknown suite '" + suite + "'");
  CheckResult res;
  res.suite = suite;
  res.seed = o.seed;
  for (const auto& s : kSuites) {
    if (suite != "all" && suite != s.name) continue;
    mark = std::chrono::steady_clock::now();
    auto list = s.run(o);
    for (auto& a : list) {
      a.suite = s.name;
      if (progress) progress(a);
      res.assertions.push_back(std::move(a));
    }
  }
  return res;
}

}  // namespace tws
