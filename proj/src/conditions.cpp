#include "tws/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "tws/errors.hpp"
#include "tws/parallel.hpp"
#include "tws/quadrature.hpp"

namespace tws {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// splitmix64, so that per-candidate generators do not depend on the schedule
uint64_t mix(uint64_t seed, uint64_t i) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// First strict maximum, so ties go to the lowest index whatever the schedule.
template <class F>
std::pair<std::size_t, double> parallel_argmax(std::size_t n, F f) {
  std::vector<double> v(n, -kInf);
  parallel_for(n, [&](std::size_t i) {
    const double x = f(i);
    v[i] = std::isnan(x) ? -kInf : x;
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return {best, n ? v[best] : 0.0};
}

std::optional<std::pair<double, double>> joint_hull(
    const std::vector<const StepAtomicMeasure*>& ms) {
  std::optional<std::pair<double, double>> h;
  for (const auto* m : ms) {
    const auto mh = m->support_hull();
    if (!mh) continue;
    if (!h) {
      h = mh;
    } else {
      h->first = std::min(h->first, mh->first);
      h->second = std::max(h->second, mh->second);
    }
  }
  return h;
}

int finest_resolution(const std::vector<const StepAtomicMeasure*>& ms) {
  int L = -60;
  for (const auto* m : ms) L = std::max(L, m->resolution());
  return L;
}

int support_scale(double extent) {
  return static_cast<int>(std::ceil(std::log2(std::max(extent, 1e-300)))) + 1;
}

double pos_pow(double x, double e) { return x > 0.0 ? std::pow(x, e) : 0.0; }

// chi_Q f mu with f constant on the n equal subcells of Q
StepAtomicMeasure subcell_measure(const StepAtomicMeasure& mu, const Interval& q,
                                  const std::vector<double>& f) {
  const std::size_t n = f.size();
  const double h = q.length() / static_cast<double>(n);
  auto edge = [&](std::size_t j) { return j == n ? q.right() : q.left() + h * static_cast<double>(j); };
  std::vector<Segment> segs;
  std::vector<Atom> atoms;
  bool neg = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (f[j] == 0.0) continue;
    neg |= f[j] < 0.0;
    const double a = edge(j), b = edge(j + 1);
    for (const auto& s : mu.segments()) {
      const double lo = std::max(a, s.a), hi = std::min(b, s.b);
      if (hi > lo) segs.push_back({lo, hi, s.density * f[j]});
    }
    for (const auto& at : mu.atoms())
      if (a <= at.x && at.x < b) atoms.push_back({at.x, at.m * f[j]});
  }
  return StepAtomicMeasure::from_segments(mu.resolution(), std::move(segs), std::move(atoms), neg);
}

double lp_norm_p(const StepAtomicMeasure& mu, const Interval& q, const std::vector<double>& f, double p) {
  const std::size_t n = f.size();
  const double h = q.length() / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = q.left() + h * static_cast<double>(j);
    const double b = j + 1 == n ? q.right() : a + h;
    if (f[j] != 0.0) acc += std::pow(std::fabs(f[j]), p) * mu.mass({a, b});
  }
  return acc;
}

std::vector<Interval> mask_to_intervals(const Interval& q, uint64_t mask, int n) {
  const double h = q.length() / n;
  std::vector<Interval> out;
  int j = 0;
  while (j < n) {
    if (!((mask >> j) & 1)) {
      ++j;
      continue;
    }
    int k = j;
    while (k < n && ((mask >> k) & 1)) ++k;
    const double a = q.left() + h * j, b = k == n ? q.right() : q.left() + h * k;
    out.emplace_back(a, b);
    j = k;
  }
  return out;
}

json budget_json(const SearchBudget& b) {
  return {{"points_per_decade", b.points_per_decade},
          {"refine", b.refine},
          {"refine_iterations", b.refine_iterations}};
}

SearchBudget budget_from(const json& j) {
  SearchBudget b;
  b.points_per_decade = j.at("points_per_decade").get<int>();
  b.refine = j.at("refine").get<bool>();
  b.refine_iterations = j.at("refine_iterations").get<int>();
  return b;
}

}  // namespace

// ------------------------------------------------------------------ plumbing

json TestingReport::to_json() const {
  return {{"condition", condition},
          {"estimate", estimate},
          {"witness", witness},
          {"budget", budget},
          {"converged", converged}};
}

TestingReport TestingReport::from_json(const json& j) {
  TestingReport r;
  r.condition = j.at("condition").get<std::string>();
  r.estimate = j.at("estimate").get<double>();
  r.witness = j.at("witness");
  r.budget = j.value("budget", json::object());
  r.converged = j.value("converged", true);
  return r;
}

json FamilySpec::to_json() const {
  return {{"depth", depth},
          {"random_count", random_count},
          {"seed", seed},
          {"shifted", shifted},
          {"max_members", max_members}};
}

json PartitionSearch::to_json() const {
  return {{"depth", depth}, {"exhaustive_depth", exhaustive_depth}, {"root_levels", root_levels}};
}

json OperatorBudget::to_json() const {
  return {{"sup", budget_json(sup)},   {"cells_per_cube", cells_per_cube},
          {"subset_budget", subset_budget}, {"f_budget", f_budget},
          {"panels", panels},          {"seed", seed}};
}

json interval_json(const Interval& q) { return json::array({q.left(), q.right()}); }

Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json cube_json(const DyadicInterval& c) {
  return {{"scale", c.scale()}, {"index", c.index()}, {"shift", shift_name(c.shift())}};
}

DyadicInterval cube_from(const json& j) {
  const auto name = j.at("shift").get<std::string>();
  Shift s = Shift::Zero;
  bool found = false;
  for (Shift a : kAllShifts)
    if (name == shift_name(a)) {
      s = a;
      found = true;
    }
  if (!found) throw ParseError("witness", "unknown grid shift '" + name + "'");
  return {j.at("scale").get<int>(), j.at("index").get<int64_t>(), s};
}

IntervalFamily interval_family(std::vector<const StepAtomicMeasure*> measures,
                               const FamilySpec& spec) {
  IntervalFamily fam;
  const auto hull = joint_hull(measures);
  if (!hull) return fam;
  const int L = finest_resolution(measures);
  const double cell = std::ldexp(1.0, -L);
  const double lo = hull->first, hi = hull->second;
  const int J0 = support_scale(std::max(hi - lo, cell));
  const int jmin = std::max(J0 - spec.depth, -L);
  std::vector<Shift> grids{Shift::Zero};
  if (spec.shifted) grids = {Shift::Zero, Shift::Third, Shift::TwoThirds};
  for (Shift a : grids) {
    for (int j = J0; j >= jmin; --j) {
      const auto first = locate(a, lo, j), last = locate(a, hi, j);
      if (fam.members.size() + static_cast<std::size_t>(last.index() - first.index() + 1) >
          spec.max_members) {
        fam.truncated = true;
        break;
      }
      for (int64_t k = first.index(); k <= last.index(); ++k) {
        const DyadicInterval c(j, k, a);
        fam.members.push_back({c.interval(), c});
      }
    }
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < spec.random_count; ++i) {
    const double len = std::exp2(-L + (J0 + L) * u01(rng));
    const double a = lo - len + (hi - lo + len) * u01(rng);
    if (!(a + len > a)) continue;
    fam.members.push_back({Interval(a, a + len), std::nullopt});
  }
  return fam;
}

IntervalFamily interval_family(const WeightPair& w, const FamilySpec& spec) {
  return interval_family({&w.sigma(), &w.omega()}, spec);
}

namespace {

json member_witness(const FamilyMember& m) {
  json j{{"interval", interval_json(m.q)}};
  if (m.cube) j["cube"] = cube_json(*m.cube);
  return j;
}

json family_budget(const FamilySpec& spec, const IntervalFamily& fam) {
  json j = spec.to_json();
  j["members"] = fam.members.size();
  j["truncated"] = fam.truncated;
  return j;
}

}  // namespace

// --------------------------------------------------------------- A_p family

double ap_value(const WeightPair& w, const Interval& q) {
  const double s = w.sigma().mass(q), o = w.omega().mass(q);
  if (s <= 0.0 || o <= 0.0) return 0.0;
  const double len = q.length();
  return std::pow(o / len, 1.0 / w.p()) * std::pow(s / len, 1.0 / w.p_dual());
}

double strengthened_ap_value(const WeightPair& w, const Interval& q) {
  const double o = integrate_power_kernel(w.omega(), q, w.p());
  if (o <= 0.0) return 0.0;
  const double s = integrate_power_kernel(w.sigma(), q, w.p_dual());
  return std::pow(o, 1.0 / w.p()) * pos_pow(s, 1.0 / w.p_dual()) / q.length();
}

double half_strengthened_ap_value(const WeightPair& w, const Interval& q) {
  const double o = w.omega().mass(q);
  if (o <= 0.0) return 0.0;
  const double s = integrate_power_kernel(w.sigma(), q, w.p_dual());
  return std::pow(o, 1.0 / w.p()) * pos_pow(s, 1.0 / w.p_dual()) / q.length();
}

double asym_value(const WeightPair& w, const Interval& q, const Interval& qprime) {
  return w.omega().mass(q) * pos_pow(w.sigma().mass(qprime), w.p() - 1.0) /
         std::pow(q.length(), w.p());
}

TestingReport ap_constant(const WeightPair& w, const FamilySpec& family) {
  const auto fam = interval_family(w, family);
  TestingReport r;
  r.condition = "ap";
  r.budget = family_budget(family, fam);
  r.converged = !fam.truncated;
  if (fam.members.empty()) return r;
  const auto [i, v] = parallel_argmax(fam.members.size(),
                                      [&](std::size_t k) { return ap_value(w, fam.members[k].q); });
  r.estimate = std::max(v, 0.0);
  r.witness = member_witness(fam.members[i]);
  return r;
}

std::pair<TestingReport, TestingReport> strengthened_ap(const WeightPair& w,
                                                        const FamilySpec& family) {
  const auto fam = interval_family(w, family);
  TestingReport full, half;
  full.condition = "strengthened_ap";
  half.condition = "half_strengthened_ap";
  full.budget = half.budget = family_budget(family, fam);
  full.converged = half.converged = !fam.truncated;
  const std::size_t n = fam.members.size();
  if (n == 0) return {full, half};
  std::vector<double> vf(n), vh(n);
  parallel_for(n, [&](std::size_t k) {
    const Interval& q = fam.members[k].q;
    const double o = w.omega().mass(q);
    const double op = integrate_power_kernel(w.omega(), q, w.p());
    if (op <= 0.0) return;
    const double s = integrate_power_kernel(w.sigma(), q, w.p_dual());
    const double sf = pos_pow(s, 1.0 / w.p_dual()) / q.length();
    vf[k] = std::pow(op, 1.0 / w.p()) * sf;
    vh[k] = pos_pow(o, 1.0 / w.p()) * sf;
  });
  std::size_t bf = 0, bh = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (vf[k] > vf[bf]) bf = k;
    if (vh[k] > vh[bh]) bh = k;
  }
  full.estimate = vf[bf];
  full.witness = member_witness(fam.members[bf]);
  half.estimate = vh[bh];
  half.witness = member_witness(fam.members[bh]);
  return {full, half};
}

TestingReport asym_ap(const WeightPair& w, double c0, const FamilySpec& family) {
  if (!(c0 > 2.0)) throw PreconditionError("asym_ap requires c0 > 2");
  const auto fam = interval_family(w, family);
  TestingReport r;
  r.condition = "asym_ap";
  r.budget = family_budget(family, fam);
  r.budget["c0"] = c0;
  r.converged = !fam.truncated;
  const std::size_t n = fam.members.size();
  if (n == 0) return r;
  auto partner = [&](std::size_t k) {
    const Interval& q = fam.members[k / 2].q;
    const double shift = (c0 + 1.0) * q.length() * ((k % 2) ? 1.0 : -1.0);
    return Interval(q.left() + shift, q.right() + shift);
  };
  const auto [i, v] = parallel_argmax(2 * n, [&](std::size_t k) {
    return asym_value(w, fam.members[k / 2].q, partner(k));
  });
  r.estimate = std::max(v, 0.0);
  r.witness = {{"Q", interval_json(fam.members[i / 2].q)}, {"Qprime", interval_json(partner(i))}};
  return r;
}

double dyadic_ap_over(const WeightPair& w, const std::vector<DyadicInterval>& cubes) {
  double best = 0.0;
  for (const auto& c : cubes) best = std::max(best, ap_value(w, c.interval()));
  return best;
}

// ----------------------------------------------------------------- doubling

double doubling_ratio(const StepAtomicMeasure& mu, const Interval& q) {
  const double m = mu.mass(q), m3 = mu.mass(q.dilate(3.0));
  if (m <= 0.0) return m3 > 0.0 ? kInf : 0.0;
  return m3 / m;
}

DoublingResult doubling_gamma(const StepAtomicMeasure& mu, const FamilySpec& family,
                              const std::string& label) {
  if (mu.is_signed()) throw PreconditionError("doubling_gamma requires an unsigned measure");
  if (mu.empty()) throw PreconditionError("doubling_gamma requires a nonzero measure");
  DoublingResult res;
  TestingReport& r = res.report;
  r.condition = "doubling_" + label;
  const auto fam = interval_family({&mu}, family);
  r.budget = family_budget(family, fam);
  r.converged = !fam.truncated;
  const auto hull = *mu.support_hull();
  if (!mu.atoms().empty()) {
    // any cube just right of an atom has a triple that holds the atom
    res.infinite = true;
    r.witness["atom"] = mu.atoms().front().x;
  }
  const std::size_t n = fam.members.size();
  std::vector<double> v(n, 0.0);
  std::vector<char> empty_hit(n, 0);
  parallel_for(n, [&](std::size_t k) {
    const Interval& q = fam.members[k].q;
    const Interval t = q.dilate(3.0);
    if (t.left() < hull.first || t.right() > hull.second) return;
    const double x = doubling_ratio(mu, q);
    if (std::isinf(x))
      empty_hit[k] = 1;
    else
      v[k] = x;
  });
  std::size_t best = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (v[k] > v[best]) best = k;
    if (empty_hit[k] && !r.witness.contains("empty_cube")) {
      res.infinite = true;
      r.witness["empty_cube"] = interval_json(fam.members[k].q);
    }
  }
  r.witness["measure"] = label;
  r.witness["infinite"] = res.infinite;
  if (n && v[best] > 0.0) {
    r.estimate = v[best];
    r.witness["interval"] = interval_json(fam.members[best].q);
  }
  return res;
}

// ---------------------------------------------------- partition functionals

namespace {

// Ancestors of a piece up to the first one holding the part of `hull` that
// its grid can reach (a D^0 chain never crosses 0).
std::vector<DyadicInterval> ancestor_chain(const DyadicInterval& piece,
                                           std::optional<std::pair<double, double>> hull) {
  std::vector<DyadicInterval> chain{piece};
  if (!hull) return chain;
  double lo = hull->first, hi = hull->second;
  if (piece.shift() == Shift::Zero) {
    if (piece.left_exact().sign() >= 0) {
      lo = std::max(lo, 0.0);
    } else {
      hi = std::min(hi, std::nextafter(0.0, -1.0));
    }
    if (hi < lo) return chain;
  }
  const auto glo = GridRational::from_double(lo), ghi = GridRational::from_double(hi);
  for (int l = 0; l < 400; ++l) {
    const auto& c = chain.back();
    if (c.left_exact() <= glo && ghi < c.right_exact()) break;
    chain.push_back(c.parent());
  }
  return chain;
}

}  // namespace

std::pair<double, double> poisson_condition(const WeightPair& w, const PartitionData& parts) {
  parts.validate();
  const double p = w.p(), pd = w.p_dual();
  double rhs = 0.0;
  std::vector<double> coef;
  for (const auto& piece : parts.pieces) {
    const double s = w.sigma().mass(piece.interval()), len = piece.length();
    rhs += s * std::pow(len, pd);
    coef.push_back(s * std::pow(len, pd - 2.0));
  }
  const auto hull = w.omega().support_hull();
  if (!hull || parts.pieces.empty()) return {0.0, rhs};
  std::vector<std::vector<DyadicInterval>> chains;
  std::vector<double> bp;
  for (const auto& piece : parts.pieces) {
    chains.push_back(ancestor_chain(piece, hull));
    for (const auto& c : chains.back()) {
      const Interval iv = c.interval();
      bp.push_back(iv.left());
      bp.push_back(iv.right());
    }
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  double lhs = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double om = w.omega().mass({bp[i], bp[i + 1]});
    if (om <= 0.0) continue;
    const auto y = GridRational::from_double(0.5 * (bp[i] + bp[i + 1]));
    double F = 0.0;
    for (std::size_t r = 0; r < chains.size(); ++r) {
      if (coef[r] == 0.0) continue;
      for (std::size_t l = 0; l < chains[r].size(); ++l)
        if (chains[r][l].contains(y)) {
          // sum over m >= l of 2^-m / |I^(m)| = (4/3) 4^-l / |I|
          F += coef[r] * (4.0 / 3.0) * std::ldexp(1.0, -2 * static_cast<int>(l));
          break;
        }
    }
    lhs += std::pow(F, p) * om;
  }
  return {lhs, rhs};
}

double poisson_condition_direct(const WeightPair& w, const PartitionData& parts, int levels) {
  parts.validate();
  const double p = w.p(), pd = w.p_dual();
  std::vector<double> bp;
  for (const auto& s : w.omega().segments()) {
    bp.push_back(s.a);
    bp.push_back(s.b);
  }
  std::vector<std::vector<Interval>> anc;
  std::vector<double> coef;
  for (const auto& piece : parts.pieces) {
    coef.push_back(w.sigma().mass(piece.interval()) * std::pow(piece.length(), pd - 1.0));
    anc.emplace_back();
    DyadicInterval c = piece;
    for (int l = 0; l < levels; ++l, c = c.parent()) {
      anc.back().push_back(c.interval());
      bp.push_back(c.interval().left());
      bp.push_back(c.interval().right());
    }
  }
  auto F = [&](double y) {
    double acc = 0.0;
    for (std::size_t r = 0; r < anc.size(); ++r)
      for (std::size_t l = 0; l < anc[r].size(); ++l)
        if (anc[r][l].contains(y)) acc += coef[r] * std::ldexp(1.0, -static_cast<int>(l)) / anc[r][l].length();
    return acc;
  };
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  double lhs = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double mid = 0.5 * (bp[i] + bp[i + 1]);
    const double d = w.omega().density_at(mid);
    if (d != 0.0) lhs += std::pow(F(mid), p) * d * (bp[i + 1] - bp[i]);
  }
  for (const auto& a : w.omega().atoms()) lhs += std::pow(F(a.x), p) * a.m;
  return lhs;
}

double EllLevel::bound() const { return p * std::pow(2.0, -p * ell) * std::pow(ap, p) * rhs; }

EllLevel ell_level(const WeightPair& w, const std::vector<DyadicInterval>& pieces, int ell) {
  EllLevel out;
  out.ell = ell;
  out.p = w.p();
  const double p = w.p(), pd = w.p_dual();
  std::vector<DyadicInterval> anc;
  std::vector<double> coef;
  std::vector<double> bp;
  for (const auto& piece : pieces) {
    const double s = w.sigma().mass(piece.interval()), len = piece.length();
    out.rhs += s * std::pow(len, pd);
    coef.push_back(s * std::pow(len, pd - 2.0) * std::ldexp(1.0, -2 * ell));
    anc.push_back(piece.ancestor(ell));
    bp.push_back(anc.back().interval().left());
    bp.push_back(anc.back().interval().right());
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double om = w.omega().mass({bp[i], bp[i + 1]});
    if (om <= 0.0) continue;
    const auto y = GridRational::from_double(0.5 * (bp[i] + bp[i + 1]));
    double F = 0.0;
    for (std::size_t r = 0; r < anc.size(); ++r)
      if (anc[r].contains(y)) F += coef[r];
    out.lhs += std::pow(F, p) * om;
  }
  std::vector<DyadicInterval> distinct = anc;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  out.ap = dyadic_ap_over(w, distinct);
  return out;
}

std::pair<double, double> pivotal_dual(const WeightPair& w, const DyadicInterval& q0,
                                       const PartitionData& parts) {
  if (!(parts.root == q0)) throw PreconditionError("pivotal_dual: partition root differs from Q0");
  parts.validate();
  const Interval root = q0.interval();
  const StepAtomicMeasure local = w.omega().restricted(root);
  double lhs = 0.0;
  for (const auto& piece : parts.pieces) {
    const double s = w.sigma().mass(piece.interval());
    if (s > 0.0) lhs += s * std::pow(poisson_std(piece.interval(), local), w.p_dual());
  }
  return {lhs, local.total_mass()};
}

namespace {

std::vector<DyadicInterval> candidate_roots(const WeightPair& w, int levels) {
  std::vector<DyadicInterval> roots;
  const auto hull = joint_hull({&w.sigma(), &w.omega()});
  if (!hull) return roots;
  const int L = finest_resolution({&w.sigma(), &w.omega()});
  const int J0 = support_scale(std::max(hull->second - hull->first, std::ldexp(1.0, -L)));
  for (Shift a : kAllShifts)
    for (int j = J0 - 1; j >= std::max(J0 - levels, -L); --j) {
      const auto first = locate(a, hull->first, j), last = locate(a, hull->second, j);
      for (int64_t k = first.index(); k <= last.index(); ++k) {
        const DyadicInterval c(j, k, a);
        const Interval iv = c.interval();
        if (w.sigma().mass(iv) > 0.0 && w.omega().mass(iv) > 0.0) roots.push_back(c);
      }
    }
  return roots;
}

json partition_witness(const DyadicInterval& root, const std::vector<DyadicInterval>& pieces) {
  json ps = json::array();
  for (const auto& c : pieces) ps.push_back(cube_json(c));
  return {{"root", cube_json(root)}, {"pieces", ps}};
}

PartitionData partition_from(const json& j) {
  PartitionData parts{cube_from(j.at("root")), {}};
  for (const auto& c : j.at("pieces")) parts.pieces.push_back(cube_from(c));
  return parts;
}

double ratio(const std::pair<double, double>& lr) {
  return lr.second > 0.0 ? lr.first / lr.second : 0.0;
}

// best partition of q by the additive score, to the given depth
double pivotal_dp(const DyadicInterval& q, int depth, const std::function<double(const DyadicInterval&)>& own,
                  std::vector<DyadicInterval>& pieces) {
  const double here = own(q);
  if (depth == 0) {
    pieces = {q};
    return here;
  }
  const auto [a, b] = q.children();
  std::vector<DyadicInterval> pa, pb;
  const double split = pivotal_dp(a, depth - 1, own, pa) + pivotal_dp(b, depth - 1, own, pb);
  if (split > here) {
    pieces = std::move(pa);
    pieces.insert(pieces.end(), pb.begin(), pb.end());
    return split;
  }
  pieces = {q};
  return here;
}

// all antichains of the subtree of q down to depth d (the empty one included)
void antichains(const DyadicInterval& q, int d, std::vector<std::vector<DyadicInterval>>& out) {
  if (d == 0) {
    out = {{}, {q}};
    return;
  }
  const auto [a, b] = q.children();
  std::vector<std::vector<DyadicInterval>> la, lb;
  antichains(a, d - 1, la);
  antichains(b, d - 1, lb);
  out.clear();
  out.push_back({q});
  for (const auto& x : la)
    for (const auto& y : lb) {
      auto z = x;
      z.insert(z.end(), y.begin(), y.end());
      out.push_back(std::move(z));
    }
}

}  // namespace

TestingReport pivotal_search(const WeightPair& w, const PartitionSearch& s) {
  TestingReport r;
  r.condition = "pivotal_dual";
  r.budget = s.to_json();
  const auto roots = candidate_roots(w, s.root_levels);
  r.budget["roots"] = roots.size();
  if (roots.empty()) return r;
  std::vector<std::vector<DyadicInterval>> best_pieces(roots.size());
  const auto [i, v] = parallel_argmax(roots.size(), [&](std::size_t k) {
    const DyadicInterval& q0 = roots[k];
    const StepAtomicMeasure local = w.omega().restricted(q0.interval());
    auto own = [&](const DyadicInterval& c) {
      const double sm = w.sigma().mass(c.interval());
      return sm > 0.0 ? sm * std::pow(poisson_std(c.interval(), local), w.p_dual()) : 0.0;
    };
    pivotal_dp(q0, s.depth, own, best_pieces[k]);
    return ratio(pivotal_dual(w, q0, PartitionData{q0, best_pieces[k]}));
  });
  r.estimate = v;
  r.witness = partition_witness(roots[i], best_pieces[i]);
  return r;
}

TestingReport poisson_condition_search(const WeightPair& w, const PartitionSearch& s) {
  TestingReport r;
  r.condition = "poisson_condition";
  r.budget = s.to_json();
  const auto roots = candidate_roots(w, s.root_levels);
  r.budget["roots"] = roots.size();
  if (roots.empty()) return r;
  std::vector<std::vector<DyadicInterval>> best_pieces(roots.size());
  const int ex = std::min(s.exhaustive_depth, s.depth);
  const auto [i, v] = parallel_argmax(roots.size(), [&](std::size_t k) {
    const DyadicInterval& q0 = roots[k];
    auto score = [&](const std::vector<DyadicInterval>& ps) {
      return ps.empty() ? 0.0 : ratio(poisson_condition(w, PartitionData{q0, ps}));
    };
    std::vector<std::vector<DyadicInterval>> all;
    antichains(q0, ex, all);
    std::vector<DyadicInterval> cur;
    double cur_v = -1.0;
    for (const auto& a : all) {
      const double x = score(a);
      if (x > cur_v) {
        cur_v = x;
        cur = a;
      }
    }
    // greedy: split, shrink to one child or drop a piece while that helps
    bool improved = true;
    for (int pass = 0; improved && pass < 64; ++pass) {
      improved = false;
      for (std::size_t j = 0; j < cur.size() && !improved; ++j) {
        const auto piece = cur[j];
        std::vector<std::vector<DyadicInterval>> moves;
        if (piece.scale() > q0.scale() - s.depth) {
          const auto [a, b] = piece.children();
          for (const auto& repl : {std::vector<DyadicInterval>{a, b}, std::vector<DyadicInterval>{a},
                                   std::vector<DyadicInterval>{b}}) {
            auto m = cur;
            m.erase(m.begin() + static_cast<long>(j));
            m.insert(m.end(), repl.begin(), repl.end());
            moves.push_back(std::move(m));
          }
        }
        if (cur.size() > 1) {
          auto m = cur;
          m.erase(m.begin() + static_cast<long>(j));
          moves.push_back(std::move(m));
        }
        for (auto& m : moves) {
          const double x = score(m);
          if (x > cur_v * (1.0 + 1e-12)) {
            cur_v = x;
            cur = std::move(m);
            improved = true;
            break;
          }
        }
      }
    }
    best_pieces[k] = cur;
    return cur_v;
  });
  r.estimate = v;
  r.witness = partition_witness(roots[i], best_pieces[i]);
  return r;
}

// --------------------------------------------------------- operator testing

double cell_quadrature(const StepAtomicMeasure& mu, const Interval& q, int panels,
                       const std::function<double(double)>& g) {
  const double hmax = q.length() / std::max(panels, 1);
  double acc = 0.0;
  for (const auto& s : mu.segments()) {
    const double a = std::max(s.a, q.left()), b = std::min(s.b, q.right());
    if (!(b > a)) continue;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / hmax)));
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      const auto nodes = gauss3(a + h * i, i + 1 == n ? b : a + h * (i + 1));
      for (int k = 0; k < 3; ++k) acc += s.density * nodes.w[k] * g(nodes.x[k]);
    }
  }
  for (const auto& at : mu.atoms())
    if (q.contains(at.x)) acc += at.m * g(at.x);
  return acc;
}

StepAtomicMeasure omega_points(const WeightPair& w, const Interval& q, int panels) {
  std::map<double, double> pts;
  const double hmax = q.length() / std::max(panels, 1);
  for (const auto& s : w.omega().segments()) {
    const double a = std::max(s.a, q.left()), b = std::min(s.b, q.right());
    if (!(b > a)) continue;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / hmax)));
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      const auto nodes = gauss3(a + h * i, i + 1 == n ? b : a + h * (i + 1));
      for (int k = 0; k < 3; ++k) pts[nodes.x[k]] += s.density * nodes.w[k];
    }
  }
  for (const auto& at : w.omega().atoms())
    if (q.contains(at.x)) pts[at.x] += at.m;
  std::vector<Atom> atoms;
  for (const auto& [x, m] : pts)
    if (m > 0.0) atoms.push_back({x, m});
  return StepAtomicMeasure::from_segments(w.omega().resolution(), {}, std::move(atoms));
}

double forward_value(const WeightPair& w, const Interval& q, const std::vector<Interval>& e,
                     const OperatorBudget& b) {
  const double sq = w.sigma().mass(q);
  if (sq <= 0.0 || e.empty()) return 0.0;
  const StepAtomicMeasure nu = w.sigma().restricted(std::span<const Interval>(e));
  if (nu.empty()) return 0.0;
  const double p = w.p();
  const double integral = cell_quadrature(w.omega(), q, b.panels, [&](double x) {
    return std::pow(t_natural(nu, x, b.sup), p);
  });
  return integral / sq;
}

double dual_primal_value(const WeightPair& w, const Interval& q, const std::vector<double>& f,
                         const OperatorBudget& b) {
  const double oq = w.omega().mass(q);
  if (oq <= 0.0) return 0.0;
  const double fn = lp_norm_p(w.sigma(), q, f, w.p());
  if (fn <= 0.0) return 0.0;
  const StepAtomicMeasure nu = subcell_measure(w.sigma(), q, f);
  const double integral =
      cell_quadrature(w.omega(), q, b.panels, [&](double x) { return t_natural(nu, x, b.sup); });
  return integral / (std::pow(fn, 1.0 / w.p()) * std::pow(oq, 1.0 / w.p_dual()));
}

double dual_adjoint_value(const WeightPair& w, const Interval& q, const Linearization& L,
                          const OperatorBudget& b) {
  const StepAtomicMeasure pts = omega_points(w, q, b.panels);
  const double oq = pts.total_mass();
  if (oq <= 0.0) return 0.0;
  const double pd = w.p_dual();
  const double integral = cell_quadrature(w.sigma(), q, b.panels, [&](double y) {
    return std::pow(std::abs(linearized_adjoint(L, pts, y)), pd);
  });
  return std::pow(integral / oq, 1.0 / pd);
}

namespace {

json linearization_json(const Linearization& L) {
  json pts = json::array(), sel = json::array();
  for (std::size_t i = 0; i < L.points.size(); ++i) {
    pts.push_back(L.points[i]);
    const auto& s = L.selection[i];
    sel.push_back(json::array({s.params.eps1, s.params.eps2, s.params.R, s.theta}));
  }
  return {{"points", pts}, {"selection", sel}};
}

Linearization linearization_from(const json& j) {
  Linearization L;
  for (const auto& x : j.at("points")) L.points.push_back(x.get<double>());
  for (const auto& s : j.at("selection"))
    L.selection.push_back({{s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()},
                           s.at(3).get<double>()});
  L.validate();
  return L;
}

std::vector<Interval> intervals_from(const json& j) {
  std::vector<Interval> out;
  for (const auto& x : j) out.push_back(interval_from(x));
  return out;
}

json intervals_json(const std::vector<Interval>& v) {
  json a = json::array();
  for (const auto& q : v) a.push_back(interval_json(q));
  return a;
}

std::vector<double> doubles_from(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

bool operator_candidate(const WeightPair& w, const Interval& q) {
  return w.sigma().mass(q) > 0.0 && w.omega().mass(q) > 0.0;
}

}  // namespace

TestingReport forward_testing(const WeightPair& w, const FamilySpec& family, const OperatorBudget& b) {
  TestingReport r;
  r.condition = "forward_testing";
  const auto fam = interval_family(w, family);
  r.budget = family_budget(family, fam);
  r.budget["operator"] = b.to_json();
  r.converged = !fam.truncated;
  const int n = std::clamp(b.cells_per_cube, 1, 30);
  const uint64_t all = (uint64_t{1} << n) - 1;
  const std::size_t m = fam.members.size();
  std::vector<uint64_t> best_mask(m, 0);
  std::vector<double> full_cube(m, 0.0);
  const auto [i, v] = parallel_argmax(m, [&](std::size_t k) {
    const Interval& q = fam.members[k].q;
    if (!operator_candidate(w, q)) return 0.0;
    std::mt19937_64 rng(mix(b.seed, k));
    std::map<uint64_t, double> seen;
    auto eval = [&](uint64_t mask) {
      const auto it = seen.find(mask);
      if (it != seen.end()) return it->second;
      const double x = forward_value(w, q, mask_to_intervals(q, mask, n), b);
      seen[mask] = x;
      return x;
    };
    std::vector<uint64_t> cands{all, all & ((uint64_t{1} << (n / 2)) - 1), all & ~((uint64_t{1} << (n / 2)) - 1)};
    for (int t = 0; t < b.subset_budget; ++t) cands.push_back(rng() & all);
    uint64_t bm = all;
    double bv = -1.0;
    for (uint64_t c : cands) {
      if (c == 0) continue;
      const double x = eval(c);
      if (x > bv) {
        bv = x;
        bm = c;
      }
    }
    full_cube[k] = eval(all);
    // one greedy pass of single-cell toggles
    for (int j = 0; j < n; ++j) {
      const uint64_t c = bm ^ (uint64_t{1} << j);
      if (c == 0) continue;
      const double x = eval(c);
      if (x > bv) {
        bv = x;
        bm = c;
      }
    }
    best_mask[k] = bm;
    return bv;
  });
  if (m == 0) return r;
  r.estimate = std::max(v, 0.0);
  double full_best = 0.0;
  for (double x : full_cube) full_best = std::max(full_best, x);
  r.witness = {{"Q", interval_json(fam.members[i].q)},
               {"E", intervals_json(mask_to_intervals(fam.members[i].q, best_mask[i], n))},
               {"sup", budget_json(b.sup)},
               {"panels", b.panels},
               {"full_cube_estimate", full_best}};
  return r;
}

TestingReport dual_testing(const WeightPair& w, const FamilySpec& family, const OperatorBudget& b) {
  TestingReport r;
  r.condition = "dual_testing";
  const auto fam = interval_family(w, family);
  r.budget = family_budget(family, fam);
  r.budget["operator"] = b.to_json();
  r.converged = !fam.truncated;
  const int n = std::clamp(b.cells_per_cube, 1, 30);
  const std::size_t m = fam.members.size();
  if (m == 0) return r;
  std::vector<std::vector<double>> best_f(m);
  std::vector<double> one_probe(m, 0.0);
  const auto [ip, vp] = parallel_argmax(m, [&](std::size_t k) {
    const Interval& q = fam.members[k].q;
    if (!operator_candidate(w, q)) return 0.0;
    std::mt19937_64 rng(mix(b.seed, 2 * k));
    std::vector<std::vector<double>> cands;
    cands.push_back(std::vector<double>(n, 1.0));
    std::vector<double> half(n, 0.0), alt(n, 0.0);
    for (int j = 0; j < n; ++j) {
      half[j] = j < n / 2 ? 1.0 : 0.0;
      alt[j] = j < n / 2 ? 1.0 : -1.0;
    }
    cands.push_back(half);
    cands.push_back(alt);
    for (int t = 0; t < b.f_budget; ++t) {
      std::vector<double> f(n);
      const bool sign = t % 2;
      for (int j = 0; j < n; ++j) f[j] = sign ? ((rng() & 1) ? 1.0 : -1.0) : double(rng() & 1);
      cands.push_back(f);
    }
    double bv = -1.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const double x = dual_primal_value(w, q, cands[c], b);
      if (c == 0) one_probe[k] = x;
      if (x > bv) {
        bv = x;
        best_f[k] = cands[c];
      }
    }
    return bv;
  });
  std::vector<Linearization> best_L(m);
  const auto [id, vd] = parallel_argmax(m, [&](std::size_t k) {
    const Interval& q = fam.members[k].q;
    if (!operator_candidate(w, q)) return 0.0;
    std::mt19937_64 rng(mix(b.seed, 2 * k + 1));
    const StepAtomicMeasure pts = omega_points(w, q, b.panels);
    std::vector<double> xs;
    for (const auto& a : pts.atoms()) xs.push_back(a.x);
    const StepAtomicMeasure local = w.sigma().restricted(q);
    Linearization base = linearization_from_argmax(local, xs, b.sup);
    double bv = dual_adjoint_value(w, q, base, b);
    best_L[k] = base;
    std::uniform_real_distribution<double> jitter(-0.35, 0.35);
    for (int t = 0; t < b.f_budget; ++t) {
      Linearization L = base;
      for (auto& s : L.selection) {
        const double e2 = s.params.eps2 * std::exp(jitter(rng));
        const double ratio = std::clamp(s.params.eps1 / s.params.eps2 * std::exp(jitter(rng)), 0.25, 4.0);
        const double e1 = ratio * e2;
        const double R = std::max(s.params.R * std::exp(jitter(rng)), 1.01 * std::max(e1, e2));
        s.params = {e1, e2, R};
        if (t % 2) s.theta = std::fmod(s.theta + 3.14159265358979323846, 2.0 * 3.14159265358979323846);
      }
      const double x = dual_adjoint_value(w, q, L, b);
      if (x > bv) {
        bv = x;
        best_L[k] = L;
      }
    }
    return bv;
  });
  double one_best = 0.0;
  for (double x : one_probe) one_best = std::max(one_best, x);
  const bool primal = vp >= vd;
  r.estimate = std::max({vp, vd, 0.0});
  json wp{{"Q", interval_json(fam.members[ip].q)}, {"f", best_f[ip]}, {"estimate", std::max(vp, 0.0)}};
  json wd{{"Q", interval_json(fam.members[id].q)},
          {"linearization", linearization_json(best_L[id])},
          {"estimate", std::max(vd, 0.0)}};
  r.witness = {{"mode", primal ? "primal" : "dual"},
               {"primal", wp},
               {"dual", wd},
               {"one_probe_estimate", one_best},
               {"sup", budget_json(b.sup)},
               {"panels", b.panels}};
  return r;
}

double maximal_test_value(const WeightPair& w, const Interval& q, const std::vector<double>& f,
                          bool dual, const OperatorBudget& b) {
  const StepAtomicMeasure& in = dual ? w.omega() : w.sigma();
  const StepAtomicMeasure& out = dual ? w.sigma() : w.omega();
  const double p = dual ? w.p_dual() : w.p();
  const double fn = lp_norm_p(in, q, f, p);
  if (fn <= 0.0) return 0.0;
  std::vector<double> af(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) af[j] = std::fabs(f[j]);
  const StepAtomicMeasure nu = subcell_measure(in, q, af);
  const MaximalFunction M(nu);
  const double integral = cell_quadrature(out, q, b.panels, [&](double x) { return std::pow(M(x), p); });
  return std::pow(integral / fn, 1.0 / p);
}

std::pair<TestingReport, TestingReport> maximal_norms(const WeightPair& w, const FamilySpec& family,
                                                      const OperatorBudget& b) {
  w.require_no_common_atoms();
  const auto fam = interval_family(w, family);
  std::pair<TestingReport, TestingReport> out;
  const int n = std::clamp(b.cells_per_cube, 1, 30);
  for (int side = 0; side < 2; ++side) {
    TestingReport& r = side ? out.second : out.first;
    r.condition = side ? "maximal_norm_dual" : "maximal_norm";
    r.budget = family_budget(family, fam);
    r.budget["operator"] = b.to_json();
    r.converged = !fam.truncated;
    const std::size_t m = fam.members.size();
    if (m == 0) continue;
    std::vector<std::vector<double>> best_f(m);
    const auto [i, v] = parallel_argmax(m, [&](std::size_t k) {
      const Interval& q = fam.members[k].q;
      if (!operator_candidate(w, q)) return 0.0;
      std::mt19937_64 rng(mix(b.seed, 3 * k + side));
      std::vector<std::vector<double>> cands{std::vector<double>(n, 1.0)};
      for (int t = 0; t < b.f_budget; ++t) {
        std::vector<double> f(n);
        for (int j = 0; j < n; ++j) f[j] = double(rng() % 4);
        cands.push_back(f);
      }
      double bv = -1.0;
      for (const auto& f : cands) {
        const double x = maximal_test_value(w, q, f, side == 1, b);
        if (x > bv) {
          bv = x;
          best_f[k] = f;
        }
      }
      return bv;
    });
    r.estimate = std::max(v, 0.0);
    r.witness = {{"Q", interval_json(fam.members[i].q)}, {"f", best_f[i]}, {"panels", b.panels}};
  }
  return out;
}

// ------------------------------------------------------- necessity probes

double NecessityProbe::operator_norm() const {
  return f_norm > 0.0 ? std::pow(h_integral / f_norm, 1.0 / p) : 0.0;
}

NecessityProbe strengthened_ap_necessity_probe(const WeightPair& w, const Interval& q, double a,
                                               double r, int panels) {
  if (!(r > 0.0)) throw PreconditionError("probe requires r > 0");
  const double p = w.p(), pd = w.p_dual();
  NecessityProbe out;
  out.p = p;
  const Interval src(a - r, a);
  const StepAtomicMeasure sig = w.sigma().restricted(src);
  auto f = [&](double y) { return std::pow(tail_weight(q, y), pd - 1.0); };
  // int_{a-r}^a s_Q^{p'} d sigma and int |f|^p d sigma (the same integrand)
  double inner = 0.0;
  for (const auto& s : sig.segments())
    inner += s.density * integrate_or_throw([&](double y) { return std::pow(tail_weight(q, y), pd); },
                                            s.a, s.b, 1e-11);
  for (const auto& at : sig.atoms()) inner += at.m * std::pow(tail_weight(q, at.x), pd);
  out.f_norm = inner;
  if (inner <= 0.0) return out;
  auto H = [&](double x) {
    double acc = 0.0;
    for (const auto& at : sig.atoms()) acc += at.m * f(at.x) / (x - at.x);
    for (const auto& s : sig.segments()) {
      // geometric cuts toward x, where 1/(x - y) peaks
      std::vector<double> cuts{s.b};
      for (double d = x - s.b; x - 2.0 * d > s.a && d > 0.0; d *= 2.0) cuts.push_back(x - 2.0 * d);
      cuts.push_back(s.a);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        acc += s.density *
               integrate_or_throw([&](double y) { return f(y) / (x - y); }, cuts[k + 1], cuts[k], 1e-10);
    }
    return acc;
  };
  // omega on (a, inf), panels graded toward a where H blows up logarithmically
  const auto hull = w.omega().support_hull();
  if (!hull || hull->second <= a) return out;
  for (const auto& s : w.omega().segments()) {
    const double lo = std::max(s.a, a), hi = s.b;
    if (!(hi > lo)) continue;
    std::vector<double> cuts{lo};
    if (lo == a) {
      for (int k = 30; k >= 1; --k) cuts.push_back(a + (hi - a) * std::ldexp(1.0, -k));
    }
    const double step = (hi - lo) / panels;
    for (int k = 1; k < panels; ++k) cuts.push_back(lo + step * k);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const auto nodes = gauss3(cuts[k], cuts[k + 1]);
      for (int g = 0; g < 3; ++g) {
        const double x = nodes.x[g], wt = s.density * nodes.w[g];
        out.h_integral += wt * std::pow(std::fabs(H(x)), p);
        out.lower += wt * std::pow(tail_weight(q, x), p);
      }
    }
  }
  for (const auto& at : w.omega().atoms())
    if (at.x > a) {
      out.h_integral += at.m * std::pow(std::fabs(H(at.x)), p);
      out.lower += at.m * std::pow(tail_weight(q, at.x), p);
    }
  out.lower *= std::pow(inner, p) / std::pow(q.length(), p);
  return out;
}

NeccResult neccinequ(const StepAtomicMeasure& nu, const Interval& i, int grid) {
  if (nu.is_signed()) throw PreconditionError("neccinequ requires an unsigned measure");
  if (grid < 2) throw PreconditionError("neccinequ needs at least two grid points");
  NeccResult out;
  out.length = i.length();
  out.first = nu.mass(i) / i.length();
  out.poisson = poisson_redef(i, nu);
  const StepAtomicMeasure outside = nu.restricted_complement(i);
  if (outside.empty()) return out;
  std::vector<double> xs, hs;
  const auto hull = *outside.support_hull();
  for (int k = 0; k < grid; ++k) {
    const double x = i.left() + (k + 0.5) * i.length() / grid;
    // distance to the support of the outside part
    double gap = kInf;
    for (const auto& s : outside.segments()) gap = std::min(gap, std::max({s.a - x, x - s.b, 0.0}));
    for (const auto& a : outside.atoms()) gap = std::min(gap, std::fabs(a.x - x));
    (void)hull;
    xs.push_back(x);
    hs.push_back(hilbert_off_support(outside, x, gap));
  }
  // our kernel is 1/(x - z), so H decreases across I; the quotient of -H is the
  // nonnegative one
  double q = kInf;
  for (int a = 0; a < grid; ++a)
    for (int b = a + 1; b < grid; ++b) q = std::min(q, (hs[a] - hs[b]) / (xs[b] - xs[a]));
  out.quotient = q;
  return out;
}

// ------------------------------------------------------------- re-evaluation

double reevaluate(const WeightPair& w, const TestingReport& r) {
  const json& j = r.witness;
  const std::string& c = r.condition;
  auto op_budget = [&]() {
    OperatorBudget b;
    b.sup = budget_from(j.at("sup"));
    b.panels = j.at("panels").get<int>();
    return b;
  };
  if (c == "ap") return j.contains("interval") ? ap_value(w, interval_from(j.at("interval"))) : 0.0;
  if (c == "strengthened_ap")
    return j.contains("interval") ? strengthened_ap_value(w, interval_from(j.at("interval"))) : 0.0;
  if (c == "half_strengthened_ap")
    return j.contains("interval") ? half_strengthened_ap_value(w, interval_from(j.at("interval"))) : 0.0;
  if (c == "asym_ap")
    return j.contains("Q") ? asym_value(w, interval_from(j.at("Q")), interval_from(j.at("Qprime"))) : 0.0;
  if (c.rfind("doubling_", 0) == 0) {
    if (!j.contains("interval")) return 0.0;
    const auto& mu = j.at("measure").get<std::string>() == "omega" ? w.omega() : w.sigma();
    return doubling_ratio(mu, interval_from(j.at("interval")));
  }
  if (c == "pivotal_dual") {
    if (!j.contains("root")) return 0.0;
    const auto parts = partition_from(j);
    return ratio(pivotal_dual(w, parts.root, parts));
  }
  if (c == "poisson_condition") {
    if (!j.contains("root")) return 0.0;
    const auto parts = partition_from(j);
    return parts.pieces.empty() ? 0.0 : ratio(poisson_condition(w, parts));
  }
  if (c == "forward_testing") {
    if (!j.contains("Q")) return 0.0;
    return forward_value(w, interval_from(j.at("Q")), intervals_from(j.at("E")), op_budget());
  }
  if (c == "dual_testing") {
    if (!j.contains("mode")) return 0.0;
    const auto b = op_budget();
    if (j.at("mode").get<std::string>() == "primal") {
      const auto& wp = j.at("primal");
      return dual_primal_value(w, interval_from(wp.at("Q")), doubles_from(wp.at("f")), b);
    }
    const auto& wd = j.at("dual");
    return dual_adjoint_value(w, interval_from(wd.at("Q")), linearization_from(wd.at("linearization")), b);
  }
  if (c == "maximal_norm" || c == "maximal_norm_dual") {
    if (!j.contains("Q")) return 0.0;
    OperatorBudget b;
    b.panels = j.at("panels").get<int>();
    return maximal_test_value(w, interval_from(j.at("Q")), doubles_from(j.at("f")),
                              c == "maximal_norm_dual", b);
  }
  throw ParseError("report", "no evaluator for condition '" + c + "'");
}

}  // namespace tws
