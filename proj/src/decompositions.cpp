#include "tws/decompositions.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <limits>

#include "tws/errors.hpp"
#include "tws/parallel.hpp"
#include "tws/poisson.hpp"

namespace tws {

namespace {

GridRational cell_edge(int64_t k, int mesh) { return {static_cast<__int128>(3) * k, -mesh}; }

json cube_j(const DyadicInterval& c) {
  return {{"scale", c.scale()}, {"index", c.index()}, {"shift", shift_name(c.shift())}};
}

bool by_left(const DyadicInterval& a, const DyadicInterval& b) { return a.left_exact() < b.left_exact(); }

// last cube (of a left-sorted disjoint list) with left <= x, or -1
long last_starting_at_or_before(const std::vector<DyadicInterval>& cubes, const GridRational& x) {
  long lo = 0, hi = static_cast<long>(cubes.size());
  while (lo < hi) {
    const long mid = (lo + hi) / 2;
    if (cubes[mid].left_exact() <= x)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo - 1;
}

std::optional<std::pair<double, double>> hull_of(const StepAtomicMeasure& m) { return m.support_hull(); }

}  // namespace

// ---------------------------------------------------------------- CellUnion

int64_t CellUnion::cell_count() const {
  int64_t n = 0;
  for (const auto& [a, b] : runs) n += b - a;
  return n;
}

std::vector<Interval> CellUnion::intervals() const {
  std::vector<Interval> out;
  for (const auto& [a, b] : runs) out.emplace_back(std::ldexp(double(a), -mesh), std::ldexp(double(b), -mesh));
  return out;
}

double CellUnion::length() const { return std::ldexp(double(cell_count()), -mesh); }

bool CellUnion::contains(double x) const {
  const auto k = static_cast<int64_t>(std::floor(std::ldexp(x, mesh)));
  for (const auto& [a, b] : runs)
    if (a <= k && k < b) return true;
  return false;
}

std::pair<GridRational, GridRational> CellUnion::run_exact(std::size_t i) const {
  return {cell_edge(runs[i].first, mesh), cell_edge(runs[i].second, mesh)};
}

bool CellUnion::subset_of(const CellUnion& other) const {
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto [a, b] = run_exact(i);
    bool found = false;
    for (std::size_t j = 0; j < other.runs.size() && !found; ++j) {
      const auto [c, d] = other.run_exact(j);
      found = c <= a && b <= d;
    }
    if (!found) return false;
  }
  return true;
}

CellUnion CellUnion::from_cells(int mesh, std::vector<int64_t> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  CellUnion u;
  u.mesh = mesh;
  for (int64_t k : cells) {
    if (!u.runs.empty() && u.runs.back().second == k)
      u.runs.back().second = k + 1;
    else
      u.runs.push_back({k, k + 1});
  }
  return u;
}

json CellUnion::to_json() const {
  json r = json::array();
  for (const auto& [a, b] : runs) r.push_back(json::array({a, b}));
  return {{"mesh", mesh}, {"runs", r}};
}

CellUnion superlevel_set(const StepAtomicMeasure& nu, int k, const SuperlevelOptions& o) {
  CellUnion out;
  out.mesh = o.mesh;
  const auto hull = hull_of(nu);
  if (!hull) return out;
  const double reach = nu.total_variation() * std::ldexp(1.0, -k);
  const auto first = static_cast<int64_t>(std::floor(std::ldexp(hull->first - reach, o.mesh)));
  const auto last = static_cast<int64_t>(std::ceil(std::ldexp(hull->second + reach, o.mesh)));
  if (last - first > o.max_cells)
    throw PreconditionError("superlevel_set: window has " + std::to_string(last - first) +
                            " cells, above max_cells");
  const std::size_t n = static_cast<std::size_t>(last - first);
  const double thr = std::ldexp(1.0, k);
  std::vector<char> in(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const double x = std::ldexp(double(first + static_cast<int64_t>(i)) + 0.5, -o.mesh);
    in[i] = t_natural(nu, x, o.budget) > thr;
  });
  std::vector<int64_t> cells;
  for (std::size_t i = 0; i < n; ++i)
    if (in[i]) cells.push_back(first + static_cast<int64_t>(i));
  return CellUnion::from_cells(o.mesh, std::move(cells));
}

// ------------------------------------------------------------------ Whitney

std::pair<GridRational, GridRational> dilate_exact(const DyadicInterval& q, double factor) {
  // (1 +- factor)/2 is exact for the dyadic factors used here
  const double up = 0.5 * (1.0 + factor), down = 0.5 * (1.0 - factor);
  const auto L = q.left_exact(), R = q.right_exact();
  return {L.times(up) + R.times(down), L.times(down) + R.times(up)};
}

json WhitneyDecomposition::to_json() const {
  json c = json::array();
  for (const auto& q : cubes) c.push_back(cube_j(q));
  return {{"level", level}, {"omega", omega.to_json()}, {"cubes", c},        {"RW", RW},
          {"N", N},         {"grid", shift_name(grid)}, {"floor_scale", floor_scale}};
}

WhitneyDecomposition whitney(const CellUnion& omega, double RW, Shift grid, int N, int level,
                             std::optional<int> floor_scale) {
  if (!(RW >= 1.0)) throw PreconditionError("whitney requires R_W >= 1");
  WhitneyDecomposition wd;
  wd.level = level;
  wd.omega = omega;
  wd.RW = RW;
  wd.N = N;
  wd.grid = grid;
  wd.floor_scale = floor_scale.value_or(-omega.mesh - 4);
  for (std::size_t i = 0; i < omega.runs.size(); ++i) {
    const auto [A, B] = omega.run_exact(i);
    const double len = std::ldexp(double(omega.runs[i].second - omega.runs[i].first), -omega.mesh);
    // a parent of a top cube has R_W-dilate longer than the run
    const int top = static_cast<int>(std::floor(std::log2(len / RW)));
    if (top < wd.floor_scale) continue;
    auto qualifies = [&](const DyadicInterval& c) {
      const auto [l, r] = dilate_exact(c, RW);
      return A < l && r < B;
    };
    auto meets = [&](const DyadicInterval& c) { return c.left_exact() < B && A < c.right_exact(); };
    std::vector<DyadicInterval> stack;
    const auto first = locate(grid, A, top), last = locate(grid, B, top);
    for (int64_t k = last.index(); k >= first.index(); --k) {
      const DyadicInterval c(top, k, grid);
      if (meets(c)) stack.push_back(c);
    }
    while (!stack.empty()) {
      const auto c = stack.back();
      stack.pop_back();
      if (qualifies(c)) {
        wd.cubes.push_back(c);
      } else if (c.scale() > wd.floor_scale) {
        const auto [a, b] = c.children();
        if (meets(b)) stack.push_back(b);
        if (meets(a)) stack.push_back(a);
      }
    }
  }
  std::sort(wd.cubes.begin(), wd.cubes.end(), by_left);
  return wd;
}

json WhitneyReport::to_json() const {
  return {{"disjoint", disjoint},         {"inside", inside},
          {"covers", covers},             {"whitney_inner", whitney_inner},
          {"whitney_outer", whitney_outer}, {"overlap", overlap},
          {"overlap_inside", overlap_inside}, {"crowd", crowd},
          {"cubes", cubes},               {"ok", ok()}};
}

WhitneyReport verify_whitney(const WhitneyDecomposition& wd) {
  WhitneyReport rep;
  const auto& cubes = wd.cubes;
  rep.cubes = cubes.size();
  const auto& om = wd.omega;
  std::vector<GridRational> run_lo;
  for (std::size_t i = 0; i < om.runs.size(); ++i) run_lo.push_back(om.run_exact(i).first);
  auto run_of = [&](const GridRational& x) -> long {
    const auto it = std::upper_bound(run_lo.begin(), run_lo.end(), x);
    return static_cast<long>(it - run_lo.begin()) - 1;
  };
  for (std::size_t i = 0; i + 1 < cubes.size(); ++i)
    if (cubes[i + 1].left_exact() < cubes[i].right_exact()) rep.disjoint = false;
  std::vector<std::vector<std::size_t>> per_run(om.runs.size());
  std::vector<Interval> dil;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const auto& q = cubes[i];
    const long r = run_of(q.left_exact());
    if (r < 0) {
      rep.inside = rep.whitney_inner = rep.whitney_outer = rep.overlap_inside = false;
      continue;
    }
    const auto [A, B] = om.run_exact(static_cast<std::size_t>(r));
    if (!(A <= q.left_exact() && q.right_exact() <= B)) {
      rep.inside = false;
      continue;
    }
    per_run[static_cast<std::size_t>(r)].push_back(i);
    const auto [l, rr] = dilate_exact(q, wd.RW);
    if (!(A < l && rr < B)) rep.whitney_inner = false;
    const auto [l3, r3] = dilate_exact(q, 3.0 * wd.RW);
    if (!(l3 <= A || B < r3)) rep.whitney_outer = false;
    const auto [ln, rn] = dilate_exact(q, wd.N);
    if (wd.N <= wd.RW && !(A < ln && rn <= B)) rep.overlap_inside = false;
    dil.push_back(q.interval().dilate(wd.N));
  }
  // cover, away from a boundary layer the floor scale cannot resolve
  const GridRational delta = GridRational(3, wd.floor_scale).times(0.5 * (wd.RW + 1.0));
  for (std::size_t r = 0; r < om.runs.size(); ++r) {
    const auto [A, B] = om.run_exact(r);
    const auto lo = A + delta, hi = B - delta;
    if (!(lo < hi)) continue;
    const auto& idx = per_run[r];
    if (idx.empty()) {
      rep.covers = false;
      continue;
    }
    bool ok = cubes[idx.front()].left_exact() <= lo && hi <= cubes[idx.back()].right_exact();
    for (std::size_t k = 0; k + 1 < idx.size(); ++k)
      if (cubes[idx[k]].right_exact() != cubes[idx[k + 1]].left_exact()) ok = false;
    if (!ok) rep.covers = false;
  }
  rep.overlap = max_overlap(dil);
  std::vector<double> lefts, rights;
  for (const auto& q : cubes) {
    lefts.push_back(q.interval().left());
    rights.push_back(q.interval().right());
  }
  for (const auto& d : dil) {
    // disjoint sorted cubes meeting [l, r) form one block
    const auto b = std::upper_bound(rights.begin(), rights.end(), d.left()) - rights.begin();
    const auto e = std::lower_bound(lefts.begin(), lefts.end(), d.right()) - lefts.begin();
    rep.crowd = std::max(rep.crowd, static_cast<int>(e - b));
  }
  return rep;
}

json NestedReport::to_json() const {
  return {{"strict_reverse", strict_reverse},
          {"uncontained", uncontained},
          {"strict_forward", strict_forward},
          {"ok", ok()}};
}

NestedReport nested_check(const WhitneyDecomposition& lower, const WhitneyDecomposition& upper) {
  if (lower.grid != upper.grid) throw PreconditionError("nested_check needs one grid");
  NestedReport rep;
  auto holder = [](const std::vector<DyadicInterval>& cubes, const DyadicInterval& q) -> long {
    const long i = last_starting_at_or_before(cubes, q.left_exact());
    if (i >= 0 && cubes[i].contains(q)) return i;
    return -1;
  };
  for (const auto& u : upper.cubes) {
    const long i = holder(lower.cubes, u);
    if (i < 0)
      ++rep.uncontained;
    else if (!(lower.cubes[i] == u))
      ++rep.strict_forward;
  }
  for (const auto& l : lower.cubes) {
    const long i = holder(upper.cubes, l);
    if (i >= 0 && !(upper.cubes[i] == l)) ++rep.strict_reverse;
  }
  return rep;
}

json ComparabilityReport::to_json() const {
  return {{"pairs", pairs}, {"min_ratio", min_ratio}, {"max_ratio", max_ratio}};
}

ComparabilityReport comparability(const WhitneyDecomposition& a, const WhitneyDecomposition& b, int N) {
  ComparabilityReport rep;
  for (const auto& q : a.cubes) {
    const auto [l, r] = dilate_exact(q, N);
    long i = last_starting_at_or_before(b.cubes, l);
    if (i < 0 || b.cubes[i].left_exact() < l) ++i;
    for (; i < static_cast<long>(b.cubes.size()) && b.cubes[i].left_exact() < r; ++i) {
      const auto& c = b.cubes[i];
      if (c.left_exact() < l || r < c.right_exact()) continue;
      const double ratio = std::ldexp(1.0, q.scale() - c.scale());
      ++rep.pairs;
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
  }
  return rep;
}

json ShiftedChainReport::to_json() const {
  return {{"M", M},
          {"M_pow2", M_pow2},
          {"RW_shifted", RW_shifted},
          {"checked", checked},
          {"missing_tilde", missing_tilde},
          {"hat_failures", hat_failures},
          {"n_required", n_required},
          {"chain_ok", chain_ok()}};
}

ShiftedChainReport shifted_chain(const WhitneyDecomposition& plain) {
  if (plain.grid != Shift::Zero) throw PreconditionError("shifted_chain starts from the plain grid");
  ShiftedChainReport rep;
  std::vector<GridSelection> sel;
  for (const auto& q : plain.cubes) {
    sel.push_back(select_shifted_grid(q.interval()));
    rep.M = std::max(rep.M, sel.back().dilation_bound);
  }
  if (sel.empty()) return rep;
  rep.M_pow2 = std::exp2(std::ceil(std::log2(rep.M)));
  rep.RW_shifted = plain.RW / rep.M_pow2;
  if (rep.RW_shifted < 1.0) throw PreconditionError("shifted_chain: R_W / M' below 1");
  std::vector<WhitneyDecomposition> tilde;
  for (Shift a : kAllShifts)
    tilde.push_back(whitney(plain.omega, rep.RW_shifted, a, plain.N, plain.level, plain.floor_scale));
  for (std::size_t i = 0; i < plain.cubes.size(); ++i) {
    const auto& q = plain.cubes[i];
    const auto& hat = sel[i].hat;
    ++rep.checked;
    const auto [l3, r3] = dilate_exact(q, 3.0);
    if (!(hat.left_exact() <= l3 && r3 <= hat.right_exact())) ++rep.hat_failures;
    const auto& cubes = tilde[static_cast<int>(hat.shift())].cubes;
    const long j = last_starting_at_or_before(cubes, hat.left_exact());
    if (j < 0 || !cubes[j].contains(hat)) {
      ++rep.missing_tilde;
      continue;
    }
    const Interval t3 = cubes[j].interval().dilate(3.0);
    const double c = q.interval().center();
    rep.n_required =
        std::max(rep.n_required, 2.0 * std::max(c - t3.left(), t3.right() - c) / q.length());
  }
  return rep;
}

// ----------------------------------------------------------------------- CZ

json CZDecomposition::to_json() const {
  json pc = json::array();
  for (std::size_t i = 0; i < principal.size(); ++i)
    pc.push_back({{"cube", cube_j(principal[i])},
                  {"average", average[i]},
                  {"signed_average", signed_average[i]},
                  {"bad_mean", bad_mean[i]}});
  json ps = json::array();
  for (const auto& p : pieces) ps.push_back(json::array({p.a, p.b, p.f, p.g, p.h, p.h_err, p.principal}));
  return {{"grid", shift_name(grid)},       {"gamma", gamma},
          {"t", t},                         {"threshold", threshold},
          {"principal", pc},                {"pieces", ps},
          {"root_exceeds", root_exceeds},   {"doubling_warning", doubling_warning},
          {"floor_scale", floor_scale}};
}

namespace {

struct Averager {
  StepAtomicMeasure absf, sgnf;
  const StepAtomicMeasure* sigma;
  // sigma-average of |f| (0 when sigma(Q) = 0)
  double avg(const Interval& q) const {
    const double s = sigma->mass(q);
    return s > 0.0 ? absf.mass(q) / s : 0.0;
  }
  double savg(const Interval& q) const {
    const double s = sigma->mass(q);
    return s > 0.0 ? sgnf.mass(q) / s : 0.0;
  }
};

StepFunction abs_of(const StepFunction& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (auto& x : v) x = std::fabs(x);
  return {f.resolution(), f.first_cell(), std::move(v)};
}

}  // namespace

CZDecomposition cz_split(const StepFunction& f, const StepAtomicMeasure& sigma, double gamma, int t,
                         Shift alpha) {
  if (!(gamma >= 2.0)) throw PreconditionError("cz_split requires gamma >= 2");
  if (sigma.is_signed()) throw PreconditionError("cz_split requires an unsigned sigma");
  CZDecomposition cz;
  cz.grid = alpha;
  cz.gamma = gamma;
  cz.t = t;
  cz.threshold = std::pow(gamma, t);
  const int L = f.resolution();
  // below the cell scale of f a plain cube has the average of its cell; a
  // shifted one may straddle two cells, so go 20 scales further
  cz.floor_scale = alpha == Shift::Zero ? -L : -L - 20;
  Averager av{sigma.weighted(abs_of(f)), sigma.weighted(f), &sigma};
  const auto hull = av.absf.support_hull();
  if (hull) {
    auto within_cell = [&](const DyadicInterval& c) {
      const auto cell = locate(Shift::Zero, c.left_exact(), -L);
      return c.right_exact() <= cell.right_exact();
    };
    // top cubes: the grid cubes over the hull, raised while one still exceeds
    int J = static_cast<int>(std::ceil(std::log2(std::max(hull->second - hull->first, f.cell_length())))) + 1;
    std::vector<DyadicInterval> roots;
    for (int up = 0; up < 48; ++up, ++J) {
      roots.clear();
      const auto a = locate(alpha, hull->first, J), b = locate(alpha, hull->second, J);
      bool exceeds = false;
      for (int64_t k = a.index(); k <= b.index(); ++k) {
        roots.emplace_back(J, k, alpha);
        exceeds |= av.avg(roots.back().interval()) > cz.threshold;
      }
      cz.root_exceeds = exceeds;
      if (!exceeds) break;
    }
    std::vector<DyadicInterval> stack(roots.rbegin(), roots.rend());
    while (!stack.empty()) {
      const auto c = stack.back();
      stack.pop_back();
      const Interval iv = c.interval();
      if (av.absf.mass(iv) <= 0.0) continue;
      const double a = av.avg(iv);
      if (a > cz.threshold) {
        cz.principal.push_back(c);
        cz.average.push_back(a);
        cz.signed_average.push_back(av.savg(iv));
        continue;
      }
      if (c.scale() > cz.floor_scale && !within_cell(c)) {
        const auto [x, y] = c.children();
        stack.push_back(y);
        stack.push_back(x);
      }
    }
  }
  std::vector<std::size_t> order(cz.principal.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return by_left(cz.principal[a], cz.principal[b]); });
  auto permute = [&](auto& v) {
    auto w = v;
    for (std::size_t i = 0; i < order.size(); ++i) w[i] = v[order[i]];
    v = std::move(w);
  };
  permute(cz.principal);
  permute(cz.average);
  permute(cz.signed_average);
  for (double a : cz.average)
    if (a > std::pow(gamma, t + 1)) cz.doubling_warning = true;

  // pieces: cells of f cut at principal boundaries, plus principal parts off f's range
  std::vector<double> bp = f.knots();
  for (const auto& c : cz.principal) {
    bp.push_back(c.interval().left());
    bp.push_back(c.interval().right());
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  std::vector<double> plefts;
  for (const auto& c : cz.principal) plefts.push_back(c.interval().left());
  const auto knots = f.knots();
  const double flo = knots.empty() ? 0.0 : knots.front(), fhi = knots.empty() ? 0.0 : knots.back();
  cz.bad_mean.assign(cz.principal.size(), 0.0);
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double a = bp[i], b = bp[i + 1], mid = 0.5 * (a + b);
    int pr = -1;
    const auto it = std::upper_bound(plefts.begin(), plefts.end(), mid);
    if (it != plefts.begin()) {
      const auto j = static_cast<std::size_t>(it - plefts.begin() - 1);
      if (mid < cz.principal[j].interval().right()) pr = static_cast<int>(j);
    }
    const bool in_f = !knots.empty() && flo <= mid && mid < fhi;
    if (pr < 0 && !in_f) continue;
    CZPiece p{a, b, f.value_at(mid), 0.0, 0.0, 0.0, pr};
    if (pr < 0) {
      p.g = p.f;
    } else {
      p.g = cz.signed_average[static_cast<std::size_t>(pr)];
      // two-sum: h + h_err = f - g without rounding
      p.h = p.f - p.g;
      const double bv = p.h - p.f;
      p.h_err = (p.f - (p.h - bv)) + (-p.g - bv);
      cz.bad_mean[static_cast<std::size_t>(pr)] += (p.h + p.h_err) * sigma.mass({a, b});
    }
    cz.pieces.push_back(p);
  }
  return cz;
}

json CZReport::to_json() const {
  return {{"maximal", maximal},         {"good_bounded", good_bounded},
          {"mean_zero", mean_zero},     {"identity", identity},
          {"worst_mean", worst_mean},   {"summability", summability},
          {"maximal_constant", maximal_constant}, {"ok", ok()}};
}

CZReport verify_cz(const CZDecomposition& cz, const StepFunction& f, const StepAtomicMeasure& sigma,
                   double p) {
  CZReport rep;
  const StepAtomicMeasure absf = sigma.weighted(abs_of(f));
  const double mass = absf.total_mass();
  auto avg = [&](const Interval& q) {
    const double s = sigma.mass(q);
    return s > 0.0 ? absf.mass(q) / s : 0.0;
  };
  double covered = 0.0;
  for (std::size_t i = 0; i < cz.principal.size(); ++i) {
    const auto& c = cz.principal[i];
    if (!(avg(c.interval()) > cz.threshold)) rep.maximal = false;
    if (!cz.root_exceeds && avg(c.parent().interval()) > cz.threshold) rep.maximal = false;
    if (i + 1 < cz.principal.size() && cz.principal[i + 1].left_exact() < c.right_exact())
      rep.maximal = false;
    const double m = std::fabs(cz.bad_mean[i]);
    rep.worst_mean = std::max(rep.worst_mean, m);
    if (m > 1e-12 * mass) rep.mean_zero = false;
    covered += sigma.mass(c.interval());
  }
  const double top = std::pow(cz.gamma, cz.t + 1);
  for (const auto& pc : cz.pieces) {
    const auto sum = GridRational::from_double(pc.g) + GridRational::from_double(pc.h) +
                     GridRational::from_double(pc.h_err);
    if (!(sum == GridRational::from_double(pc.f))) rep.identity = false;
    if (pc.principal < 0 && pc.h != 0.0) rep.identity = false;
    if (sigma.mass({pc.a, pc.b}) > 0.0 && std::fabs(pc.g) > top) rep.good_bounded = false;
  }
  // ||f||_p^p and int (M^dy f)^p d sigma; M^dy f is constant on cells of f's
  // resolution when the grid is plain
  double norm = 0.0;
  const auto vals = f.values();
  const double h = f.cell_length();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = double(f.first_cell() + static_cast<int64_t>(i)) * h;
    norm += std::pow(std::fabs(vals[i]), p) * sigma.mass({a, a + h});
  }
  if (norm > 0.0) {
    rep.summability = std::pow(cz.threshold, p) * covered / norm;
    if (cz.grid == Shift::Zero) {
      const DyadicMaximal M(sigma, f, Shift::Zero);
      const auto sh = sigma.support_hull();
      if (sh) {
        const auto c0 = static_cast<int64_t>(std::floor(sh->first / h));
        const auto c1 = static_cast<int64_t>(std::floor(sh->second / h));
        double acc = 0.0;
        for (int64_t k = c0; k <= c1; ++k) {
          const double a = double(k) * h;
          const double s = sigma.mass_closed(a, a + h) - sigma.atom_at(a + h);
          if (s > 0.0) acc += std::pow(M(a + 0.5 * h), p) * s;
        }
        rep.maximal_constant = acc / norm;
      }
    }
  }
  return rep;
}

// ---------------------------------------------- maximum principle, good lambda

json MaxPrincipleReport::to_json() const {
  json ps = json::array();
  for (const auto& [j, v] : per_scale) ps.push_back({j, v});
  return {{"C", C}, {"cubes", cubes}, {"skipped", skipped}, {"flagged", flagged}, {"worst", worst}, {"per_scale", ps}};
}

double MaxPrincipleReport::C_from(int s) const {
  double c = 0.0;
  for (const auto& [j, v] : per_scale)
    if (j >= s) c = std::max(c, v);
  return c;
}

MaxPrincipleReport max_principle_check(const StepAtomicMeasure& nu, const WhitneyDecomposition& wd,
                                       int samples_per_cube, const SearchBudget& budget) {
  MaxPrincipleReport rep;
  rep.cubes = wd.cubes.size();
  const double thr = std::ldexp(1.0, wd.level);
  const std::size_t n = wd.cubes.size();
  std::vector<double> c(n, 0.0), excess(n, 0.0);
  std::vector<char> flag(n, 0);
  const int min_scale = 2 - wd.omega.mesh;
  for (const auto& q : wd.cubes) rep.skipped += q.scale() < min_scale;
  parallel_for(n, [&](std::size_t i) {
    if (wd.cubes[i].scale() < min_scale) return;
    const Interval q = wd.cubes[i].interval();
    const StepAtomicMeasure out = nu.restricted_complement(q.dilate(3.0));
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples_per_cube; ++s) {
      const double x = q.left() + (s + 0.5) * q.length() / samples_per_cube;
      best = std::max(best, t_natural(out, x, budget));
    }
    excess[i] = best - thr;
    if (excess[i] <= 0.0) return;
    const double pb = poisson_bold(q, nu);
    if (pb > 0.0)
      c[i] = excess[i] / pb;
    else
      flag[i] = 1;
  });
  std::size_t worst = 0;
  std::map<int, double> by_scale;
  for (std::size_t i = 0; i < n; ++i) {
    rep.flagged += flag[i];
    if (c[i] > c[worst]) worst = i;
    if (wd.cubes[i].scale() >= min_scale) {
      double& v = by_scale[wd.cubes[i].scale()];
      v = std::max(v, c[i]);
    }
  }
  rep.per_scale.assign(by_scale.begin(), by_scale.end());
  if (n) {
    rep.C = c[worst];
    rep.worst = {{"cube", cube_j(wd.cubes[worst])}, {"excess", excess[worst]}};
  }
  return rep;
}

double GoodLambda::needed_constant(double beta, double tstar, double p) const {
  if (lhs <= 0.0) return 0.0;
  const double denom = beta * std::pow(tstar, p) * term1 + term2;
  return denom > 0.0 ? lhs / denom : std::numeric_limits<double>::infinity();
}

json GoodLambda::to_json() const { return {{"lhs", lhs}, {"term1", term1}, {"term2", term2}}; }

GoodLambda good_lambda_check(const WeightPair& w, const StepFunction& f, double beta, int k,
                             const SuperlevelOptions& o) {
  GoodLambda out;
  const StepAtomicMeasure nu = w.sigma().weighted(f);
  const auto hull = nu.support_hull();
  const auto ohull = w.omega().support_hull();
  if (!hull || !ohull) return out;
  const double p = w.p();
  const auto vals = f.values();
  const double h = f.cell_length();
  double norm = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = double(f.first_cell() + static_cast<int64_t>(i)) * h;
    norm += std::pow(std::fabs(vals[i]), p) * w.sigma().mass({a, a + h});
  }
  out.term2 = std::pow(beta, -p) * std::pow(2.0, -k * p) * norm;
  const double reach = nu.total_variation() * std::ldexp(1.0, -k);
  const double lo = std::max(hull->first - reach, ohull->first);
  const double hi = std::min(hull->second + reach, ohull->second);
  if (!(lo <= hi)) return out;
  const auto first = static_cast<int64_t>(std::floor(std::ldexp(lo, o.mesh)));
  const auto last = static_cast<int64_t>(std::floor(std::ldexp(hi, o.mesh))) + 1;
  if (last - first > o.max_cells) throw PreconditionError("good_lambda_check: window above max_cells");
  const std::size_t n = static_cast<std::size_t>(last - first);
  const StepAtomicMeasure absnu = nu.abs();
  const MaximalFunction M(absnu);
  const double lvl = std::ldexp(1.0, k);
  std::vector<double> l1(n, 0.0), t1(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const double a = std::ldexp(double(first + static_cast<int64_t>(i)), -o.mesh);
    const double b = std::ldexp(double(first + static_cast<int64_t>(i) + 1), -o.mesh);
    const double om = w.omega().mass({a, b});
    if (om <= 0.0) return;
    const double x = 0.5 * (a + b);
    const double T = t_natural(nu, x, o.budget);
    if (T > lvl) t1[i] = om;
    if (T > 2.0 * lvl && M(x) <= beta * lvl) l1[i] = om;
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.lhs += l1[i];
    out.term1 += t1[i];
  }
  return out;
}

}  // namespace tws
