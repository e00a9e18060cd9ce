#include "tws/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tws/errors.hpp"
#include "tws/quadrature.hpp"
#include "tws/simd/kernels.hpp"

namespace tws {

const Kernel& hilbert_kernel() {
  static const HilbertKernel k;
  return k;
}

const CutoffProfile& standard_cutoff() {
  static const CutoffProfile c = CutoffProfile::smoothstep_pair();
  return c;
}

void TruncationParams::validate() const {
  if (!(eps1 > 0.0) || !(eps2 > 0.0) || !std::isfinite(eps1) || !std::isfinite(eps2))
    throw PreconditionError("truncation radii must be positive and finite");
  const double ratio = eps1 / eps2;
  if (ratio < 0.25 * (1 - 1e-12) || ratio > 4.0 * (1 + 1e-12))
    throw PreconditionError("eccentricity eps1/eps2 outside [1/4, 4]");
  if (!(R > std::max(eps1, eps2)) || !std::isfinite(R))
    throw PreconditionError("truncation requires max(eps1, eps2) < R < inf");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One side of nu as seen from x, in the distance coordinate t = |x - y| > 0.
struct Side {
  std::vector<double> t, m;
  std::vector<Segment> seg;  // a = t0, b = t1, sorted by a
  std::vector<double> lo;    // seg[i].a
  std::vector<double> hi;    // seg[i].b
  std::vector<double> tail;  // sum over j >= i of density ln(b/a)

  void prepare() {
    std::sort(seg.begin(), seg.end(), [](const Segment& u, const Segment& v) { return u.a < v.a; });
    lo.resize(seg.size());
    hi.resize(seg.size());
    tail.assign(seg.size() + 1, 0.0);
    for (size_t i = seg.size(); i-- > 0;) {
      lo[i] = seg[i].a;
      hi[i] = seg[i].b;
      // a = 0 only for a segment touching x, which never sits wholly on a plateau
      tail[i] = tail[i + 1] + (seg[i].a > 0 ? seg[i].density * std::log(seg[i].b / seg[i].a) : 0.0);
    }
  }
  // segments meeting [u, v) and the first one starting at or after v
  std::pair<size_t, size_t> band(double u, double v) const {
    const auto first = std::upper_bound(hi.begin(), hi.end(), u) - hi.begin();
    const auto last = std::lower_bound(lo.begin(), lo.end(), v) - lo.begin();
    return {static_cast<size_t>(first), static_cast<size_t>(std::max(first, last))};
  }
};

struct Split {
  Side left, right;
  double min_dist = kInf;  // smallest positive distance from x to a breakpoint
  double max_dist = 0.0;
};

Split split_at(const StepAtomicMeasure& nu, double x) {
  Split s;
  auto note = [&](double d) {
    d = std::fabs(d);
    if (d > 0) s.min_dist = std::min(s.min_dist, d);
    s.max_dist = std::max(s.max_dist, d);
  };
  for (const auto& at : nu.atoms()) {
    note(at.x - x);
    if (at.x < x) {
      s.left.t.push_back(x - at.x);
      s.left.m.push_back(at.m);
    } else if (at.x > x) {
      s.right.t.push_back(at.x - x);
      s.right.m.push_back(at.m);
    }
  }
  for (const auto& g : nu.segments()) {
    note(g.a - x);
    note(g.b - x);
    if (g.a < x) s.left.seg.push_back({x - std::min(g.b, x), x - g.a, g.density});
    if (g.b > x) s.right.seg.push_back({std::max(g.a, x) - x, g.b - x, g.density});
  }
  s.left.prepare();
  s.right.prepare();
  return s;
}

// int zeta(t/eps)/t d(side): only the band [eps/2, eps) needs the closed form
double side_zeta_segments(const Side& s, double eps) {
  const auto [i, j] = s.band(0.5 * eps, eps);
  double acc = s.tail[j];
  for (size_t k = i; k < j; ++k)
    acc += s.seg[k].density * zeta_over_v_integral(s.seg[k].a / eps, s.seg[k].b / eps);
  return acc;
}

// int (1 - eta(t/R))/t d(side): band [R, 2R)
double side_eta_tail_segments(const Side& s, double R) {
  const auto [i, j] = s.band(R, 2.0 * R);
  double acc = s.tail[j];
  for (size_t k = i; k < j; ++k)
    acc += s.seg[k].density * eta_tail_over_v_integral(s.seg[k].a / R, s.seg[k].b / R);
  return acc;
}

double side_zeta(const Side& s, double eps) {
  return side_zeta_segments(s, eps) +
         simd::kernels().zeta_over_t(s.t.data(), s.m.data(), s.t.size(), eps);
}

double side_eta_tail(const Side& s, double R) {
  return side_eta_tail_segments(s, R) +
         simd::kernels().eta_tail_over_t(s.t.data(), s.m.data(), s.t.size(), R);
}

// int zeta(t/eps) eta(t/R)/t d(side), using zeta eta = zeta - (1 - eta) for eps <= R
double side_cutoff(const Side& s, double eps, double R) {
  return side_zeta_segments(s, eps) - side_eta_tail_segments(s, R) +
         simd::kernels().cutoff_over_t(s.t.data(), s.m.data(), s.t.size(), eps, R);
}

double t_trunc_generic(const StepAtomicMeasure& nu, double x, const TruncationParams& p,
                       const CutoffProfile& cut, const Kernel& K) {
  auto weight = [&](double y) {
    const double t = x - y;
    return (cut.zeta(t / p.eps1) + cut.zeta(-t / p.eps2)) * cut.eta(std::fabs(t) / p.R);
  };
  double acc = 0.0;
  for (const auto& at : nu.atoms())
    if (at.x != x) acc += at.m * K(x, at.x) * weight(at.x);
  const double dead_lo = x - 0.5 * p.eps1, dead_hi = x + 0.5 * p.eps2;
  const std::array<double, 9> knots = {x - 2 * p.R, x - p.R,          x - p.eps1,
                                       dead_lo,     x,                dead_hi,
                                       x + p.eps2,  x + p.R,          x + 2 * p.R};
  auto integrand = [&](double y) { return K(x, y) * weight(y); };
  for (const auto& g : nu.segments()) {
    std::vector<double> cuts = {g.a};
    for (double k : knots)
      if (k > g.a && k < g.b) cuts.push_back(k);
    cuts.push_back(g.b);
    std::sort(cuts.begin(), cuts.end());
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i], b = cuts[i + 1];
      if (a >= dead_lo && b <= dead_hi) continue;  // cutoff vanishes here
      if (a >= x + 2 * p.R || b <= x - 2 * p.R) continue;
      const auto r = adaptive_simpson(integrand, a, b, 1e-10, 40);
      if (!r.converged) throw QuadratureError("t_trunc: tolerance not met", r.error);
      acc += g.density * r.value;
    }
  }
  return acc;
}

}  // namespace

double t_trunc(const StepAtomicMeasure& nu, double x, const TruncationParams& params,
               const CutoffProfile& cut, const Kernel& kernel) {
  params.validate();
  if (!(kernel.is_hilbert() && cut.standard)) return t_trunc_generic(nu, x, params, cut, kernel);
  const Split s = split_at(nu, x);
  return side_cutoff(s.left, params.eps1, params.R) - side_cutoff(s.right, params.eps2, params.R);
}

// ------------------------------------------------------------------ sup search

namespace {

constexpr std::array<double, 5> kRatios = {0.25, 0.5, 1.0, 2.0, 4.0};

struct Separable {
  const Split* s;
  mutable long evals = 0;
  // T = [Z_L(eps1) - Z_R(eps2)] - [W_L(R) - W_R(R)]
  double value(double eps1, double eps2, double R) const {
    ++evals;
    double v = side_zeta(s->left, eps1) - side_zeta(s->right, eps2);
    if (std::isfinite(R)) v -= side_eta_tail(s->left, R) - side_eta_tail(s->right, R);
    return v;
  }
};

struct GridBest {
  double value = -1.0;
  double eps2 = 0.0, ratio = 1.0, R = kInf;
};

// Best |A - B(R)| over the grid using every `stride`-th grid index.
GridBest scan_grid(const std::vector<double>& g, const std::vector<std::vector<double>>& zl,
                   const std::vector<double>& zr, const std::vector<double>& B,
                   const std::vector<double>& ratios, size_t stride) {
  const size_t n = g.size();
  // suffix extremes of B over allowed indices, with the R = inf option (B = 0)
  std::vector<double> smax(n + 1, 0.0), smin(n + 1, 0.0);
  std::vector<double> rmax(n + 1, kInf), rmin(n + 1, kInf);
  for (size_t i = n; i-- > 0;) {
    smax[i] = smax[i + 1];
    smin[i] = smin[i + 1];
    rmax[i] = rmax[i + 1];
    rmin[i] = rmin[i + 1];
    if (i % stride != 0) continue;
    if (B[i] > smax[i]) {
      smax[i] = B[i];
      rmax[i] = g[i];
    }
    if (B[i] < smin[i]) {
      smin[i] = B[i];
      rmin[i] = g[i];
    }
  }
  GridBest best;
  for (size_t r = 0; r < ratios.size(); ++r) {
    for (size_t i = 0; i < n; i += stride) {
      const double e = std::max(ratios[r], 1.0) * g[i];
      const size_t m = static_cast<size_t>(std::upper_bound(g.begin(), g.end(), e) - g.begin());
      const double A = zl[r][i] - zr[i];
      const double v1 = std::fabs(A - smin[m]), v2 = std::fabs(A - smax[m]);
      if (v1 > best.value) best = {v1, g[i], ratios[r], rmin[m]};
      if (v2 > best.value) best = {v2, g[i], ratios[r], rmax[m]};
    }
  }
  return best;
}

template <class F>
double golden_max(F f, double lo, double hi, int iters, double& arg) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  double best = std::max(fc, fd);
  arg = fc >= fd ? c : d;
  for (int it = 0; it < iters; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
      if (fc > best) {
        best = fc;
        arg = c;
      }
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
      if (fd > best) {
        best = fd;
        arg = d;
      }
    }
  }
  return best;
}

SupResult sup_search(const StepAtomicMeasure& nu, double x, const SearchBudget& budget,
                     bool centered) {
  SupResult res;
  if (budget.points_per_decade < 1) throw PreconditionError("points_per_decade must be >= 1");
  if (nu.empty()) return res;
  const Split s = split_at(nu, x);
  if (!(s.max_dist > 0.0)) return res;  // everything sits at x
  const double floor_eps = std::ldexp(1.0, -(nu.resolution() + 20));
  const double lo = std::max(std::min(s.min_dist, s.max_dist) / 8.0, floor_eps);
  const double hi = std::max(4.0 * s.max_dist, 2.0 * lo);
  const double ppd = budget.points_per_decade;
  const auto i0 = static_cast<long>(std::floor(ppd * std::log10(lo)));
  const auto i1 = static_cast<long>(std::ceil(ppd * std::log10(hi)));
  // anchor even indices so that doubling the density nests the grids
  const long i0e = i0 - (((i0 % 2) + 2) % 2);
  std::vector<double> g;
  for (long i = i0e; i <= i1; ++i) g.push_back(std::pow(10.0, static_cast<double>(i) / ppd));

  const std::vector<double> ratios =
      centered ? std::vector<double>{1.0} : std::vector<double>(kRatios.begin(), kRatios.end());
  Separable sep{&s};
  const size_t n = g.size();
  std::vector<double> zr(n), B(n);
  std::vector<std::vector<double>> zl(ratios.size(), std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    zr[i] = side_zeta(s.right, g[i]);
    B[i] = side_eta_tail(s.left, g[i]) - side_eta_tail(s.right, g[i]);
    for (size_t r = 0; r < ratios.size(); ++r) zl[r][i] = side_zeta(s.left, ratios[r] * g[i]);
  }
  res.evaluations = static_cast<long>(n * (2 + ratios.size()));

  const GridBest coarse = scan_grid(g, zl, zr, B, ratios, 2);
  GridBest best = scan_grid(g, zl, zr, B, ratios, 1);
  if (!(best.eps2 > 0.0)) best = {0.0, g.front(), 1.0, kInf};
  res.converged = best.value <= 0.0 || (best.value - coarse.value) <= 1e-3 * best.value;

  double le2 = std::log(best.eps2), lr = std::log(best.ratio);
  double lR = std::isfinite(best.R) ? std::log(best.R) : kInf;
  double top = best.value;
  if (budget.refine && top > 0.0) {
    const double h = std::log(10.0) / ppd;
    auto objective = [&](double e2, double rr, double RR) {
      const double e1 = std::exp(rr) * std::exp(e2);
      const double R = std::isfinite(RR) ? std::exp(RR) : kInf;
      if (std::isfinite(R) && !(R > std::max(e1, std::exp(e2)))) return -1.0;
      return std::fabs(sep.value(e1, std::exp(e2), R));
    };
    const int it = budget.refine_iterations;
    double arg = le2;
    double v = golden_max([&](double c) { return objective(c, lr, lR); }, le2 - h, le2 + h, it, arg);
    if (v > top) {
      top = v;
      le2 = arg;
    }
    if (!centered) {
      const double rlo = std::max(lr - h, std::log(0.25)), rhi = std::min(lr + h, std::log(4.0));
      v = golden_max([&](double c) { return objective(le2, c, lR); }, rlo, rhi, it, arg);
      if (v > top) {
        top = v;
        lr = arg;
      }
    }
    if (std::isfinite(lR)) {
      const double emax = le2 + std::max(lr, 0.0);
      const double Rlo = std::max(lR - h, emax + 1e-9), Rhi = lR + h;
      if (Rhi > Rlo) {
        v = golden_max([&](double c) { return objective(le2, lr, c); }, Rlo, Rhi, it, arg);
        if (v > top) {
          top = v;
          lR = arg;
        }
      }
    }
  }
  res.evaluations += sep.evals;
  res.value = top;
  const double e2 = std::exp(le2), e1 = std::exp(lr) * e2;
  // a finite representative for R = inf: beyond every distance W vanishes
  const double R = std::isfinite(lR) ? std::exp(lR) : 2.0 * std::max({hi, e1, e2});
  res.argmax = {centered ? e2 : e1, e2, R};
  res.signed_value = sep.value(res.argmax.eps1, res.argmax.eps2, R);
  res.value = std::max(res.value, std::fabs(res.signed_value));
  return res;
}

}  // namespace

SupResult t_natural_search(const StepAtomicMeasure& nu, double x, const SearchBudget& budget) {
  return sup_search(nu, x, budget, false);
}

SupResult t_flat_search(const StepAtomicMeasure& nu, double x, const SearchBudget& budget) {
  return sup_search(nu, x, budget, true);
}

double t_natural(const StepAtomicMeasure& nu, double x, const SearchBudget& budget) {
  return t_natural_search(nu, x, budget).value;
}

double t_flat(const StepAtomicMeasure& nu, double x, const SearchBudget& budget) {
  return t_flat_search(nu, x, budget).value;
}

double t_sup_bruteforce(const StepAtomicMeasure& nu, double x, const std::vector<double>& eps,
                        const std::vector<double>& ratios, const std::vector<double>& radii) {
  double best = 0.0;
  for (double e2 : eps)
    for (double r : ratios)
      for (double R : radii) {
        const TruncationParams p{r * e2, e2, R};
        if (!(R > std::max(p.eps1, p.eps2))) continue;
        best = std::max(best, std::fabs(t_trunc(nu, x, p)));
      }
  return best;
}

// ------------------------------------------------------------ maximal function

MaximalFunction::MaximalFunction(const StepAtomicMeasure& nu) : nu_(&nu) {
  if (nu.is_signed()) throw PreconditionError("maximal_fn requires an unsigned measure");
  bp_ = nu.breakpoints();
  closed_cum_.reserve(bp_.size());
  open_cum_.reserve(bp_.size());
  for (double b : bp_) {
    closed_cum_.push_back(nu.mass_below(b, true));
    open_cum_.push_back(nu.mass_below(b, false));
  }
}

double MaximalFunction::operator()(double x) const {
  if (bp_.empty()) return 0.0;
  if (nu_->atom_at(x) > 0.0) return kInf;
  // Over closed [a, b] with a <= x <= b the average is monotone in each
  // endpoint between consecutive breakpoints, so the sup is a max over
  // breakpoints (and x itself) on each side.
  const auto split = std::upper_bound(bp_.begin(), bp_.end(), x) - bp_.begin();
  std::vector<double> rpos, rcum;
  rpos.reserve(bp_.size() + 1);
  rcum.reserve(bp_.size() + 1);
  rpos.push_back(x);
  rcum.push_back(nu_->mass_below(x, true));
  for (auto i = split; i < static_cast<long>(bp_.size()); ++i) {
    rpos.push_back(bp_[static_cast<size_t>(i)]);
    rcum.push_back(closed_cum_[static_cast<size_t>(i)]);
  }
  const auto& k = simd::kernels();
  double best = 0.0;
  auto consider = [&](double a, double base) {
    best = std::max(best, k.max_slope(rpos.data(), rcum.data(), rpos.size(), a, base));
  };
  consider(x, nu_->mass_below(x, false));
  for (long i = 0; i < split; ++i) {
    const auto u = static_cast<size_t>(i);
    if (bp_[u] < x) consider(bp_[u], open_cum_[u]);
  }
  return best;
}

double maximal_fn(const StepAtomicMeasure& nu, double x) { return MaximalFunction(nu)(x); }

// ---------------------------------------------------------------- dyadic M_mu

DyadicMaximal::DyadicMaximal(const StepAtomicMeasure& mu, const StepFunction& f, Shift alpha)
    : mu_(&mu), f_(f), alpha_(alpha) {
  if (mu.is_signed()) throw PreconditionError("dyadic_maximal requires an unsigned measure");
  std::vector<double> absval(f.values().begin(), f.values().end());
  for (double& v : absval) v = std::fabs(v);
  weighted_ = mu.weighted(StepFunction(f.resolution(), f.first_cell(), std::move(absval)));
}

double DyadicMaximal::average(const Interval& q, bool& ok) const {
  const double m = mu_->mass(q);
  ok = m > 0.0;
  return ok ? weighted_.mass(q) / m : 0.0;
}

double DyadicMaximal::operator()(double x) const {
  const auto hull = mu_->support_hull();
  if (!hull) return 0.0;
  const int jf = -f_.resolution();
  double best = 0.0;
  bool ok = false;
  // coarse side: from the f-cell scale up until the cube has absorbed all the
  // mass it will ever see (for alpha = 0 the grid never crosses 0)
  double lim_lo = hull->first, lim_hi = hull->second;
  if (alpha_ == Shift::Zero) {
    if (x >= 0)
      lim_lo = std::max(lim_lo, 0.0);
    else
      lim_hi = std::min(lim_hi, 0.0);
  }
  for (int j = jf; j < jf + 2200; ++j) {
    if (j > 1000) break;
    const Interval q = locate(alpha_, x, j).interval();
    const double v = average(q, ok);
    if (ok) best = std::max(best, v);
    if (q.left() <= lim_lo && lim_hi < q.right()) break;
  }
  // fine side: shifted cubes need not nest in the f cells, so descend until
  // the cube sits inside one f cell, where the average is |f| itself
  if (alpha_ != Shift::Zero) {
    const double h = f_.cell_length();
    for (int j = jf - 1; j >= jf - 40; --j) {
      const Interval q = locate(alpha_, x, j).interval();
      const double v = average(q, ok);
      if (ok) best = std::max(best, v);
      if (std::floor(q.left() / h) == std::floor(std::nextafter(q.right(), -kInf) / h)) break;
    }
  }
  return best;
}

double dyadic_maximal(const StepAtomicMeasure& mu, const StepFunction& f, double x, Shift alpha) {
  return DyadicMaximal(mu, f, alpha)(x);
}

// ------------------------------------------------------------ linearizations

void Linearization::validate() const {
  if (points.size() != selection.size())
    throw PreconditionError("linearization: one selection per point required");
  for (const auto& s : selection) {
    s.params.validate();
    if (localized && s.params.R > 0.5 * localized->length() * (1 + 1e-12))
      throw PreconditionError("localized linearization requires R(x) <= |Q|/2");
  }
}

double cutoff_kernel(double x, double y, const TruncationParams& p, const CutoffProfile& cut) {
  if (x == y) return 0.0;
  const double t = x - y;
  const double w = (cut.zeta(t / p.eps1) + cut.zeta(-t / p.eps2)) * cut.eta(std::fabs(t) / p.R);
  return w / t;
}

std::complex<double> linearized_apply(const Linearization& L, const StepAtomicMeasure& nu,
                                      std::size_t i, const CutoffProfile& cut) {
  if (i >= L.points.size()) throw PreconditionError("linearized_apply: index out of range");
  const auto& s = L.selection[i];
  return std::polar(1.0, s.theta) * t_trunc(nu, L.points[i], s.params, cut);
}

std::complex<double> linearized_adjoint(const Linearization& L, const StepAtomicMeasure& mu,
                                        double y, const CutoffProfile& cut) {
  if (!mu.segments().empty())
    throw PreconditionError("linearized_adjoint: measure must be carried by the point set");
  std::vector<size_t> order(L.points.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return L.points[a] < L.points[b]; });
  std::complex<double> acc = 0.0;
  for (const auto& at : mu.atoms()) {
    const auto it = std::lower_bound(order.begin(), order.end(), at.x,
                                     [&](size_t i, double v) { return L.points[i] < v; });
    if (it == order.end() || L.points[*it] != at.x)
      throw PreconditionError("linearized_adjoint: measure must be carried by the point set");
    const auto& s = L.selection[*it];
    acc += at.m * std::polar(1.0, s.theta) * cutoff_kernel(at.x, y, s.params, cut);
  }
  return acc;
}

Linearization linearization_from_argmax(const StepAtomicMeasure& nu,
                                        const std::vector<double>& points,
                                        const SearchBudget& budget) {
  Linearization L;
  L.points = points;
  for (double x : points) {
    const auto r = t_natural_search(nu, x, budget);
    TruncationParams p = r.argmax;
    if (!(p.R > std::max(p.eps1, p.eps2))) p = {1.0, 1.0, 4.0};
    L.selection.push_back({p, r.signed_value < 0 ? M_PI : 0.0});
  }
  return L;
}

}  // namespace tws
