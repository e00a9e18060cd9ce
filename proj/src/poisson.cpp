#include "tws/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tws/errors.hpp"
#include "tws/simd/kernels.hpp"

namespace tws {

// ----------------------------------------------------------------- DiniModulus

DiniModulus DiniModulus::linear() { return {}; }

DiniModulus DiniModulus::table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw PreconditionError("Dini table needs at least one knot");
  double ps = 0.0, pv = 0.0;
  for (const auto& [s, v] : knots) {
    if (!(s > ps) || s > 1.0) throw PreconditionError("Dini knots must ascend within (0, 1]");
    if (!(v >= pv) || !std::isfinite(v)) throw PreconditionError("Dini values must be nondecreasing");
    ps = s;
    pv = v;
  }
  DiniModulus d;
  d.knots_ = std::move(knots);
  return d;
}

double DiniModulus::operator()(double s) const {
  if (knots_.empty()) return s;
  if (s <= 0.0) return 0.0;
  double ps = 0.0, pv = 0.0;
  for (const auto& [k, v] : knots_) {
    if (s <= k) return pv + (v - pv) * (s - ps) / (k - ps);
    ps = k;
    pv = v;
  }
  return pv;  // constant past the last knot
}

double DiniModulus::dini_integral() const {
  if (knots_.empty()) return 1.0;
  double acc = 0.0, ps = 0.0, pv = 0.0;
  for (const auto& [k, v] : knots_) {
    // delta = pv + beta (s - ps) on [ps, k]
    const double beta = (v - pv) / (k - ps);
    const double alpha = pv - beta * ps;
    acc += beta * (k - ps);
    if (ps > 0.0) acc += alpha * std::log(k / ps);
    ps = k;
    pv = v;
  }
  if (ps < 1.0) acc += pv * std::log(1.0 / ps);
  return acc;
}

void PartitionData::validate() const {
  std::vector<DyadicInterval> sorted = pieces;
  for (const auto& p : sorted) {
    if (p.shift() != root.shift()) throw PreconditionError("partition pieces from another grid");
    if (!root.contains(p)) throw PreconditionError("partition piece outside the root");
  }
  std::sort(sorted.begin(), sorted.end(), [](const DyadicInterval& a, const DyadicInterval& b) {
    return a.left_exact() < b.left_exact();
  });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].left_exact() < sorted[i - 1].right_exact())
      throw PreconditionError("overlapping partition pieces");
}

// ------------------------------------------------------------------ functionals

namespace {

bool covers(const Interval& q, const std::pair<double, double>& hull) {
  return q.left() <= hull.first && hull.second < q.right();
}

Interval dyadic_dilate(const Interval& q, int l) {
  const double half = std::ldexp(q.length(), l - 1);
  return {q.center() - half, q.center() + half};
}

}  // namespace

double poisson_bold(const Interval& q, const StepAtomicMeasure& nu, const DiniModulus& delta) {
  const auto hull = nu.support_hull();
  if (!hull) return 0.0;
  const StepAtomicMeasure a = nu.is_signed() ? nu.abs() : nu;
  double acc = a.mass(q) / q.length();
  double inner = a.mass(q);
  for (int l = 0; l < 2000; ++l) {
    const Interval in = dyadic_dilate(q, l);
    if (covers(in, *hull)) break;  // later annuli are empty
    const Interval out = dyadic_dilate(q, l + 1);
    const double outer = a.mass(out);
    acc += delta(std::ldexp(1.0, -l)) / out.length() * (outer - inner);
    inner = outer;
  }
  return acc;
}

double poisson_std(const Interval& q, const StepAtomicMeasure& nu) {
  const auto hull = nu.support_hull();
  if (!hull) return 0.0;
  const StepAtomicMeasure a = nu.is_signed() ? nu.abs() : nu;
  double acc = 0.0;
  for (int l = 0; l < 2000; ++l) {
    const Interval d = dyadic_dilate(q, l);
    const double w = std::ldexp(1.0, -2 * l) / q.length();
    if (covers(d, *hull)) {
      // sum_{m >= l} 4^-m |nu| / |Q| = (4/3) 4^-l |nu| / |Q|
      acc += 4.0 / 3.0 * w * a.total_mass();
      break;
    }
    acc += w * a.mass(d);
  }
  return acc;
}

double poisson_std_direct(const Interval& q, const StepAtomicMeasure& nu, int terms) {
  const StepAtomicMeasure a = nu.is_signed() ? nu.abs() : nu;
  double acc = 0.0;
  for (int l = 0; l < terms; ++l) {
    const Interval d = dyadic_dilate(q, l);
    acc += std::ldexp(1.0, -2 * l) / q.length() * a.mass(d);
  }
  return acc;
}

double poisson_dyadic(const DyadicInterval& i, const StepAtomicMeasure& nu) {
  if (nu.is_signed()) throw PreconditionError("poisson_dyadic requires an unsigned measure");
  auto hull = nu.support_hull();
  if (!hull) return 0.0;
  // The ancestors of a D^0 cube never cross 0; the shifted grids have no
  // such barrier and eventually swallow any bounded set.
  if (i.shift() == Shift::Zero) {
    if (i.left_exact().sign() >= 0) {
      hull->first = std::max(hull->first, 0.0);
      if (hull->second < 0.0) return 0.0;
    } else {
      if (hull->first >= 0.0) return 0.0;
      hull->second = std::min(hull->second, std::nextafter(0.0, -1.0));
    }
  }
  const double len = i.length();
  double acc = 0.0;
  DyadicInterval a = i;
  for (int l = 0; l < 2000; ++l, a = a.parent()) {
    const Interval q = a.interval();
    const double w = std::ldexp(1.0, -2 * l) / len;
    if (covers(q, *hull)) {
      acc += 4.0 / 3.0 * w * nu.mass(q);
      break;
    }
    acc += w * nu.mass(q);
  }
  return acc;
}

double poisson_dyadic_direct(const DyadicInterval& i, const StepAtomicMeasure& nu, int terms) {
  double acc = 0.0;
  DyadicInterval a = i;
  for (int l = 0; l < terms; ++l, a = a.parent()) {
    const Interval q = a.interval();
    acc += std::ldexp(1.0, -l) / q.length() * nu.mass(q);
  }
  return acc;
}

double poisson_redef(const Interval& i, const StepAtomicMeasure& nu) {
  return nu.mass(i) / i.length() + 0.5 * i.length() * integrate_inverse_square(nu, i);
}

double poisson_operator_apply(const PartitionData& parts, const StepAtomicMeasure& nu, double x) {
  for (const auto& p : parts.pieces)
    if (p.contains(x)) return poisson_std(p.interval(), nu);
  return 0.0;
}

double pjk_operator(const std::vector<Interval>& e, const std::vector<DyadicInterval>& pieces,
                    const StepAtomicMeasure& mu, double x, const DiniModulus& delta) {
  for (const auto& g : pieces)
    if (g.contains(x)) return poisson_bold(g.interval(), mu.restricted(e), delta);
  return 0.0;
}

double m_q(const Interval& q, const StepAtomicMeasure& nu) {
  const StepAtomicMeasure a = nu.is_signed() ? nu.abs() : nu;
  const auto bp = a.breakpoints();
  std::vector<double> rpos{q.right()}, rcum{a.mass_below(q.right(), true)};
  for (double b : bp)
    if (b > q.right()) {
      rpos.push_back(b);
      rcum.push_back(a.mass_below(b, true));
    }
  const auto& k = simd::kernels();
  double best = k.max_slope(rpos.data(), rcum.data(), rpos.size(), q.left(),
                            a.mass_below(q.left(), false));
  for (double b : bp)
    if (b < q.left())
      best = std::max(best, k.max_slope(rpos.data(), rcum.data(), rpos.size(), b,
                                        a.mass_below(b, false)));
  return best;
}

DyadicInterval max_subinterval(const Interval& q, Shift alpha) {
  const auto L = GridRational::from_double(q.left());
  const auto R = GridRational::from_double(q.right());
  const int top = static_cast<int>(std::floor(std::log2(q.length())));
  for (int j = top; j > top - 8; --j) {
    DyadicInterval c = locate(alpha, L, j);
    if (c.left_exact() < L) c = DyadicInterval(j, c.index() + 1, alpha);
    if (c.right_exact() <= R) return c;
  }
  throw Error("max_subinterval: no cube found");
}

}  // namespace tws
