#include "tws/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tws/errors.hpp"
#include "tws/quadrature.hpp"
#include "tws/simd/kernels.hpp"

namespace tws {

// ---------------------------------------------------------------- StepFunction

StepFunction::StepFunction(int resolution, int64_t first_cell, std::vector<double> values)
    : resolution_(resolution), first_(first_cell), values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw PreconditionError("StepFunction values must be finite");
}

StepFunction StepFunction::constant_on(int resolution, int64_t first_cell, int64_t last_cell,
                                       double c) {
  if (last_cell < first_cell) throw PreconditionError("constant_on: empty cell range");
  return StepFunction(resolution, first_cell,
                      std::vector<double>(static_cast<size_t>(last_cell - first_cell + 1), c));
}

double StepFunction::cell_length() const { return std::ldexp(1.0, -resolution_); }

double StepFunction::value_at(double x) const {
  const auto k = static_cast<int64_t>(std::floor(std::ldexp(x, resolution_)));
  const int64_t i = k - first_;
  if (i < 0 || i >= static_cast<int64_t>(values_.size())) return 0.0;
  return values_[static_cast<size_t>(i)];
}

std::vector<double> StepFunction::knots() const {
  std::vector<double> out;
  out.reserve(values_.size() + 1);
  for (size_t i = 0; i <= values_.size(); ++i)
    out.push_back(std::ldexp(static_cast<double>(first_ + static_cast<int64_t>(i)), -resolution_));
  return out;
}

// ---------------------------------------------------------- StepAtomicMeasure

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw PreconditionError(std::string(what) + " must be finite");
}

}  // namespace

StepAtomicMeasure StepAtomicMeasure::from_cells(
    int resolution, const std::vector<std::pair<int64_t, double>>& cells, std::vector<Atom> atoms,
    bool is_signed) {
  std::vector<Segment> segs;
  segs.reserve(cells.size());
  for (const auto& [k, w] : cells) {
    const double a = std::ldexp(static_cast<double>(k), -resolution);
    const double b = std::ldexp(static_cast<double>(k + 1), -resolution);
    segs.push_back({a, b, w});
  }
  return from_segments(resolution, std::move(segs), std::move(atoms), is_signed);
}

StepAtomicMeasure StepAtomicMeasure::from_segments(int resolution, std::vector<Segment> segments,
                                                   std::vector<Atom> atoms, bool is_signed) {
  StepAtomicMeasure m;
  m.resolution_ = resolution;
  m.signed_ = is_signed;
  for (const auto& s : segments) {
    check_finite(s.a, "segment endpoint");
    check_finite(s.b, "segment endpoint");
    check_finite(s.density, "cell weight");
    if (!(s.a < s.b)) throw PreconditionError("segment requires a < b");
    if (!is_signed && s.density < 0) throw PreconditionError("negative weight in unsigned measure");
  }
  for (const auto& a : atoms) {
    check_finite(a.x, "atom position");
    check_finite(a.m, "atom mass");
    if (!is_signed && a.m < 0) throw PreconditionError("negative atom in unsigned measure");
  }
  std::sort(segments.begin(), segments.end(),
            [](const Segment& l, const Segment& r) { return l.a < r.a; });
  for (size_t i = 1; i < segments.size(); ++i)
    if (segments[i].a < segments[i - 1].b) throw PreconditionError("overlapping cells");
  m.segments_ = std::move(segments);
  m.atoms_ = std::move(atoms);
  m.normalize();
  return m;
}

StepAtomicMeasure StepAtomicMeasure::uniform(double a, double b, double density, int resolution) {
  return from_segments(resolution, {{a, b, density}}, {}, density < 0);
}

StepAtomicMeasure StepAtomicMeasure::dirac(double x, double m) {
  return from_segments(0, {}, {{x, m}}, m < 0);
}

void StepAtomicMeasure::normalize() {
  std::vector<Segment> segs;
  for (const auto& s : segments_) {
    if (s.density == 0.0) continue;
    if (!segs.empty() && segs.back().b == s.a && segs.back().density == s.density)
      segs.back().b = s.b;
    else
      segs.push_back(s);
  }
  segments_ = std::move(segs);

  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
  std::vector<Atom> merged;
  for (const auto& a : atoms_) {
    if (!merged.empty() && merged.back().x == a.x)
      merged.back().m += a.m;
    else
      merged.push_back(a);
  }
  std::erase_if(merged, [](const Atom& a) { return a.m == 0.0; });
  atoms_ = std::move(merged);

  seg_cum_.assign(segments_.size() + 1, 0.0);
  for (size_t i = 0; i < segments_.size(); ++i)
    seg_cum_[i + 1] = seg_cum_[i] + segments_[i].density * (segments_[i].b - segments_[i].a);
  atom_cum_.assign(atoms_.size() + 1, 0.0);
  for (size_t i = 0; i < atoms_.size(); ++i) atom_cum_[i + 1] = atom_cum_[i] + atoms_[i].m;
}

double StepAtomicMeasure::segment_mass(double lo, double hi) const {
  if (!(hi > lo) || segments_.empty()) return 0.0;
  // first segment with b > lo, first segment with a >= hi
  const auto first = std::partition_point(segments_.begin(), segments_.end(),
                                          [&](const Segment& s) { return s.b <= lo; });
  const auto last = std::partition_point(first, segments_.end(),
                                         [&](const Segment& s) { return s.a < hi; });
  if (first == last) return 0.0;
  const auto i0 = static_cast<size_t>(first - segments_.begin());
  const auto i1 = static_cast<size_t>(last - segments_.begin());
  if (i1 - i0 == 1) {
    const auto& s = segments_[i0];
    return s.density * (std::min(s.b, hi) - std::max(s.a, lo));
  }
  // interior segments whole, the two ends clipped
  const auto& s0 = segments_[i0];
  const auto& s1 = segments_[i1 - 1];
  const double head = s0.density * (s0.b - std::max(s0.a, lo));
  const double tail = s1.density * (std::min(s1.b, hi) - s1.a);
  return head + (seg_cum_[i1 - 1] - seg_cum_[i0 + 1]) + tail;
}

double StepAtomicMeasure::mass(const Interval& q) const {
  const auto lo = std::partition_point(atoms_.begin(), atoms_.end(),
                                       [&](const Atom& a) { return a.x < q.left(); });
  const auto hi = std::partition_point(lo, atoms_.end(),
                                       [&](const Atom& a) { return a.x < q.right(); });
  const double atom_part =
      atom_cum_[static_cast<size_t>(hi - atoms_.begin())] - atom_cum_[static_cast<size_t>(lo - atoms_.begin())];
  return segment_mass(q.left(), q.right()) + atom_part;
}

double StepAtomicMeasure::mass_closed(double a, double b) const {
  const auto lo = std::partition_point(atoms_.begin(), atoms_.end(),
                                       [&](const Atom& at) { return at.x < a; });
  const auto hi = std::partition_point(lo, atoms_.end(),
                                       [&](const Atom& at) { return at.x <= b; });
  const double atom_part =
      atom_cum_[static_cast<size_t>(hi - atoms_.begin())] - atom_cum_[static_cast<size_t>(lo - atoms_.begin())];
  return segment_mass(a, b) + atom_part;
}

double StepAtomicMeasure::mass_below(double x, bool inclusive) const {
  const auto it = std::partition_point(atoms_.begin(), atoms_.end(), [&](const Atom& at) {
    return inclusive ? at.x <= x : at.x < x;
  });
  double acc = atom_cum_[static_cast<size_t>(it - atoms_.begin())];
  if (!segments_.empty() && x > segments_.front().a) acc += segment_mass(segments_.front().a, x);
  return acc;
}

double StepAtomicMeasure::total_mass() const { return seg_cum_.back() + atom_cum_.back(); }

double StepAtomicMeasure::total_variation() const {
  double acc = 0.0;
  for (const auto& s : segments_) acc += std::fabs(s.density) * (s.b - s.a);
  for (const auto& a : atoms_) acc += std::fabs(a.m);
  return acc;
}

std::optional<std::pair<double, double>> StepAtomicMeasure::support_hull() const {
  if (empty()) return std::nullopt;
  double lo = INFINITY, hi = -INFINITY;
  if (!segments_.empty()) {
    lo = segments_.front().a;
    hi = segments_.back().b;
  }
  if (!atoms_.empty()) {
    lo = std::min(lo, atoms_.front().x);
    hi = std::max(hi, atoms_.back().x);
  }
  return std::make_pair(lo, hi);
}

double StepAtomicMeasure::density_at(double x) const {
  const auto it = std::partition_point(segments_.begin(), segments_.end(),
                                       [&](const Segment& s) { return s.b <= x; });
  if (it != segments_.end() && it->a <= x) return it->density;
  return 0.0;
}

double StepAtomicMeasure::atom_at(double x) const {
  const auto it = std::partition_point(atoms_.begin(), atoms_.end(),
                                       [&](const Atom& a) { return a.x < x; });
  return (it != atoms_.end() && it->x == x) ? it->m : 0.0;
}

std::vector<double> StepAtomicMeasure::breakpoints() const {
  std::vector<double> out;
  out.reserve(2 * segments_.size() + atoms_.size());
  for (const auto& s : segments_) {
    out.push_back(s.a);
    out.push_back(s.b);
  }
  for (const auto& a : atoms_) out.push_back(a.x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StepAtomicMeasure StepAtomicMeasure::restricted(const Interval& q) const {
  const Interval one[1] = {q};
  return restricted(std::span<const Interval>(one));
}

StepAtomicMeasure StepAtomicMeasure::restricted(std::span<const Interval> pieces) const {
  std::vector<Interval> sorted(pieces.begin(), pieces.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& l, const Interval& r) { return l.left() < r.left(); });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].left() < sorted[i - 1].right())
      throw PreconditionError("restriction pieces must be pairwise disjoint");
  std::vector<Segment> segs;
  std::vector<Atom> atoms;
  for (const auto& q : sorted) {
    for (const auto& s : segments_) {
      const double a = std::max(s.a, q.left()), b = std::min(s.b, q.right());
      if (b > a) segs.push_back({a, b, s.density});
    }
    for (const auto& at : atoms_)
      if (q.contains(at.x)) atoms.push_back(at);
  }
  return from_segments(resolution_, std::move(segs), std::move(atoms), signed_);
}

StepAtomicMeasure StepAtomicMeasure::restricted_complement(const Interval& q) const {
  std::vector<Segment> segs;
  std::vector<Atom> atoms;
  for (const auto& s : segments_) {
    if (s.a < q.left()) segs.push_back({s.a, std::min(s.b, q.left()), s.density});
    if (s.b > q.right()) segs.push_back({std::max(s.a, q.right()), s.b, s.density});
  }
  for (const auto& at : atoms_)
    if (!q.contains(at.x)) atoms.push_back(at);
  return from_segments(resolution_, std::move(segs), std::move(atoms), signed_);
}

StepAtomicMeasure StepAtomicMeasure::abs() const {
  auto segs = segments_;
  auto atoms = atoms_;
  for (auto& s : segs) s.density = std::fabs(s.density);
  for (auto& a : atoms) a.m = std::fabs(a.m);
  return from_segments(resolution_, std::move(segs), std::move(atoms), false);
}

StepAtomicMeasure StepAtomicMeasure::scaled(double c) const {
  check_finite(c, "scale factor");
  auto segs = segments_;
  auto atoms = atoms_;
  for (auto& s : segs) s.density *= c;
  for (auto& a : atoms) a.m *= c;
  return from_segments(resolution_, std::move(segs), std::move(atoms), signed_ || c < 0);
}

StepAtomicMeasure StepAtomicMeasure::operator+(const StepAtomicMeasure& other) const {
  std::vector<double> cuts;
  for (const auto* m : {this, &other})
    for (const auto& s : m->segments_) {
      cuts.push_back(s.a);
      cuts.push_back(s.b);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Segment> segs;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double d = density_at(mid) + other.density_at(mid);
    if (d != 0.0) segs.push_back({cuts[i], cuts[i + 1], d});
  }
  std::vector<Atom> atoms = atoms_;
  atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
  const bool sgn = signed_ || other.signed_;
  return from_segments(std::max(resolution_, other.resolution_), std::move(segs),
                       std::move(atoms), sgn);
}

StepAtomicMeasure StepAtomicMeasure::weighted(const StepFunction& f) const {
  const auto knots = f.knots();
  std::vector<Segment> segs;
  bool negative = false;
  for (const auto& s : segments_) {
    // cut s at the knots of f that fall inside it
    auto it = std::upper_bound(knots.begin(), knots.end(), s.a);
    double a = s.a;
    while (a < s.b) {
      const double b = (it != knots.end() && *it < s.b) ? *it : s.b;
      const double v = f.value_at(0.5 * (a + b));
      if (v != 0.0) {
        segs.push_back({a, b, s.density * v});
        negative |= segs.back().density < 0;
      }
      a = b;
      if (it != knots.end()) ++it;
    }
  }
  std::vector<Atom> atoms;
  for (const auto& at : atoms_) {
    const double v = f.value_at(at.x);
    if (v != 0.0) {
      atoms.push_back({at.x, at.m * v});
      negative |= atoms.back().m < 0;
    }
  }
  return from_segments(std::max(resolution_, f.resolution()), std::move(segs), std::move(atoms),
                       signed_ || negative);
}

bool operator==(const StepAtomicMeasure& a, const StepAtomicMeasure& b) {
  auto seg_eq = [](const Segment& l, const Segment& r) {
    return l.a == r.a && l.b == r.b && l.density == r.density;
  };
  auto atom_eq = [](const Atom& l, const Atom& r) { return l.x == r.x && l.m == r.m; };
  return a.signed_ == b.signed_ &&
         std::equal(a.segments_.begin(), a.segments_.end(), b.segments_.begin(),
                    b.segments_.end(), seg_eq) &&
         std::equal(a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(), b.atoms_.end(), atom_eq);
}

// ------------------------------------------------------------------ WeightPair

WeightPair::WeightPair(StepAtomicMeasure sigma, StepAtomicMeasure omega, double p)
    : sigma_(std::move(sigma)), omega_(std::move(omega)), p_(p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw PreconditionError("WeightPair requires 1 < p < inf");
  if (sigma_.is_signed() || omega_.is_signed())
    throw PreconditionError("WeightPair requires unsigned sigma and omega");
}

std::vector<double> WeightPair::common_atoms() const {
  std::vector<double> out;
  const auto s = sigma_.atoms();
  const auto o = omega_.atoms();
  size_t i = 0, j = 0;
  while (i < s.size() && j < o.size()) {
    if (s[i].x < o[j].x)
      ++i;
    else if (o[j].x < s[i].x)
      ++j;
    else {
      out.push_back(s[i].x);
      ++i;
      ++j;
    }
  }
  return out;
}

void WeightPair::require_no_common_atoms() const {
  if (!common_atoms().empty())
    throw PreconditionError("sigma and omega share a point mass");
}

// -------------------------------------------------------------- free functions

double mass(const StepAtomicMeasure& mu, const Interval& q) { return mu.mass(q); }

double integrate_power_kernel(const StepAtomicMeasure& mu, const Interval& q, double exponent) {
  if (!(exponent > 1.0)) throw PreconditionError("integrate_power_kernel requires exponent > 1");
  const double c = q.center(), len = q.length();
  double acc = 0.0;
  for (const auto& at : mu.atoms()) acc += at.m * std::pow(tail_weight(q, at.x), exponent);
  auto integrand = [&](double x) { return std::pow(len / (len + std::fabs(x - c)), exponent); };
  for (const auto& s : mu.segments()) {
    // the integrand has a kink at the center; split there
    double pieces[3] = {s.a, s.b, s.b};
    int n = 1;
    if (s.a < c && c < s.b) {
      pieces[1] = c;
      n = 2;
    }
    for (int i = 0; i < n; ++i) {
      const auto r = adaptive_simpson(integrand, pieces[i], pieces[i + 1], 1e-10, 40);
      if (!r.converged)
        throw QuadratureError("integrate_power_kernel: tolerance not met", r.error);
      acc += s.density * r.value;
    }
  }
  return acc;
}

double integrate_inverse_square(const StepAtomicMeasure& mu, const Interval& i) {
  if (mu.atom_at(i.left()) != 0.0 || mu.atom_at(i.right()) != 0.0)
    throw PreconditionError("integrate_inverse_square: atom on the interval boundary");
  const double c = i.center();
  double acc = 0.0;
  std::vector<double> z, m;
  for (const auto& at : mu.atoms())
    if (!i.contains(at.x)) {
      z.push_back(at.x);
      m.push_back(at.m);
    }
  acc += simd::kernels().inverse_square_sum(z.data(), m.data(), z.size(), c);
  // primitive of (z - c)^-2 is -1/(z - c)
  for (const auto& s : mu.segments()) {
    const double a0 = s.a, a1 = std::min(s.b, i.left());
    if (a1 > a0) acc += s.density * (1.0 / (c - a1) - 1.0 / (c - a0));
    const double b0 = std::max(s.a, i.right()), b1 = s.b;
    if (b1 > b0) acc += s.density * (1.0 / (b0 - c) - 1.0 / (b1 - c));
  }
  return acc;
}

double hilbert_off_support(const StepAtomicMeasure& mu, double x, double gap) {
  if (!(gap > 0.0)) throw PreconditionError("hilbert_off_support requires gap > 0");
  double acc = 0.0;
  for (const auto& s : mu.segments()) {
    const double d = (x < s.a) ? s.a - x : (x >= s.b ? x - s.b : 0.0);
    if (d < gap) throw PreconditionError("hilbert_off_support: point too close to the support");
    acc += s.density * std::log(std::fabs((x - s.a) / (x - s.b)));
  }
  std::vector<double> z, m;
  z.reserve(mu.atoms().size());
  m.reserve(mu.atoms().size());
  for (const auto& at : mu.atoms()) {
    if (std::fabs(x - at.x) < gap)
      throw PreconditionError("hilbert_off_support: point too close to an atom");
    z.push_back(at.x);
    m.push_back(at.m);
  }
  acc += simd::kernels().inverse_sum(z.data(), m.data(), z.size(), x);
  return acc;
}

}  // namespace tws
