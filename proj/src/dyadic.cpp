#include "tws/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tws/errors.hpp"

namespace tws {

// ---------------------------------------------------------------- GridRational

namespace {

int bit_length(__int128 v) {
  unsigned __int128 u = v < 0 ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  int n = 0;
  while (u) {
    u >>= 1;
    ++n;
  }
  return n;
}

// a * 2^s without overflow, s >= 0
__int128 shl_checked(__int128 a, int s) {
  if (a == 0) return 0;
  if (bit_length(a) + s > 125) throw PreconditionError("grid arithmetic out of range");
  return a * (static_cast<__int128>(1) << s);
}

}  // namespace

GridRational::GridRational(__int128 n, int e) : n_(n), e_(e) {
  if (n_ == 0) {
    e_ = 0;
    return;
  }
  while ((n_ & 1) == 0) {
    n_ /= 2;
    ++e_;
  }
}

GridRational GridRational::from_double(double x) {
  if (!std::isfinite(x)) throw PreconditionError("GridRational from a non-finite value");
  if (x == 0.0) return {};
  int ex = 0;
  const double m = std::frexp(x, &ex);  // x = m 2^ex, 0.5 <= |m| < 1
  const auto mant = static_cast<int64_t>(std::ldexp(m, 53));
  return {static_cast<__int128>(mant) * 3, ex - 53};
}

GridRational GridRational::times(double d) const {
  const GridRational g = from_double(d);  // 3 m 2^e with m odd
  if (n_ == 0 || g.n_ == 0) return {};
  const __int128 m = g.n_ / 3;
  if (bit_length(n_) + bit_length(m) > 125) throw PreconditionError("grid arithmetic out of range");
  return {n_ * m, e_ + g.e_};
}

double GridRational::to_double() const {
  return static_cast<double>(std::ldexp(static_cast<long double>(n_), e_) / 3.0L);
}

GridRational GridRational::operator+(const GridRational& o) const {
  if (n_ == 0) return o;
  if (o.n_ == 0) return *this;
  const int e = std::min(e_, o.e_);
  return {shl_checked(n_, e_ - e) + shl_checked(o.n_, o.e_ - e), e};
}

std::strong_ordering operator<=>(const GridRational& a, const GridRational& b) {
  if (a.sign() != b.sign()) return a.sign() <=> b.sign();
  if (a.n_ == 0) return std::strong_ordering::equal;
  // same nonzero sign: compare magnitudes, flipping for negatives
  const int mag_a = bit_length(a.n_) + a.e_, mag_b = bit_length(b.n_) + b.e_;
  std::strong_ordering mag = std::strong_ordering::equal;
  if (mag_a != mag_b) {
    mag = mag_a <=> mag_b;
  } else {
    const int e = std::min(a.e_, b.e_);
    __int128 x = a.n_ < 0 ? -a.n_ : a.n_;
    __int128 y = b.n_ < 0 ? -b.n_ : b.n_;
    x = shl_checked(x, a.e_ - e);
    y = shl_checked(y, b.e_ - e);
    mag = x <=> y;
  }
  if (a.sign() > 0) return mag;
  return 0 <=> mag;
}

// -------------------------------------------------------------- DyadicInterval

double shift_value(Shift s) { return static_cast<int>(s) / 3.0; }

const char* shift_name(Shift s) {
  switch (s) {
    case Shift::Zero: return "0";
    case Shift::Third: return "1/3";
    case Shift::TwoThirds: return "2/3";
  }
  return "?";
}

namespace {

int parity_sign(int j) { return (j % 2 == 0) ? 1 : -1; }

int64_t floor_div2(int64_t v) { return (v >= 0) ? v / 2 : -((-v + 1) / 2); }

}  // namespace

GridRational DyadicInterval::left_exact() const {
  const __int128 n = static_cast<__int128>(index_) * 3 + parity_sign(scale_) * static_cast<int>(shift_);
  return {n, scale_};
}

GridRational DyadicInterval::right_exact() const {
  const __int128 n =
      static_cast<__int128>(index_) * 3 + 3 + parity_sign(scale_) * static_cast<int>(shift_);
  return {n, scale_};
}

Interval DyadicInterval::interval() const {
  return {left_exact().to_double(), right_exact().to_double()};
}

double DyadicInterval::length() const { return std::ldexp(1.0, scale_); }

bool DyadicInterval::contains(const DyadicInterval& q) const {
  if (q.shift_ != shift_ || q.scale_ > scale_) return false;
  return q.ancestor(scale_ - q.scale_) == *this;
}

DyadicInterval DyadicInterval::parent() const {
  const int64_t v = index_ + parity_sign(scale_) * static_cast<int>(shift_);
  return {scale_ + 1, floor_div2(v), shift_};
}

DyadicInterval DyadicInterval::ancestor(int levels) const {
  if (levels < 0) throw PreconditionError("ancestor requires levels >= 0");
  DyadicInterval q = *this;
  for (int i = 0; i < levels; ++i) q = q.parent();
  return q;
}

std::pair<DyadicInterval, DyadicInterval> DyadicInterval::children() const {
  const int j = scale_ - 1;
  const int64_t k0 = 2 * index_ - parity_sign(j) * static_cast<int>(shift_);
  return {{j, k0, shift_}, {j, k0 + 1, shift_}};
}

DyadicInterval locate(Shift alpha, const GridRational& point, int scale) {
  // estimate k = floor(x 2^-j - (-1)^j a/3), then fix up exactly
  const long double x = std::ldexp(static_cast<long double>(point.numerator()), point.exponent()) / 3.0L;
  const long double est = std::ldexp(x, -scale) - parity_sign(scale) * static_cast<int>(alpha) / 3.0L;
  if (!(std::fabs(est) < 4e18L)) throw PreconditionError("locate: index out of range");
  DyadicInterval q(scale, static_cast<int64_t>(std::floor(est)), alpha);
  while (point < q.left_exact()) q = DyadicInterval(scale, q.index() - 1, alpha);
  while (!(point < q.right_exact())) q = DyadicInterval(scale, q.index() + 1, alpha);
  return q;
}

DyadicInterval locate(Shift alpha, double point, int scale) {
  return locate(alpha, GridRational::from_double(point), scale);
}

bool cube_containing(Shift alpha, const GridRational& a, const GridRational& b, int scale,
                     DyadicInterval& out) {
  out = locate(alpha, a, scale);
  return b <= out.right_exact();
}

GridSelection select_shifted_grid(const Interval& q) {
  const auto l = GridRational::from_double(q.left());
  const auto r = GridRational::from_double(q.right());
  // 3Q = [2l - r, 2r - l)
  const auto a = l.shifted(1) - r;
  const auto b = r.shifted(1) - l;
  const int j0 = static_cast<int>(std::ceil(std::log2(3.0 * q.length()))) - 1;
  bool found = false;
  DyadicInterval best;
  Shift best_alpha = Shift::Zero;
  for (Shift alpha : kAllShifts) {
    for (int j = j0; j < j0 + 64; ++j) {
      if (found && j >= best.scale()) break;
      DyadicInterval c;
      if (cube_containing(alpha, a, b, j, c)) {
        if (!found || j < best.scale()) {
          best = c;
          best_alpha = alpha;
          found = true;
        }
        break;
      }
    }
  }
  if (!found) throw Error("select_shifted_grid: no qualifying cube found");
  const Interval hat = best.interval();
  const double c = q.center();
  const double reach = std::max(c - hat.left(), hat.right() - c);
  return {q, best_alpha, best, hat.length() / q.length(), 2.0 * reach / q.length()};
}

std::vector<DilatedCube> besicovitch_maximal(const std::vector<DilatedCube>& cubes) {
  if (cubes.empty()) return {};
  const int M = cubes.front().M;
  if (M <= 0 || M % 2 == 0) throw PreconditionError("besicovitch_maximal requires odd M > 0");
  for (const auto& c : cubes)
    if (c.M != M || c.cube.shift() != cubes.front().cube.shift())
      throw PreconditionError("besicovitch_maximal requires one grid and one dilation factor");
  struct Item {
    GridRational lo, hi;
    size_t idx;
  };
  std::vector<Item> items;
  items.reserve(cubes.size());
  for (size_t i = 0; i < cubes.size(); ++i) {
    const auto& q = cubes[i].cube;
    // M Q = [left - (M-1)/2 |Q|, right + (M-1)/2 |Q|)
    const GridRational ext(static_cast<__int128>(3) * ((M - 1) / 2), q.scale());
    items.push_back({q.left_exact() - ext, q.right_exact() + ext, i});
  }
  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
    if (x.lo != y.lo) return x.lo < y.lo;
    if (x.hi != y.hi) return y.hi < x.hi;
    return x.idx < y.idx;
  });
  std::vector<DilatedCube> out;
  bool have = false;
  GridRational reach;
  for (const auto& it : items) {
    if (have && it.hi <= reach) continue;  // inside an earlier (larger or equal) dilate
    out.push_back(cubes[it.idx]);
    if (!have || reach < it.hi) reach = it.hi;
    have = true;
  }
  return out;
}

int max_overlap(const std::vector<Interval>& intervals) {
  std::vector<std::pair<double, int>> ev;
  ev.reserve(2 * intervals.size());
  for (const auto& i : intervals) {
    ev.emplace_back(i.left(), +1);
    ev.emplace_back(i.right(), -1);
  }
  // half-open: a closing end at x comes before an opening start at x
  std::sort(ev.begin(), ev.end());
  int cur = 0, best = 0;
  for (const auto& [x, d] : ev) {
    cur += d;
    best = std::max(best, cur);
  }
  return best;
}

}  // namespace tws
