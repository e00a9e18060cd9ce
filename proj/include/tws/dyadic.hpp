#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "tws/interval.hpp"

namespace tws {

/// Exact number n * 2^e / 3. Every endpoint of a shifted dyadic cube and
/// every binary64 value has this form, so grid comparisons never round.
class GridRational {
 public:
  GridRational() = default;
  GridRational(__int128 n, int e);
  static GridRational from_double(double x);

  __int128 numerator() const { return n_; }
  int exponent() const { return e_; }
  double to_double() const;
  int sign() const { return (n_ > 0) - (n_ < 0); }

  GridRational operator+(const GridRational& o) const;
  GridRational operator-() const { return {-n_, e_}; }
  GridRational operator-(const GridRational& o) const { return *this + (-o); }
  /// Multiply by 2^s.
  GridRational shifted(int s) const { return {n_, e_ + s}; }
  /// Exact product with a finite binary64 value.
  GridRational times(double d) const;

  friend std::strong_ordering operator<=>(const GridRational& a, const GridRational& b);
  friend bool operator==(const GridRational& a, const GridRational& b) {
    return a.n_ == b.n_ && a.e_ == b.e_;
  }

 private:
  __int128 n_ = 0;
  int e_ = 0;
};

/// Shift parameter of the grid D^alpha, alpha = a/3 for a in {0, 1, 2}.
enum class Shift : int { Zero = 0, Third = 1, TwoThirds = 2 };

inline constexpr Shift kAllShifts[3] = {Shift::Zero, Shift::Third, Shift::TwoThirds};
double shift_value(Shift s);
const char* shift_name(Shift s);

/// The cube 2^j (k + [0,1) + (-1)^j alpha) of D^alpha.
class DyadicInterval {
 public:
  DyadicInterval() = default;
  DyadicInterval(int scale, int64_t index, Shift shift = Shift::Zero)
      : scale_(scale), index_(index), shift_(shift) {}

  int scale() const { return scale_; }
  int64_t index() const { return index_; }
  Shift shift() const { return shift_; }

  GridRational left_exact() const;
  GridRational right_exact() const;
  Interval interval() const;
  double length() const;

  bool contains(const GridRational& x) const { return left_exact() <= x && x < right_exact(); }
  bool contains(double x) const { return contains(GridRational::from_double(x)); }
  /// Containment of cubes of the same grid.
  bool contains(const DyadicInterval& q) const;

  DyadicInterval parent() const;
  DyadicInterval ancestor(int levels) const;
  /// Left and right child.
  std::pair<DyadicInterval, DyadicInterval> children() const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
  friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;

 private:
  int scale_ = 0;
  int64_t index_ = 0;
  Shift shift_ = Shift::Zero;
};

/// The member of D^alpha at the given scale containing the point.
DyadicInterval locate(Shift alpha, double point, int scale);
DyadicInterval locate(Shift alpha, const GridRational& point, int scale);

/// The smallest scale-`scale` cube of D^alpha containing [a, b), if one exists.
bool cube_containing(Shift alpha, const GridRational& a, const GridRational& b, int scale,
                     DyadicInterval& out);

struct GridSelection {
  Interval base;
  Shift alpha;
  DyadicInterval hat;
  double ratio;           // |hat| / |base|
  double dilation_bound;  // smallest M with hat inside M * base
};

/// The smallest cube over all three shifted grids containing 3Q.
GridSelection select_shifted_grid(const Interval& q);

/// M * Q for a cube Q of one grid, M odd.
struct DilatedCube {
  DyadicInterval cube;
  int M = 3;
  Interval interval() const { return cube.interval().dilate(M); }
};

/// The members of the list not strictly contained in another member (one
/// representative per repeated dilate).
std::vector<DilatedCube> besicovitch_maximal(const std::vector<DilatedCube>& cubes);

/// Largest number of the half-open intervals covering a single point.
int max_overlap(const std::vector<Interval>& intervals);

}  // namespace tws
