#pragma once

#include <cmath>

#include "tws/errors.hpp"

namespace tws {

/// Half-open interval [left, right) of the real line.
class Interval {
 public:
  Interval(double left, double right) : left_(left), right_(right) {
    if (!(left < right) || !std::isfinite(left) || !std::isfinite(right))
      throw PreconditionError("Interval requires finite left < right");
  }

  double left() const { return left_; }
  double right() const { return right_; }
  double length() const { return right_ - left_; }
  double center() const { return 0.5 * (left_ + right_); }

  bool contains(double x) const { return left_ <= x && x < right_; }
  bool contains(const Interval& o) const { return left_ <= o.left_ && o.right_ <= right_; }
  bool intersects(const Interval& o) const { return left_ < o.right_ && o.left_ < right_; }

  /// Concentric dilate factor * I.
  Interval dilate(double factor) const {
    const double half = 0.5 * factor * length();
    return {center() - half, center() + half};
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double left_;
  double right_;
};

/// The tail weight s_Q(x) = |Q| / (|Q| + |x - x_Q|).
inline double tail_weight(const Interval& q, double x) {
  const double len = q.length();
  return len / (len + std::fabs(x - q.center()));
}

}  // namespace tws
