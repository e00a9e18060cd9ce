#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tws/interval.hpp"

namespace tws {

struct Atom {
  double x = 0.0;
  double m = 0.0;
};

/// Constant density on the half-open segment [a, b).
struct Segment {
  double a = 0.0;
  double b = 0.0;
  double density = 0.0;
};

/// Step function on the dyadic cells [k 2^-L, (k+1) 2^-L); zero off its range.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(int resolution, int64_t first_cell, std::vector<double> values);
  static StepFunction constant_on(int resolution, int64_t first_cell, int64_t last_cell, double c);

  int resolution() const { return resolution_; }
  int64_t first_cell() const { return first_; }
  std::span<const double> values() const { return values_; }
  double cell_length() const;
  double value_at(double x) const;
  /// Knots of the step function (cell boundaries of the stored range).
  std::vector<double> knots() const;

 private:
  int resolution_ = 0;
  int64_t first_ = 0;
  std::vector<double> values_;
};

/// A measure on the line made of a piecewise-constant density (dyadic cells at
/// construction, possibly cut further by restrictions) plus finitely many atoms.
///
/// All masses use the half-open convention: an atom sitting on a queried
/// boundary belongs to the interval on its right.
class StepAtomicMeasure {
 public:
  StepAtomicMeasure() = default;

  /// cells: (index k, density w) pairs on [k 2^-L, (k+1) 2^-L).
  static StepAtomicMeasure from_cells(int resolution,
                                      const std::vector<std::pair<int64_t, double>>& cells,
                                      std::vector<Atom> atoms = {}, bool is_signed = false);
  static StepAtomicMeasure from_segments(int resolution, std::vector<Segment> segments,
                                         std::vector<Atom> atoms = {}, bool is_signed = false);
  /// density * Lebesgue restricted to [a, b).
  static StepAtomicMeasure uniform(double a, double b, double density = 1.0, int resolution = 0);
  static StepAtomicMeasure dirac(double x, double m = 1.0);

  int resolution() const { return resolution_; }
  bool is_signed() const { return signed_; }
  std::span<const Segment> segments() const { return segments_; }
  std::span<const Atom> atoms() const { return atoms_; }
  bool empty() const { return segments_.empty() && atoms_.empty(); }

  double mass(const Interval& q) const;
  /// Mass of the closed interval [a, b] (a <= b).
  double mass_closed(double a, double b) const;
  double total_mass() const;
  double total_variation() const;
  /// Closed hull [lo, hi] of the support, empty for the zero measure.
  std::optional<std::pair<double, double>> support_hull() const;
  double density_at(double x) const;
  /// Mass of the atom sitting exactly at x (0 if none).
  double atom_at(double x) const;
  /// mu((-inf, x)) or, with inclusive, mu((-inf, x]).
  double mass_below(double x, bool inclusive) const;
  /// Sorted distinct segment endpoints and atom positions.
  std::vector<double> breakpoints() const;

  StepAtomicMeasure restricted(const Interval& q) const;
  StepAtomicMeasure restricted_complement(const Interval& q) const;
  /// Restriction to a union of pairwise disjoint intervals.
  StepAtomicMeasure restricted(std::span<const Interval> pieces) const;
  StepAtomicMeasure abs() const;
  StepAtomicMeasure scaled(double c) const;
  StepAtomicMeasure operator+(const StepAtomicMeasure& other) const;
  /// The measure f * this.
  StepAtomicMeasure weighted(const StepFunction& f) const;

  friend bool operator==(const StepAtomicMeasure&, const StepAtomicMeasure&);

 private:
  void normalize();
  double segment_mass(double lo, double hi) const;

  int resolution_ = 0;
  bool signed_ = false;
  std::vector<Segment> segments_;
  std::vector<Atom> atoms_;
  // prefix sums of segment masses and atom masses
  std::vector<double> seg_cum_{0.0};
  std::vector<double> atom_cum_{0.0};
};

bool operator==(const StepAtomicMeasure& a, const StepAtomicMeasure& b);

/// A pair of weights (sigma, omega) and an exponent 1 < p < infinity.
class WeightPair {
 public:
  WeightPair(StepAtomicMeasure sigma, StepAtomicMeasure omega, double p);

  const StepAtomicMeasure& sigma() const { return sigma_; }
  const StepAtomicMeasure& omega() const { return omega_; }
  double p() const { return p_; }
  double p_dual() const { return p_ / (p_ - 1.0); }
  /// Positions carrying an atom of both sigma and omega.
  std::vector<double> common_atoms() const;
  void require_no_common_atoms() const;

 private:
  StepAtomicMeasure sigma_;
  StepAtomicMeasure omega_;
  double p_;
};

// Free-function forms of the integration backbone.

double mass(const StepAtomicMeasure& mu, const Interval& q);

/// Integral of s_Q(x)^exponent d mu(x); atoms exact, density pieces by adaptive
/// Simpson at relative tolerance 1e-9 (throws QuadratureError otherwise).
double integrate_power_kernel(const StepAtomicMeasure& mu, const Interval& q, double exponent);

/// Integral over R \ I of |z - z_I|^-2 d mu(z), exact.
double integrate_inverse_square(const StepAtomicMeasure& mu, const Interval& i);

/// Integral of d mu(z) / (x - z) for x at distance >= gap from supp mu, exact.
double hilbert_off_support(const StepAtomicMeasure& mu, double x, double gap);

}  // namespace tws
