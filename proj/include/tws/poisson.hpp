#pragma once

#include <utility>
#include <vector>

#include "tws/dyadic.hpp"
#include "tws/measure.hpp"

namespace tws {

/// Modulus of continuity delta on [0, 1] with delta(0) = 0.
class DiniModulus {
 public:
  static DiniModulus linear();
  /// Piecewise-linear through (s, delta(s)) knots; s ascending in (0, 1], values
  /// nondecreasing. The knot (0, 0) is implied.
  static DiniModulus table(std::vector<std::pair<double, double>> knots);

  double operator()(double s) const;
  /// int_0^1 delta(s)/s ds (exact for both kinds).
  double dini_integral() const;
  bool is_linear() const { return knots_.empty(); }

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// Disjoint pieces of one grid, all descendants of root.
struct PartitionData {
  DyadicInterval root;
  std::vector<DyadicInterval> pieces;
  /// Throws on overlapping pieces, mixed grids or pieces outside the root.
  void validate() const;
};

/// (1/|Q|) int_Q d|nu| + sum_l delta(2^-l) / |2^{l+1}Q| int_{2^{l+1}Q \ 2^l Q} d|nu|
double poisson_bold(const Interval& q, const StepAtomicMeasure& nu,
                    const DiniModulus& delta = DiniModulus::linear());

/// sum_l 2^-l / |2^l Q| int_{2^l Q} d|nu|, geometric tail in closed form.
double poisson_std(const Interval& q, const StepAtomicMeasure& nu);
/// The same series summed term by term (no tail), for checks.
double poisson_std_direct(const Interval& q, const StepAtomicMeasure& nu, int terms);

/// sum_l 2^-l / |I^(l)| int_{I^(l)} dnu over the ancestors of I in its grid.
double poisson_dyadic(const DyadicInterval& i, const StepAtomicMeasure& nu);
double poisson_dyadic_direct(const DyadicInterval& i, const StepAtomicMeasure& nu, int terms);

/// nu(I)/|I| + (|I|/2) int_{R \ I} |z - z_I|^-2 dnu(z).
double poisson_redef(const Interval& i, const StepAtomicMeasure& nu);

/// sum_r P(Q_r, nu) chi_{Q_r}(x).
double poisson_operator_apply(const PartitionData& parts, const StepAtomicMeasure& nu, double x);

/// sum_r P_bold(G_r, chi_E mu) chi_{G_r}(x) with E a union of disjoint intervals.
double pjk_operator(const std::vector<Interval>& e, const std::vector<DyadicInterval>& pieces,
                    const StepAtomicMeasure& mu, double x,
                    const DiniModulus& delta = DiniModulus::linear());

/// M(Q, nu) = sup over closed intervals Q' containing Q of |nu|(Q') / |Q'|.
double m_q(const Interval& q, const StepAtomicMeasure& nu);

/// A longest D^alpha cube inside Q, the leftmost one among ties.
DyadicInterval max_subinterval(const Interval& q, Shift alpha);

}  // namespace tws
