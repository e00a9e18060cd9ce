#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "tws/cutoff.hpp"
#include "tws/dyadic.hpp"
#include "tws/measure.hpp"

namespace tws {

/// A Calderon-Zygmund kernel with its size/smoothness certificate:
///   |K(x,y)| <= size / |x-y|,
///   |K(x,y) - K(x',y)| <= smoothness * |x-x'| / |x-y|^2   when |x-x'| <= |x-y|/2
/// (and symmetrically in y).
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual double operator()(double x, double y) const = 0;
  virtual double size_constant() const = 0;
  virtual double smoothness_constant() const = 0;
  virtual bool is_hilbert() const { return false; }
};

/// K(x, y) = 1 / (x - y).
class HilbertKernel final : public Kernel {
 public:
  double operator()(double x, double y) const override { return 1.0 / (x - y); }
  double size_constant() const override { return 1.0; }
  double smoothness_constant() const override { return 2.0; }
  bool is_hilbert() const override { return true; }
};

const Kernel& hilbert_kernel();
const CutoffProfile& standard_cutoff();

struct TruncationParams {
  double eps1 = 1.0;  // left radius (y < x)
  double eps2 = 1.0;  // right radius (y > x)
  double R = 4.0;
  /// Throws unless eps > 0, 1/4 <= eps1/eps2 <= 4 and max(eps1, eps2) < R.
  void validate() const;
};

/// Grid spec of the sup searches.
struct SearchBudget {
  int points_per_decade = 64;
  bool refine = true;
  int refine_iterations = 40;
};

/// Smoothly truncated, possibly noncentered, singular integral at x.
double t_trunc(const StepAtomicMeasure& nu, double x, const TruncationParams& params,
               const CutoffProfile& cut = standard_cutoff(),
               const Kernel& kernel = hilbert_kernel());

struct SupResult {
  double value = 0.0;
  TruncationParams argmax;
  double signed_value = 0.0;  // t_trunc at the argmax
  bool converged = true;      // half-density grid agrees to 1e-3
  long evaluations = 0;
};

/// Lower approximations of the strongly maximal (noncentered) and the
/// ordinary (centered) maximal truncated Hilbert transform at x.
SupResult t_natural_search(const StepAtomicMeasure& nu, double x, const SearchBudget& budget = {});
SupResult t_flat_search(const StepAtomicMeasure& nu, double x, const SearchBudget& budget = {});
double t_natural(const StepAtomicMeasure& nu, double x, const SearchBudget& budget = {});
double t_flat(const StepAtomicMeasure& nu, double x, const SearchBudget& budget = {});

/// Exhaustive evaluation over explicit eps/R lists (test oracle).
double t_sup_bruteforce(const StepAtomicMeasure& nu, double x, const std::vector<double>& eps,
                        const std::vector<double>& ratios, const std::vector<double>& radii);

/// Uncentered Hardy-Littlewood maximal function, exact on step+atom measures.
class MaximalFunction {
 public:
  explicit MaximalFunction(const StepAtomicMeasure& nu);
  double operator()(double x) const;

 private:
  const StepAtomicMeasure* nu_;
  std::vector<double> bp_;
  std::vector<double> closed_cum_;  // nu((-inf, bp]) per breakpoint
  std::vector<double> open_cum_;    // nu((-inf, bp)) per breakpoint
};

double maximal_fn(const StepAtomicMeasure& nu, double x);

/// Dyadic mu-maximal operator of f over D^alpha (Shift::Zero is the standard grid).
class DyadicMaximal {
 public:
  DyadicMaximal(const StepAtomicMeasure& mu, const StepFunction& f, Shift alpha = Shift::Zero);
  double operator()(double x) const;

 private:
  double average(const Interval& q, bool& ok) const;
  const StepAtomicMeasure* mu_;
  StepFunction f_;
  StepAtomicMeasure weighted_;  // |f| mu
  Shift alpha_;
};

double dyadic_maximal(const StepAtomicMeasure& mu, const StepFunction& f, double x,
                      Shift alpha = Shift::Zero);

struct LinearSelection {
  TruncationParams params;
  double theta = 0.0;
};

/// Pointwise selection of truncation parameters and phases on a finite set.
struct Linearization {
  std::vector<double> points;
  std::vector<LinearSelection> selection;
  std::optional<Interval> localized;  // if set, every R(x) <= |Q|/2
  void validate() const;
};

/// The truncated kernel {zeta_eps1(x-y) + zeta_eps2(y-x)} eta_R(|x-y|) / (x-y).
double cutoff_kernel(double x, double y, const TruncationParams& p,
                     const CutoffProfile& cut = standard_cutoff());

/// L nu at the i-th point: e^{i theta} T_{eps,R} nu(x_i).
std::complex<double> linearized_apply(const Linearization& L, const StepAtomicMeasure& nu,
                                      std::size_t i, const CutoffProfile& cut = standard_cutoff());

/// L* mu (y) for mu carried by the linearization's points.
std::complex<double> linearized_adjoint(const Linearization& L, const StepAtomicMeasure& mu,
                                        double y, const CutoffProfile& cut = standard_cutoff());

/// Linearization that follows the t_natural argmax at each point, with the
/// phase chosen to make every value real and nonnegative.
Linearization linearization_from_argmax(const StepAtomicMeasure& nu,
                                        const std::vector<double>& points,
                                        const SearchBudget& budget = {});

}  // namespace tws
