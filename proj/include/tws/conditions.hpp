#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tws/dyadic.hpp"
#include "tws/measure.hpp"
#include "tws/operators.hpp"
#include "tws/poisson.hpp"

namespace tws {

using json = nlohmann::json;

/// One estimated constant. The estimate is a lower bound on the true
/// supremum; re-evaluating the witness reproduces it.
struct TestingReport {
  std::string condition;
  double estimate = 0.0;
  json witness = json::object();
  json budget = json::object();
  bool converged = true;
  json to_json() const;
  static TestingReport from_json(const json& j);
};

/// Dyadic and shifted-dyadic cubes over the joint support hull, from the
/// support scale down `depth` levels (never below the cell scale), plus
/// seeded random intervals.
struct FamilySpec {
  int depth = 14;
  int random_count = 10000;
  uint64_t seed = 1;
  bool shifted = true;
  std::size_t max_members = 400000;  // larger families are cut, converged = false
  json to_json() const;
};

struct FamilyMember {
  Interval q;
  std::optional<DyadicInterval> cube;
};

struct IntervalFamily {
  std::vector<FamilyMember> members;
  bool truncated = false;
};

/// The family for the hull of the given measures.
IntervalFamily interval_family(std::vector<const StepAtomicMeasure*> measures, const FamilySpec& spec);
IntervalFamily interval_family(const WeightPair& w, const FamilySpec& spec);

json interval_json(const Interval& q);
Interval interval_from(const json& j);
json cube_json(const DyadicInterval& c);
DyadicInterval cube_from(const json& j);

// ---------------------------------------------------------------- A_p family

/// (omega(Q)/|Q|)^{1/p} (sigma(Q)/|Q|)^{1/p'}
double ap_value(const WeightPair& w, const Interval& q);
/// (1/|Q|) (int s_Q^p d omega)^{1/p} (int s_Q^{p'} d sigma)^{1/p'}
double strengthened_ap_value(const WeightPair& w, const Interval& q);
/// (1/|Q|) omega(Q)^{1/p} (int s_Q^{p'} d sigma)^{1/p'}
double half_strengthened_ap_value(const WeightPair& w, const Interval& q);
/// omega(Q) sigma(Q')^{p-1} / |Q|^p
double asym_value(const WeightPair& w, const Interval& q, const Interval& qprime);

TestingReport ap_constant(const WeightPair& w, const FamilySpec& family = {});
/// {strengthened, half-strengthened}
std::pair<TestingReport, TestingReport> strengthened_ap(const WeightPair& w,
                                                        const FamilySpec& family = {});
/// Pairs (Q, Q') of equal length r, Q' at distance c0 r on either side.
TestingReport asym_ap(const WeightPair& w, double c0, const FamilySpec& family = {});

/// A_p over D^alpha cubes only: the constant the l-level estimate uses.
double dyadic_ap_over(const WeightPair& w, const std::vector<DyadicInterval>& cubes);

// ----------------------------------------------------------------- doubling

struct DoublingResult {
  TestingReport report;
  bool infinite = false;
};

/// max mu(3Q)/mu(Q) over family members with 3Q inside the support hull.
/// Atoms, or an empty Q whose triple carries mass, raise the infinite flag.
/// `label` ("sigma" or "omega") is recorded so the witness can be re-evaluated.
DoublingResult doubling_gamma(const StepAtomicMeasure& mu, const FamilySpec& family = {},
                              const std::string& label = "sigma");
/// mu(3Q)/mu(Q), infinite when mu(Q) = 0 < mu(3Q).
double doubling_ratio(const StepAtomicMeasure& mu, const Interval& q);

// ------------------------------------------------------ partition functionals

/// Poisson condition: lhs = int (sum_r |I_r|_s |I_r|^{p'-1} sum_l 2^-l/|I_r^(l)| chi)^p d omega,
/// rhs = sum_r |I_r|_s |I_r|^{p'}. Exact.
std::pair<double, double> poisson_condition(const WeightPair& w, const PartitionData& parts);

/// The same lhs by direct ancestor summation and a fine mesh of omega (oracle).
double poisson_condition_direct(const WeightPair& w, const PartitionData& parts, int levels);

/// l-level estimate for disjoint pieces: lhs_l, rhs and the dyadic A_p over the
/// l-th ancestors. The proven bound is lhs_l <= p 2^{-pl} A^p rhs for 1 < p <= 2.
struct EllLevel {
  int ell = 0;
  double p = 2.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ap = 0.0;
  double bound() const;
};
EllLevel ell_level(const WeightPair& w, const std::vector<DyadicInterval>& pieces, int ell);

/// Dual pivotal: lhs = sum_r sigma(Q_r) P(Q_r, chi_{Q0} omega)^{p'}, rhs = omega(Q0).
std::pair<double, double> pivotal_dual(const WeightPair& w, const DyadicInterval& q0,
                                       const PartitionData& parts);

struct PartitionSearch {
  int depth = 6;             // deepest refinement below a root
  int exhaustive_depth = 3;  // antichains enumerated exactly down to here
  int root_levels = 4;       // roots are cubes 1..root_levels below the support scale
  json to_json() const;
};

/// max lhs/rhs over partitions of candidate roots. The pivotal search is an
/// exact dynamic program over the refinement tree; the Poisson-condition search
/// enumerates antichains to exhaustive_depth and then refines greedily.
TestingReport pivotal_search(const WeightPair& w, const PartitionSearch& s = {});
TestingReport poisson_condition_search(const WeightPair& w, const PartitionSearch& s = {});

// ---------------------------------------------------------- operator testing

struct OperatorBudget {
  SearchBudget sup{16, true, 20};
  int cells_per_cube = 8;  // E and f live on this many equal subcells of Q
  int subset_budget = 8;   // random E per cube
  int f_budget = 8;        // random f per cube
  int panels = 8;          // quadrature panels per cube and measure segment
  uint64_t seed = 1;
  json to_json() const;
};

/// int_Q g d mu for g evaluated at 3 Gauss points per panel of each segment of
/// mu inside Q (at most |Q|/panels long) plus the atoms exactly.
double cell_quadrature(const StepAtomicMeasure& mu, const Interval& q, int panels,
                       const std::function<double(double)>& g);

/// [int_Q t_natural(chi_E sigma)^p d omega] / sigma(Q)
double forward_value(const WeightPair& w, const Interval& q, const std::vector<Interval>& e,
                     const OperatorBudget& b);
/// int_Q t_natural(chi_Q f sigma) d omega / (||f||_{L^p(sigma)} omega(Q)^{1/p'}), f constant on
/// the equal subcells of Q.
double dual_primal_value(const WeightPair& w, const Interval& q, const std::vector<double>& f,
                         const OperatorBudget& b);
/// [int_Q |L*(chi_Q omega)|^{p'} d sigma / omega(Q)]^{1/p'}; chi_Q omega is replaced by
/// its quadrature point masses, which are L's points.
double dual_adjoint_value(const WeightPair& w, const Interval& q, const Linearization& L,
                          const OperatorBudget& b);
/// The point masses standing in for chi_Q omega.
StepAtomicMeasure omega_points(const WeightPair& w, const Interval& q, int panels);

TestingReport forward_testing(const WeightPair& w, const FamilySpec& family,
                              const OperatorBudget& b = {});
/// max of the primal and the dual estimate; the witness records both and the
/// f = 1 probe.
TestingReport dual_testing(const WeightPair& w, const FamilySpec& family,
                           const OperatorBudget& b = {});

/// [int_Q M(chi_Q f sigma)^p d omega / ||chi_Q f||^p_{L^p(sigma)}]^{1/p} and the dual
/// with the roles of (sigma, p) and (omega, p') swapped.
double maximal_test_value(const WeightPair& w, const Interval& q, const std::vector<double>& f,
                          bool dual, const OperatorBudget& b);
/// {M-frak, M-frak-star} lower bounds.
std::pair<TestingReport, TestingReport> maximal_norms(const WeightPair& w, const FamilySpec& family,
                                                      const OperatorBudget& b = {});

// ------------------------------------------------------- necessity probes

struct NecessityProbe {
  double p = 2.0;
  double lower = 0.0;      // |Q|^-p int_a^inf s_Q^p (int_{a-r}^a s_Q^{p'} d sigma)^p d omega
  double h_integral = 0.0;  // int_a^inf |H(f_{a,r} sigma)|^p d omega
  double f_norm = 0.0;      // int |f_{a,r}|^p d sigma
  double lhs_factor() const { return lower; }
  double operator_norm() const;
};

/// f_{a,r} = chi_{(a-r,a)} s_Q^{p'-1}; both sides evaluated on the same nodes.
NecessityProbe strengthened_ap_necessity_probe(const WeightPair& w, const Interval& q, double a,
                                               double r, int panels = 32);

/// The neccinequ comparison for unsigned nu with no mass in I: the redefined
/// Poisson value and 2|I| times the least increment quotient of -H(nu) over a
/// 16-point grid of pairs in I.
struct NeccResult {
  double poisson = 0.0;
  double first = 0.0;     // nu(I)/|I|
  double quotient = 0.0;  // inf over pairs of [H(y) - H(x)] / (x - y)
  double length = 0.0;    // |I|
  double rhs() const { return first + 2.0 * length * quotient; }
};
NeccResult neccinequ(const StepAtomicMeasure& nu, const Interval& i, int grid = 16);

// ------------------------------------------------------------- re-evaluation

/// Recomputes the estimate of a report from its witness alone.
double reevaluate(const WeightPair& w, const TestingReport& r);

}  // namespace tws
