#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tws/dyadic.hpp"
#include "tws/measure.hpp"
#include "tws/operators.hpp"

namespace tws {

using json = nlohmann::json;

/// Finite union of cells [k 2^-mesh, (k+1) 2^-mesh), stored as merged runs of
/// cell indices [first, last). As a set it stands for the open interior.
struct CellUnion {
  int mesh = 0;
  std::vector<std::pair<int64_t, int64_t>> runs;

  bool empty() const { return runs.empty(); }
  int64_t cell_count() const;
  std::vector<Interval> intervals() const;
  double length() const;
  bool contains(double x) const;
  /// Open run (A, B) as exact grid numbers.
  std::pair<GridRational, GridRational> run_exact(std::size_t i) const;
  /// Every cell of this union is a cell of other (meshes may differ).
  bool subset_of(const CellUnion& other) const;
  static CellUnion from_cells(int mesh, std::vector<int64_t> cells);
  json to_json() const;
};

struct SuperlevelOptions {
  int mesh = 0;  // cells of length 2^-mesh
  SearchBudget budget{8, false, 0};
  int64_t max_cells = 1 << 20;
};

/// Cells whose center has t_natural nu > 2^k. The scan is limited to
/// hull(nu) +- |nu|/2^k since t_natural nu(x) <= |nu| / dist(x, supp nu).
CellUnion superlevel_set(const StepAtomicMeasure& nu, int k, const SuperlevelOptions& o);

struct WhitneyDecomposition {
  int level = 0;
  CellUnion omega;
  std::vector<DyadicInterval> cubes;  // sorted left to right
  double RW = 12.0;
  int N = 9;
  Shift grid = Shift::Zero;
  int floor_scale = 0;  // no cube is smaller than 2^floor_scale
  json to_json() const;
};

/// Maximal cubes Q of the grid with R_W Q inside the (open) omega, searched top
/// down to 2^floor_scale. floor_scale defaults to four scales under the mesh.
WhitneyDecomposition whitney(const CellUnion& omega, double RW, Shift grid = Shift::Zero, int N = 9,
                             int level = 0, std::optional<int> floor_scale = std::nullopt);

/// R_W Q for a cube, exactly.
std::pair<GridRational, GridRational> dilate_exact(const DyadicInterval& q, double factor);

struct WhitneyReport {
  bool disjoint = true;
  bool inside = true;        // union of cubes inside omega
  bool covers = true;        // omega minus a layer of width (R_W+1)/2 2^floor is covered
  bool whitney_inner = true;  // R_W Q inside omega
  bool whitney_outer = true;  // 3 R_W Q meets the complement
  int overlap = 0;           // max sum of chi_{N Q}
  bool overlap_inside = true;  // every N Q inside omega (checked when N <= R_W)
  int crowd = 0;             // max #{Q_s : Q_s meets N Q}
  std::size_t cubes = 0;
  bool ok() const {
    return disjoint && inside && covers && whitney_inner && whitney_outer && overlap_inside;
  }
  json to_json() const;
};

WhitneyReport verify_whitney(const WhitneyDecomposition& wd);

/// Decompositions for levels k and k+2 of the same measure (omega_{k+2} inside
/// omega_k). A level-k cube strictly inside a level-(k+2) cube is a violation.
struct NestedReport {
  int strict_reverse = 0;  // Q^k strictly inside Q^{k+2}
  int uncontained = 0;     // Q^{k+2} in no Q^k
  int strict_forward = 0;  // Q^{k+2} strictly inside Q^k (allowed)
  bool ok() const { return strict_reverse == 0 && uncontained == 0; }
  json to_json() const;
};
NestedReport nested_check(const WhitneyDecomposition& lower, const WhitneyDecomposition& upper);

/// Pairs (Q, B) from decompositions of one omega in two grids with B inside N Q.
struct ComparabilityReport {
  std::size_t pairs = 0;
  double min_ratio = 1.0;  // l(Q)/l(B)
  double max_ratio = 1.0;
  json to_json() const;
};
ComparabilityReport comparability(const WhitneyDecomposition& a, const WhitneyDecomposition& b, int N);

/// For a plain-grid decomposition: Q-hat is the least shifted cube holding 3Q,
/// Q-tilde the cube of the matching shifted decomposition (built with
/// R_W' = R_W / M', M' the least power of two above every dilation bound)
/// that holds Q-hat.
struct ShiftedChainReport {
  double M = 0.0;        // largest dilation bound |hat reach| over Q
  double M_pow2 = 1.0;
  double RW_shifted = 0.0;
  std::size_t checked = 0;
  int missing_tilde = 0;   // no Q-tilde holds Q-hat
  int hat_failures = 0;    // 3Q not inside Q-hat
  double n_required = 0.0;  // least N with 3 Q-tilde inside N Q for every Q
  bool chain_ok() const { return missing_tilde == 0 && hat_failures == 0; }
  json to_json() const;
};
ShiftedChainReport shifted_chain(const WhitneyDecomposition& plain);

// ------------------------------------------------------------------ CZ

struct CZPiece {
  double a = 0.0, b = 0.0;  // [a, b)
  double f = 0.0, g = 0.0, h = 0.0;
  double h_err = 0.0;  // h + h_err is f - g exactly
  int principal = -1;  // index into principal, -1 off the principal cubes
};

struct CZDecomposition {
  Shift grid = Shift::Zero;
  double gamma = 2.0;
  int t = 0;
  double threshold = 1.0;  // gamma^t
  std::vector<DyadicInterval> principal;
  std::vector<double> average;       // sigma-average of |f| per principal cube
  std::vector<double> signed_average;  // sigma-average of f, the value of g there
  std::vector<double> bad_mean;        // int b_r d sigma
  std::vector<CZPiece> pieces;       // cells of f cut by the principal cubes
  bool root_exceeds = false;  // a top cube already has average > gamma^t
  bool doubling_warning = false;  // an average above gamma^{t+1}
  int floor_scale = 0;
  json to_json() const;
};

CZDecomposition cz_split(const StepFunction& f, const StepAtomicMeasure& sigma, double gamma, int t,
                         Shift alpha = Shift::Zero);

struct CZReport {
  bool maximal = true;         // average > threshold and parent average <= threshold
  bool good_bounded = true;    // |g| <= gamma^{t+1} on cells of positive sigma mass
  bool mean_zero = true;       // |int b_r| <= 1e-12 total mass
  bool identity = true;        // g + h + h_err == f exactly on every piece
  double worst_mean = 0.0;
  double summability = 0.0;    // gamma^{pt} sigma(union G) / ||f||^p
  double maximal_constant = 0.0;  // int (M^dy f)^p / ||f||^p (plain grid only)
  bool ok() const { return maximal && good_bounded && mean_zero && identity; }
  json to_json() const;
};
CZReport verify_cz(const CZDecomposition& cz, const StepFunction& f, const StepAtomicMeasure& sigma,
                   double p);

// ---------------------------------------------- maximum principle, good lambda

struct MaxPrincipleReport {
  double C = 0.0;
  std::size_t cubes = 0;
  std::size_t skipped = 0;  // cubes shorter than four mesh cells
  int flagged = 0;  // positive excess with zero Poisson value
  json worst = json::object();
  std::vector<std::pair<int, double>> per_scale;  // (cube scale, max C over cubes of that scale), ascending
  /// max C over cubes of scale >= s
  double C_from(int s) const;
  json to_json() const;
};

/// max over cubes of (max over samples of t_natural(chi_{(3Q)^c} nu) - 2^k) / P_bold(Q, nu).
/// Cubes shorter than four mesh cells are skipped: the sampled boundary of omega is
/// only good to half a cell, which is not small against their Poisson value.
MaxPrincipleReport max_principle_check(const StepAtomicMeasure& nu, const WhitneyDecomposition& wd,
                                       int samples_per_cube, const SearchBudget& budget = {8, false, 0});

struct GoodLambda {
  double lhs = 0.0;    // omega{T > 2^{k+1}, M(f sigma) <= beta 2^k}
  double term1 = 0.0;  // omega{T > 2^k}
  double term2 = 0.0;  // beta^-p 2^-kp int |f|^p d sigma
  /// Least C with lhs <= C beta tstar^p term1 + C term2.
  double needed_constant(double beta, double tstar, double p) const;
  json to_json() const;
};

GoodLambda good_lambda_check(const WeightPair& w, const StepFunction& f, double beta, int k,
                             const SuperlevelOptions& o);

}  // namespace tws
