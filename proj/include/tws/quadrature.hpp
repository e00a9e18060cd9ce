#pragma once

#include <functional>

namespace tws {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // accumulated |S2 - S1| / 15 estimate
  bool converged = true;
};

/// Recursive adaptive Simpson on [a, b]. The target absolute tolerance is
/// rel_tol * |coarse estimate| + abs_tol; depth is capped at max_depth.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-9, int max_depth = 40,
                                  double abs_tol = 1e-300);

/// As adaptive_simpson, but throws QuadratureError when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-9, int max_depth = 40);

/// Fixed 3-point Gauss-Legendre nodes/weights on [a, b].
struct GaussNodes3 {
  double x[3];
  double w[3];
};
GaussNodes3 gauss3(double a, double b);

}  // namespace tws
