#include "tws/quadrature.hpp"

#include <cmath>

#include "tws/errors.hpp"

namespace tws {
namespace {

struct Panel {
  double a, fa, m, fm, b, fb, whole;
};

// Classic Lyness recursion with Richardson correction.
void simpson_step(const std::function<double(double)>& f, const Panel& p, double tol, int depth,
                  QuadratureResult& out) {
  const double lm = 0.5 * (p.a + p.m), rm = 0.5 * (p.m + p.b);
  const double flm = f(lm), frm = f(rm);
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double diff = left + right - p.whole;
  if (std::fabs(diff) <= 15.0 * tol || depth <= 0 || !(lm > p.a && rm < p.b)) {
    if (std::fabs(diff) > 15.0 * tol) out.converged = false;
    out.value += left + right + diff / 15.0;
    out.error += std::fabs(diff) / 15.0;
    return;
  }
  simpson_step(f, {p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth - 1, out);
  simpson_step(f, {p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth - 1, out);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, int max_depth, double abs_tol) {
  QuadratureResult out;
  if (!(b > a)) return out;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // A coarse 5-point pass to size the tolerance; avoids a zero estimate on
  // integrands that vanish at the three initial nodes.
  const double q1 = f(0.25 * (3 * a + b)), q3 = f(0.25 * (a + 3 * b));
  const double coarse = (b - a) / 12.0 * (fa + 4.0 * q1 + 2.0 * fm + 4.0 * q3 + fb);
  const double tol = std::max(rel_tol * std::fabs(coarse), abs_tol);
  simpson_step(f, {a, fa, m, fm, b, fb, whole}, tol, max_depth, out);
  if (out.error > 2.0 * tol) out.converged = false;
  return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
  const auto r = adaptive_simpson(f, a, b, rel_tol, max_depth);
  if (!r.converged) throw QuadratureError("adaptive Simpson did not reach tolerance", r.error);
  return r.value;
}

GaussNodes3 gauss3(double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double s = std::sqrt(0.6);
  return {{c - h * s, c, c + h * s}, {h * 5.0 / 9.0, h * 8.0 / 9.0, h * 5.0 / 9.0}};
}

}  // namespace tws
