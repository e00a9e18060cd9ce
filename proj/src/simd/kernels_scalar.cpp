#include <cmath>
#include <limits>

#include "tws/cutoff.hpp"
#include "tws/simd/kernels.hpp"

namespace tws::simd {
namespace {

double cutoff_over_t(const double* t, const double* m, std::size_t n, double eps, double R) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += m[i] * smooth_zeta(t[i] / eps) * smooth_eta(t[i] / R) / t[i];
  return acc;
}

double zeta_over_t(const double* t, const double* m, std::size_t n, double eps) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += m[i] * smooth_zeta(t[i] / eps) / t[i];
  return acc;
}

double eta_tail_over_t(const double* t, const double* m, std::size_t n, double R) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += m[i] * (1.0 - smooth_eta(t[i] / R)) / t[i];
  return acc;
}

double inverse_sum(const double* z, const double* m, std::size_t n, double x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += m[i] / (x - z[i]);
  return acc;
}

double inverse_square_sum(const double* z, const double* m, std::size_t n, double c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = z[i] - c;
    acc += m[i] / (d * d);
  }
  return acc;
}

double max_slope(const double* pos, const double* cum, std::size_t n, double a, double base) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (pos[j] > a) {
      const double s = (cum[j] - base) / (pos[j] - a);
      if (s > best) best = s;
    }
  }
  return best;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{cutoff_over_t, zeta_over_t,        eta_tail_over_t,
                                 inverse_sum,   inverse_square_sum, max_slope};
  return table;
}

}  // namespace tws::simd
