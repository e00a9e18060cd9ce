#pragma once

// Data-parallel inner loops of the operator layer. Every kernel has a scalar
// reference implementation and, on x86-64 builds, an AVX2+FMA variant. The
// variant is chosen once at startup from the CPU features; TWS_SIMD=scalar in
// the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace tws::simd {

struct KernelTable {
  /// sum_i m[i] * zeta(t[i] / eps) * eta(t[i] / R) / t[i]   (t[i] > 0; R = inf allowed)
  double (*cutoff_over_t)(const double* t, const double* m, std::size_t n, double eps, double R);
  /// sum_i m[i] * zeta(t[i] / eps) / t[i]
  double (*zeta_over_t)(const double* t, const double* m, std::size_t n, double eps);
  /// sum_i m[i] * (1 - eta(t[i] / R)) / t[i]
  double (*eta_tail_over_t)(const double* t, const double* m, std::size_t n, double R);
  /// sum_i m[i] / (x - z[i])
  double (*inverse_sum)(const double* z, const double* m, std::size_t n, double x);
  /// sum_i m[i] / (z[i] - c)^2
  double (*inverse_square_sum)(const double* z, const double* m, std::size_t n, double c);
  /// max_j (cum[j] - base) / (pos[j] - a) over j with pos[j] > a; -inf if none.
  double (*max_slope)(const double* pos, const double* cum, std::size_t n, double a,
                      double base);
};

const KernelTable& scalar_kernels();
#if defined(TWS_BUILD_AVX2)
const KernelTable& avx2_kernels();
#endif

/// The table selected for this process.
const KernelTable& kernels();
std::string_view active_kernel_name();
bool avx2_available();

}  // namespace tws::simd
