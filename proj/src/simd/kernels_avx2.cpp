// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>
#include <limits>

#include "tws/cutoff.hpp"
#include "tws/simd/kernels.hpp"

namespace tws::simd {
namespace {

inline __m256d smoothstep4(__m256d u) {
  const __m256d zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0);
  u = _mm256_min_pd(_mm256_max_pd(u, zero), one);
  // u^2 (3 - 2u)
  const __m256d t = _mm256_fnmadd_pd(_mm256_set1_pd(2.0), u, _mm256_set1_pd(3.0));
  return _mm256_mul_pd(_mm256_mul_pd(u, u), t);
}

inline __m256d zeta4(__m256d v) {
  return smoothstep4(_mm256_fmsub_pd(_mm256_set1_pd(2.0), v, _mm256_set1_pd(1.0)));
}

inline __m256d eta4(__m256d v) {
  return _mm256_sub_pd(_mm256_set1_pd(1.0), smoothstep4(_mm256_sub_pd(v, _mm256_set1_pd(1.0))));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double cutoff_over_t(const double* t, const double* m, std::size_t n, double eps, double R) {
  const __m256d ie = _mm256_set1_pd(1.0 / eps), iR = _mm256_set1_pd(1.0 / R);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_loadu_pd(t + i), mv = _mm256_loadu_pd(m + i);
    const __m256d w = _mm256_mul_pd(zeta4(_mm256_mul_pd(tv, ie)), eta4(_mm256_mul_pd(tv, iR)));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_mul_pd(mv, w), tv));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += m[i] * smooth_zeta(t[i] * (1.0 / eps)) * smooth_eta(t[i] * (1.0 / R)) / t[i];
  return s;
}

double zeta_over_t(const double* t, const double* m, std::size_t n, double eps) {
  const __m256d ie = _mm256_set1_pd(1.0 / eps);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_loadu_pd(t + i), mv = _mm256_loadu_pd(m + i);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_mul_pd(mv, zeta4(_mm256_mul_pd(tv, ie))), tv));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += m[i] * smooth_zeta(t[i] * (1.0 / eps)) / t[i];
  return s;
}

double eta_tail_over_t(const double* t, const double* m, std::size_t n, double R) {
  const __m256d iR = _mm256_set1_pd(1.0 / R), one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tv = _mm256_loadu_pd(t + i), mv = _mm256_loadu_pd(m + i);
    const __m256d w = _mm256_sub_pd(one, eta4(_mm256_mul_pd(tv, iR)));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_mul_pd(mv, w), tv));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += m[i] * (1.0 - smooth_eta(t[i] * (1.0 / R))) / t[i];
  return s;
}

double inverse_sum(const double* z, const double* m, std::size_t n, double x) {
  const __m256d xv = _mm256_set1_pd(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(xv, _mm256_loadu_pd(z + i));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(m + i), d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += m[i] / (x - z[i]);
  return s;
}

double inverse_square_sum(const double* z, const double* m, std::size_t n, double c) {
  const __m256d cv = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(z + i), cv);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(m + i), _mm256_mul_pd(d, d)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = z[i] - c;
    s += m[i] / (d * d);
  }
  return s;
}

double max_slope(const double* pos, const double* cum, std::size_t n, double a, double base) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const __m256d av = _mm256_set1_pd(a), bv = _mm256_set1_pd(base), nv = _mm256_set1_pd(ninf);
  __m256d best = nv;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(pos + i);
    const __m256d ok = _mm256_cmp_pd(p, av, _CMP_GT_OQ);
    // masked lanes divide by a harmless 1
    const __m256d den = _mm256_blendv_pd(_mm256_set1_pd(1.0), _mm256_sub_pd(p, av), ok);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(cum + i), bv), den);
    best = _mm256_max_pd(best, _mm256_blendv_pd(nv, s, ok));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i)
    if (pos[i] > a) r = std::max(r, (cum[i] - base) / (pos[i] - a));
  return r;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{cutoff_over_t, zeta_over_t,        eta_tail_over_t,
                                 inverse_sum,   inverse_square_sum, max_slope};
  return table;
}

}  // namespace tws::simd
