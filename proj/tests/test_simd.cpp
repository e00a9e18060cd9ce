#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "tws/simd/kernels.hpp"

using namespace tws::simd;

namespace {

struct Data {
  std::vector<double> t, m, cum;
};

Data make(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.01, 10.0), w(-2.0, 2.0);
  Data d;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d.t.push_back(u(rng));
    d.m.push_back(w(rng));
    acc += std::fabs(w(rng));
    d.cum.push_back(acc);
  }
  return d;
}

bool close(double a, double b, double scale) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b), scale});
}

}  // namespace

TEST_CASE("dispatch names a kernel") {
  const auto name = active_kernel_name();
  CHECK((name == "scalar" || name == "avx2"));
  if (!avx2_available()) CHECK(name == "scalar");
}

#if defined(TWS_BUILD_AVX2)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!avx2_available()) return;
  const auto& s = scalar_kernels();
  const auto& v = avx2_kernels();
  std::mt19937_64 rng(83);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u}) {
    const Data d = make(rng, n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::fabs(d.m[i]) / d.t[i];
    for (double eps : {0.05, 0.7, 3.0}) {
      for (double R : {4.0, 12.0, inf}) {
        REQUIRE(close(s.cutoff_over_t(d.t.data(), d.m.data(), n, eps, R),
                      v.cutoff_over_t(d.t.data(), d.m.data(), n, eps, R), scale));
      }
      REQUIRE(close(s.zeta_over_t(d.t.data(), d.m.data(), n, eps),
                    v.zeta_over_t(d.t.data(), d.m.data(), n, eps), scale));
      REQUIRE(close(s.eta_tail_over_t(d.t.data(), d.m.data(), n, eps),
                    v.eta_tail_over_t(d.t.data(), d.m.data(), n, eps), scale));
    }
    for (double x : {-20.0, 15.0}) {
      REQUIRE(close(s.inverse_sum(d.t.data(), d.m.data(), n, x),
                    v.inverse_sum(d.t.data(), d.m.data(), n, x), scale));
      REQUIRE(close(s.inverse_square_sum(d.t.data(), d.m.data(), n, x),
                    v.inverse_square_sum(d.t.data(), d.m.data(), n, x), scale));
    }
    std::vector<double> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = double(i) * 0.25 - 1.0;
    for (double a : {-3.0, -0.9, 0.4, 1e6}) {
      // max is order independent, so the two must agree bit for bit
      REQUIRE(s.max_slope(pos.data(), d.cum.data(), n, a, 0.5) ==
              v.max_slope(pos.data(), d.cum.data(), n, a, 0.5));
    }
  }
}
#endif
