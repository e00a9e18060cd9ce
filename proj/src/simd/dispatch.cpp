#include <cstdlib>
#include <string>

#include "tws/simd/kernels.hpp"

namespace tws::simd {

bool avx2_available() {
#if defined(TWS_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

struct Selected {
  const KernelTable* table;
  const char* name;
};

Selected pick() {
  const char* env = std::getenv("TWS_SIMD");
  const bool force_scalar = env && std::string(env) == "scalar";
#if defined(TWS_BUILD_AVX2)
  if (!force_scalar && avx2_available()) return {&avx2_kernels(), "avx2"};
#else
  (void)force_scalar;
#endif
  return {&scalar_kernels(), "scalar"};
}

const Selected& selected() {
  static const Selected s = pick();
  return s;
}

}  // namespace

const KernelTable& kernels() { return *selected().table; }

std::string_view active_kernel_name() { return selected().name; }

}  // namespace tws::simd
