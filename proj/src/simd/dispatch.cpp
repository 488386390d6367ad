// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <string>

#include "plapdg/simd/kernels.hpp"

namespace plapdg::simd {

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(PLAPDG_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  static const Isa isa = [] {
    if (const char* env = std::getenv("PLAPDG_SIMD"); env && std::string(env) == "scalar") {
      return Isa::Scalar;
    }
    return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& kernels_for(Isa isa) {
#if defined(PLAPDG_HAVE_AVX2)
  if (isa == Isa::Avx2 && isa_supported(Isa::Avx2)) return avx2_kernels();
#endif
  (void)isa;
  return scalar_kernels();
}

const KernelTable& kernels() {
  static const KernelTable& table = kernels_for(active_isa());
  return table;
}

}  // namespace plapdg::simd
