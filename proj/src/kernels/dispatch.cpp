#include <cstdlib>
#include <string_view>

#include "driveloc/kernels.hpp"

namespace driveloc::kernels {

#if DRIVELOC_HAVE_AVX2
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if DRIVELOC_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* forced = std::getenv("DRIVELOC_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return &scalar_table();
    const KernelTable* vec = avx2_table();
    return vec != nullptr ? vec : &scalar_table();
  }();
  return *chosen;
}

}  // namespace driveloc::kernels
