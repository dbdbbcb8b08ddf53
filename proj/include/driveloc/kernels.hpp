#pragma once

// Data-parallel inner loops over class vectors. Every operation has a scalar
// reference and, where the CPU allows, a vector variant chosen at runtime.
// All variants produce bit-identical results: sums accumulate into four
// lanes (element i goes to lane i % 4) and combine as (l0 + l1) + (l2 + l3).

#include <array>
#include <cstddef>
#include <string_view>

namespace driveloc::kernels {

/// Inputs for fusing one clip. A null view pointer means the view is absent.
struct FuseArgs {
  std::array<const double*, 3> views{};
  std::array<const double*, 3> weights{};  // per-view weight column, one entry per class
  std::size_t n = 0;
};

struct KernelTable {
  std::string_view name;
  double (*lane_sum)(const double* x, std::size_t n);
  void (*divide)(double* x, std::size_t n, double divisor);
  /// out[c] = sum_v w_v[c] p_v[c] / sum_v w_v[c] over present views, or the plain
  /// mean over present views when the present weights for c are all zero.
  void (*fuse_weighted)(const FuseArgs& args, double* out);
  /// out[c] = max over present views of p_v[c].
  void (*fuse_max)(const FuseArgs& args, double* out);
};

const KernelTable& scalar_table();
/// Null when the AVX2 variant was not built or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// Fastest supported table. DRIVELOC_SIMD=scalar in the environment forces the reference.
const KernelTable& active();

}  // namespace driveloc::kernels
