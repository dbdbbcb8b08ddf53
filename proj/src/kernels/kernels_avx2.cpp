#include "driveloc/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace driveloc::kernels {
namespace {

double lane_sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (; i < n; ++i) lanes[i % 4] += x[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void divide_avx2(double* x, std::size_t n, double divisor) {
  const __m256d d = _mm256_set1_pd(divisor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_div_pd(_mm256_loadu_pd(x + i), d));
  for (; i < n; ++i) x[i] /= divisor;
}

void fuse_weighted_avx2(const FuseArgs& args, double* out) {
  double present = 0.0;
  for (const double* v : args.views) present += v != nullptr ? 1.0 : 0.0;
  const __m256d vpresent = _mm256_set1_pd(present);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t c = 0;
  for (; c + 4 <= args.n; c += 4) {
    __m256d num = zero;
    __m256d den = zero;
    __m256d plain = zero;
    for (std::size_t v = 0; v < 3; ++v) {
      if (args.views[v] == nullptr) continue;
      const __m256d w = _mm256_loadu_pd(args.weights[v] + c);
      const __m256d p = _mm256_loadu_pd(args.views[v] + c);
      num = _mm256_add_pd(num, _mm256_mul_pd(w, p));
      den = _mm256_add_pd(den, w);
      plain = _mm256_add_pd(plain, p);
    }
    const __m256d weighted = _mm256_div_pd(num, den);
    const __m256d fallback = _mm256_div_pd(plain, vpresent);
    const __m256d has_weight = _mm256_cmp_pd(den, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + c, _mm256_blendv_pd(fallback, weighted, has_weight));
  }
  for (; c < args.n; ++c) {
    double num = 0.0, den = 0.0, plain = 0.0;
    for (std::size_t v = 0; v < 3; ++v) {
      if (args.views[v] == nullptr) continue;
      const double w = args.weights[v][c];
      const double p = args.views[v][c];
      num += w * p;
      den += w;
      plain += p;
    }
    out[c] = den > 0.0 ? num / den : plain / present;
  }
}

void fuse_max_avx2(const FuseArgs& args, double* out) {
  std::size_t c = 0;
  for (; c + 4 <= args.n; c += 4) {
    __m256d best = _mm256_setzero_pd();
    bool first = true;
    for (std::size_t v = 0; v < 3; ++v) {
      if (args.views[v] == nullptr) continue;
      const __m256d p = _mm256_loadu_pd(args.views[v] + c);
      best = first ? p : _mm256_max_pd(best, p);
      first = false;
    }
    _mm256_storeu_pd(out + c, best);
  }
  for (; c < args.n; ++c) {
    double best = 0.0;
    bool first = true;
    for (std::size_t v = 0; v < 3; ++v) {
      if (args.views[v] == nullptr) continue;
      best = first ? args.views[v][c] : std::max(best, args.views[v][c]);
      first = false;
    }
    out[c] = best;
  }
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{"avx2", lane_sum_avx2, divide_avx2, fuse_weighted_avx2,
                                 fuse_max_avx2};
  return table;
}

}  // namespace driveloc::kernels
