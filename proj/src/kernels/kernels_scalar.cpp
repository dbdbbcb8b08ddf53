#include "driveloc/kernels.hpp"

#include <algorithm>

namespace driveloc::kernels {
namespace {

double lane_sum_scalar(const double* x, std::size_t n) {
  double lanes[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lanes[i % 4] += x[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void divide_scalar(double* x, std::size_t n, double divisor) {
  for (std::size_t i = 0; i < n; ++i) x[i] /= divisor;
}

void fuse_weighted_scalar(const FuseArgs& args, double* out) {
  for (std::size_t c = 0; c < args.n; ++c) {
    double num = 0.0;
    double den = 0.0;
    double plain = 0.0;
    double present = 0.0;
    for (std::size_t v = 0; v < 3; ++v) {
      if (args.views[v] == nullptr) continue;
      const double w = args.weights[v][c];
      const double p = args.views[v][c];
      num += w * p;
      den += w;
      plain += p;
      present += 1.0;
    }
    out[c] = den > 0.0 ? num / den : plain / present;
  }
}

void fuse_max_scalar(const FuseArgs& args, double* out) {
  for (std::size_t c = 0; c < args.n; ++c) {
    double best = 0.0;
    bool first = true;
    for (std::size_t v = 0; v < 3; ++v) {
      if (args.views[v] == nullptr) continue;
      const double p = args.views[v][c];
      best = first ? p : std::max(best, p);
      first = false;
    }
    out[c] = best;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", lane_sum_scalar, divide_scalar, fuse_weighted_scalar,
                                 fuse_max_scalar};
  return table;
}

}  // namespace driveloc::kernels
