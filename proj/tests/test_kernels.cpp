#include <random>
#include <vector>

#include "doctest.h"
#include "driveloc/kernels.hpp"

using namespace driveloc::kernels;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const auto* v = avx2_table()) out.push_back(v);
  return out;
}

std::vector<double> random_vec(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

}  // namespace

TEST_CASE("active table is one of the built variants") {
  const auto& a = active();
  bool known = false;
  for (const auto* v : variants()) known = known || v == &a;
  CHECK(known);
  MESSAGE("active kernels: " << a.name);
}

TEST_CASE("scalar reference computes the definitions") {
  const auto& k = scalar_table();
  std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(k.lane_sum(x.data(), x.size()) == 15.0);
  k.divide(x.data(), x.size(), 5.0);
  CHECK(x[4] == 1.0);

  std::vector<double> a{0.2, 0.8}, b{0.6, 0.4};
  std::vector<double> wa{1.0, 0.0}, wb{1.0, 0.0}, wc{2.0, 1.0};
  FuseArgs args;
  args.n = 2;
  args.views = {a.data(), b.data(), nullptr};
  args.weights = {wa.data(), wb.data(), wc.data()};
  std::vector<double> out(2);
  k.fuse_weighted(args, out.data());
  CHECK(out[0] == doctest::Approx(0.4));
  CHECK(out[1] == doctest::Approx(0.6));  // no weight on present views: plain mean
  k.fuse_max(args, out.data());
  CHECK(out[0] == 0.6);
  CHECK(out[1] == 0.8);
}

TEST_CASE("vector variants match the scalar reference bit for bit") {
  std::mt19937_64 gen(2024);
  const auto& ref = scalar_table();
  for (const auto* k : variants()) {
    CAPTURE(k->name);
    for (std::size_t n = 0; n <= 37; ++n) {
      for (int trial = 0; trial < 20; ++trial) {
        auto x = random_vec(gen, n);
        CHECK(k->lane_sum(x.data(), n) == ref.lane_sum(x.data(), n));
        auto y = x, z = x;
        k->divide(y.data(), n, 0.37);
        ref.divide(z.data(), n, 0.37);
        CHECK(y == z);

        std::vector<std::vector<double>> views, weights;
        for (int v = 0; v < 3; ++v) {
          views.push_back(random_vec(gen, n));
          weights.push_back(random_vec(gen, n));
          // Zero weight columns exercise the plain-mean fallback.
          for (std::size_t c = 0; c < n; c += 5) weights.back()[c] = 0.0;
        }
        for (unsigned mask = 1; mask < 8; ++mask) {
          FuseArgs args;
          args.n = n;
          for (int v = 0; v < 3; ++v) {
            args.views[v] = (mask >> v) & 1 ? views[v].data() : nullptr;
            args.weights[v] = weights[v].data();
          }
          std::vector<double> got(n), want(n);
          k->fuse_weighted(args, got.data());
          ref.fuse_weighted(args, want.data());
          CHECK(got == want);
          k->fuse_max(args, got.data());
          ref.fuse_max(args, want.data());
          CHECK(got == want);
        }
      }
    }
  }
}
