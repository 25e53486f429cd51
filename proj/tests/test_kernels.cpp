// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "msbg/kernels.hpp"
#include "msbg/rng.hpp"

namespace msbg::kernels {
namespace {

std::vector<double> random_values(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Runs `body` against every available variant and the scalar reference.
template <typename Body>
void for_simd_variants(Body body) {
  const KernelTable* simd = avx2();
  if (simd == nullptr) {
    MESSAGE("AVX2 variant unavailable; equivalence checks skipped");
    return;
  }
  body(scalar(), *simd);
}

TEST_CASE("variant selection") {
  CHECK(select("scalar"));
  CHECK(std::string(active().name) == "scalar");
  CHECK_FALSE(select("neon"));
  if (avx2() != nullptr) {
    CHECK(select("avx2"));
    CHECK(std::string(active().name) == "avx2");
  } else {
    CHECK_FALSE(select("avx2"));
  }
}

TEST_CASE("trilerp12 and bilerp12 pass constants through and hit corners") {
  Rng rng(1);
  const auto cell = random_values(12, rng);
  const double* same[8];
  for (auto& p : same) p = cell.data();
  double out[12];
  scalar().trilerp12(same, 0.3, 0.7, 0.9, out);
  for (int c = 0; c < 12; ++c) CHECK(out[c] == cell[c]);
  scalar().bilerp12(same, 0.3, 0.7, out);
  for (int c = 0; c < 12; ++c) CHECK(out[c] == cell[c]);

  std::vector<std::vector<double>> corners(8);
  const double* ptrs[8];
  for (int i = 0; i < 8; ++i) {
    corners[i] = random_values(12, rng);
    ptrs[i] = corners[i].data();
  }
  scalar().trilerp12(ptrs, 1.0, 0.0, 1.0, out);  // dy=1, dx=0, dz=1
  for (int c = 0; c < 12; ++c) CHECK(out[c] == doctest::Approx(corners[4 + 1][c]).epsilon(1e-15));
}

TEST_CASE("scalar and AVX2 interpolation are bit-identical") {
  for_simd_variants([](const KernelTable& ref, const KernelTable& simd) {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::vector<double>> corners(8);
      const double* ptrs[8];
      for (int i = 0; i < 8; ++i) {
        corners[i] = random_values(12, rng, -3, 3);
        ptrs[i] = corners[i].data();
      }
      const double fy = rng.uniform(), fx = rng.uniform(), fz = rng.uniform();
      double a[12], b[12];
      ref.trilerp12(ptrs, fy, fx, fz, a);
      simd.trilerp12(ptrs, fy, fx, fz, b);
      for (int c = 0; c < 12; ++c) CHECK(a[c] == b[c]);
      ref.bilerp12(ptrs, fy, fx, a);
      simd.bilerp12(ptrs, fy, fx, b);
      for (int c = 0; c < 12; ++c) CHECK(a[c] == b[c]);
    }
  });
}

TEST_CASE("scalar and AVX2 affine kernels are bit-identical") {
  for_simd_variants([](const KernelTable& ref, const KernelTable& simd) {
    Rng rng(3);
    for (std::size_t n : {0, 1, 3, 4, 5, 17, 64, 1001}) {
      const auto coeffs = random_values(12 * n, rng, -2, 2);
      const auto inner = random_values(12 * n, rng, -2, 2);
      const auto rgb = random_values(3 * n, rng, 0, 1);
      std::vector<double> a(3 * n), b(3 * n);
      ref.apply_affine(coeffs.data(), rgb.data(), a.data(), n);
      simd.apply_affine(coeffs.data(), rgb.data(), b.data(), n);
      CHECK(a == b);
      std::vector<double> ca(12 * n), cb(12 * n);
      ref.compose_affine(coeffs.data(), inner.data(), ca.data(), n);
      simd.compose_affine(coeffs.data(), inner.data(), cb.data(), n);
      CHECK(ca == cb);
    }
  });
}

TEST_CASE("scalar and AVX2 correlations are bit-identical") {
  for_simd_variants([](const KernelTable& ref, const KernelTable& simd) {
    Rng rng(4);
    for (auto [h, w, taps] : {std::tuple{11, 11, 11}, {20, 37, 11}, {13, 5, 3}, {8, 30, 7},
                              {16, 16, 1}}) {
      const auto in = random_values(static_cast<std::size_t>(h) * w, rng);
      const auto t = random_values(taps, rng, 0, 1);
      std::vector<double> a(static_cast<std::size_t>(h) * (w - taps + 1)), b(a.size());
      ref.correlate_rows(in.data(), h, w, t.data(), taps, a.data());
      simd.correlate_rows(in.data(), h, w, t.data(), taps, b.data());
      CHECK(a == b);
      std::vector<double> ca(static_cast<std::size_t>(h - taps + 1) * w), cb(ca.size());
      ref.correlate_cols(in.data(), h, w, t.data(), taps, ca.data());
      simd.correlate_cols(in.data(), h, w, t.data(), taps, cb.data());
      CHECK(ca == cb);
    }
  });
}

TEST_CASE("scalar and AVX2 Adam updates are bit-identical") {
  for_simd_variants([](const KernelTable& ref, const KernelTable& simd) {
    Rng rng(5);
    for (std::size_t n : {1, 4, 7, 100, 3504}) {
      auto pa = random_values(n, rng);
      auto pb = pa;
      std::vector<double> ma(n, 0.0), va(n, 0.0), mb(n, 0.0), vb(n, 0.0);
      const auto lr = random_values(n, rng, 1e-4, 1e-2);
      for (int step = 1; step <= 5; ++step) {
        const auto g = random_values(n, rng);
        const double b1 = 1.0 - std::pow(0.9, step);
        const double b2 = 1.0 - std::pow(0.999, step);
        ref.adam_update(pa.data(), g.data(), ma.data(), va.data(), lr.data(), 0.9, 0.999, b1,
                        b2, 1e-8, n);
        simd.adam_update(pb.data(), g.data(), mb.data(), vb.data(), lr.data(), 0.9, 0.999, b1,
                         b2, 1e-8, n);
      }
      CHECK(pa == pb);
      CHECK(ma == mb);
      CHECK(va == vb);
    }
  });
}

TEST_CASE("correlate_rows reference values") {
  const std::vector<double> in = {1, 2, 3, 4, 5, 6, 7, 8};  // 2 x 4
  const std::vector<double> taps = {0.5, 0.25};
  std::vector<double> out(6);
  scalar().correlate_rows(in.data(), 2, 4, taps.data(), 2, out.data());
  CHECK(out == std::vector<double>{1.0, 1.75, 2.5, 4.0, 4.75, 5.5});
  std::vector<double> cols(4);
  scalar().correlate_cols(in.data(), 2, 4, taps.data(), 2, cols.data());
  CHECK(cols == std::vector<double>{1.75, 2.5, 3.25, 4.0});
}

}  // namespace
}  // namespace msbg::kernels
