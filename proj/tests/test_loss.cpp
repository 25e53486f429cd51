// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include "msbg/loss.hpp"
#include "oracles.hpp"

namespace msbg {
namespace {

// Sum over every ordered pair of axis neighbors, written independently of the
// library's traversal order.
double tv_oracle(const BilateralGrid& g) {
  double sum = 0.0;
  const int dims[3] = {g.h(), g.w(), g.d()};
  for (int i = 0; i < g.h(); ++i) {
    for (int j = 0; j < g.w(); ++j) {
      for (int k = 0; k < g.d(); ++k) {
        for (int axis = 0; axis < 3; ++axis) {
          int n[3] = {i, j, k};
          if (++n[axis] >= dims[axis]) continue;
          const AffineCoeffs a = g.coeffs(i, j, k);
          const AffineCoeffs b = g.coeffs(n[0], n[1], n[2]);
          for (int c = 0; c < kCoeffs; ++c) sum += (b.v[c] - a.v[c]) * (b.v[c] - a.v[c]);
        }
      }
    }
  }
  return sum;
}

TEST_CASE("recon_loss blends L1 and SSIM") {
  Rng rng(1);
  const Image a = oracle::random_image(16, 16, rng);
  const Image b = oracle::random_image(16, 16, rng);
  CHECK(recon_loss(a, a, 0.8) == 0.0);
  CHECK(recon_loss(a, b, 1.0) == doctest::Approx(mean_abs_error(a, b)));
  CHECK(recon_loss(a, b, 0.0) == doctest::Approx(1.0 - ssim(a, b)));
  CHECK(recon_loss(a, b, 0.8) ==
        doctest::Approx(0.8 * mean_abs_error(a, b) + 0.2 * (1.0 - ssim(a, b))));
  CHECK_THROWS_AS(recon_loss(a, Image(16, 15), 0.8), std::invalid_argument);
}

TEST_CASE("tv level weight grows with the square root of the cell count") {
  CHECK(tv_level_weight(BilateralGrid(8, 8, 4), 1e-3, 0.0) == doctest::Approx(0.016));
  CHECK(tv_level_weight(BilateralGrid(1, 1, 1), 1e-3, 0.5) == doctest::Approx(0.501));
}

TEST_CASE("tv_loss matches the neighbor-pair oracle") {
  Rng rng(2);
  MultiScaleGrid msg = MultiScaleGrid::identity({{2, 2, 1}, {4, 4, 2}, {8, 8, 4}},
                                                {{2, 2}, {2, 2}, {2, 2}});
  CHECK(tv_loss(msg, 1e-3, 0.0) == 0.0);
  for (auto& g : msg.levels) g = oracle::random_grid(g.h(), g.w(), g.d(), rng, 0.2);
  double expect = 0.0;
  for (const auto& g : msg.levels) {
    const double k = 1e-3 * std::sqrt(static_cast<double>(g.cell_count()));
    expect += k * tv_oracle(g) / static_cast<double>(g.cell_count());
  }
  CHECK(tv_loss(msg, 1e-3, 0.0) == doctest::Approx(expect).epsilon(1e-12));
  // A spatially constant level contributes nothing.
  const MultiScaleGrid flat = MultiScaleGrid::identity({{1, 1, 1}}, {{1, 1}});
  CHECK(tv_loss(flat, 1e-3, 0.0) == 0.0);
}

TEST_CASE("circle_loss") {
  Rng rng(3);
  const ImageD r = oracle::random_image(6, 6, rng).cast<double>();

  SUBCASE("exact inverse gives zero") {
    CoeffField comp(6, 6);
    comp.fill(AffineCoeffs::from({{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}}, {0.1, 0.1, 0.1}));
    const ImageD gt = apply_field(comp, r);
    CHECK(circle_loss(comp, r, gt, 1e6) == doctest::Approx(0.0).scale(1e-20));
  }
  SUBCASE("mean over invertible pixels only") {
    CoeffField comp(6, 6);  // identity
    ImageD gt = r;
    for (double& v : gt.data()) v += 0.1;
    // Identity inverse: each invertible pixel contributes 3 * 0.01.
    CHECK(circle_loss(comp, r, gt, 1e6) == doctest::Approx(0.03));
    comp.set(0, 0, AffineCoeffs::from({{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}, {0, 0, 0}));
    comp.set(5, 5, AffineCoeffs::from({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1e-9}}}, {0, 0, 0}));
    CHECK(circle_loss(comp, r, gt, 1e6) == doctest::Approx(0.03));
  }
  SUBCASE("nothing invertible") {
    CoeffField comp(6, 6);
    comp.fill(AffineCoeffs::from({{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}, {0.5, 0.5, 0.5}));
    CHECK(circle_loss(comp, r, r, 1e6) == 0.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(circle_loss(CoeffField(5, 6), r, r, 1e6), std::invalid_argument);
  }
}

TEST_CASE("total_loss") {
  Rng rng(4);
  const Image r = oracle::random_image(16, 16, rng);
  const LossConfig cfg;

  SUBCASE("identity on identical images is zero") {
    const LossBreakdown b = total_loss(MultiScaleGrid::default_pyramid(), r, r, cfg);
    CHECK(b.total == doctest::Approx(0.0).scale(1e-12));
  }
  SUBCASE("weighted terms sum to the total") {
    MultiScaleGrid msg = MultiScaleGrid::default_pyramid();
    for (auto& g : msg.levels) g = oracle::random_grid(g.h(), g.w(), g.d(), rng, 0.1);
    const Image gt = oracle::random_image(16, 16, rng);
    const LossBreakdown b = total_loss(msg, r, gt, cfg);
    CHECK(b.total == b.terms.total());
    CHECK(b.terms.recon_l1 > 0.0);
    CHECK(b.terms.recon_ssim > 0.0);
    CHECK(b.terms.tv > 0.0);
    CHECK(b.terms.circle > 0.0);
    const ImageD exact = apply_field(composite_field(msg, r), r.cast<double>());
    CHECK(b.terms.recon_l1 ==
          doctest::Approx(cfg.lambda_r * recon_loss(exact, gt.cast<double>(), 1.0)));
    CHECK(b.terms.tv == doctest::Approx(cfg.lambda_tv * tv_loss(msg, cfg.tv_a, cfg.tv_b)));
  }
  SUBCASE("renderer-only weights are rejected") {
    LossConfig bad;
    bad.lambda_d = 0.1;
    CHECK_THROWS_AS(total_loss(MultiScaleGrid::default_pyramid(), r, r, bad),
                    std::invalid_argument);
    bad = {};
    bad.lambda_r = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

}  // namespace
}  // namespace msbg
