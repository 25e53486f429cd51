// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <array>

#include "msbg/synth.hpp"
#include "oracles.hpp"

namespace msbg {
namespace {

TEST_CASE("gen_base is seeded") {
  CHECK(gen_base(4, 64, 48) == gen_base(4, 64, 48));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Image a = gen_base(seed, 64, 64);
    const Image b = gen_base(seed + 100, 64, 64);
    std::size_t differing = 0;
    for (std::size_t p = 0; p < a.pixel_count(); ++p) {
      bool diff = false;
      for (int c = 0; c < 3; ++c) diff = diff || a.pixel(p)[c] != b.pixel(p)[c];
      differing += diff;
    }
    CHECK(differing * 2 >= a.pixel_count());
  }
}

TEST_CASE("gen_base luminance covers every decile") {
  for (std::uint64_t seed : {0u, 1u, 7u, 42u}) {
    for (auto [h, w] : {std::pair{16, 16}, {128, 128}, {40, 90}}) {
      const GuidanceMap lum = grayscale(gen_base(seed, h, w));
      std::array<int, 10> bins{};
      for (double v : lum.data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        ++bins[std::min(9, static_cast<int>(v * 10.0))];
      }
      for (int b = 0; b < 10; ++b) {
        INFO("seed " << seed << " size " << h << "x" << w << " decile " << b);
        CHECK(bins[b] > 0);
      }
    }
  }
}

TEST_CASE("identity perturbation is the identity map") {
  const SynthPair pair = make_pair(3, 32, 32, Perturbation::draw(PerturbKind::kIdentity, 3, 32, 32));
  CHECK(pair.img_r == pair.img_gt);
  CHECK(encode_ppm(pair.img_r) == encode_ppm(pair.img_gt));
}

TEST_CASE("global red offset") {
  Perturbation p;
  p.kind = PerturbKind::kGlobalAffine;
  p.global = AffineCoeffs::from({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, {0.1, 0, 0});
  const Image img = gen_base(5, 16, 16);
  const Image out = perturb(img, p);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    CHECK(out.pixel(i)[0] == doctest::Approx(img.pixel(i)[0] + 0.1).epsilon(1e-6));
    CHECK(out.pixel(i)[1] == img.pixel(i)[1]);
    CHECK(out.pixel(i)[2] == img.pixel(i)[2]);
  }
}

TEST_CASE("single-block patch perturbation equals a global draw") {
  const Perturbation patch = Perturbation::draw(PerturbKind::kPatchAffine, 9, 32, 32, 32);
  const Perturbation global = Perturbation::draw(PerturbKind::kGlobalAffine, 9, 32, 32);
  REQUIRE(patch.patches.size() == 1);
  CHECK(patch.patches[0] == global.global);
  const Image img = gen_base(9, 32, 32);
  CHECK(perturb(img, patch) == perturb(img, global));
}

TEST_CASE("patch draws and seam blending") {
  const Perturbation p = Perturbation::draw(PerturbKind::kPatchAffine, 2, 64, 48, 16);
  CHECK(p.patches_y == 4);
  CHECK(p.patches_x == 3);
  CHECK(p.patches.size() == 12);
  for (const auto& a : p.patches) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) CHECK(std::abs(a.m(r, c) - (r == c)) <= 0.3);
      CHECK(std::abs(a.t(r)) <= 0.2);
    }
  }
  const CoeffField f = patch_field(p, 64, 48);
  // Patch interiors carry their own draw; seams are convex blends of neighbors.
  CHECK(f.coeffs(8, 8) == p.patches[0]);
  CHECK(f.coeffs(40, 40) == p.patches[2 * 3 + 2]);
  const double seam = f.coeffs(8, 16).t(0);
  const double lo = std::min(p.patches[0].t(0), p.patches[1].t(0));
  const double hi = std::max(p.patches[0].t(0), p.patches[1].t(0));
  CHECK(seam >= lo);
  CHECK(seam <= hi);
  CHECK_THROWS_AS(Perturbation::draw(PerturbKind::kPatchAffine, 2, 64, 48, 0),
                  std::invalid_argument);
}

TEST_CASE("tone curve gammas are bounded and positive") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Perturbation p = Perturbation::draw(PerturbKind::kToneCurve, seed, 16, 16);
    for (double g : p.gamma) {
      CHECK(g >= 1.0 / 1.5 - 1e-12);
      CHECK(g <= 1.5 + 1e-12);
    }
  }
}

TEST_CASE("mixed pairs are non-trivial") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const SynthPair pair =
        make_pair(seed, 128, 128, Perturbation::draw(PerturbKind::kMixed, seed, 128, 128));
    CHECK(psnr(pair.img_r, pair.img_gt) < 35.0);
  }
}

TEST_CASE("least squares recovers a global affine draw") {
  const Perturbation p = Perturbation::draw(PerturbKind::kGlobalAffine, 7, 64, 64);
  const SynthPair pair = make_pair(7, 64, 64, p);
  const AffineFit fit = least_squares_affine(pair.img_r, pair.img_gt);
  for (int c = 0; c < kCoeffs; ++c) CHECK(fit.coeffs.v[c] == doctest::Approx(p.global.v[c]).epsilon(1e-5));
  CHECK(fit.mse < 1e-12);
  CHECK(psnr(fit.fitted, pair.img_gt) > 100.0);
}

TEST_CASE("least squares leaves a residual on small patches") {
  const Perturbation p = Perturbation::draw(PerturbKind::kPatchAffine, 7, 64, 64, 16);
  const SynthPair pair = make_pair(7, 64, 64, p);
  CHECK(least_squares_affine(pair.img_r, pair.img_gt).mse > 1e-4);
}

TEST_CASE("perturbation sidecar round trip") {
  for (PerturbKind k : {PerturbKind::kIdentity, PerturbKind::kGlobalAffine,
                        PerturbKind::kPatchAffine, PerturbKind::kToneCurve, PerturbKind::kMixed}) {
    const Perturbation p = Perturbation::draw(k, 11, 40, 40, 16, 0.7);
    CHECK(perturbation_from_text(perturbation_to_text(p)) == p);
  }
  CHECK_THROWS_AS(perturbation_from_text("kind = global_affine\nbogus = 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(perturbation_from_text("patches_y = 1\npatches_x = 2\npatch.0 = 1,0,0,0,0,1,0,0,0,0,1,0\n"),
                  std::invalid_argument);
  CHECK(parse_perturb_kind("tone_curve") == PerturbKind::kToneCurve);
  CHECK(std::string(perturb_kind_name(PerturbKind::kPatchAffine)) == "patch_affine");
  CHECK_THROWS(parse_perturb_kind("warp"));
}

}  // namespace
}  // namespace msbg
