// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include "msbg/grid.hpp"
#include "oracles.hpp"

namespace msbg {
namespace {

AffineCoeffs scaled(double s, std::array<double, 3> t) {
  return AffineCoeffs::from({{{s, 0, 0}, {0, s, 0}, {0, 0, s}}}, t);
}

CoeffField random_field(int h, int w, Rng& rng, double amplitude) {
  CoeffField f(h, w);
  for (double& v : f.values()) v += rng.uniform(-amplitude, amplitude);
  return f;
}

GuidanceMap random_guidance(int h, int w, Rng& rng) {
  GuidanceMap g(h, w);
  for (double& v : g.data()) v = rng.uniform();
  return g;
}

TEST_CASE("apply_coeffs") {
  const std::array<double, 3> rgb = {0.1, 0.2, 0.3};
  CHECK(apply_coeffs(AffineCoeffs::identity(), rgb) == rgb);
  const auto doubled = apply_coeffs(scaled(2.0, {0, 0, 0}), rgb);
  CHECK(doubled[0] == doctest::Approx(0.2));
  CHECK(doubled[1] == doctest::Approx(0.4));
  CHECK(doubled[2] == doctest::Approx(0.6));
  const auto flat = apply_coeffs(scaled(0.0, {0.5, 0.5, 0.5}), rgb);
  CHECK(flat == std::array<double, 3>{0.5, 0.5, 0.5});
}

TEST_CASE("lattice coordinates use pixel centers and clamp") {
  CHECK(lattice_coord(0, 4, 4) == 0.0);
  CHECK(lattice_coord(3, 4, 4) == 3.0);
  CHECK(lattice_coord(0, 8, 2) == 0.0);
  CHECK(lattice_coord(3, 8, 2) == doctest::Approx(0.375));
  CHECK(lattice_coord(7, 8, 2) == 1.0);
  const AxisSample node = axis_sample(0.0, 2);
  CHECK(node.i0 == 0);
  CHECK(node.i1 == 1);
  CHECK(node.f == 0.0);
  const AxisSample single = axis_sample(0.0, 1);
  CHECK(single.i0 == 0);
  CHECK(single.i1 == 0);
  CHECK(single.f == 0.0);
  const AxisSample above = axis_sample(1.0, 2);
  CHECK(above.i0 == 1);
  CHECK(above.i1 == 1);
  const AxisSample mid = axis_sample(0.5, 2);
  CHECK(mid.i0 == 0);
  CHECK(mid.i1 == 1);
  CHECK(mid.f == 0.5);
}

TEST_CASE("identity grid slices to identity") {
  Rng rng(1);
  const BilateralGrid g(4, 4, 2);
  const CoeffField f = slice(g, random_guidance(9, 7, rng));
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 7; ++x) CHECK(f.coeffs(y, x) == AffineCoeffs::identity());
  }
}

TEST_CASE("two-cell grid at the spatial midpoint blends evenly") {
  BilateralGrid g(1, 2, 1);
  const AffineCoeffs c0 = scaled(1.0, {0.2, 0, 0});
  const AffineCoeffs c1 = scaled(1.0, {0.6, 0, 0});
  g.set(0, 0, 0, c0);
  g.set(0, 1, 0, c1);
  GuidanceMap guide(1, 4, 0.5);
  const CoeffField f = slice(g, guide);
  const auto expect = oracle::slice_at(g, 0.0, 0.5, 0.5);
  CHECK(expect[3] == doctest::Approx(0.4));
  // Pixels 1 and 2 of 4 sit at lattice x 0.25 and 0.75.
  const double mid = 0.5 * (f.coeffs(0, 1).t(0) + f.coeffs(0, 2).t(0));
  CHECK(mid == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("query on a lattice node returns that node") {
  Rng rng(2);
  const BilateralGrid g = oracle::random_grid(4, 4, 3, rng, 0.3);
  GuidanceMap guide(4, 4, 0.5);  // z = 1.0, a node of d = 3
  const CoeffField f = slice(g, guide);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const AffineCoeffs node = g.coeffs(i, j, 1);
      for (int c = 0; c < kCoeffs; ++c) CHECK(f.at(i, j)[c] == doctest::Approx(node.v[c]).epsilon(1e-14));
    }
  }
}

TEST_CASE("slice matches the full-sum oracle") {
  Rng rng(3);
  const GridShape shapes[] = {{2, 2, 1}, {4, 4, 2}, {8, 8, 4}, {16, 16, 8}, {3, 5, 2}};
  for (const auto& s : shapes) {
    const BilateralGrid g = oracle::random_grid(s.h, s.w, s.d, rng, 0.5);
    const GuidanceMap guide = random_guidance(13, 11, rng);
    const CoeffField f = slice(g, guide);
    for (int y = 0; y < 13; ++y) {
      for (int x = 0; x < 11; ++x) {
        const auto expect =
            oracle::slice_at(g, oracle::spatial_coord(y, 13, s.h),
                             oracle::spatial_coord(x, 11, s.w), guide.at(y, x));
        for (int c = 0; c < kCoeffs; ++c) CHECK(f.at(y, x)[c] == doctest::Approx(expect[c]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("sliced coefficients stay within the cell range") {
  Rng rng(4);
  const BilateralGrid g = oracle::random_grid(4, 4, 2, rng, 1.0);
  std::array<double, kCoeffs> lo, hi;
  lo.fill(1e300);
  hi.fill(-1e300);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    for (int c = 0; c < kCoeffs; ++c) {
      lo[c] = std::min(lo[c], g.cell(i)[c]);
      hi[c] = std::max(hi[c], g.cell(i)[c]);
    }
  }
  const CoeffField f = slice(g, random_guidance(17, 19, rng));
  for (std::size_t p = 0; p < f.pixel_count(); ++p) {
    for (int c = 0; c < kCoeffs; ++c) {
      CHECK(f.pixel(p)[c] >= lo[c] - 1e-12);
      CHECK(f.pixel(p)[c] <= hi[c] + 1e-12);
    }
  }
}

TEST_CASE("single 1x1x1 level is one global affine") {
  MultiScaleGrid msg = MultiScaleGrid::identity({{1, 1, 1}}, {{1, 1}});
  const AffineCoeffs a = scaled(1.1, {0.05, -0.02, 0.01});
  msg.levels[0].set(0, 0, 0, a);
  Rng rng(5);
  const Image img = oracle::random_image(12, 10, rng);
  const Enhanced e = enhance(msg, img);
  for (std::size_t p = 0; p < e.composite.pixel_count(); ++p) {
    for (int c = 0; c < kCoeffs; ++c) CHECK(e.composite.pixel(p)[c] == a.v[c]);
  }
}

TEST_CASE("identity pyramids pass images through bit-exactly") {
  Rng rng(6);
  const Image img = oracle::random_image(21, 17, rng);
  for (const auto& msg : {MultiScaleGrid::default_pyramid(),
                          MultiScaleGrid::identity({{16, 16, 8}}, {{1, 1}}),
                          MultiScaleGrid::identity({{1, 1, 1}}, {{1, 1}})}) {
    CHECK(enhance(msg, img).image == img);
  }
}

TEST_CASE("compose_fields") {
  Rng rng(7);
  SUBCASE("identities compose to identity") {
    const CoeffField id(4, 4);
    const std::vector<CoeffField> fs = {id, id, id};
    CHECK(compose_fields(fs) == id);
  }
  SUBCASE("single field is unchanged") {
    const std::vector<CoeffField> fs = {random_field(3, 3, rng, 0.3)};
    CHECK(compose_fields(fs) == fs[0]);
  }
  SUBCASE("scale then translate") {
    CoeffField scale(1, 1), shift(1, 1);
    scale.fill(scaled(2.0, {0, 0, 0}));
    shift.fill(scaled(1.0, {0.1, 0.1, 0.1}));
    const std::vector<CoeffField> fs = {scale, shift};
    const AffineCoeffs c = compose_fields(fs).coeffs(0, 0);
    CHECK(c.m(0, 0) == 2.0);
    CHECK(c.t(0) == doctest::Approx(0.1));
    const auto out = apply_coeffs(c, {0.25, 0.5, 0.75});
    CHECK(out[0] == doctest::Approx(0.6));
  }
  SUBCASE("matches sequential application") {
    const Image img = oracle::random_image(8, 8, rng);
    const std::vector<CoeffField> fs = {random_field(8, 8, rng, 0.3),
                                        random_field(8, 8, rng, 0.3),
                                        random_field(8, 8, rng, 0.3)};
    const Image composite = apply_field(compose_fields(fs), img);
    ImageD seq = img.cast<double>();
    for (const auto& f : fs) seq = apply_field(f, seq);
    for (std::size_t i = 0; i < seq.data().size(); ++i) {
      CHECK(composite.data()[i] == doctest::Approx(seq.data()[i]).epsilon(1e-5));
    }
  }
  SUBCASE("dimension mismatch") {
    const std::vector<CoeffField> fs = {CoeffField(2, 2), CoeffField(2, 3)};
    CHECK_THROWS_AS(compose_fields(fs), std::invalid_argument);
  }
}

TEST_CASE("invert_field") {
  SUBCASE("closed form") {
    CoeffField f(1, 1);
    f.fill(scaled(2.0, {0.2, 0.2, 0.2}));
    const InvertedField inv = invert_field(f);
    CHECK(inv.mask[0]);
    const AffineCoeffs c = inv.field.coeffs(0, 0);
    CHECK(c.m(1, 1) == doctest::Approx(0.5));
    CHECK(c.m(0, 1) == doctest::Approx(0.0));
    CHECK(c.t(2) == doctest::Approx(-0.1));
  }
  SUBCASE("identity") {
    const InvertedField inv = invert_field(CoeffField(3, 3));
    CHECK(inv.field == CoeffField(3, 3));
    CHECK(std::all_of(inv.mask.begin(), inv.mask.end(), [](bool b) { return b; }));
  }
  SUBCASE("singular pixels are masked") {
    CoeffField f(1, 2);
    f.set(0, 0, scaled(0.0, {0.5, 0.5, 0.5}));
    const InvertedField inv = invert_field(f);
    CHECK_FALSE(inv.mask[0]);
    CHECK(inv.mask[1]);
    CHECK(inv.field.coeffs(0, 0) == AffineCoeffs::identity());
  }
  SUBCASE("ill-conditioned pixels are masked") {
    CoeffField f(1, 1);
    f.fill(AffineCoeffs::from({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1e-7}}}, {0, 0, 0}));
    CHECK_FALSE(invert_field(f, 1e6).mask[0]);
    CHECK(invert_field(f, 1e9).mask[0]);
  }
  SUBCASE("forward then inverse recovers the input") {
    Rng rng(8);
    const Image img = oracle::random_image(10, 10, rng);
    const CoeffField f = random_field(10, 10, rng, 0.3);
    const ImageD fwd = apply_field(f, img.cast<double>());
    const ImageD back = apply_field(invert_field(f).field, fwd);
    for (std::size_t i = 0; i < back.data().size(); ++i) {
      CHECK(back.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-4));
    }
  }
}

TEST_CASE("level_field") {
  Rng rng(9);
  const Image img = oracle::random_image(16, 12, rng);
  const GuidanceMap guide = grayscale(img);
  const BilateralGrid g = oracle::random_grid(4, 4, 2, rng, 0.2);
  CHECK(level_field(g, guide, {1, 1}, 16, 12) == slice(g, guide));
  CHECK(level_field(BilateralGrid(4, 4, 2), guide, {4, 4}, 16, 12) == CoeffField(16, 12));

  // A grid that varies only along the guidance axis, queried at constant
  // luminance, gives the same field at any guidance resolution.
  BilateralGrid depth_only(4, 4, 2);
  const BilateralGrid varied = oracle::random_grid(1, 1, 2, rng, 0.3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 2; ++k) depth_only.set(i, j, k, varied.coeffs(0, 0, k));
    }
  }
  const GuidanceMap flat(16, 12, 0.37);
  const CoeffField coarse = level_field(depth_only, flat, {2, 2}, 16, 12);
  const CoeffField direct = slice(depth_only, flat);
  for (std::size_t i = 0; i < direct.values().size(); ++i) {
    CHECK(coarse.values()[i] == doctest::Approx(direct.values()[i]).epsilon(1e-12));
  }
  CHECK(coarse.h() == 16);
  CHECK(coarse.w() == 12);
}

TEST_CASE("enhance matches the sequential full-resolution oracle") {
  Rng rng(10);
  MultiScaleGrid msg = MultiScaleGrid::identity({{2, 2, 1}, {4, 4, 2}, {8, 8, 4}},
                                                {{1, 1}, {1, 1}, {1, 1}});
  for (auto& level : msg.levels) {
    for (double& v : level.values()) v += rng.uniform(-0.05, 0.05);
  }
  const Image img = oracle::random_image(24, 20, rng);
  const Image got = enhance(msg, img).image;
  const ImageD expect = oracle::sequential_enhance(msg, img);
  for (std::size_t i = 0; i < got.data().size(); ++i) {
    CHECK(got.data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-4));
  }
}

TEST_CASE("pyramid validation") {
  CHECK_THROWS_AS(MultiScaleGrid::identity({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MultiScaleGrid::identity({{2, 2, 1}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MultiScaleGrid::identity({{4, 4, 2}, {2, 2, 1}}, {{2, 2}, {2, 2}}),
                  std::invalid_argument);
  const MultiScaleGrid def = MultiScaleGrid::default_pyramid();
  CHECK(def.shapes() == std::vector<GridShape>{{2, 2, 1}, {4, 4, 2}, {8, 8, 4}});
  CHECK(def.param_count() == (4 + 32 + 256) * kCoeffs);
}

}  // namespace
}  // namespace msbg
