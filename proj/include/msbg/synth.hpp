// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "msbg/grid.hpp"
#include "msbg/image.hpp"

namespace msbg {

enum class PerturbKind { kIdentity, kGlobalAffine, kPatchAffine, kToneCurve, kMixed };

PerturbKind parse_perturb_kind(std::string_view s);
const char* perturb_kind_name(PerturbKind k);

// Seam blend width between neighboring patches, in pixels.
inline constexpr int kSeamBlend = 8;

// Ground-truth photometric perturbation. Affine draws stay within
// I +/- 0.3*strength (linear block) and +/- 0.2*strength (translation);
// gammas within [1/(1+0.5*strength), 1+0.5*strength].
struct Perturbation {
  PerturbKind kind = PerturbKind::kIdentity;
  std::uint64_t seed = 0;
  int block = 32;
  double strength = 1.0;
  AffineCoeffs global = AffineCoeffs::identity();
  int patches_y = 0;
  int patches_x = 0;
  std::vector<AffineCoeffs> patches;  // row-major patches_y x patches_x
  std::array<double, 3> gamma = {1.0, 1.0, 1.0};

  static Perturbation draw(PerturbKind kind, std::uint64_t seed, int h, int w,
                           int block = 32, double strength = 1.0);

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

Image gen_base(std::uint64_t seed, int h, int w);

Image perturb(const Image& img, const Perturbation& p);

// Per-pixel field realized by the patch component (seams blended).
CoeffField patch_field(const Perturbation& p, int h, int w);

struct SynthPair {
  Image img_r;
  Image img_gt;
  Perturbation truth;
};

SynthPair make_pair(std::uint64_t seed, int h, int w, const Perturbation& p);

// Closed-form least-squares global affine mapping img_r onto img_gt.
struct AffineFit {
  AffineCoeffs coeffs;
  Image fitted;
  double mse = 0.0;
};
AffineFit least_squares_affine(const Image& img_r, const Image& img_gt);

// key = value sidecar.
std::string perturbation_to_text(const Perturbation& p);
Perturbation perturbation_from_text(std::string_view text);

}  // namespace msbg
