// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "msbg/grid.hpp"
#include "msbg/image.hpp"

namespace msbg {

struct LossConfig {
  double lambda_r = 0.8;       // L1 share of the reconstruction term
  double lambda_tv = 1e-2;
  double lambda_circle = 1e-2;
  double tv_a = 1e-3;          // k = tv_a * sqrt(H*W*D) + tv_b
  double tv_b = 0.0;
  double cond_threshold = kDefaultCondThreshold;
  // Depth and opacity weights need a 3D renderer; anything but 0 is rejected.
  double lambda_d = 0.0;
  double lambda_o = 0.0;
  SsimParams ssim;

  void validate() const;
};

// Weighted contributions; they sum to the total.
struct LossTerms {
  double recon_l1 = 0.0;    // lambda_r * mean|e - gt|
  double recon_ssim = 0.0;  // (1 - lambda_r) * (1 - SSIM(e, gt))
  double tv = 0.0;          // lambda_tv * L_TV
  double circle = 0.0;      // lambda_circle * L_circle

  double recon() const { return recon_l1 + recon_ssim; }
  double total() const { return ((recon_l1 + recon_ssim) + tv) + circle; }
};

double recon_loss(const ImageD& img_e, const ImageD& img_gt, double lambda_r,
                  const SsimParams& ssim = {});
double recon_loss(const Image& img_e, const Image& img_gt, double lambda_r,
                  const SsimParams& ssim = {});

// Adaptive weight of one level.
double tv_level_weight(const BilateralGrid& grid, double tv_a, double tv_b);

// Sum over levels of k * (1/cells) * sum over cells and axes of the squared
// norm of the forward difference to the next cell (open boundaries).
double tv_loss(const MultiScaleGrid& msg, double tv_a, double tv_b);

// Mean over invertible pixels of |img_r - A^-1(img_gt)|^2; 0 when no pixel is
// invertible.
double circle_loss(const CoeffField& composite, const ImageD& img_r,
                   const ImageD& img_gt, double cond_threshold);
double circle_loss(const CoeffField& composite, const Image& img_r,
                   const Image& img_gt, double cond_threshold);

struct LossBreakdown {
  double total = 0.0;
  LossTerms terms;
};

// Forward evaluation of the full objective in double precision.
LossBreakdown total_loss(const MultiScaleGrid& msg, const Image& img_r,
                         const Image& img_gt, const LossConfig& cfg);

}  // namespace msbg
