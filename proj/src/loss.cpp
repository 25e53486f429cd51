// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace msbg {

void LossConfig::validate() const {
  if (!(lambda_r >= 0.0 && lambda_r <= 1.0)) {
    throw std::invalid_argument("lambda_r must lie in [0,1]");
  }
  if (!(lambda_tv >= 0.0)) throw std::invalid_argument("lambda_tv must be >= 0");
  if (!(lambda_circle >= 0.0)) {
    throw std::invalid_argument("lambda_circle must be >= 0");
  }
  if (!(tv_a >= 0.0)) throw std::invalid_argument("tv_a must be >= 0");
  if (!(cond_threshold > 0.0)) {
    throw std::invalid_argument("cond_threshold must be > 0");
  }
  if (lambda_d != 0.0 || lambda_o != 0.0) {
    throw std::invalid_argument(
        "lambda_d and lambda_o require a 3D renderer and must be 0");
  }
}

double recon_loss(const ImageD& img_e, const ImageD& img_gt, double lambda_r,
                  const SsimParams& ssim_params) {
  if (!img_e.same_shape(img_gt)) {
    throw std::invalid_argument("recon_loss: dimension mismatch");
  }
  const auto e = img_e.data();
  const auto g = img_gt.data();
  double l1 = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) l1 += std::abs(e[i] - g[i]);
  l1 /= static_cast<double>(e.size());
  double out = lambda_r * l1;
  if (lambda_r < 1.0) {
    out += (1.0 - lambda_r) * (1.0 - ssim(img_e, img_gt, ssim_params));
  }
  return out;
}

double recon_loss(const Image& img_e, const Image& img_gt, double lambda_r,
                  const SsimParams& ssim_params) {
  if (!img_e.same_shape(img_gt)) {
    throw std::invalid_argument("recon_loss: dimension mismatch");
  }
  return recon_loss(img_e.cast<double>(), img_gt.cast<double>(), lambda_r,
                    ssim_params);
}

double tv_level_weight(const BilateralGrid& grid, double tv_a, double tv_b) {
  return tv_a * std::sqrt(static_cast<double>(grid.cell_count())) + tv_b;
}

namespace {

double squared_diff(const double* a, const double* b) {
  double s = 0.0;
  for (int c = 0; c < kCoeffs; ++c) {
    const double d = b[c] - a[c];
    s += d * d;
  }
  return s;
}

double tv_level_sum(const BilateralGrid& g) {
  double sum = 0.0;
  for (int i = 0; i < g.h(); ++i) {
    for (int j = 0; j < g.w(); ++j) {
      for (int k = 0; k < g.d(); ++k) {
        const double* c = g.cell(g.index(i, j, k));
        if (i + 1 < g.h()) sum += squared_diff(c, g.cell(g.index(i + 1, j, k)));
        if (j + 1 < g.w()) sum += squared_diff(c, g.cell(g.index(i, j + 1, k)));
        if (k + 1 < g.d()) sum += squared_diff(c, g.cell(g.index(i, j, k + 1)));
      }
    }
  }
  return sum;
}

}  // namespace

double tv_loss(const MultiScaleGrid& msg, double tv_a, double tv_b) {
  double total = 0.0;
  for (const auto& g : msg.levels) {
    total += tv_level_weight(g, tv_a, tv_b) * tv_level_sum(g) /
             static_cast<double>(g.cell_count());
  }
  return total;
}

double circle_loss(const CoeffField& composite, const ImageD& img_r,
                   const ImageD& img_gt, double cond_threshold) {
  if (!img_r.same_shape(img_gt) || !img_r.same_shape(composite.h(), composite.w())) {
    throw std::invalid_argument("circle_loss: dimension mismatch");
  }
  const InvertedField inv = invert_field(composite, cond_threshold);
  const ImageD recovered = apply_field(inv.field, img_gt);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < img_r.pixel_count(); ++p) {
    if (!inv.mask[p]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = img_r.pixel(p)[c] - recovered.pixel(p)[c];
      sum += d * d;
    }
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double circle_loss(const CoeffField& composite, const Image& img_r,
                   const Image& img_gt, double cond_threshold) {
  return circle_loss(composite, img_r.cast<double>(), img_gt.cast<double>(),
                     cond_threshold);
}

LossBreakdown total_loss(const MultiScaleGrid& msg, const Image& img_r,
                         const Image& img_gt, const LossConfig& cfg) {
  cfg.validate();
  if (!img_r.same_shape(img_gt)) {
    throw std::invalid_argument("total_loss: dimension mismatch");
  }
  const CoeffField composite = composite_field(msg, img_r);
  const ImageD r = img_r.cast<double>();
  const ImageD gt = img_gt.cast<double>();
  const ImageD e = apply_field(composite, r);

  LossBreakdown out;
  out.terms.recon_l1 = recon_loss(e, gt, 1.0) * cfg.lambda_r;
  if (cfg.lambda_r < 1.0) {
    out.terms.recon_ssim = (1.0 - cfg.lambda_r) * (1.0 - ssim(e, gt, cfg.ssim));
  }
  out.terms.tv = cfg.lambda_tv * tv_loss(msg, cfg.tv_a, cfg.tv_b);
  if (cfg.lambda_circle > 0.0) {
    out.terms.circle = cfg.lambda_circle * circle_loss(composite, r, gt, cfg.cond_threshold);
  }
  out.total = out.terms.total();
  return out;
}

}  // namespace msbg
