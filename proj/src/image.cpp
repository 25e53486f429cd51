// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <string>

#include "msbg/grid.hpp"
#include "msbg/image.hpp"
#include "msbg/kernels.hpp"
#include "ssim_core.hpp"

namespace msbg {

GuidanceMap::GuidanceMap(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) {
    throw std::invalid_argument("guidance dimensions must be non-negative");
  }
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

GuidanceMap grayscale(const Image& img, const LumaWeights& weights) {
  GuidanceMap g(img.height(), img.width());
  auto out = g.data();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const float* px = img.pixel(p);
    const double y = weights.r * px[0] + weights.g * px[1] + weights.b * px[2];
    out[p] = std::clamp(y, 0.0, 1.0);
  }
  return g;
}

GuidanceMap downsample_area(const GuidanceMap& g, int factor_h, int factor_w) {
  if (factor_h <= 0 || factor_w <= 0) {
    throw std::invalid_argument("downsample factors must be >= 1, got " +
                                std::to_string(factor_h) + "x" +
                                std::to_string(factor_w));
  }
  if (factor_h == 1 && factor_w == 1) return g;
  const int oh = (g.height() + factor_h - 1) / factor_h;
  const int ow = (g.width() + factor_w - 1) / factor_w;
  GuidanceMap out(oh, ow);
  for (int oy = 0; oy < oh; ++oy) {
    const int y_end = std::min(g.height(), (oy + 1) * factor_h);
    for (int ox = 0; ox < ow; ++ox) {
      const int x_end = std::min(g.width(), (ox + 1) * factor_w);
      double sum = 0.0;
      int count = 0;
      for (int y = oy * factor_h; y < y_end; ++y) {
        for (int x = ox * factor_w; x < x_end; ++x) {
          sum += g.at(y, x);
          ++count;
        }
      }
      out.at(oy, ox) = sum / count;
    }
  }
  return out;
}

CoeffField upsample_bilinear(const CoeffField& field, int out_h, int out_w) {
  if (field.h() < 1 || field.w() < 1) {
    throw std::invalid_argument("upsample_bilinear: empty field");
  }
  if (out_h == field.h() && out_w == field.w()) return field;
  const auto& k = kernels::active();
  CoeffField out(out_h, out_w);
  std::vector<AxisSample> xs(out_w);
  for (int x = 0; x < out_w; ++x) {
    xs[x] = axis_sample(lattice_coord(x, out_w, field.w()), field.w());
  }
  const double* corners[4];
  for (int y = 0; y < out_h; ++y) {
    const AxisSample sy = axis_sample(lattice_coord(y, out_h, field.h()), field.h());
    for (int x = 0; x < out_w; ++x) {
      const AxisSample& sx = xs[x];
      corners[0] = field.at(sy.i0, sx.i0);
      corners[1] = field.at(sy.i0, sx.i1);
      corners[2] = field.at(sy.i1, sx.i0);
      corners[3] = field.at(sy.i1, sx.i1);
      k.bilerp12(corners, sy.f, sx.f, out.at(y, x));
    }
  }
  return out;
}

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " +
                                std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + ")");
  }
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sum += d * d;
  }
  if (sum == 0.0) return kInfinitePsnr;
  const double mse = sum / static_cast<double>(da.size());
  return 10.0 * std::log10(1.0 / mse);
}

double mean_abs_error(const Image& a, const Image& b) {
  require_same_shape(a, b, "mean_abs_error");
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    sum += std::abs(static_cast<double>(da[i]) - db[i]);
  }
  return da.empty() ? 0.0 : sum / static_cast<double>(da.size());
}

std::vector<double> gaussian_taps(int window, double sigma) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("SSIM window must be a positive odd size");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("SSIM sigma must be positive");
  std::vector<double> taps(window);
  const int center = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - center;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace detail {
namespace {

// Separable valid-mode correlation: h x w -> (h-n+1) x (w-n+1).
void filter_valid(const kernels::KernelTable& k, const std::vector<double>& in,
                  int h, int w, const std::vector<double>& taps,
                  std::vector<double>& tmp, std::vector<double>& out) {
  const int n = static_cast<int>(taps.size());
  const int ow = w - n + 1;
  tmp.resize(static_cast<std::size_t>(h) * ow);
  out.resize(static_cast<std::size_t>(h - n + 1) * ow);
  k.correlate_rows(in.data(), h, w, taps.data(), n, tmp.data());
  k.correlate_cols(tmp.data(), h, ow, taps.data(), n, out.data());
}

// Mirror index without edge repetition: -1 -> 1, n -> n-2.
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void reflect_pad(const std::vector<double>& in, int h, int w, int r,
                 std::vector<double>& out) {
  const int pw = w + 2 * r;
  out.resize(static_cast<std::size_t>(h + 2 * r) * pw);
  for (int y = 0; y < h + 2 * r; ++y) {
    const double* src = in.data() + static_cast<std::size_t>(reflect(y - r, h)) * w;
    double* dst = out.data() + static_cast<std::size_t>(y) * pw;
    for (int x = 0; x < pw; ++x) dst[x] = src[reflect(x - r, w)];
  }
}

// Adjoint of reflect_pad: folds the border back onto the source pixels.
void reflect_fold(const std::vector<double>& padded, int h, int w, int r,
                  std::vector<double>& out) {
  const int pw = w + 2 * r;
  out.assign(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h + 2 * r; ++y) {
    double* dst = out.data() + static_cast<std::size_t>(reflect(y - r, h)) * w;
    const double* src = padded.data() + static_cast<std::size_t>(y) * pw;
    for (int x = 0; x < pw; ++x) dst[reflect(x - r, w)] += src[x];
  }
}

// Same-size correlation over a mirrored border, h x w -> h x w.
void filter_same(const kernels::KernelTable& k, const std::vector<double>& in,
                 int h, int w, const std::vector<double>& taps,
                 std::vector<double>& padded, std::vector<double>& tmp,
                 std::vector<double>& out) {
  const int r = static_cast<int>(taps.size()) / 2;
  reflect_pad(in, h, w, r, padded);
  filter_valid(k, padded, h + 2 * r, w + 2 * r, taps, tmp, out);
}

// Adjoint of filter_same.
void filter_same_adjoint(const kernels::KernelTable& k, const std::vector<double>& in,
                         int h, int w, const std::vector<double>& taps,
                         std::vector<double>& padded, std::vector<double>& tmp,
                         std::vector<double>& out) {
  const int n = static_cast<int>(taps.size());
  // Transposed valid correlation: zero-pad by n-1, correlate with flipped taps.
  const int wh = h + 2 * (n - 1);
  const int ww = w + 2 * (n - 1);
  std::vector<double> wide(static_cast<std::size_t>(wh) * ww, 0.0);
  for (int y = 0; y < h; ++y) {
    std::copy_n(in.data() + static_cast<std::size_t>(y) * w, w,
                wide.data() + static_cast<std::size_t>(y + n - 1) * ww + (n - 1));
  }
  const std::vector<double> flipped(taps.rbegin(), taps.rend());
  filter_valid(k, wide, wh, ww, flipped, tmp, padded);
  reflect_fold(padded, h, w, n / 2, out);
}

}  // namespace

double ssim_with_grad(const ImageD& a, const ImageD& b, const SsimParams& params,
                      ImageD* grad_a) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("ssim: dimension mismatch");
  }
  const int n = params.window;
  if (n < 1 || n % 2 == 0) {
    throw std::invalid_argument("ssim: window must be a positive odd size");
  }
  if (a.pixel_count() == 0) throw std::invalid_argument("ssim: empty image");
  const auto& k = kernels::active();
  const std::vector<double> taps = gaussian_taps(n, params.sigma);
  const int h = a.height();
  const int w = a.width();
  const std::size_t npx = a.pixel_count();
  const std::size_t nout = npx;
  const double norm = 1.0 / (3.0 * static_cast<double>(nout));

  std::vector<double> x(npx), y(npx), xx(npx), yy(npx), xy(npx);
  std::vector<double> tmp, mu_x, mu_y, p_xx, p_yy, p_xy;
  std::vector<double> da, db, de, padded, back;
  if (grad_a != nullptr) *grad_a = ImageD(h, w);

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < npx; ++p) {
      x[p] = a.pixel(p)[c];
      y[p] = b.pixel(p)[c];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    filter_same(k, x, h, w, taps, padded, tmp, mu_x);
    filter_same(k, y, h, w, taps, padded, tmp, mu_y);
    filter_same(k, xx, h, w, taps, padded, tmp, p_xx);
    filter_same(k, yy, h, w, taps, padded, tmp, p_yy);
    filter_same(k, xy, h, w, taps, padded, tmp, p_xy);
    if (grad_a != nullptr) {
      da.resize(nout);
      db.resize(nout);
      de.resize(nout);
    }
    double channel = 0.0;
    for (std::size_t i = 0; i < nout; ++i) {
      const double mx = mu_x[i];
      const double my = mu_y[i];
      const double sxx = p_xx[i] - mx * mx;
      const double syy = p_yy[i] - my * my;
      const double sxy = p_xy[i] - mx * my;
      const double a1 = 2.0 * mx * my + params.c1;
      const double a2 = 2.0 * sxy + params.c2;
      const double b1 = mx * mx + my * my + params.c1;
      const double b2 = sxx + syy + params.c2;
      const double s = (a1 * a2) / (b1 * b2);
      channel += s;
      if (grad_a != nullptr) {
        // Grouped so every factor is exactly zero when a == b.
        const double denom = b1 * b2;
        da[i] = norm * (2.0 * my * (a2 - a1) / denom + 2.0 * mx * s * (b1 - b2) / denom);
        db[i] = norm * (-s / b2);
        de[i] = norm * (2.0 * a1 * (b2 - a2) / (denom * b2));
      }
    }
    total += channel;
    if (grad_a != nullptr) {
      // With db = dS/dE[x^2] and dc = dS/dE[xy], the gradient is
      // G^T da + 2x G^T db + y G^T dc; de = dc + 2 db regroups it as below.
      filter_same_adjoint(k, da, h, w, taps, padded, tmp, back);
      for (std::size_t p = 0; p < npx; ++p) grad_a->pixel(p)[c] = back[p];
      filter_same_adjoint(k, db, h, w, taps, padded, tmp, back);
      for (std::size_t p = 0; p < npx; ++p) {
        grad_a->pixel(p)[c] += 2.0 * (x[p] - y[p]) * back[p];
      }
      filter_same_adjoint(k, de, h, w, taps, padded, tmp, back);
      for (std::size_t p = 0; p < npx; ++p) grad_a->pixel(p)[c] += y[p] * back[p];
    }
  }
  return total * norm;
}

}  // namespace detail

double ssim(const ImageD& a, const ImageD& b, const SsimParams& params) {
  return detail::ssim_with_grad(a, b, params, nullptr);
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  return ssim(a.cast<double>(), b.cast<double>(), params);
}

}  // namespace msbg
