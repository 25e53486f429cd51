// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msbg {

class CoeffField;

// Interleaved RGB raster. Storage precision is a template parameter so the
// differentiable pipeline can run in double while IO-facing images stay float.
template <typename T>
class BasicImage {
 public:
  using value_type = T;

  BasicImage() = default;
  BasicImage(int height, int width, T fill = T(0))
      : height_(height), width_(width) {
    if (height < 0 || width < 0) {
      throw std::invalid_argument("image dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(height) * width * 3, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  bool empty() const { return data_.empty(); }

  T& at(int y, int x, int c) { return data_[index(y, x) + c]; }
  T at(int y, int x, int c) const { return data_[index(y, x) + c]; }

  T* pixel(std::size_t p) { return data_.data() + 3 * p; }
  const T* pixel(std::size_t p) const { return data_.data() + 3 * p; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(int height, int width) const {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool same_shape(const BasicImage<U>& other) const {
    return same_shape(other.height(), other.width());
  }

  template <typename U>
  BasicImage<U> cast() const {
    BasicImage<U> out(height_, width_);
    auto dst = out.data();
    for (std::size_t i = 0; i < data_.size(); ++i) {
      dst[i] = static_cast<U>(data_[i]);
    }
    return out;
  }

  friend bool operator==(const BasicImage& a, const BasicImage& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int y, int x) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using Image = BasicImage<float>;
using ImageD = BasicImage<double>;

// Single-channel luminance in [0,1] used as the grid's third query coordinate.
class GuidanceMap {
 public:
  GuidanceMap() = default;
  GuidanceMap(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  double& at(int y, int x) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  double at(int y, int x) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

struct LumaWeights {
  double r = 0.299;
  double g = 0.587;
  double b = 0.114;
};

GuidanceMap grayscale(const Image& img, const LumaWeights& weights = {});

// Block mean over factor_h x factor_w tiles; partial edge tiles are averaged
// over the pixels they actually cover.
GuidanceMap downsample_area(const GuidanceMap& g, int factor_h, int factor_w);

// Half-pixel-center bilinear resize of a 12-channel coefficient field with
// edge clamping.
CoeffField upsample_bilinear(const CoeffField& field, int out_h, int out_w);

// Returned by psnr() for identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

double psnr(const Image& a, const Image& b);
double mean_abs_error(const Image& a, const Image& b);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

// Mean SSIM over every pixel of all three channels. The Gaussian window reads
// across a mirrored border, so any image size is accepted.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});
double ssim(const ImageD& a, const ImageD& b, const SsimParams& params = {});

// Normalized 1D Gaussian taps; the 2D window is their outer product.
std::vector<double> gaussian_taps(int window, double sigma);

class PpmError : public std::runtime_error {
 public:
  PpmError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

Image decode_ppm(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_ppm(const Image& img);
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& img, const std::filesystem::path& path);

}  // namespace msbg
