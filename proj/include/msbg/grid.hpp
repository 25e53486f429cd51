// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "msbg/image.hpp"

namespace msbg {

inline constexpr int kCoeffs = 12;

// One 3x4 affine color transform, row-major:
// [m00 m01 m02 t0 | m10 m11 m12 t1 | m20 m21 m22 t2].
struct AffineCoeffs {
  std::array<double, kCoeffs> v{};

  static AffineCoeffs identity();
  static AffineCoeffs from(const std::array<std::array<double, 3>, 3>& m,
                           const std::array<double, 3>& t);

  double m(int row, int col) const { return v[row * 4 + col]; }
  double t(int row) const { return v[row * 4 + 3]; }
  double& m(int row, int col) { return v[row * 4 + col]; }
  double& t(int row) { return v[row * 4 + 3]; }

  friend bool operator==(const AffineCoeffs&, const AffineCoeffs&) = default;
};

std::array<double, 3> apply_coeffs(const AffineCoeffs& a,
                                   const std::array<double, 3>& rgb);

// out = outer(inner(x)).
AffineCoeffs compose(const AffineCoeffs& outer, const AffineCoeffs& inner);

// One level of the pyramid: h x w x d cells, cell (i,j,k) at ((i*w + j)*d + k).
class BilateralGrid {
 public:
  BilateralGrid() = default;
  // Identity-initialized.
  BilateralGrid(int h, int w, int d);

  int h() const { return h_; }
  int w() const { return w_; }
  int d() const { return d_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(h_) * w_ * d_;
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * w_ + j) * d_ + k;
  }

  const double* cell(std::size_t idx) const { return data_.data() + idx * kCoeffs; }
  double* cell(std::size_t idx) { return data_.data() + idx * kCoeffs; }
  AffineCoeffs coeffs(int i, int j, int k) const;
  void set(int i, int j, int k, const AffineCoeffs& a);

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  friend bool operator==(const BilateralGrid&, const BilateralGrid&) = default;

 private:
  int h_ = 0;
  int w_ = 0;
  int d_ = 0;
  std::vector<double> data_;
};

struct GridShape {
  int h = 1;
  int w = 1;
  int d = 1;
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct GuidanceFactors {
  int fh = 1;
  int fw = 1;
  friend bool operator==(const GuidanceFactors&, const GuidanceFactors&) = default;
};

// Coarse-to-fine pyramid; levels[0] is the coarsest and is applied first.
struct MultiScaleGrid {
  std::vector<BilateralGrid> levels;
  std::vector<GuidanceFactors> factors;
  LumaWeights luma;

  // Identity pyramid. Throws if shapes are empty, factors mismatch in count,
  // or dims decrease from coarse to fine.
  static MultiScaleGrid identity(const std::vector<GridShape>& shapes,
                                 const std::vector<GuidanceFactors>& factors);
  static MultiScaleGrid default_pyramid();

  std::size_t level_count() const { return levels.size(); }
  std::size_t param_count() const;
  std::vector<GridShape> shapes() const;
  void validate() const;
};

// Image-resolution field of per-pixel affine transforms.
class CoeffField {
 public:
  CoeffField() = default;
  // Identity-initialized.
  CoeffField(int h, int w);

  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(h_) * w_; }

  double* at(int y, int x) {
    return data_.data() + (static_cast<std::size_t>(y) * w_ + x) * kCoeffs;
  }
  const double* at(int y, int x) const {
    return data_.data() + (static_cast<std::size_t>(y) * w_ + x) * kCoeffs;
  }
  double* pixel(std::size_t p) { return data_.data() + p * kCoeffs; }
  const double* pixel(std::size_t p) const { return data_.data() + p * kCoeffs; }
  AffineCoeffs coeffs(int y, int x) const;
  void set(int y, int x, const AffineCoeffs& a);
  void fill(const AffineCoeffs& a);

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  friend bool operator==(const CoeffField&, const CoeffField&) = default;

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

// Continuous lattice coordinate for sample `pixel` of `extent` pixels on an
// axis of `cells` grid cells (half-pixel centers, clamped to [0, cells-1]).
double lattice_coord(int pixel, int extent, int cells);

// Neighbor pair and fractional offset along one axis.
struct AxisSample {
  int i0 = 0;
  int i1 = 0;
  double f = 0.0;
};
AxisSample axis_sample(double coord, int cells);

CoeffField slice(const BilateralGrid& grid, const GuidanceMap& g);

CoeffField level_field(const BilateralGrid& grid, const GuidanceMap& full_guidance,
                       GuidanceFactors factors, int out_h, int out_w);

// Coarse-to-fine composition: the first field is applied first.
CoeffField compose_fields(std::span<const CoeffField> coarse_to_fine);

Image apply_field(const CoeffField& field, const Image& img);
ImageD apply_field(const CoeffField& field, const ImageD& img);

struct InvertedField {
  CoeffField field;
  std::vector<bool> mask;
};

inline constexpr double kDefaultCondThreshold = 1e6;
inline constexpr double kMinAbsDeterminant = 1e-8;

// Per-pixel inverse (M^-1, -M^-1 T). A pixel is masked out (identity output)
// when |det M| < kMinAbsDeterminant or the Frobenius condition estimate
// ||M||_F * ||M^-1||_F exceeds cond_threshold.
InvertedField invert_field(const CoeffField& field,
                           double cond_threshold = kDefaultCondThreshold);

struct Enhanced {
  Image image;
  CoeffField composite;
};

Enhanced enhance(const MultiScaleGrid& msg, const Image& img);

// Composite field for `img` without applying it.
CoeffField composite_field(const MultiScaleGrid& msg, const Image& img);

}  // namespace msbg
