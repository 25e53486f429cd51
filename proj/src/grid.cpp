// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "msbg/kernels.hpp"

namespace msbg {

AffineCoeffs AffineCoeffs::identity() {
  AffineCoeffs a;
  a.v = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  return a;
}

AffineCoeffs AffineCoeffs::from(const std::array<std::array<double, 3>, 3>& m,
                                const std::array<double, 3>& t) {
  AffineCoeffs a;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.m(r, c) = m[r][c];
    a.t(r) = t[r];
  }
  return a;
}

std::array<double, 3> apply_coeffs(const AffineCoeffs& a,
                                   const std::array<double, 3>& rgb) {
  std::array<double, 3> out;
  kernels::active().apply_affine(a.v.data(), rgb.data(), out.data(), 1);
  return out;
}

AffineCoeffs compose(const AffineCoeffs& outer, const AffineCoeffs& inner) {
  AffineCoeffs out;
  kernels::active().compose_affine(outer.v.data(), inner.v.data(), out.v.data(), 1);
  return out;
}

BilateralGrid::BilateralGrid(int h, int w, int d) : h_(h), w_(w), d_(d) {
  if (h < 1 || w < 1 || d < 1) {
    throw std::invalid_argument("grid dims must be >= 1, got " + std::to_string(h) +
                                "x" + std::to_string(w) + "x" + std::to_string(d));
  }
  data_.resize(cell_count() * kCoeffs);
  const AffineCoeffs id = AffineCoeffs::identity();
  for (std::size_t c = 0; c < cell_count(); ++c) {
    std::copy(id.v.begin(), id.v.end(), cell(c));
  }
}

AffineCoeffs BilateralGrid::coeffs(int i, int j, int k) const {
  AffineCoeffs a;
  const double* src = cell(index(i, j, k));
  std::copy(src, src + kCoeffs, a.v.begin());
  return a;
}

void BilateralGrid::set(int i, int j, int k, const AffineCoeffs& a) {
  std::copy(a.v.begin(), a.v.end(), cell(index(i, j, k)));
}

MultiScaleGrid MultiScaleGrid::identity(const std::vector<GridShape>& shapes,
                                        const std::vector<GuidanceFactors>& factors) {
  MultiScaleGrid msg;
  for (const GridShape& s : shapes) msg.levels.emplace_back(s.h, s.w, s.d);
  msg.factors = factors;
  msg.validate();
  return msg;
}

MultiScaleGrid MultiScaleGrid::default_pyramid() {
  return identity({{2, 2, 1}, {4, 4, 2}, {8, 8, 4}}, {{2, 2}, {2, 2}, {2, 2}});
}

std::size_t MultiScaleGrid::param_count() const {
  std::size_t n = 0;
  for (const auto& g : levels) n += g.values().size();
  return n;
}

std::vector<GridShape> MultiScaleGrid::shapes() const {
  std::vector<GridShape> out;
  for (const auto& g : levels) out.push_back({g.h(), g.w(), g.d()});
  return out;
}

void MultiScaleGrid::validate() const {
  if (levels.empty()) throw std::invalid_argument("pyramid needs at least one level");
  if (factors.size() != levels.size()) {
    throw std::invalid_argument("pyramid has " + std::to_string(levels.size()) +
                                " levels but " + std::to_string(factors.size()) +
                                " guidance factors");
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (factors[l].fh < 1 || factors[l].fw < 1) {
      throw std::invalid_argument("guidance factors must be >= 1");
    }
    if (l == 0) continue;
    const auto& a = levels[l - 1];
    const auto& b = levels[l];
    if (b.h() < a.h() || b.w() < a.w() || b.d() < a.d()) {
      throw std::invalid_argument("pyramid level " + std::to_string(l) +
                                  " is coarser than level " + std::to_string(l - 1));
    }
  }
}

CoeffField::CoeffField(int h, int w) : h_(h), w_(w) {
  if (h < 0 || w < 0) throw std::invalid_argument("field dims must be >= 0");
  data_.resize(pixel_count() * kCoeffs);
  fill(AffineCoeffs::identity());
}

AffineCoeffs CoeffField::coeffs(int y, int x) const {
  AffineCoeffs a;
  std::copy(at(y, x), at(y, x) + kCoeffs, a.v.begin());
  return a;
}

void CoeffField::set(int y, int x, const AffineCoeffs& a) {
  std::copy(a.v.begin(), a.v.end(), at(y, x));
}

void CoeffField::fill(const AffineCoeffs& a) {
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    std::copy(a.v.begin(), a.v.end(), pixel(p));
  }
}

double lattice_coord(int pixel, int extent, int cells) {
  const double c = ((pixel + 0.5) * cells) / extent - 0.5;
  return std::clamp(c, 0.0, static_cast<double>(cells - 1));
}

AxisSample axis_sample(double coord, int cells) {
  AxisSample s;
  s.i0 = std::clamp(static_cast<int>(std::floor(coord)), 0, cells - 1);
  s.i1 = std::min(s.i0 + 1, cells - 1);
  s.f = s.i1 == s.i0 ? 0.0 : coord - s.i0;
  return s;
}

CoeffField slice(const BilateralGrid& grid, const GuidanceMap& g) {
  const auto& k = kernels::active();
  CoeffField out(g.height(), g.width());
  std::vector<AxisSample> xs(g.width());
  for (int x = 0; x < g.width(); ++x) {
    xs[x] = axis_sample(lattice_coord(x, g.width(), grid.w()), grid.w());
  }
  const double z_scale = grid.d() - 1;
  const double* corners[8];
  for (int y = 0; y < g.height(); ++y) {
    const AxisSample sy = axis_sample(lattice_coord(y, g.height(), grid.h()), grid.h());
    for (int x = 0; x < g.width(); ++x) {
      const AxisSample& sx = xs[x];
      const double d = std::clamp(g.at(y, x), 0.0, 1.0);
      const AxisSample sz = axis_sample(d * z_scale, grid.d());
      const int is[2] = {sy.i0, sy.i1};
      const int js[2] = {sx.i0, sx.i1};
      const int ks[2] = {sz.i0, sz.i1};
      for (int c = 0; c < 8; ++c) {
        corners[c] = grid.cell(grid.index(is[c >> 2], js[(c >> 1) & 1], ks[c & 1]));
      }
      k.trilerp12(corners, sy.f, sx.f, sz.f, out.at(y, x));
    }
  }
  return out;
}

CoeffField level_field(const BilateralGrid& grid, const GuidanceMap& full_guidance,
                       GuidanceFactors factors, int out_h, int out_w) {
  const GuidanceMap g = downsample_area(full_guidance, factors.fh, factors.fw);
  return upsample_bilinear(slice(grid, g), out_h, out_w);
}

CoeffField compose_fields(std::span<const CoeffField> coarse_to_fine) {
  if (coarse_to_fine.empty()) {
    throw std::invalid_argument("compose_fields: empty list");
  }
  const int h = coarse_to_fine[0].h();
  const int w = coarse_to_fine[0].w();
  for (const auto& f : coarse_to_fine) {
    if (f.h() != h || f.w() != w) {
      throw std::invalid_argument("compose_fields: dimension mismatch");
    }
  }
  CoeffField acc = coarse_to_fine[0];
  CoeffField next(h, w);
  const auto& k = kernels::active();
  for (std::size_t l = 1; l < coarse_to_fine.size(); ++l) {
    k.compose_affine(coarse_to_fine[l].values().data(), acc.values().data(),
                     next.values().data(), acc.pixel_count());
    std::swap(acc, next);
  }
  return acc;
}

ImageD apply_field(const CoeffField& field, const ImageD& img) {
  if (field.h() != img.height() || field.w() != img.width()) {
    throw std::invalid_argument("apply_field: field is " + std::to_string(field.h()) +
                                "x" + std::to_string(field.w()) + ", image is " +
                                std::to_string(img.height()) + "x" +
                                std::to_string(img.width()));
  }
  ImageD out(img.height(), img.width());
  kernels::active().apply_affine(field.values().data(), img.data().data(),
                                 out.data().data(), img.pixel_count());
  return out;
}

Image apply_field(const CoeffField& field, const Image& img) {
  return apply_field(field, img.cast<double>()).cast<float>();
}

InvertedField invert_field(const CoeffField& field, double cond_threshold) {
  InvertedField out{CoeffField(field.h(), field.w()),
                    std::vector<bool>(field.pixel_count(), false)};
  for (std::size_t p = 0; p < field.pixel_count(); ++p) {
    const double* a = field.pixel(p);
    const double m00 = a[0], m01 = a[1], m02 = a[2];
    const double m10 = a[4], m11 = a[5], m12 = a[6];
    const double m20 = a[8], m21 = a[9], m22 = a[10];
    const double c00 = m11 * m22 - m12 * m21;
    const double c01 = m12 * m20 - m10 * m22;
    const double c02 = m10 * m21 - m11 * m20;
    const double det = m00 * c00 + m01 * c01 + m02 * c02;
    if (!(std::abs(det) >= kMinAbsDeterminant)) continue;
    const double inv_det = 1.0 / det;
    double n[9] = {
        c00 * inv_det, (m02 * m21 - m01 * m22) * inv_det, (m01 * m12 - m02 * m11) * inv_det,
        c01 * inv_det, (m00 * m22 - m02 * m20) * inv_det, (m02 * m10 - m00 * m12) * inv_det,
        c02 * inv_det, (m01 * m20 - m00 * m21) * inv_det, (m00 * m11 - m01 * m10) * inv_det,
    };
    double norm_m = 0.0;
    double norm_n = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        norm_m += a[4 * r + c] * a[4 * r + c];
        norm_n += n[3 * r + c] * n[3 * r + c];
      }
    }
    if (!(std::sqrt(norm_m) * std::sqrt(norm_n) <= cond_threshold)) continue;
    double* o = out.field.pixel(p);
    for (int r = 0; r < 3; ++r) {
      double t = 0.0;
      for (int c = 0; c < 3; ++c) {
        o[4 * r + c] = n[3 * r + c];
        t -= n[3 * r + c] * a[4 * c + 3];
      }
      o[4 * r + 3] = t;
    }
    out.mask[p] = true;
  }
  return out;
}

CoeffField composite_field(const MultiScaleGrid& msg, const Image& img) {
  msg.validate();
  const GuidanceMap guidance = grayscale(img, msg.luma);
  std::vector<CoeffField> fields;
  fields.reserve(msg.levels.size());
  for (std::size_t l = 0; l < msg.levels.size(); ++l) {
    fields.push_back(level_field(msg.levels[l], guidance, msg.factors[l],
                                 img.height(), img.width()));
  }
  return compose_fields(fields);
}

Enhanced enhance(const MultiScaleGrid& msg, const Image& img) {
  Enhanced out;
  out.composite = composite_field(msg, img);
  out.image = apply_field(out.composite, img);
  return out;
}

}  // namespace msbg
