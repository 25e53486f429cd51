// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops of the pipeline. Every table entry exists in a
// scalar reference form and, where the build and CPU allow, an AVX2 form.
// Both forms evaluate the same expression trees in the same order without
// FMA, so their results are bit-identical; tests check exact equality.

namespace msbg::kernels {

struct KernelTable {
  const char* name;

  // out[0..12) = trilinear blend of the 8 corner cells c[dy*4 + dx*2 + dz]
  // as nested lerps (z, then x, then y). Constant inputs pass through exactly.
  void (*trilerp12)(const double* const* c, double fy, double fx, double fz,
                    double* out);

  // out[0..12) = bilinear blend of c[dy*2 + dx], x then y.
  void (*bilerp12)(const double* const* c, double fy, double fx, double* out);

  // Per pixel p: out_rgb[p] = A[p] * rgb[p]. coeffs has 12 doubles per pixel.
  void (*apply_affine)(const double* coeffs, const double* rgb, double* out,
                       std::size_t n);

  // Per pixel p: out[p] = outer[p] o inner[p]  (inner applied first).
  void (*compose_affine)(const double* outer, const double* inner, double* out,
                         std::size_t n);

  // Valid correlation along rows: out[y*ow + x] = sum_k taps[k]*in[y*w + x+k],
  // ow = w - ntaps + 1.
  void (*correlate_rows)(const double* in, int h, int w, const double* taps,
                         int ntaps, double* out);

  // Valid correlation along columns: oh = h - ntaps + 1.
  void (*correlate_cols)(const double* in, int h, int w, const double* taps,
                         int ntaps, double* out);

  // Bias-corrected Adam update over n parameters with per-parameter rates.
  void (*adam_update)(double* params, const double* grad, double* m, double* v,
                      const double* lr, double beta1, double beta2,
                      double bias1, double bias2, double eps, std::size_t n);
};

const KernelTable& scalar();

// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2();

// Selected once: AVX2 when available unless MSBG_KERNELS=scalar is set.
const KernelTable& active();

// Force a variant by name ("scalar" or "avx2"); returns false if unavailable.
bool select(std::string_view name);

}  // namespace msbg::kernels
