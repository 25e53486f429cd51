// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include "table.hpp"

namespace msbg::kernels {
namespace {

inline double lerp(double a, double b, double f) { return a + f * (b - a); }

void trilerp12(const double* const* c, double fy, double fx, double fz,
               double* out) {
  for (int ch = 0; ch < 12; ++ch) {
    const double z00 = lerp(c[0][ch], c[1][ch], fz);
    const double z01 = lerp(c[2][ch], c[3][ch], fz);
    const double z10 = lerp(c[4][ch], c[5][ch], fz);
    const double z11 = lerp(c[6][ch], c[7][ch], fz);
    const double x0 = lerp(z00, z01, fx);
    const double x1 = lerp(z10, z11, fx);
    out[ch] = lerp(x0, x1, fy);
  }
}

void bilerp12(const double* const* c, double fy, double fx, double* out) {
  for (int ch = 0; ch < 12; ++ch) {
    const double x0 = lerp(c[0][ch], c[1][ch], fx);
    const double x1 = lerp(c[2][ch], c[3][ch], fx);
    out[ch] = lerp(x0, x1, fy);
  }
}

void apply_affine(const double* coeffs, const double* rgb, double* out,
                  std::size_t n) {
  for (std::size_t p = 0; p < n; ++p) {
    const double* a = coeffs + 12 * p;
    const double r = rgb[3 * p];
    const double g = rgb[3 * p + 1];
    const double b = rgb[3 * p + 2];
    for (int row = 0; row < 3; ++row) {
      const double* m = a + 4 * row;
      out[3 * p + row] = (m[0] * r + m[1] * g) + (m[2] * b + m[3]);
    }
  }
}

void compose_affine(const double* outer, const double* inner, double* out,
                    std::size_t n) {
  for (std::size_t p = 0; p < n; ++p) {
    const double* f = outer + 12 * p;
    const double* c = inner + 12 * p;
    double* o = out + 12 * p;
    for (int row = 0; row < 3; ++row) {
      const double* fr = f + 4 * row;
      for (int col = 0; col < 4; ++col) {
        const double tail = col == 3 ? fr[3] : 0.0;
        o[4 * row + col] =
            ((fr[0] * c[col] + fr[1] * c[4 + col]) + fr[2] * c[8 + col]) + tail;
      }
    }
  }
}

void correlate_rows(const double* in, int h, int w, const double* taps,
                    int ntaps, double* out) {
  const int ow = w - ntaps + 1;
  for (int y = 0; y < h; ++y) {
    const double* src = in + static_cast<std::size_t>(y) * w;
    double* dst = out + static_cast<std::size_t>(y) * ow;
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < ntaps; ++k) acc += taps[k] * src[x + k];
      dst[x] = acc;
    }
  }
}

void correlate_cols(const double* in, int h, int w, const double* taps,
                    int ntaps, double* out) {
  const int oh = h - ntaps + 1;
  for (int y = 0; y < oh; ++y) {
    double* dst = out + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < ntaps; ++k) {
        acc += taps[k] * in[static_cast<std::size_t>(y + k) * w + x];
      }
      dst[x] = acc;
    }
  }
}

void adam_update(double* params, const double* grad, double* m, double* v,
                 const double* lr, double beta1, double beta2, double bias1,
                 double bias2, double eps, std::size_t n) {
  const double one_minus_b1 = 1.0 - beta1;
  const double one_minus_b2 = 1.0 - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + one_minus_b1 * g;
    v[i] = beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] = params[i] - lr[i] * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{
      "scalar",       trilerp12,      bilerp12,    apply_affine,
      compose_affine, correlate_rows, correlate_cols, adam_update,
  };
  return table;
}

}  // namespace msbg::kernels
