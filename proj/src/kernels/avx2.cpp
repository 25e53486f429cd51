// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

// AVX2 variants. Each mirrors the association order of its scalar twin in
// scalar.cpp; keep the two in sync.

#include <immintrin.h>

#include <cmath>

#include "table.hpp"

namespace msbg::kernels::detail {
namespace {

inline __m256d lerp4(__m256d a, __m256d b, __m256d f) {
  return _mm256_add_pd(a, _mm256_mul_pd(f, _mm256_sub_pd(b, a)));
}

void trilerp12(const double* const* c, double fy, double fx, double fz,
               double* out) {
  const __m256d vy = _mm256_set1_pd(fy);
  const __m256d vx = _mm256_set1_pd(fx);
  const __m256d vz = _mm256_set1_pd(fz);
  for (int off = 0; off < 12; off += 4) {
    const __m256d z00 = lerp4(_mm256_loadu_pd(c[0] + off), _mm256_loadu_pd(c[1] + off), vz);
    const __m256d z01 = lerp4(_mm256_loadu_pd(c[2] + off), _mm256_loadu_pd(c[3] + off), vz);
    const __m256d z10 = lerp4(_mm256_loadu_pd(c[4] + off), _mm256_loadu_pd(c[5] + off), vz);
    const __m256d z11 = lerp4(_mm256_loadu_pd(c[6] + off), _mm256_loadu_pd(c[7] + off), vz);
    const __m256d x0 = lerp4(z00, z01, vx);
    const __m256d x1 = lerp4(z10, z11, vx);
    _mm256_storeu_pd(out + off, lerp4(x0, x1, vy));
  }
}

void bilerp12(const double* const* c, double fy, double fx, double* out) {
  const __m256d vy = _mm256_set1_pd(fy);
  const __m256d vx = _mm256_set1_pd(fx);
  for (int off = 0; off < 12; off += 4) {
    const __m256d x0 = lerp4(_mm256_loadu_pd(c[0] + off), _mm256_loadu_pd(c[1] + off), vx);
    const __m256d x1 = lerp4(_mm256_loadu_pd(c[2] + off), _mm256_loadu_pd(c[3] + off), vx);
    _mm256_storeu_pd(out + off, lerp4(x0, x1, vy));
  }
}

void apply_affine(const double* coeffs, const double* rgb, double* out,
                  std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  alignas(32) double tmp[4];
  for (std::size_t p = 0; p < n; ++p) {
    const double* a = coeffs + 12 * p;
    const double* px = rgb + 3 * p;
    const __m256d x = _mm256_set_pd(1.0, px[2], px[1], px[0]);
    const __m256d v0 = _mm256_mul_pd(_mm256_loadu_pd(a), x);
    const __m256d v1 = _mm256_mul_pd(_mm256_loadu_pd(a + 4), x);
    const __m256d v2 = _mm256_mul_pd(_mm256_loadu_pd(a + 8), x);
    // Lanes become (m0*r + m1*g) and (m2*b + t) per row, then their sum.
    const __m256d h01 = _mm256_hadd_pd(v0, v1);
    const __m256d h23 = _mm256_hadd_pd(v2, zero);
    const __m256d lo = _mm256_permute2f128_pd(h01, h23, 0x20);
    const __m256d hi = _mm256_permute2f128_pd(h01, h23, 0x31);
    _mm256_store_pd(tmp, _mm256_add_pd(lo, hi));
    out[3 * p] = tmp[0];
    out[3 * p + 1] = tmp[1];
    out[3 * p + 2] = tmp[2];
  }
}

void compose_affine(const double* outer, const double* inner, double* out,
                    std::size_t n) {
  for (std::size_t p = 0; p < n; ++p) {
    const double* f = outer + 12 * p;
    const double* c = inner + 12 * p;
    double* o = out + 12 * p;
    const __m256d c0 = _mm256_loadu_pd(c);
    const __m256d c1 = _mm256_loadu_pd(c + 4);
    const __m256d c2 = _mm256_loadu_pd(c + 8);
    for (int row = 0; row < 3; ++row) {
      const double* fr = f + 4 * row;
      __m256d acc = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(fr[0]), c0),
                                  _mm256_mul_pd(_mm256_set1_pd(fr[1]), c1));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(fr[2]), c2));
      acc = _mm256_add_pd(acc, _mm256_set_pd(fr[3], 0.0, 0.0, 0.0));
      _mm256_storeu_pd(o + 4 * row, acc);
    }
  }
}

void correlate_rows(const double* in, int h, int w, const double* taps,
                    int ntaps, double* out) {
  const int ow = w - ntaps + 1;
  for (int y = 0; y < h; ++y) {
    const double* src = in + static_cast<std::size_t>(y) * w;
    double* dst = out + static_cast<std::size_t>(y) * ow;
    int x = 0;
    for (; x + 4 <= ow; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int k = 0; k < ntaps; ++k) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[k]),
                                               _mm256_loadu_pd(src + x + k)));
      }
      _mm256_storeu_pd(dst + x, acc);
    }
    for (; x < ow; ++x) {
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
    int x = 0;
    for (; x + 4 <= w; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int k = 0; k < ntaps; ++k) {
        const double* src = in + static_cast<std::size_t>(y + k) * w + x;
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(taps[k]),
                                               _mm256_loadu_pd(src)));
      }
      _mm256_storeu_pd(dst + x, acc);
    }
    for (; x < w; ++x) {
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
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d nb1 = _mm256_set1_pd(one_minus_b1);
  const __m256d nb2 = _mm256_set1_pd(one_minus_b2);
  const __m256d c1 = _mm256_set1_pd(bias1);
  const __m256d c2 = _mm256_set1_pd(bias2);
  const __m256d ve = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(nb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(nb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, c1);
    const __m256d v_hat = _mm256_div_pd(vi, c2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(_mm256_loadu_pd(lr + i), m_hat),
                      _mm256_add_pd(_mm256_sqrt_pd(v_hat), ve));
    _mm256_storeu_pd(params + i, _mm256_sub_pd(_mm256_loadu_pd(params + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + one_minus_b1 * g;
    v[i] = beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] = params[i] - lr[i] * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{
      "avx2",         trilerp12,      bilerp12,       apply_affine,
      compose_affine, correlate_rows, correlate_cols, adam_update,
  };
  return table;
}

}  // namespace msbg::kernels::detail
