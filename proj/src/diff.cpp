// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/diff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "msbg/kernels.hpp"
#include "msbg/rng.hpp"
#include "msbg/synth.hpp"
#include "ssim_core.hpp"

namespace msbg {

ParamVector pack(const MultiScaleGrid& msg) {
  ParamVector out;
  out.reserve(msg.param_count());
  for (const auto& g : msg.levels) {
    out.insert(out.end(), g.values().begin(), g.values().end());
  }
  return out;
}

void unpack(std::span<const double> params, MultiScaleGrid& msg) {
  if (params.size() != msg.param_count()) {
    throw std::invalid_argument("unpack: expected " + std::to_string(msg.param_count()) +
                                " values, got " + std::to_string(params.size()));
  }
  std::size_t off = 0;
  for (auto& g : msg.levels) {
    auto dst = g.values();
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), dst.size(),
                dst.begin());
    off += dst.size();
  }
}

const char* term_name(LossTerm t) {
  switch (t) {
    case LossTerm::kL1: return "l1";
    case LossTerm::kSsim: return "ssim";
    case LossTerm::kTv: return "tv";
    case LossTerm::kCircle: return "circle";
  }
  return "?";
}

double term_value(const LossTerms& terms, LossTerm t) {
  switch (t) {
    case LossTerm::kL1: return terms.recon_l1;
    case LossTerm::kSsim: return terms.recon_ssim;
    case LossTerm::kTv: return terms.tv;
    case LossTerm::kCircle: return terms.circle;
  }
  return 0.0;
}

namespace {

// Forward intermediates needed by the backward pass.
struct Tape {
  int h = 0;
  int w = 0;
  std::vector<GuidanceMap> guidance;  // per level, after downsampling
  std::vector<CoeffField> level;      // per level, upsampled to image size
  std::vector<CoeffField> prefix;     // prefix[l] = level[l] o ... o level[0]
};

Tape forward(const MultiScaleGrid& msg, const Image& img_r) {
  Tape tape;
  tape.h = img_r.height();
  tape.w = img_r.width();
  const GuidanceMap full = grayscale(img_r, msg.luma);
  const auto& k = kernels::active();
  for (std::size_t l = 0; l < msg.levels.size(); ++l) {
    tape.guidance.push_back(downsample_area(full, msg.factors[l].fh, msg.factors[l].fw));
    tape.level.push_back(
        upsample_bilinear(slice(msg.levels[l], tape.guidance.back()), tape.h, tape.w));
    if (l == 0) {
      tape.prefix.push_back(tape.level.back());
    } else {
      CoeffField next(tape.h, tape.w);
      k.compose_affine(tape.level[l].values().data(), tape.prefix[l - 1].values().data(),
                       next.values().data(), next.pixel_count());
      tape.prefix.push_back(std::move(next));
    }
  }
  return tape;
}

// Adds d/dA contributions of an image-space gradient: e = M x + T.
void accumulate_apply_grad(const ImageD& grad_e, const ImageD& x, CoeffField& g_a) {
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    const double* ge = grad_e.pixel(p);
    const double* px = x.pixel(p);
    double* g = g_a.pixel(p);
    for (int i = 0; i < 3; ++i) {
      g[4 * i + 0] += ge[i] * px[0];
      g[4 * i + 1] += ge[i] * px[1];
      g[4 * i + 2] += ge[i] * px[2];
      g[4 * i + 3] += ge[i];
    }
  }
}

void backprop_upsample(const CoeffField& g_full, CoeffField& g_low) {
  if (g_full.h() == g_low.h() && g_full.w() == g_low.w()) {
    auto dst = g_low.values();
    auto src = g_full.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    return;
  }
  std::vector<AxisSample> xs(g_full.w());
  for (int x = 0; x < g_full.w(); ++x) {
    xs[x] = axis_sample(lattice_coord(x, g_full.w(), g_low.w()), g_low.w());
  }
  for (int y = 0; y < g_full.h(); ++y) {
    const AxisSample sy =
        axis_sample(lattice_coord(y, g_full.h(), g_low.h()), g_low.h());
    for (int x = 0; x < g_full.w(); ++x) {
      const AxisSample& sx = xs[x];
      const double* src = g_full.at(y, x);
      const double w[4] = {(1.0 - sy.f) * (1.0 - sx.f), (1.0 - sy.f) * sx.f,
                           sy.f * (1.0 - sx.f), sy.f * sx.f};
      double* dst[4] = {g_low.at(sy.i0, sx.i0), g_low.at(sy.i0, sx.i1),
                        g_low.at(sy.i1, sx.i0), g_low.at(sy.i1, sx.i1)};
      for (int c = 0; c < 4; ++c) {
        for (int ch = 0; ch < kCoeffs; ++ch) dst[c][ch] += w[c] * src[ch];
      }
    }
  }
}

void backprop_slice(const BilateralGrid& grid, const GuidanceMap& g,
                    const CoeffField& g_field, double* g_cells) {
  std::vector<AxisSample> xs(g.width());
  for (int x = 0; x < g.width(); ++x) {
    xs[x] = axis_sample(lattice_coord(x, g.width(), grid.w()), grid.w());
  }
  const double z_scale = grid.d() - 1;
  for (int y = 0; y < g.height(); ++y) {
    const AxisSample sy = axis_sample(lattice_coord(y, g.height(), grid.h()), grid.h());
    for (int x = 0; x < g.width(); ++x) {
      const AxisSample& sx = xs[x];
      const AxisSample sz = axis_sample(std::clamp(g.at(y, x), 0.0, 1.0) * z_scale, grid.d());
      const int is[2] = {sy.i0, sy.i1};
      const int js[2] = {sx.i0, sx.i1};
      const int ks[2] = {sz.i0, sz.i1};
      const double wy[2] = {1.0 - sy.f, sy.f};
      const double wx[2] = {1.0 - sx.f, sx.f};
      const double wz[2] = {1.0 - sz.f, sz.f};
      const double* src = g_field.at(y, x);
      for (int c = 0; c < 8; ++c) {
        const int dy = c >> 2, dx = (c >> 1) & 1, dz = c & 1;
        const double wt = wy[dy] * wx[dx] * wz[dz];
        double* dst = g_cells + grid.index(is[dy], js[dx], ks[dz]) * kCoeffs;
        for (int ch = 0; ch < kCoeffs; ++ch) dst[ch] += wt * src[ch];
      }
    }
  }
}

// Pulls a gradient on the composite field back to every grid coefficient.
GradVector backprop_composite(const MultiScaleGrid& msg, const Tape& tape,
                              CoeffField g_comp) {
  GradVector grad(msg.param_count(), 0.0);
  const std::size_t n = g_comp.pixel_count();
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& g : msg.levels) {
    offsets.push_back(off);
    off += g.values().size();
  }
  CoeffField g_level(tape.h, tape.w);
  for (std::size_t l = msg.levels.size(); l-- > 0;) {
    // g_comp holds d/d prefix[l].
    if (l == 0) {
      g_level = g_comp;
    } else {
      const CoeffField& inner = tape.prefix[l - 1];
      const CoeffField& outer = tape.level[l];
      for (std::size_t p = 0; p < n; ++p) {
        const double* gc = g_comp.pixel(p);
        const double* c = inner.pixel(p);
        const double* f = outer.pixel(p);
        double* gf = g_level.pixel(p);
        double gi[12];
        for (int i = 0; i < 3; ++i) {
          for (int col = 0; col < 3; ++col) {
            gf[4 * i + col] = gc[4 * i] * c[4 * col] + gc[4 * i + 1] * c[4 * col + 1] +
                              gc[4 * i + 2] * c[4 * col + 2] + gc[4 * i + 3] * c[4 * col + 3];
          }
          gf[4 * i + 3] = gc[4 * i + 3];
        }
        for (int r = 0; r < 3; ++r) {
          for (int col = 0; col < 4; ++col) {
            gi[4 * r + col] = f[r] * gc[col] + f[4 + r] * gc[4 + col] +
                              f[8 + r] * gc[8 + col];
          }
        }
        std::copy(gi, gi + 12, g_comp.pixel(p));
      }
    }
    const GuidanceMap& guide = tape.guidance[l];
    CoeffField g_low(guide.height(), guide.width());
    std::fill(g_low.values().begin(), g_low.values().end(), 0.0);
    backprop_upsample(g_level, g_low);
    backprop_slice(msg.levels[l], guide, g_low, grad.data() + offsets[l]);
  }
  return grad;
}

void tv_grad(const MultiScaleGrid& msg, double tv_a, double tv_b, double scale,
             GradVector& grad) {
  std::size_t off = 0;
  for (const auto& g : msg.levels) {
    const double coef = scale * tv_level_weight(g, tv_a, tv_b) /
                        static_cast<double>(g.cell_count());
    double* out = grad.data() + off;
    auto edge = [&](std::size_t a, std::size_t b) {
      const double* ca = g.cell(a);
      const double* cb = g.cell(b);
      for (int ch = 0; ch < kCoeffs; ++ch) {
        const double d = 2.0 * coef * (cb[ch] - ca[ch]);
        out[b * kCoeffs + ch] += d;
        out[a * kCoeffs + ch] -= d;
      }
    };
    for (int i = 0; i < g.h(); ++i) {
      for (int j = 0; j < g.w(); ++j) {
        for (int k = 0; k < g.d(); ++k) {
          const std::size_t c = g.index(i, j, k);
          if (i + 1 < g.h()) edge(c, g.index(i + 1, j, k));
          if (j + 1 < g.w()) edge(c, g.index(i, j + 1, k));
          if (k + 1 < g.d()) edge(c, g.index(i, j, k + 1));
        }
      }
    }
    off += g.values().size();
  }
}

// Circle term value (unweighted) and its gradient on the composite, scaled.
double circle_forward_backward(const CoeffField& comp, const ImageD& x,
                               const ImageD& y, double cond_threshold,
                               double scale, CoeffField* g_comp) {
  const InvertedField inv = invert_field(comp, cond_threshold);
  const ImageD recovered = apply_field(inv.field, y);
  std::size_t count = 0;
  double sum = 0.0;
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    if (!inv.mask[p]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = x.pixel(p)[c] - recovered.pixel(p)[c];
      sum += d * d;
    }
    ++count;
  }
  if (count == 0) return 0.0;
  const double value = sum / static_cast<double>(count);
  if (g_comp == nullptr) return value;
  const double norm = scale * 2.0 / static_cast<double>(count);
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    if (!inv.mask[p]) continue;
    const double* nm = inv.field.pixel(p);  // rows of N = M^-1
    const double* xh = recovered.pixel(p);
    double gx[3];
    for (int c = 0; c < 3; ++c) gx[c] = -norm * (x.pixel(p)[c] - xh[c]);
    // q = N^T gx;  dL/dM = -q xh^T;  dL/dT = -q.
    double* g = g_comp->pixel(p);
    for (int r = 0; r < 3; ++r) {
      const double q = nm[r] * gx[0] + nm[4 + r] * gx[1] + nm[8 + r] * gx[2];
      g[4 * r + 0] -= q * xh[0];
      g[4 * r + 1] -= q * xh[1];
      g[4 * r + 2] -= q * xh[2];
      g[4 * r + 3] -= q;
    }
  }
  return value;
}

CoeffField zero_field(int h, int w) {
  CoeffField f(h, w);
  std::fill(f.values().begin(), f.values().end(), 0.0);
  return f;
}

}  // namespace

LossGrad loss_and_grad(const MultiScaleGrid& msg, const Image& img_r,
                       const Image& img_gt, const LossConfig& cfg,
                       bool want_term_grads) {
  cfg.validate();
  msg.validate();
  if (!img_r.same_shape(img_gt)) {
    throw std::invalid_argument("loss_and_grad: dimension mismatch");
  }
  const Tape tape = forward(msg, img_r);
  const CoeffField& comp = tape.prefix.back();
  const ImageD x = img_r.cast<double>();
  const ImageD gt = img_gt.cast<double>();
  const ImageD e = apply_field(comp, x);
  const int h = tape.h;
  const int w = tape.w;

  LossGrad out;
  std::array<CoeffField, 4> g_terms;

  {  // L1
    CoeffField g = zero_field(h, w);
    ImageD ge(h, w);
    const auto ev = e.data();
    const auto gv = gt.data();
    auto gev = ge.data();
    double l1 = 0.0;
    const double scale = cfg.lambda_r / static_cast<double>(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const double d = ev[i] - gv[i];
      l1 += std::abs(d);
      gev[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
    }
    out.loss.terms.recon_l1 = l1 / static_cast<double>(ev.size()) * cfg.lambda_r;
    if (cfg.lambda_r != 0.0) accumulate_apply_grad(ge, x, g);
    g_terms[0] = std::move(g);
  }
  {  // SSIM
    CoeffField g = zero_field(h, w);
    if (cfg.lambda_r < 1.0) {
      ImageD ds;
      const double s = detail::ssim_with_grad(e, gt, cfg.ssim, &ds);
      const double weight = 1.0 - cfg.lambda_r;
      out.loss.terms.recon_ssim = weight * (1.0 - s);
      for (double& v : ds.data()) v *= -weight;
      accumulate_apply_grad(ds, x, g);
    }
    g_terms[1] = std::move(g);
  }
  {  // circle
    CoeffField g = zero_field(h, w);
    if (cfg.lambda_circle > 0.0) {
      out.loss.terms.circle =
          cfg.lambda_circle *
          circle_forward_backward(comp, x, gt, cfg.cond_threshold, cfg.lambda_circle, &g);
    }
    g_terms[3] = std::move(g);
  }
  out.loss.terms.tv = cfg.lambda_tv * tv_loss(msg, cfg.tv_a, cfg.tv_b);
  out.loss.total = out.loss.terms.total();

  GradVector tv(msg.param_count(), 0.0);
  if (cfg.lambda_tv != 0.0) tv_grad(msg, cfg.tv_a, cfg.tv_b, cfg.lambda_tv, tv);

  if (want_term_grads) {
    for (int t : {0, 1, 3}) {
      out.term_grads[t] = backprop_composite(msg, tape, g_terms[t]);
    }
    out.term_grads[2] = tv;
    out.grad.assign(msg.param_count(), 0.0);
    for (const auto& tg : out.term_grads) {
      for (std::size_t i = 0; i < tg.size(); ++i) out.grad[i] += tg[i];
    }
  } else {
    CoeffField sum = std::move(g_terms[0]);
    for (int t : {1, 3}) {
      auto dst = sum.values();
      auto src = g_terms[t].values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    out.grad = backprop_composite(msg, tape, std::move(sum));
    for (std::size_t i = 0; i < tv.size(); ++i) out.grad[i] += tv[i];
  }
  return out;
}

GradVector finite_diff_grad(const ScalarFn& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  GradVector grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradVector finite_diff_grad(const MultiScaleGrid& msg, const Image& img_r,
                            const Image& img_gt, const LossConfig& cfg, double h,
                            std::optional<LossTerm> term) {
  MultiScaleGrid work = msg;
  const ScalarFn f = [&](std::span<const double> params) {
    unpack(params, work);
    const LossBreakdown b = total_loss(work, img_r, img_gt, cfg);
    return term ? term_value(b.terms, *term) : b.total;
  };
  const ParamVector x = pack(msg);
  return finite_diff_grad(f, x, h);
}

GradComparison compare_gradients(std::span<const double> analytic,
                                 std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw std::invalid_argument("compare_gradients: length mismatch");
  }
  GradComparison out;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i];
    const double f = numeric[i];
    const double rel = std::abs(a - f) / std::max(1e-6, std::abs(a) + std::abs(f));
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = i;
    }
  }
  return out;
}

GradcheckCase make_gradcheck_case(const std::vector<GridShape>& shapes, int size,
                                  std::uint64_t seed) {
  if (size < 8) throw std::invalid_argument("gradcheck image size must be >= 8");
  const std::vector<GuidanceFactors> factors(
      shapes.size(), shapes.size() == 1 ? GuidanceFactors{1, 1} : GuidanceFactors{2, 2});
  GradcheckCase c;
  c.grid = MultiScaleGrid::identity(shapes, factors);
  Rng rng(sub_seed(seed, 0));
  for (auto& level : c.grid.levels) {
    for (double& v : level.values()) v += rng.uniform(-0.1, 0.1);
  }
  const Image base = gen_base(sub_seed(seed, 1), 2 * size, 2 * size);
  c.img_r = Image(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int ch = 0; ch < 3; ++ch) c.img_r.at(y, x, ch) = base.at(2 * y, 2 * x, ch);
    }
  }
  c.img_gt = enhance(c.grid, c.img_r).image;
  for (float& v : c.img_gt.data()) {
    const double offset = rng.uniform(0.02, 0.2);
    v = static_cast<float>(v + (rng.coin() ? offset : -offset));
  }
  return c;
}

std::vector<GradcheckEntry> check_gradients(const GradcheckCase& c, const LossConfig& cfg,
                                            double step) {
  const LossGrad lg = loss_and_grad(c.grid, c.img_r, c.img_gt, cfg, true);
  std::vector<GradcheckEntry> out;
  for (LossTerm t : kAllTerms) {
    const GradVector fd = finite_diff_grad(c.grid, c.img_r, c.img_gt, cfg, step, t);
    out.push_back({t, compare_gradients(lg.term_grads[static_cast<int>(t)], fd)});
  }
  const GradVector fd = finite_diff_grad(c.grid, c.img_r, c.img_gt, cfg, step);
  out.push_back({std::nullopt, compare_gradients(lg.grad, fd)});
  return out;
}

}  // namespace msbg
