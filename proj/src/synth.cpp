// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "msbg/config.hpp"
#include "msbg/rng.hpp"

namespace msbg {

PerturbKind parse_perturb_kind(std::string_view s) {
  if (s == "identity") return PerturbKind::kIdentity;
  if (s == "global_affine") return PerturbKind::kGlobalAffine;
  if (s == "patch_affine") return PerturbKind::kPatchAffine;
  if (s == "tone_curve") return PerturbKind::kToneCurve;
  if (s == "mixed") return PerturbKind::kMixed;
  throw std::invalid_argument("unknown perturbation kind '" + std::string(s) + "'");
}

const char* perturb_kind_name(PerturbKind k) {
  switch (k) {
    case PerturbKind::kIdentity: return "identity";
    case PerturbKind::kGlobalAffine: return "global_affine";
    case PerturbKind::kPatchAffine: return "patch_affine";
    case PerturbKind::kToneCurve: return "tone_curve";
    case PerturbKind::kMixed: return "mixed";
  }
  return "?";
}

namespace {

AffineCoeffs draw_affine(Rng& rng, double strength) {
  AffineCoeffs a = AffineCoeffs::identity();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.m(r, c) += rng.uniform(-0.3, 0.3) * strength;
  }
  for (int r = 0; r < 3; ++r) a.t(r) = rng.uniform(-0.2, 0.2) * strength;
  return a;
}

std::array<double, 3> draw_gamma(Rng& rng, double strength) {
  const double hi = std::log1p(0.5 * strength);
  std::array<double, 3> g;
  for (double& v : g) v = std::exp(rng.uniform(-hi, hi));
  return g;
}

void draw_patches(Perturbation& p, Rng& rng, int h, int w) {
  p.patches_y = (h + p.block - 1) / p.block;
  p.patches_x = (w + p.block - 1) / p.block;
  p.patches.clear();
  for (int i = 0; i < p.patches_y * p.patches_x; ++i) {
    p.patches.push_back(draw_affine(rng, p.strength));
  }
}

// Up to two patches covering one axis coordinate, with blend weights.
struct AxisBlend {
  int b0 = 0;
  int b1 = 0;
  double w1 = 0.0;  // weight of b1
};

AxisBlend axis_blend(int pixel, int block, int patches) {
  const double center = pixel + 0.5;
  const int own = std::min(pixel / block, patches - 1);
  const double half = kSeamBlend / 2.0;
  AxisBlend b{own, own, 0.0};
  const double lower_seam = static_cast<double>(own) * block;
  const double upper_seam = static_cast<double>(own + 1) * block;
  if (own > 0 && center - lower_seam < half) {
    b.b0 = own - 1;
    b.b1 = own;
    b.w1 = (center - lower_seam + half) / kSeamBlend;
  } else if (own + 1 < patches && upper_seam - center < half) {
    b.b0 = own;
    b.b1 = own + 1;
    b.w1 = (center - upper_seam + half) / kSeamBlend;
  }
  return b;
}

Image apply_tone(const Image& img, const std::array<double, 3>& gamma) {
  Image out(img.height(), img.width());
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::max(0.0, static_cast<double>(img.pixel(p)[c]));
      out.pixel(p)[c] = static_cast<float>(std::pow(v, gamma[c]));
    }
  }
  return out;
}

Image apply_global(const Image& img, const AffineCoeffs& a) {
  CoeffField f(img.height(), img.width());
  f.fill(a);
  return apply_field(f, img);
}

}  // namespace

Perturbation Perturbation::draw(PerturbKind kind, std::uint64_t seed, int h, int w,
                                int block, double strength) {
  if (block < 1) throw std::invalid_argument("patch block size must be >= 1");
  if (!(strength >= 0.0)) throw std::invalid_argument("strength must be >= 0");
  Perturbation p;
  p.kind = kind;
  p.seed = seed;
  p.block = block;
  p.strength = strength;
  switch (kind) {
    case PerturbKind::kIdentity:
      break;
    case PerturbKind::kGlobalAffine: {
      Rng rng(seed);
      p.global = draw_affine(rng, strength);
      break;
    }
    case PerturbKind::kPatchAffine: {
      Rng rng(seed);
      draw_patches(p, rng, h, w);
      break;
    }
    case PerturbKind::kToneCurve: {
      Rng rng(seed);
      p.gamma = draw_gamma(rng, strength);
      break;
    }
    case PerturbKind::kMixed: {
      Rng g(sub_seed(seed, 0));
      Rng q(sub_seed(seed, 1));
      Rng t(sub_seed(seed, 2));
      p.global = draw_affine(g, strength);
      draw_patches(p, q, h, w);
      p.gamma = draw_gamma(t, strength);
      break;
    }
  }
  return p;
}

Image gen_base(std::uint64_t seed, int h, int w) {
  if (h < 16 || w < 16) throw std::invalid_argument("gen_base: dims must be >= 16");
  Rng rng(seed);
  constexpr double kTau = 2.0 * std::numbers::pi;

  // Shared luminance structure plus a weaker per-channel component.
  struct Wave {
    double fy, fx, phase, amp;
  };
  auto draw_waves = [&](int n, double fmin, double fmax) {
    std::vector<Wave> waves;
    for (int i = 0; i < n; ++i) {
      const double f = rng.uniform(fmin, fmax);
      const double angle = rng.uniform(0.0, kTau);
      waves.push_back({f * std::sin(angle), f * std::cos(angle), rng.uniform(0.0, kTau),
                       rng.uniform(0.5, 1.0) / (1.0 + f)});
    }
    return waves;
  };
  const double gy = rng.uniform(-1.0, 1.0);
  const double gx = rng.uniform(-1.0, 1.0);
  const auto low = draw_waves(3, 0.5, 2.0);
  const auto band = draw_waves(6, 3.0, 10.0);
  struct Disc {
    double cy, cx, r, level;
  };
  std::vector<Disc> discs;
  for (int i = 0; i < 5; ++i) {
    discs.push_back({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.06, 0.2),
                     rng.uniform() < 0.5 ? -1.0 : 1.0});
  }
  std::array<std::vector<Wave>, 3> tint;
  for (auto& t : tint) t = draw_waves(2, 0.5, 4.0);

  std::vector<double> lum(static_cast<std::size_t>(h) * w);
  std::array<std::vector<double>, 3> chroma;
  for (auto& c : chroma) c.resize(lum.size());
  for (int y = 0; y < h; ++y) {
    const double v = (y + 0.5) / h;
    for (int x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w;
      double s = gy * v + gx * u;
      for (const auto& wv : low) s += wv.amp * std::sin(kTau * (wv.fy * v + wv.fx * u) + wv.phase);
      for (const auto& wv : band) {
        s += 0.5 * wv.amp * std::sin(kTau * (wv.fy * v + wv.fx * u) + wv.phase);
      }
      for (const auto& d : discs) {
        const double dist = std::hypot(v - d.cy, u - d.cx);
        if (dist < d.r) s += 0.8 * d.level;
      }
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      lum[i] = s;
      for (int c = 0; c < 3; ++c) {
        double t = 0.0;
        for (const auto& wv : tint[c]) {
          t += wv.amp * std::sin(kTau * (wv.fy * v + wv.fx * u) + wv.phase);
        }
        chroma[c][i] = t;
      }
    }
  }
  // Min/max stretch so the luminance spans the whole range.
  const auto [lmin, lmax] = std::minmax_element(lum.begin(), lum.end());
  const double lo = *lmin;
  const double span = std::max(1e-12, *lmax - lo);
  Image img(h, w);
  for (std::size_t i = 0; i < lum.size(); ++i) {
    const double l = (lum[i] - lo) / span;
    for (int c = 0; c < 3; ++c) {
      const double val = 0.02 + 0.96 * l + 0.08 * chroma[c][i];
      img.pixel(i)[c] = static_cast<float>(std::clamp(val, 0.0, 1.0));
    }
  }
  return img;
}

CoeffField patch_field(const Perturbation& p, int h, int w) {
  CoeffField f(h, w);
  if (p.patches.empty()) return f;
  if (p.patches_y != (h + p.block - 1) / p.block ||
      p.patches_x != (w + p.block - 1) / p.block) {
    throw std::invalid_argument("perturbation was drawn for a different image size");
  }
  std::vector<AxisBlend> xs(w);
  for (int x = 0; x < w; ++x) xs[x] = axis_blend(x, p.block, p.patches_x);
  for (int y = 0; y < h; ++y) {
    const AxisBlend by = axis_blend(y, p.block, p.patches_y);
    for (int x = 0; x < w; ++x) {
      const AxisBlend& bx = xs[x];
      const int ys[2] = {by.b0, by.b1};
      const int xs2[2] = {bx.b0, bx.b1};
      const double wy[2] = {1.0 - by.w1, by.w1};
      const double wx[2] = {1.0 - bx.w1, bx.w1};
      double* out = f.at(y, x);
      std::fill(out, out + kCoeffs, 0.0);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double wt = wy[a] * wx[b];
          if (wt == 0.0) continue;
          const auto& c = p.patches[static_cast<std::size_t>(ys[a]) * p.patches_x + xs2[b]];
          for (int k = 0; k < kCoeffs; ++k) out[k] += wt * c.v[k];
        }
      }
    }
  }
  return f;
}

Image perturb(const Image& img, const Perturbation& p) {
  switch (p.kind) {
    case PerturbKind::kIdentity:
      return img;
    case PerturbKind::kGlobalAffine:
      return apply_global(img, p.global);
    case PerturbKind::kPatchAffine:
      return apply_field(patch_field(p, img.height(), img.width()), img);
    case PerturbKind::kToneCurve:
      return apply_tone(img, p.gamma);
    case PerturbKind::kMixed: {
      const Image toned = apply_tone(img, p.gamma);
      const Image patched = apply_field(patch_field(p, img.height(), img.width()), toned);
      return apply_global(patched, p.global);
    }
  }
  return img;
}

SynthPair make_pair(std::uint64_t seed, int h, int w, const Perturbation& p) {
  SynthPair out;
  out.img_r = gen_base(seed, h, w);
  out.img_gt = perturb(out.img_r, p);
  out.truth = p;
  return out;
}

AffineFit least_squares_affine(const Image& img_r, const Image& img_gt) {
  if (!img_r.same_shape(img_gt)) {
    throw std::invalid_argument("least_squares_affine: dimension mismatch");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(img_r.pixel_count());
  Eigen::MatrixXd x(n, 4);
  Eigen::MatrixXd y(n, 3);
  for (Eigen::Index p = 0; p < n; ++p) {
    const float* r = img_r.pixel(p);
    const float* g = img_gt.pixel(p);
    x.row(p) << r[0], r[1], r[2], 1.0;
    y.row(p) << g[0], g[1], g[2];
  }
  const Eigen::MatrixXd sol = x.colPivHouseholderQr().solve(y);  // 4 x 3
  AffineFit fit;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) fit.coeffs.v[4 * r + c] = sol(c, r);
  }
  fit.fitted = apply_global(img_r, fit.coeffs);
  const Eigen::MatrixXd resid = x * sol - y;
  fit.mse = resid.squaredNorm() / static_cast<double>(resid.size());
  return fit;
}

namespace {

std::string join_numbers(const double* v, int n) {
  std::string out;
  char buf[40];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    if (i) out += ',';
    out += buf;
  }
  return out;
}

}  // namespace

std::string perturbation_to_text(const Perturbation& p) {
  std::ostringstream os;
  os << "kind = " << perturb_kind_name(p.kind) << "\n";
  os << "seed = " << p.seed << "\n";
  os << "block = " << p.block << "\n";
  os << "strength = " << join_numbers(&p.strength, 1) << "\n";
  os << "global = " << join_numbers(p.global.v.data(), kCoeffs) << "\n";
  os << "gamma = " << join_numbers(p.gamma.data(), 3) << "\n";
  os << "patches_y = " << p.patches_y << "\n";
  os << "patches_x = " << p.patches_x << "\n";
  for (std::size_t i = 0; i < p.patches.size(); ++i) {
    os << "patch." << i << " = " << join_numbers(p.patches[i].v.data(), kCoeffs) << "\n";
  }
  return os.str();
}

Perturbation perturbation_from_text(std::string_view text) {
  Perturbation p;
  std::vector<AffineCoeffs> patches;
  std::vector<bool> seen;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "kind") {
      p.kind = parse_perturb_kind(value);
    } else if (key == "seed") {
      p.seed = std::stoull(value);
    } else if (key == "block") {
      p.block = std::stoi(value);
    } else if (key == "strength") {
      p.strength = std::stod(value);
    } else if (key == "global") {
      const auto v = parse_doubles(value, kCoeffs, key);
      std::copy(v.begin(), v.end(), p.global.v.begin());
    } else if (key == "gamma") {
      const auto v = parse_doubles(value, 3, key);
      std::copy(v.begin(), v.end(), p.gamma.begin());
    } else if (key == "patches_y") {
      p.patches_y = std::stoi(value);
    } else if (key == "patches_x") {
      p.patches_x = std::stoi(value);
    } else if (key.rfind("patch.", 0) == 0) {
      const std::size_t idx = std::stoul(key.substr(6));
      if (idx >= patches.size()) {
        patches.resize(idx + 1);
        seen.resize(idx + 1, false);
      }
      const auto v = parse_doubles(value, kCoeffs, key);
      std::copy(v.begin(), v.end(), patches[idx].v.begin());
      seen[idx] = true;
    } else {
      throw std::invalid_argument("unknown perturbation key '" + key + "'");
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end() ||
      patches.size() != static_cast<std::size_t>(p.patches_y) * p.patches_x) {
    throw std::invalid_argument("perturbation sidecar has an incomplete patch list");
  }
  p.patches = std::move(patches);
  return p;
}

}  // namespace msbg
