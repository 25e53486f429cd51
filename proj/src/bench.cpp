// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "msbg/optim.hpp"

namespace msbg {

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool fit_order(const BenchFit& a, const BenchFit& b) {
  return std::make_tuple(a.mode, std::string(perturb_kind_name(a.kind)), a.seed) <
         std::make_tuple(b.mode, std::string(perturb_kind_name(b.kind)), b.seed);
}

}  // namespace

BenchPlan BenchPlan::from(const Config& cfg) {
  BenchPlan plan;
  plan.modes = cfg.get_list("bench_modes");
  for (const auto& m : plan.modes) {
    if (m != kOracleMode) parse_grid_mode(m);
  }
  for (const auto& k : cfg.get_list("bench_kinds")) {
    plan.kinds.push_back(parse_perturb_kind(k));
  }
  const int pairs = cfg.get_int("bench_pairs");
  if (pairs < 1) throw ConfigError("bench_pairs must be >= 1");
  const std::uint64_t seed = cfg.get_u64("seed");
  for (int i = 0; i < pairs; ++i) plan.seeds.push_back(seed + static_cast<std::uint64_t>(i));
  plan.size = cfg.get_int("bench_size");
  if (plan.size < 16) throw ConfigError("bench_size must be >= 16");
  if (plan.modes.empty() || plan.kinds.empty()) {
    throw ConfigError("bench needs at least one mode and one perturbation kind");
  }
  return plan;
}

BenchFit bench_one(const Config& cfg, const std::string& mode, PerturbKind kind,
                   std::uint64_t seed, int size) {
  const Perturbation p = Perturbation::draw(kind, seed, size, size, cfg.get_int("block"),
                                            cfg.get_double("strength"));
  const SynthPair pair = make_pair(seed, size, size, p);

  BenchFit out;
  out.mode = mode;
  out.kind = kind;
  out.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  MultiScaleGrid grid;
  LossConfig loss;
  if (mode == kOracleMode) {
    // The closed-form fit is a 1x1x1 appearance-code grid.
    const RunConfig rc = RunConfig::from(cfg, GridMode::kAc);
    grid = rc.identity_pyramid();
    grid.levels[0].set(0, 0, 0, least_squares_affine(pair.img_r, pair.img_gt).coeffs);
    loss = rc.fit.loss;
  } else {
    const RunConfig rc = RunConfig::from(cfg, parse_grid_mode(mode));
    grid = fit(rc.identity_pyramid(), pair.img_r, pair.img_gt, rc.fit).grid;
    loss = rc.fit.loss;
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  const Image enhanced = enhance(grid, pair.img_r).image;
  out.psnr_db = psnr(enhanced, pair.img_gt);
  out.ssim = ssim(enhanced, pair.img_gt);
  out.l1 = mean_abs_error(enhanced, pair.img_gt);
  out.final_loss = total_loss(grid, pair.img_r, pair.img_gt, loss);
  return out;
}

std::vector<BenchFit> run_bench(const Config& cfg, const BenchPlan& plan,
                                const BenchProgress& progress) {
  std::vector<BenchFit> fits;
  for (PerturbKind kind : plan.kinds) {
    for (std::uint64_t seed : plan.seeds) {
      for (const auto& mode : plan.modes) {
        fits.push_back(bench_one(cfg, mode, kind, seed, plan.size));
        if (progress) progress(fits.back());
      }
    }
  }
  std::sort(fits.begin(), fits.end(), fit_order);
  return fits;
}

std::string bench_csv(const std::vector<BenchFit>& fits) {
  struct Acc {
    double psnr = 0.0;
    double ssim = 0.0;
    double l1 = 0.0;
    double wall_ms = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> cells;
  for (const auto& f : fits) {
    Acc& a = cells[{f.mode, perturb_kind_name(f.kind)}];
    a.psnr += f.psnr_db;
    a.ssim += f.ssim;
    a.l1 += f.l1;
    a.wall_ms += f.wall_ms;
    ++a.n;
  }
  std::string out = "mode,perturbation,psnr_db,ssim,l1,wall_ms\n";
  for (const auto& [key, a] : cells) {
    out += key.first + "," + key.second + "," + format_double(a.psnr / a.n) + "," +
           format_double(a.ssim / a.n) + "," + format_double(a.l1 / a.n) + "," +
           format_double(a.wall_ms / a.n) + "\n";
  }
  return out;
}

std::string bench_detail_csv(const std::vector<BenchFit>& fits) {
  std::vector<BenchFit> sorted = fits;
  std::sort(sorted.begin(), sorted.end(), fit_order);
  std::string out =
      "mode,perturbation,seed,psnr_db,ssim,l1,total,recon_l1,recon_ssim,tv,circle\n";
  for (const auto& f : sorted) {
    const LossTerms& t = f.final_loss.terms;
    out += f.mode + "," + perturb_kind_name(f.kind) + "," + std::to_string(f.seed) + "," +
           format_double(f.psnr_db) + "," + format_double(f.ssim) + "," +
           format_double(f.l1) + "," + format_double(f.final_loss.total) + "," +
           format_double(t.recon_l1) + "," + format_double(t.recon_ssim) + "," +
           format_double(t.tv) + "," + format_double(t.circle) + "\n";
  }
  return out;
}

}  // namespace msbg
