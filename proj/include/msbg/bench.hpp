// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msbg/config.hpp"
#include "msbg/loss.hpp"
#include "msbg/synth.hpp"

namespace msbg {

// Bench mode name for the closed-form global affine fit, reported next to the
// optimized modes as a reference.
inline constexpr const char* kOracleMode = "lsq";

// One fitted (mode, perturbation, seed) cell.
struct BenchFit {
  std::string mode;
  PerturbKind kind = PerturbKind::kIdentity;
  std::uint64_t seed = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double l1 = 0.0;
  double wall_ms = 0.0;
  LossBreakdown final_loss;  // total_loss of the fitted grid
};

struct BenchPlan {
  std::vector<std::string> modes;
  std::vector<PerturbKind> kinds;
  std::vector<std::uint64_t> seeds;
  int size = 128;

  static BenchPlan from(const Config& cfg);
};

using BenchProgress = std::function<void(const BenchFit&)>;

// Pair seeds drive both the base image and the perturbation draw. Each fit
// uses RunConfig::from(cfg, mode), so every mode gets the same step budget.
std::vector<BenchFit> run_bench(const Config& cfg, const BenchPlan& plan,
                                const BenchProgress& progress = {});

BenchFit bench_one(const Config& cfg, const std::string& mode, PerturbKind kind,
                   std::uint64_t seed, int size);

// mode,perturbation,psnr_db,ssim,l1,wall_ms; means over seeds, sorted rows.
std::string bench_csv(const std::vector<BenchFit>& fits);

// One row per fit with the weighted loss breakdown; no timing, so it is
// byte-identical across runs.
std::string bench_detail_csv(const std::vector<BenchFit>& fits);

}  // namespace msbg
