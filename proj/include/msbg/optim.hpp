// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "msbg/diff.hpp"
#include "msbg/grid.hpp"
#include "msbg/loss.hpp"

namespace msbg {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam step; updates params and state in place.
void adam_step(std::span<double> params, std::span<const double> grad,
               AdamState& state, std::span<const double> per_param_lr);

struct FitConfig {
  // Coarse to fine, one per level.
  std::vector<double> level_lrs = {1e-5, 3e-5, 1e-4};
  int iterations = 2000;
  LossConfig loss;
  std::uint64_t seed = 0;

  void validate(std::size_t levels) const;
};

// Expands per-level rates to one rate per coefficient.
std::vector<double> per_param_rates(const MultiScaleGrid& msg,
                                    std::span<const double> level_lrs);

struct TraceRow {
  int iteration = 0;
  double total = 0.0;
  LossTerms terms;
};

struct FitResult {
  MultiScaleGrid grid;
  std::vector<TraceRow> trace;  // loss before each update
};

using FitCallback = std::function<void(const TraceRow&)>;

FitResult fit(const MultiScaleGrid& init, const Image& img_r, const Image& img_gt,
              const FitConfig& cfg, const FitCallback& on_step = {});

// CSV: iteration,total,recon_l1,recon_ssim,tv,circle
std::string trace_csv(std::span<const TraceRow> trace);
void write_trace_csv(std::span<const TraceRow> trace, const std::filesystem::path& path);

// Exponential moving average of the total loss with alpha = 2/(window+1).
std::vector<double> loss_ema(std::span<const TraceRow> trace, int window = 100);

}  // namespace msbg
