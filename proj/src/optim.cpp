// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/optim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "msbg/kernels.hpp"

namespace msbg {

void adam_step(std::span<double> params, std::span<const double> grad,
               AdamState& state, std::span<const double> per_param_lr) {
  const std::size_t n = params.size();
  if (grad.size() != n || per_param_lr.size() != n || state.m.size() != n ||
      state.v.size() != n) {
    throw std::invalid_argument("adam_step: shape mismatch (params " +
                                std::to_string(n) + ", grad " +
                                std::to_string(grad.size()) + ")");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  kernels::active().adam_update(params.data(), grad.data(), state.m.data(),
                                state.v.data(), per_param_lr.data(), state.beta1,
                                state.beta2, bias1, bias2, state.eps, n);
}

void FitConfig::validate(std::size_t levels) const {
  if (level_lrs.size() != levels) {
    throw std::invalid_argument("level_lrs has " + std::to_string(level_lrs.size()) +
                                " entries for a " + std::to_string(levels) +
                                "-level pyramid");
  }
  for (double lr : level_lrs) {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rates must be > 0");
  }
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  loss.validate();
}

std::vector<double> per_param_rates(const MultiScaleGrid& msg,
                                    std::span<const double> level_lrs) {
  std::vector<double> out;
  out.reserve(msg.param_count());
  for (std::size_t l = 0; l < msg.levels.size(); ++l) {
    out.insert(out.end(), msg.levels[l].values().size(), level_lrs[l]);
  }
  return out;
}

FitResult fit(const MultiScaleGrid& init, const Image& img_r, const Image& img_gt,
              const FitConfig& cfg, const FitCallback& on_step) {
  init.validate();
  cfg.validate(init.level_count());
  FitResult out{init, {}};
  out.trace.reserve(cfg.iterations);
  ParamVector params = pack(init);
  const std::vector<double> lrs = per_param_rates(init, cfg.level_lrs);
  AdamState state(params.size());
  for (int it = 0; it < cfg.iterations; ++it) {
    unpack(params, out.grid);
    const LossGrad lg = loss_and_grad(out.grid, img_r, img_gt, cfg.loss);
    TraceRow row{it, lg.loss.total, lg.loss.terms};
    out.trace.push_back(row);
    if (on_step) on_step(row);
    adam_step(params, lg.grad, state, lrs);
  }
  unpack(params, out.grid);
  return out;
}

std::string trace_csv(std::span<const TraceRow> trace) {
  std::string out = "iteration,total,recon_l1,recon_ssim,tv,circle\n";
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iteration,
                  r.total, r.terms.recon_l1, r.terms.recon_ssim, r.terms.tv,
                  r.terms.circle);
    out += buf;
  }
  return out;
}

void write_trace_csv(std::span<const TraceRow> trace, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << trace_csv(trace);
}

std::vector<double> loss_ema(std::span<const TraceRow> trace, int window) {
  std::vector<double> out;
  out.reserve(trace.size());
  const double alpha = 2.0 / (window + 1.0);
  double ema = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    ema = i == 0 ? trace[i].total : alpha * trace[i].total + (1.0 - alpha) * ema;
    out.push_back(ema);
  }
  return out;
}

}  // namespace msbg
