// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "msbg/bench.hpp"
#include "msbg/diff.hpp"
#include "msbg/gridfile.hpp"
#include "msbg/optim.hpp"
#include "msbg/rng.hpp"
#include "msbg/synth.hpp"
#include "msbg/temporal.hpp"

namespace msbg {

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Factors and luma are not stored in grid files; they come from the config.
void apply_guidance_config(const Config& cfg, MultiScaleGrid& msg) {
  msg.factors = cfg.get("guidance_factors").empty()
                    ? default_factors_for(msg.level_count())
                    : parse_factors(cfg.get("guidance_factors"), msg.level_count());
  const auto luma = parse_doubles(cfg.get("luma"), 3, "luma");
  msg.luma = {luma[0], luma[1], luma[2]};
  msg.validate();
}

std::string shape_label(const std::vector<GridShape>& shapes) {
  std::string out;
  for (const auto& s : shapes) {
    if (!out.empty()) out += "+";
    out += std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.d);
  }
  return out;
}

}  // namespace

std::string default_truth_path(const std::string& img_gt) { return img_gt + ".truth"; }

std::string eval_csv(const Image& a, const Image& b) {
  return "psnr_db,ssim,l1\n" + fmt(psnr(a, b)) + "," + fmt(ssim(a, b)) + "," +
         fmt(mean_abs_error(a, b)) + "\n";
}

std::vector<std::vector<GridShape>> parse_pyramids(std::string_view s) {
  std::vector<std::vector<GridShape>> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    std::string_view pyramid = s.substr(start, comma - start);
    std::vector<GridShape> shapes;
    std::size_t ls = 0;
    while (ls <= pyramid.size()) {
      const std::size_t plus = std::min(pyramid.find('+', ls), pyramid.size());
      const std::string level(pyramid.substr(ls, plus - ls));
      GridShape g;
      char tail = 0;
      if (std::sscanf(level.c_str(), " %dx%dx%d %c", &g.h, &g.w, &g.d, &tail) != 3 ||
          g.h < 1 || g.w < 1 || g.d < 1) {
        throw ConfigError("bad grid shape '" + level + "' (expected HxWxD)");
      }
      shapes.push_back(g);
      ls = plus + 1;
    }
    out.push_back(std::move(shapes));
    start = comma + 1;
  }
  return out;
}

int cmd_synth(const Config& cfg, std::ostream& out) {
  const std::string& r_path = cfg.require("img_r");
  const std::string& gt_path = cfg.require("img_gt");
  const std::string truth_path =
      cfg.get("truth").empty() ? default_truth_path(gt_path) : cfg.get("truth");
  const int h = cfg.get_int("height");
  const int w = cfg.get_int("width");
  const std::uint64_t seed = cfg.get_u64("seed");
  const Perturbation p =
      Perturbation::draw(parse_perturb_kind(cfg.get("perturbation")), seed, h, w,
                         cfg.get_int("block"), cfg.get_double("strength"));
  const SynthPair pair = make_pair(seed, h, w, p);
  write_ppm(pair.img_r, r_path);
  write_ppm(pair.img_gt, gt_path);
  write_text(perturbation_to_text(pair.truth), truth_path);
  out << "synth: " << perturb_kind_name(p.kind) << " " << h << "x" << w << " seed " << seed
      << ", psnr(img_r, img_gt) " << brief(psnr(pair.img_r, pair.img_gt)) << " dB\n";
  return 0;
}

int cmd_fit(const Config& cfg, std::ostream& out) {
  const RunConfig rc = RunConfig::from(cfg);
  const Image img_r = read_ppm(cfg.require("img_r"));
  const Image img_gt = read_ppm(cfg.require("img_gt"));
  if (cfg.get("grid").empty() && cfg.get("timeline").empty()) {
    throw ConfigError("fit needs an output: set 'grid' or 'timeline'");
  }
  MultiScaleGrid init = rc.identity_pyramid();
  if (!cfg.get("init_grid").empty()) {
    init = read_grid(cfg.get("init_grid"));
    if (init.level_count() != rc.fit.level_lrs.size()) {
      throw ConfigError("init_grid has " + std::to_string(init.level_count()) +
                        " levels, mode " + grid_mode_name(rc.mode) + " expects " +
                        std::to_string(rc.fit.level_lrs.size()));
    }
    init.factors = rc.factors;
    init.luma = rc.luma;
    init.validate();
  }
  const FitResult res = fit(init, img_r, img_gt, rc.fit);
  if (!cfg.get("trace").empty()) write_trace_csv(res.trace, cfg.get("trace"));
  if (!cfg.get("grid").empty()) write_grid(res.grid, cfg.get("grid"));
  if (!cfg.get("timeline").empty()) {
    const std::filesystem::path tl_path = cfg.get("timeline");
    const double t = cfg.get_double("timestamp");
    GridTimeline tl = std::filesystem::exists(tl_path) ? read_timeline(tl_path)
                                                       : GridTimeline(cfg.get("camera_id"));
    tl.insert(t, res.grid);
    write_timeline(tl, tl_path);
  }
  const LossBreakdown fin = total_loss(res.grid, img_r, img_gt, rc.fit.loss);
  out << "fit: mode " << grid_mode_name(rc.mode) << ", " << rc.fit.iterations
      << " iterations, final total " << brief(fin.total) << " (recon_l1 "
      << brief(fin.terms.recon_l1) << ", recon_ssim " << brief(fin.terms.recon_ssim)
      << ", tv " << brief(fin.terms.tv) << ", circle " << brief(fin.terms.circle) << ")\n";
  return 0;
}

int cmd_apply(const Config& cfg, std::ostream& out) {
  MultiScaleGrid msg = read_grid(cfg.require("grid"));
  apply_guidance_config(cfg, msg);
  const Image input = read_ppm(cfg.require("input"));
  const Image result = enhance(msg, input).image;
  write_ppm(result, cfg.require("output"));
  out << "apply: " << msg.level_count() << "-level grid on " << input.height() << "x"
      << input.width() << " image\n";
  return 0;
}

int cmd_interp(const Config& cfg, std::ostream& out) {
  const GridTimeline tl = read_timeline(cfg.require("timeline"));
  const double t = cfg.get_double("t_novel");
  const FinePolicy policy = parse_fine_policy(cfg.get("fine_policy"));
  MultiScaleGrid msg = tl.interpolate(t, policy);
  write_grid(msg, cfg.require("output"));
  out << "interp: camera " << tl.camera_id() << ", t " << brief(t) << " over "
      << tl.entries().size() << " entries, fine levels " << fine_policy_name(policy) << "\n";
  return 0;
}

int cmd_eval(const Config& cfg, std::ostream& out) {
  const Image a = read_ppm(cfg.require("a"));
  const Image b = read_ppm(cfg.require("b"));
  const std::string csv = eval_csv(a, b);
  if (cfg.get("output").empty()) {
    out << csv;
  } else {
    write_text(csv, cfg.get("output"));
  }
  return 0;
}

int cmd_gradcheck(const Config& cfg, std::ostream& out) {
  const LossConfig loss = loss_config_from(cfg);
  const double step = cfg.get_double("fd_step");
  const double tolerance = cfg.get_double("tolerance");
  const int restarts = cfg.get_int("restarts");
  const int size = cfg.get_int("gc_size");
  const std::uint64_t seed = cfg.get_u64("seed");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");

  struct Worst {
    double rel = 0.0;
    int restart = 0;
    std::size_t index = 0;
  };
  bool all_pass = true;
  out << "pyramid,term,max_rel_error,worst_restart,worst_index,status\n";
  for (const auto& shapes : parse_pyramids(cfg.get("gc_shapes"))) {
    std::vector<Worst> worst(kAllTerms.size() + 1);
    for (int r = 0; r < restarts; ++r) {
      const GradcheckCase c = make_gradcheck_case(shapes, size, sub_seed(seed, r));
      const auto entries = check_gradients(c, loss, step);
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].cmp.max_rel_error > worst[i].rel || r == 0) {
          worst[i] = {entries[i].cmp.max_rel_error, r, entries[i].cmp.worst_index};
        }
      }
    }
    for (std::size_t i = 0; i < worst.size(); ++i) {
      const bool pass = worst[i].rel <= tolerance;
      all_pass = all_pass && pass;
      const char* term =
          i < kAllTerms.size() ? term_name(kAllTerms[i]) : "total";
      out << shape_label(shapes) << "," << term << "," << fmt(worst[i].rel) << ","
          << worst[i].restart << "," << worst[i].index << "," << (pass ? "pass" : "FAIL")
          << "\n";
    }
  }
  out << "gradcheck: " << (all_pass ? "pass" : "FAIL") << " (h " << brief(step)
      << ", tolerance " << brief(tolerance) << ", " << restarts << " restarts)\n";
  return all_pass ? 0 : 1;
}

int cmd_bench(const Config& cfg, std::ostream& out) {
  const BenchPlan plan = BenchPlan::from(cfg);
  const auto fits = run_bench(cfg, plan, [&](const BenchFit& f) {
    out << "bench: " << f.mode << " " << perturb_kind_name(f.kind) << " seed " << f.seed
        << " psnr " << brief(f.psnr_db) << " dB, " << brief(f.wall_ms) << " ms\n";
    out.flush();
  });
  const std::string csv = bench_csv(fits);
  if (cfg.get("output").empty()) {
    out << csv;
  } else {
    write_text(csv, cfg.get("output"));
  }
  if (!cfg.get("bench_detail").empty()) write_text(bench_detail_csv(fits), cfg.get("bench_detail"));
  return 0;
}

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = {
      {"synth", "generate a seeded (img_r, img_gt) pair and its truth sidecar", cmd_synth},
      {"fit", "fit a grid pyramid mapping img_r onto img_gt", cmd_fit},
      {"apply", "apply a grid file to an image", cmd_apply},
      {"interp", "interpolate a timeline at t_novel", cmd_interp},
      {"eval", "PSNR, SSIM and L1 between two images", cmd_eval},
      {"gradcheck", "analytic vs finite-difference gradients", cmd_gradcheck},
      {"bench", "compare modes across perturbation kinds", cmd_bench},
  };
  return specs;
}

const CommandSpec* find_command(std::string_view name) {
  for (const auto& c : commands()) {
    if (name == c.name) return &c;
  }
  return nullptr;
}

}  // namespace msbg
