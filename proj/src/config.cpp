// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "msbg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace msbg {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s, std::string_view key) {
  const std::string str(trim(s));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (str.empty() || used != str.size()) {
    throw ConfigError("key '" + std::string(key) + "': '" + str + "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view s, std::optional<std::size_t> expected,
                                  std::string_view key) {
  std::vector<double> out;
  if (!trim(s).empty()) {
    for (std::string_view part : split(s, ',')) out.push_back(to_double(part, key));
  }
  if (expected && out.size() != *expected) {
    throw ConfigError("key '" + std::string(key) + "': expected " +
                      std::to_string(*expected) + " values, got " +
                      std::to_string(out.size()));
  }
  return out;
}

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      // pyramid
      {"mode", "msbg", "pyramid shape: ac (1x1x1), bg (16x16x8) or msbg (2x2x1+4x4x2+8x8x4)"},
      {"guidance_factors", "", "per-level guidance downsample factors, e.g. 2x2,2x2,2x2"},
      {"luma", "0.299,0.587,0.114", "grayscale weights for the guidance map"},
      // optimization
      {"level_lrs", "", "per-level learning rates coarse to fine (default: <mode>_lrs)"},
      {"ac_lrs", "1e-2", "default learning rate for mode ac"},
      {"bg_lrs", "1e-2", "default learning rate for mode bg"},
      {"msbg_lrs", "1e-2,1e-2,1e-2", "default learning rates for mode msbg"},
      {"iterations", "2000", "optimizer steps"},
      {"seed", "0", "seed for synthetic data and any stochastic choice"},
      // loss
      {"lambda_r", "0.8", "L1 share of the reconstruction loss"},
      {"lambda_tv", "0.01", "weight of the adaptive TV term"},
      {"lambda_circle", "0.01", "weight of the circle term"},
      {"tv_a", "0.001", "TV level weight slope"},
      {"tv_b", "0", "TV level weight offset"},
      {"cond_threshold", "1e6", "circle-loss inversion guard"},
      {"lambda_d", "0", "depth loss weight (unsupported, must be 0)"},
      {"lambda_o", "0", "opacity loss weight (unsupported, must be 0)"},
      {"ssim_window", "11", "SSIM Gaussian window size (odd)"},
      {"ssim_sigma", "1.5", "SSIM Gaussian sigma"},
      // synth
      {"height", "128", "synthetic image height"},
      {"width", "128", "synthetic image width"},
      {"perturbation", "mixed", "identity, global_affine, patch_affine, tone_curve or mixed"},
      {"block", "32", "patch size for patch_affine and mixed"},
      {"strength", "1", "perturbation amplitude scale"},
      {"truth", "", "perturbation sidecar path"},
      // file paths
      {"img_r", "", "rendered (input) image, PPM"},
      {"img_gt", "", "target image, PPM"},
      {"grid", "", "grid file (MSBG container)"},
      {"init_grid", "", "grid file to resume fitting from"},
      {"input", "", "input image for apply"},
      {"output", "", "output path"},
      {"trace", "", "loss trace CSV path"},
      {"a", "", "first image for eval"},
      {"b", "", "second image for eval"},
      // timeline
      {"timeline", "", "timeline file (MSBG container with timeline section)"},
      {"timestamp", "", "timestamp of the fitted grid when appending to a timeline"},
      {"camera_id", "cam0", "camera identifier for new timelines"},
      {"t_novel", "", "query timestamp for interp"},
      {"fine_policy", "identity", "fine levels at novel times: identity or nearest"},
      // gradcheck
      {"fd_step", "1e-3", "central-difference step"},
      {"tolerance", "1e-4", "max relative gradient error"},
      {"restarts", "20", "random configurations per matrix cell"},
      {"gc_size", "8", "gradcheck image size"},
      {"gc_shapes", "2x2x1,1x1x1,2x2x1+4x4x2", "gradcheck pyramids, '+' joins levels"},
      // bench
      {"bench_modes", "ac,bg,msbg,lsq", "modes compared by bench; lsq is the closed-form global affine"},
      {"bench_kinds", "global_affine,patch_affine,mixed", "perturbation kinds for bench"},
      {"bench_pairs", "3", "seeded pairs per perturbation kind"},
      {"bench_size", "128", "bench image size"},
      {"bench_detail", "", "per-fit CSV with loss breakdowns"},
  };
  return keys;
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
  explicit_[key] = true;
}

void Config::load_text(std::string_view text) {
  for (const auto& [k, v] : parse_key_values(text)) set(k, v);
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    load_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

bool Config::is_set(const std::string& key) const {
  auto it = explicit_.find(key);
  return it != explicit_.end() && it->second;
}

double Config::get_double(const std::string& key) const { return to_double(get(key), key); }

int Config::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not an unsigned integer");
  }
  return v;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  return parse_doubles(get(key), std::nullopt, key);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  if (trim(get(key)).empty()) return out;
  for (auto part : split(get(key), ',')) out.emplace_back(part);
  return out;
}

const std::string& Config::require(const std::string& key) const {
  const std::string& v = get(key);
  if (v.empty()) throw ConfigError("missing required key '" + key + "'");
  return v;
}

GridMode parse_grid_mode(std::string_view s) {
  if (s == "ac") return GridMode::kAc;
  if (s == "bg") return GridMode::kBg;
  if (s == "msbg") return GridMode::kMsbg;
  throw ConfigError("mode must be ac, bg or msbg, got '" + std::string(s) + "'");
}

const char* grid_mode_name(GridMode m) {
  switch (m) {
    case GridMode::kAc: return "ac";
    case GridMode::kBg: return "bg";
    case GridMode::kMsbg: return "msbg";
  }
  return "?";
}

std::vector<GridShape> mode_shapes(GridMode m) {
  switch (m) {
    case GridMode::kAc: return {{1, 1, 1}};
    case GridMode::kBg: return {{16, 16, 8}};
    case GridMode::kMsbg: return {{2, 2, 1}, {4, 4, 2}, {8, 8, 4}};
  }
  return {};
}

std::vector<GuidanceFactors> mode_factors(GridMode m) {
  switch (m) {
    case GridMode::kAc: return {{1, 1}};
    case GridMode::kBg: return {{1, 1}};
    case GridMode::kMsbg: return {{2, 2}, {2, 2}, {2, 2}};
  }
  return {};
}

std::vector<GuidanceFactors> parse_factors(std::string_view s, std::size_t levels) {
  std::vector<GuidanceFactors> out;
  for (std::string_view part : split(s, ',')) {
    const std::size_t x = part.find('x');
    if (x == std::string_view::npos) {
      throw ConfigError("guidance factor '" + std::string(part) + "' is not of the form HxW");
    }
    GuidanceFactors f;
    f.fh = static_cast<int>(to_double(part.substr(0, x), "guidance_factors"));
    f.fw = static_cast<int>(to_double(part.substr(x + 1), "guidance_factors"));
    if (f.fh < 1 || f.fw < 1) throw ConfigError("guidance factors must be >= 1");
    out.push_back(f);
  }
  if (out.size() == 1 && levels > 1) out.resize(levels, out.front());
  if (out.size() != levels) {
    throw ConfigError("guidance_factors lists " + std::to_string(out.size()) +
                      " levels, pyramid has " + std::to_string(levels));
  }
  return out;
}

LossConfig loss_config_from(const Config& cfg) {
  LossConfig loss;
  loss.lambda_r = cfg.get_double("lambda_r");
  loss.lambda_tv = cfg.get_double("lambda_tv");
  loss.lambda_circle = cfg.get_double("lambda_circle");
  loss.tv_a = cfg.get_double("tv_a");
  loss.tv_b = cfg.get_double("tv_b");
  loss.cond_threshold = cfg.get_double("cond_threshold");
  loss.lambda_d = cfg.get_double("lambda_d");
  loss.lambda_o = cfg.get_double("lambda_o");
  loss.ssim.window = cfg.get_int("ssim_window");
  loss.ssim.sigma = cfg.get_double("ssim_sigma");
  try {
    loss.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return loss;
}

RunConfig RunConfig::from(const Config& cfg) {
  return from(cfg, parse_grid_mode(cfg.get("mode")));
}

RunConfig RunConfig::from(const Config& cfg, GridMode mode) {
  RunConfig rc;
  rc.mode = mode;
  const std::size_t levels = mode_shapes(mode).size();
  rc.factors = cfg.get("guidance_factors").empty()
                   ? mode_factors(mode)
                   : parse_factors(cfg.get("guidance_factors"), levels);
  const auto luma = parse_doubles(cfg.get("luma"), 3, "luma");
  rc.luma = {luma[0], luma[1], luma[2]};
  const std::string lr_key =
      cfg.get("level_lrs").empty() ? std::string(grid_mode_name(mode)) + "_lrs" : "level_lrs";
  rc.fit.level_lrs = cfg.get_doubles(lr_key);
  if (rc.fit.level_lrs.size() == 1 && levels > 1) {
    rc.fit.level_lrs.resize(levels, rc.fit.level_lrs.front());
  }
  rc.fit.iterations = cfg.get_int("iterations");
  rc.fit.seed = cfg.get_u64("seed");
  rc.fit.loss = loss_config_from(cfg);
  try {
    rc.fit.validate(levels);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

MultiScaleGrid RunConfig::identity_pyramid() const {
  MultiScaleGrid msg = MultiScaleGrid::identity(mode_shapes(mode), factors);
  msg.luma = luma;
  return msg;
}

}  // namespace msbg
