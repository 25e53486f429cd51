// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msbg/grid.hpp"
#include "msbg/optim.hpp"

namespace msbg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
// Throws ConfigError with the line number on malformed or repeated keys.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

// Comma-separated numbers; checks the count when `expected` is given.
std::vector<double> parse_doubles(std::string_view s, std::optional<std::size_t> expected,
                                  std::string_view key);

struct KeySpec {
  const char* name;
  const char* default_value;
  const char* help;
};

// Every recognized configuration key with its default.
const std::vector<KeySpec>& config_keys();

// Flat key/value store restricted to config_keys(). Later sets win, so load
// the file first and apply command-line overrides after.
class Config {
 public:
  Config();

  void set(const std::string& key, const std::string& value);
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text);

  const std::string& get(const std::string& key) const;
  bool is_set(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  // Throws ConfigError naming the key when it is empty.
  const std::string& require(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

enum class GridMode { kAc, kBg, kMsbg };
GridMode parse_grid_mode(std::string_view s);
const char* grid_mode_name(GridMode m);

std::vector<GridShape> mode_shapes(GridMode m);
std::vector<GuidanceFactors> mode_factors(GridMode m);

// "2x2,2x2,2x2"; a single entry is broadcast to every level.
std::vector<GuidanceFactors> parse_factors(std::string_view s, std::size_t levels);

struct RunConfig {
  GridMode mode = GridMode::kMsbg;
  std::vector<GuidanceFactors> factors;
  LumaWeights luma;
  FitConfig fit;

  static RunConfig from(const Config& cfg);
  static RunConfig from(const Config& cfg, GridMode mode);

  MultiScaleGrid identity_pyramid() const;
};

LossConfig loss_config_from(const Config& cfg);

}  // namespace msbg
