// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "msbg/config.hpp"
#include "msbg/image.hpp"

namespace msbg {

struct CommandSpec {
  const char* name;
  const char* help;
  int (*run)(const Config& cfg, std::ostream& out);
};

// Commands write their files, print a short report to `out` and return the
// exit status. Failures are thrown.
const std::vector<CommandSpec>& commands();
const CommandSpec* find_command(std::string_view name);

int cmd_synth(const Config& cfg, std::ostream& out);
int cmd_fit(const Config& cfg, std::ostream& out);
int cmd_apply(const Config& cfg, std::ostream& out);
int cmd_interp(const Config& cfg, std::ostream& out);
int cmd_eval(const Config& cfg, std::ostream& out);
int cmd_gradcheck(const Config& cfg, std::ostream& out);
int cmd_bench(const Config& cfg, std::ostream& out);

// psnr_db,ssim,l1 header plus one row; identical images give psnr_db "inf".
std::string eval_csv(const Image& a, const Image& b);

// "2x2x1,1x1x1,2x2x1+4x4x2": comma separates pyramids, '+' joins levels.
std::vector<std::vector<GridShape>> parse_pyramids(std::string_view s);

// Sidecar default for synth: the img_gt path with ".truth" appended.
std::string default_truth_path(const std::string& img_gt);

}  // namespace msbg
