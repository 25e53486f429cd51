// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "msbg/commands.hpp"
#include "msbg/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale bilateral grids for photometric correction"};
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub = nullptr;
    std::string config_path;
    std::map<std::string, std::string> overrides;
  };
  std::map<std::string, Bound> bound;
  for (const auto& spec : msbg::commands()) {
    Bound& b = bound[spec.name];
    b.sub = app.add_subcommand(spec.name, spec.help);
    b.sub->add_option("--config", b.config_path, "key = value config file");
    for (const auto& key : msbg::config_keys()) {
      std::string help = key.help;
      if (*key.default_value != '\0') help += " [" + std::string(key.default_value) + "]";
      b.sub->add_option("--" + std::string(key.name), b.overrides[key.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "msbg: " << e.what() << "\n";
    return 2;
  }

  for (const auto& spec : msbg::commands()) {
    Bound& b = bound[spec.name];
    if (!b.sub->parsed()) continue;
    try {
      msbg::Config cfg;
      if (!b.config_path.empty()) cfg.load_file(b.config_path);
      for (const auto& [key, value] : b.overrides) {
        if (b.sub->count("--" + key) > 0) cfg.set(key, value);
      }
      return spec.run(cfg, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "msbg " << spec.name << ": " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
