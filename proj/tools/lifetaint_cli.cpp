/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lifetaint/driver.h"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lifetaint");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("LIFETAINT_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

} // namespace

int main(int argc, char** argv) {
  setup_logging();
  lifetaint::RunConfig config;
  CLI::App app{"Life-cycle aware taint analysis for mini-bytecode apps"};
  app.add_option("--app", config.app_paths,
                 "App files (.app) or directories of them")
      ->required()
      ->expected(1, -1);
  app.add_option("--models", config.models_dir,
                 "Directory holding activity/service/receiver.json");
  app.add_option("--config", config.config_path,
                 "Source/sink configuration (JSON)");
  app.add_option("--m-max", config.m_max, "Largest m for m-way permutation")
      ->capture_default_str();
  app.add_option("--budget-secs", config.budget_secs,
                 "Wall-clock budget per app in seconds")
      ->capture_default_str();
  app.add_option("--format", config.format, "Report format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  app.add_option("--jobs", config.jobs, "Apps analyzed in parallel")
      ->capture_default_str();
  app.add_flag("--dump-cfg", config.dump_cfg,
               "Write per-method CFGs in DOT format under <out-dir>/cfg");
  app.add_option("--out-dir", config.out_dir,
                 "Write one report file per app into this directory");
  app.add_flag("--timings", config.timings,
               "Include elapsed time in reports");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return lifetaint::run(config, std::cout, std::cerr);
}
