/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lifetaint/lifecycle_model.h"
#include "lifetaint/report.h"
#include "lifetaint/taint_config.h"

namespace lifetaint {

struct RunConfig {
  std::vector<std::string> app_paths; // files or directories of *.app
  std::string models_dir;
  std::string config_path;
  int m_max = 2;
  double budget_secs = 600.0;
  int jobs = 1;
  std::string format = "json";
  bool dump_cfg = false;
  std::string out_dir; // empty: write to the output stream
  bool timings = false;
};

struct ModelSet {
  LifecycleModel activity;
  LifecycleModel service;
  LifecycleModel receiver;

  const LifecycleModel& for_kind(ComponentKind kind) const;
};

ModelSet load_models(const std::string& dir);

// Expands directories into their *.app files (sorted); files pass through.
std::vector<std::string> expand_app_paths(
    const std::vector<std::string>& paths);

// m-escalating analysis of one app: every component at m=1, then m=2, ...
// until an information leak is found or m_max is reached.
Report analyze_app(const std::string& path, const ModelSet& models,
                   const TaintConfig& config, const RunConfig& run);

// Exit status: 0 all apps analyzed, 2 some analysis killed, 1 bad
// configuration or an app that failed to load.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace lifetaint
