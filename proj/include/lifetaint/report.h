/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lifetaint/detectors.h"

namespace lifetaint {

struct ComponentStats {
  std::string class_name;
  std::string kind;
  std::size_t units = 0;
  std::uint64_t sequences_analyzed = 0;
};

struct Report {
  std::string app_id;
  std::string app_path;
  bool failed = false; // the app could not be loaded or analyzed
  std::string error;
  bool finished = true; // false when the time budget ran out
  int m_reached = 0;
  std::uint64_t sequences_analyzed = 0;
  double elapsed_secs = 0.0;
  std::vector<ComponentStats> components;
  std::vector<Warning> warnings;
};

nlohmann::json warning_to_json(const Warning& w);
nlohmann::json report_to_json(const Report& r, bool include_timings = false);

// format is "json" or "table"; anything else throws std::invalid_argument.
std::string render_report(const Report& r, const std::string& format,
                          bool include_timings = false);

} // namespace lifetaint
