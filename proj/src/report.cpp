/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/report.h"

#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace lifetaint {

using nlohmann::json;

json warning_to_json(const Warning& w) {
  json j;
  j["kind"] = to_string(w.kind);
  j["source_apis"] = w.source_apis;
  j["sink_api"] = w.sink_api;
  j["component"] = w.component;
  json locs = json::array();
  for (const auto& l : w.locations) {
    locs.push_back({{"role", l.role},
                    {"api", l.api},
                    {"class", l.where.class_name},
                    {"method", l.where.method},
                    {"index", l.where.index}});
  }
  j["locations"] = locs;
  j["sequence"] = {{"m", w.sequence.m},
                   {"index", w.sequence.index},
                   {"callbacks", w.sequence.callbacks}};
  return j;
}

json report_to_json(const Report& r, bool include_timings) {
  json j;
  j["app_id"] = r.app_id;
  j["app_path"] = r.app_path;
  j["status"] = r.failed ? "failed" : "ok";
  if (r.failed) {
    j["error"] = r.error;
  }
  j["finished"] = r.finished;
  j["m_reached"] = r.m_reached;
  j["sequences_analyzed"] = r.sequences_analyzed;
  if (include_timings) {
    j["elapsed_secs"] = r.elapsed_secs;
  }
  json comps = json::array();
  for (const auto& c : r.components) {
    comps.push_back({{"class", c.class_name},
                     {"kind", c.kind},
                     {"units", c.units},
                     {"sequences_analyzed", c.sequences_analyzed}});
  }
  j["components"] = comps;
  json ws = json::array();
  for (const auto& w : r.warnings) {
    ws.push_back(warning_to_json(w));
  }
  j["warnings"] = ws;
  return j;
}

namespace {

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) {
      out += ",";
    }
    out += s;
  }
  return out.empty() ? "-" : out;
}

std::string render_table(const Report& r, bool include_timings) {
  std::ostringstream out;
  out << fmt::format("app {} ({})\n", r.app_id.empty() ? "?" : r.app_id,
                     r.app_path);
  if (r.failed) {
    out << "  status: failed: " << r.error << "\n";
    return out.str();
  }
  out << fmt::format("  status: {}  m: {}  sequences: {}",
                     r.finished ? "finished" : "killed", r.m_reached,
                     r.sequences_analyzed);
  if (include_timings) {
    out << fmt::format("  elapsed: {:.3f}s", r.elapsed_secs);
  }
  out << "\n";
  if (r.warnings.empty()) {
    out << "  no warnings\n";
    return out.str();
  }
  out << fmt::format("  {:<14} {:<32} {:<40} {}\n", "KIND", "SINK",
                     "SOURCES", "M");
  for (const auto& w : r.warnings) {
    out << fmt::format("  {:<14} {:<32} {:<40} {}\n", to_string(w.kind),
                       w.sink_api, join(w.source_apis), w.sequence.m);
  }
  return out.str();
}

} // namespace

std::string render_report(const Report& r, const std::string& format,
                          bool include_timings) {
  if (format == "json") {
    return report_to_json(r, include_timings).dump(2) + "\n";
  }
  if (format == "table") {
    return render_table(r, include_timings);
  }
  throw std::invalid_argument("unknown report format '" + format + "'");
}

} // namespace lifetaint
