/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/driver.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "lifetaint/app_ir.h"
#include "lifetaint/cfg.h"
#include "lifetaint/errors.h"
#include "lifetaint/sequence_gen.h"
#include "lifetaint/taint_engine.h"

namespace lifetaint {

namespace fs = std::filesystem;

const LifecycleModel& ModelSet::for_kind(ComponentKind kind) const {
  switch (kind) {
    case ComponentKind::Activity:
      return activity;
    case ComponentKind::Service:
      return service;
    case ComponentKind::Receiver:
      return receiver;
  }
  throw std::logic_error("unknown component kind");
}

ModelSet load_models(const std::string& dir) {
  ModelSet set;
  set.activity = load_model((fs::path(dir) / "activity.json").string());
  set.service = load_model((fs::path(dir) / "service.json").string());
  set.receiver = load_model((fs::path(dir) / "receiver.json").string());
  if (set.activity.component_kind != ComponentKind::Activity ||
      set.service.component_kind != ComponentKind::Service ||
      set.receiver.component_kind != ComponentKind::Receiver) {
    throw ValidationError(dir + ": model files have mismatched kinds");
  }
  return set;
}

std::vector<std::string> expand_app_paths(
    const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".app") {
          found.push_back(e.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

namespace {

void dump_cfgs(const AppModel& app, const std::string& root) {
  fs::path dir = fs::path(root.empty() ? "." : root) / "cfg" / app.app_id;
  fs::create_directories(dir);
  for (const auto& cls : app.classes) {
    for (const auto& m : cls.methods) {
      auto cfg = remove_back_edges(build_cfg(m));
      std::string name = m.signature();
      std::replace(name.begin(), name.end(), '/', '_');
      std::ofstream(dir / (name + ".dot")) << to_dot(cfg, m.signature());
    }
  }
}

bool has_info_leak(const std::vector<Warning>& ws) {
  return std::any_of(ws.begin(), ws.end(), [](const Warning& w) {
    return w.kind == WarningKind::InfoLeak;
  });
}

} // namespace

Report analyze_app(const std::string& path, const ModelSet& models,
                   const TaintConfig& config, const RunConfig& run) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.app_path = path;
  AppModel app;
  try {
    app = load_app(path);
  } catch (const std::exception& e) {
    report.failed = true;
    report.finished = false;
    report.error = e.what();
    spdlog::error("{}", e.what());
    return report;
  }
  report.app_id = app.app_id;
  if (run.dump_cfg) {
    dump_cfgs(app, run.out_dir);
  }

  Deadline deadline(run.budget_secs);
  std::vector<Warning> raw;
  std::vector<std::vector<PermutationUnit>> units;
  for (const auto& comp : app.components) {
    units.push_back(build_permutation_units(models.for_kind(comp.kind), app,
                                            comp));
    report.components.push_back(
        {comp.class_name, to_string(comp.kind), units.back().size(), 0});
  }
  try {
    for (int m = 1; m <= run.m_max; ++m) {
      bool any_plan = false;
      std::vector<Warning> found;
      for (size_t c = 0; c < app.components.size(); ++c) {
        const auto& comp = app.components[c];
        if (units[c].size() < static_cast<size_t>(m)) {
          continue;
        }
        any_plan = true;
        PermutationPlan plan =
            make_plan(models.for_kind(comp.kind), app, comp, m);
        spdlog::debug("{}: {} at m={} ({} units)", app.app_id,
                      comp.class_name, m, plan.units.size());
        auto result = analyze_component(app, comp, plan, config, deadline);
        report.sequences_analyzed += result.sequences_analyzed;
        report.components[c].sequences_analyzed += result.sequences_analyzed;
        found.insert(found.end(), result.raw.begin(), result.raw.end());
        if (result.killed) {
          report.finished = false;
          break;
        }
      }
      if (!any_plan) {
        break;
      }
      report.m_reached = m;
      raw.insert(raw.end(), found.begin(), found.end());
      if (!report.finished || has_info_leak(found)) {
        break;
      }
    }
  } catch (const std::exception& e) {
    report.failed = true;
    report.finished = false;
    report.error = e.what();
    spdlog::error("{}: {}", path, e.what());
  }
  report.warnings = dedup_warnings(raw);
  report.elapsed_secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.m_max < 1) {
    err << "error: --m-max must be at least 1\n";
    return 1;
  }
  if (!(config.budget_secs > 0)) {
    err << "error: --budget-secs must be positive\n";
    return 1;
  }
  if (config.jobs < 1) {
    err << "error: --jobs must be at least 1\n";
    return 1;
  }
  if (config.format != "json" && config.format != "table") {
    err << "error: unknown format '" << config.format << "'\n";
    return 1;
  }
  TaintConfig taint_config;
  ModelSet models;
  try {
    taint_config = load_taint_config(config.config_path.empty()
                                         ? default_config_path()
                                         : config.config_path);
    models = load_models(config.models_dir.empty() ? default_models_dir()
                                                   : config.models_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  auto paths = expand_app_paths(config.app_paths);
  if (paths.empty()) {
    err << "error: no app files given\n";
    return 1;
  }

  std::vector<Report> reports(paths.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < paths.size(); i = next++) {
      reports[i] = analyze_app(paths[i], models, taint_config, config);
    }
  };
  const size_t n_threads =
      std::min(paths.size(), static_cast<size_t>(config.jobs));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }

  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    for (const auto& r : reports) {
      std::string stem = r.app_id.empty()
          ? fs::path(r.app_path).stem().string()
          : r.app_id;
      std::string ext = config.format == "json" ? ".json" : ".txt";
      std::ofstream(fs::path(config.out_dir) / (stem + ext))
          << render_report(r, config.format, config.timings);
    }
  } else if (config.format == "json") {
    if (reports.size() == 1) {
      out << render_report(reports.front(), "json", config.timings);
    } else {
      auto arr = nlohmann::json::array();
      for (const auto& r : reports) {
        arr.push_back(report_to_json(r, config.timings));
      }
      out << arr.dump(2) << "\n";
    }
  } else {
    for (const auto& r : reports) {
      out << render_report(r, "table", config.timings);
    }
  }

  bool failed = false;
  bool killed = false;
  for (const auto& r : reports) {
    failed = failed || r.failed;
    killed = killed || (!r.failed && !r.finished);
  }
  if (failed) {
    return 1;
  }
  return killed ? 2 : 0;
}

} // namespace lifetaint
