/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>
#include <vector>

#include "lifetaint/app_ir.h"
#include "lifetaint/lifecycle_model.h"
#include "lifetaint/sequence_gen.h"
#include "lifetaint/taint_config.h"

namespace lifetaint::testing {

inline std::string data_path(const std::string& rel) {
  return std::string(LIFETAINT_DATA_DIR) + "/" + rel;
}

inline LifecycleModel model(const std::string& name) {
  return load_model(data_path("models/" + name + ".json"));
}

inline AppModel corpus_app(const std::string& name) {
  return load_app(data_path("corpus/" + name + ".app"));
}

inline const TaintConfig& default_config() {
  static const TaintConfig config = load_taint_config(default_config_path());
  return config;
}

inline const LifecycleModel& model_for(ComponentKind kind) {
  static const LifecycleModel activity = model("activity");
  static const LifecycleModel service = model("service");
  static const LifecycleModel receiver = model("receiver");
  switch (kind) {
    case ComponentKind::Activity:
      return activity;
    case ComponentKind::Service:
      return service;
    case ComponentKind::Receiver:
      break;
  }
  return receiver;
}

// Resolves callback names against the component, dropping the ones the
// class does not implement.
inline CallbackSequence resolve_names(const AppModel& app,
                                      const ComponentDef& comp,
                                      const std::vector<std::string>& names) {
  CallbackSequence out;
  for (const auto& n : names) {
    auto sig = resolve_callback(app, comp, n);
    if (!sig.empty()) {
      out.push_back(sig);
    }
  }
  return out;
}

// True if `needle` occurs in `hay` as a (not necessarily contiguous)
// subsequence.
template <typename T>
bool is_subsequence(const std::vector<T>& needle, const std::vector<T>& hay) {
  size_t i = 0;
  for (const auto& x : hay) {
    if (i < needle.size() && x == needle[i]) {
      ++i;
    }
  }
  return i == needle.size();
}

} // namespace lifetaint::testing
