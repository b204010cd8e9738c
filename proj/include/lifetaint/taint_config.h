/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <set>
#include <string>
#include <vector>

namespace lifetaint {

struct SmsSendApi {
  std::string signature;
  int recipient_arg_index = 0; // excludes the receiver
};

struct TaintConfig {
  std::set<std::string> sources;
  std::set<std::string> sinks;
  std::vector<SmsSendApi> sms_send_apis;
  std::set<std::string> originating_address_apis;
  // Type names treated as collections / immutable values when an object
  // of that type is created or passed in by the framework.
  std::set<std::string> collection_types;
  std::set<std::string> immutable_types;
  std::set<std::string> primitive_types;

  bool is_source(const std::string& sig) const { return sources.count(sig); }
  bool is_sink(const std::string& sig) const { return sinks.count(sig); }
  bool is_originating_address(const std::string& sig) const {
    return originating_address_apis.count(sig);
  }
  const SmsSendApi* sms_send_api(const std::string& sig) const;
};

TaintConfig load_taint_config(const std::string& path);
TaintConfig parse_taint_config(const std::string& json_text,
                               const std::string& origin = "<memory>");

// Path of the configuration shipped with the sources.
std::string default_config_path();
std::string default_models_dir();

} // namespace lifetaint
