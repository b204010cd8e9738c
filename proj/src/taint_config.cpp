/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/taint_config.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lifetaint/errors.h"

namespace lifetaint {

using nlohmann::json;

namespace {

std::set<std::string> string_set(const json& doc, const char* key,
                                 const std::string& origin,
                                 const std::set<std::string>& fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    return fallback;
  }
  if (!it->is_array()) {
    throw LoadError(origin + ": '" + key + "' must be an array");
  }
  std::set<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw LoadError(origin + ": '" + key + "' must hold strings");
    }
    out.insert(v.get<std::string>());
  }
  return out;
}

} // namespace

const SmsSendApi* TaintConfig::sms_send_api(const std::string& sig) const {
  for (const auto& api : sms_send_apis) {
    if (api.signature == sig) {
      return &api;
    }
  }
  return nullptr;
}

TaintConfig parse_taint_config(const std::string& json_text,
                               const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LoadError(origin + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw LoadError(origin + ": top level must be an object");
  }
  TaintConfig cfg;
  cfg.sources = string_set(doc, "sources", origin, {});
  cfg.sinks = string_set(doc, "sinks", origin, {});
  cfg.originating_address_apis =
      string_set(doc, "originating_address_apis", origin, {});
  cfg.collection_types = string_set(
      doc, "collection_types", origin,
      {"ArrayList", "HashMap", "List", "Map", "Bundle", "Intent", "Object[]"});
  cfg.immutable_types = string_set(
      doc, "immutable_types", origin,
      {"String", "Integer", "Long", "Double", "Boolean", "CharSequence"});
  cfg.primitive_types = string_set(
      doc, "primitive_types", origin,
      {"int", "long", "boolean", "double", "float", "char", "byte", "short"});
  if (auto sms = doc.find("sms_send_apis"); sms != doc.end()) {
    if (!sms->is_array()) {
      throw LoadError(origin + ": 'sms_send_apis' must be an array");
    }
    for (const auto& s : *sms) {
      if (!s.is_object() || !s.contains("signature") ||
          !s["signature"].is_string()) {
        throw LoadError(origin + ": sms_send_apis entries need a signature");
      }
      SmsSendApi api;
      api.signature = s["signature"].get<std::string>();
      if (s.contains("recipient_arg_index")) {
        if (!s["recipient_arg_index"].is_number_integer()) {
          throw LoadError(origin + ": recipient_arg_index must be an integer");
        }
        api.recipient_arg_index = s["recipient_arg_index"].get<int>();
      }
      cfg.sms_send_apis.push_back(api);
    }
  }
  return cfg;
}

TaintConfig load_taint_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_taint_config(buf.str(), path);
}

std::string default_config_path() {
  return std::string(LIFETAINT_DATA_DIR) + "/config/sources_sinks.json";
}

std::string default_models_dir() {
  return std::string(LIFETAINT_DATA_DIR) + "/models";
}

} // namespace lifetaint
