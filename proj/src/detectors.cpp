/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/detectors.h"

#include <algorithm>
#include <map>
#include <tuple>

namespace lifetaint {

const char* to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::InfoLeak:
      return "INFO_LEAK";
    case WarningKind::SmsHardcoded:
      return "SMS_HARDCODED";
    case WarningKind::SmsAutoreply:
      return "SMS_AUTOREPLY";
  }
  return "?";
}

namespace {

bool subset_of(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool better(const Warning& a, const Warning& b) {
  return std::tie(a.sequence.m, a.component, a.sequence.index,
                  a.sequence.callbacks) <
      std::tie(b.sequence.m, b.component, b.sequence.index,
               b.sequence.callbacks);
}

} // namespace

std::vector<Warning> dedup_warnings(const std::vector<Warning>& raw) {
  using Key = std::tuple<WarningKind, std::string, std::set<std::string>>;
  std::map<Key, Warning> merged;
  for (const auto& w : raw) {
    Key key{w.kind, w.sink_api, w.source_apis};
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, w);
      continue;
    }
    auto locations = it->second.locations;
    locations.insert(locations.end(), w.locations.begin(), w.locations.end());
    if (better(w, it->second)) {
      it->second = w;
    }
    std::sort(locations.begin(), locations.end());
    locations.erase(std::unique(locations.begin(), locations.end()),
                    locations.end());
    it->second.locations = std::move(locations);
  }
  std::vector<Warning> out;
  for (auto& [key, w] : merged) {
    bool subsumed = false;
    for (const auto& [other, _] : merged) {
      if (std::get<0>(other) == std::get<0>(key) &&
          std::get<1>(other) == std::get<1>(key) &&
          std::get<2>(other) != std::get<2>(key) &&
          subset_of(std::get<2>(key), std::get<2>(other))) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) {
      std::sort(w.locations.begin(), w.locations.end());
      w.locations.erase(std::unique(w.locations.begin(), w.locations.end()),
                        w.locations.end());
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::optional<Warning> detect_sms_attack(const SmsSendApi& api,
                                         const Entry& recipient,
                                         const TaintConfig& config,
                                         const Location& call_site) {
  if (!recipient.details) {
    return std::nullopt;
  }
  Warning w;
  w.sink_api = api.signature;
  if (const auto& c = recipient.details->const_value) {
    w.kind = WarningKind::SmsHardcoded;
    w.locations.push_back({"const", c->literal, c->origin});
    w.locations.push_back({"sink", api.signature, call_site});
    return w;
  }
  for (const auto& tag : collect_taints(recipient)) {
    if (config.is_originating_address(tag.source_api)) {
      w.source_apis.insert(tag.source_api);
      w.locations.push_back({"source", tag.source_api, tag.location});
    }
  }
  if (w.source_apis.empty()) {
    return std::nullopt;
  }
  w.kind = WarningKind::SmsAutoreply;
  w.locations.push_back({"sink", api.signature, call_site});
  std::sort(w.locations.begin(), w.locations.end());
  return w;
}

} // namespace lifetaint
