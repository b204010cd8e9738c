/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lifetaint/symbol_space.h"
#include "lifetaint/taint_config.h"

namespace lifetaint {

enum class WarningKind { InfoLeak, SmsHardcoded, SmsAutoreply };

const char* to_string(WarningKind kind);

struct CodeLocation {
  std::string role; // "source", "const" or "sink"
  std::string api; // API signature or literal
  Location where;

  auto operator<=>(const CodeLocation&) const = default;
};

// Which analyzed callback sequence produced a warning.
struct SequenceDescriptor {
  int m = 0;
  std::uint64_t index = 0;
  std::vector<std::string> callbacks;

  auto operator<=>(const SequenceDescriptor&) const = default;
};

struct Warning {
  WarningKind kind = WarningKind::InfoLeak;
  std::set<std::string> source_apis;
  std::string sink_api;
  std::vector<CodeLocation> locations; // sorted, unique
  std::string component;
  SequenceDescriptor sequence;
};

// One warning per (kind, sink, source set); source sets subsumed by another
// warning's set for the same kind and sink are dropped. Output order is
// independent of input order.
std::vector<Warning> dedup_warnings(const std::vector<Warning>& raw);

// Checks the recipient of an SMS send call. Hard-coded literals win over
// taint from an originating-address API.
std::optional<Warning> detect_sms_attack(const SmsSendApi& api,
                                         const Entry& recipient,
                                         const TaintConfig& config,
                                         const Location& call_site);

} // namespace lifetaint
