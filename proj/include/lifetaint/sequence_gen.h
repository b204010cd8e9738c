/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lifetaint/app_ir.h"
#include "lifetaint/lifecycle_model.h"

namespace lifetaint {

// Full method signatures ("Class.name/N") in invocation order.
using CallbackSequence = std::vector<std::string>;

enum class UnitKind { LifecycleSubsequence, AuiCallback, MiscCallback };

const char* to_string(UnitKind kind);

struct PermutationUnit {
  UnitKind kind = UnitKind::LifecycleSubsequence;
  CallbackSequence callbacks;
  // Events of the first subsequence that resolved to `callbacks`; empty
  // for AUI and misc units.
  std::vector<std::string> events;
};

struct PermutationPlan {
  int m = 1;
  std::vector<PermutationUnit> units;
  CallbackSequence prefix;
  std::vector<std::string> prefix_events;
};

// Resolves a life-cycle callback name against the component class. Returns
// an empty string when the class does not implement it.
std::string resolve_callback(const AppModel& app, const ComponentDef& comp,
                             const std::string& callback);

std::vector<CallbackSequence> derive_callback_sequences(
    const LifecycleModel& model, const AppModel& app,
    const ComponentDef& comp);

std::vector<PermutationUnit> build_permutation_units(
    const LifecycleModel& model, const AppModel& app,
    const ComponentDef& comp);

// Units plus the createActivity prefix for activities. Throws
// std::invalid_argument when m is outside [1, units.size()].
PermutationPlan make_plan(const LifecycleModel& model, const AppModel& app,
                          const ComponentDef& comp, int m);

// N!/(N-m)!, saturating at UINT64_MAX.
std::uint64_t permutation_count(std::uint64_t n, std::uint64_t m);

// Lazy m-arrangements of the plan's units in unit index order.
class MWayPermutations {
 public:
  explicit MWayPermutations(const PermutationPlan& plan);

  // Writes the next flattened sequence (prefix included). Returns false
  // once exhausted.
  bool next(CallbackSequence& out);

  // Unit indices of the arrangement last returned by next().
  const std::vector<size_t>& indices() const { return indices_; }
  std::uint64_t total() const;

 private:
  bool advance();

  const PermutationPlan& plan_;
  std::vector<size_t> indices_;
  std::vector<bool> used_;
  bool started_ = false;
  bool done_ = false;
};

} // namespace lifetaint
