/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lifetaint/app_ir.h"
#include "lifetaint/cfg.h"
#include "lifetaint/detectors.h"
#include "lifetaint/sequence_gen.h"
#include "lifetaint/symbol_space.h"
#include "lifetaint/taint_config.h"

namespace lifetaint {

class Deadline {
 public:
  Deadline() = default; // never expires
  explicit Deadline(double seconds);

  bool expired() const;

 private:
  std::optional<std::chrono::steady_clock::time_point> end_;
};

// Thrown internally when the time budget runs out.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded() : std::runtime_error("time budget exceeded") {}
};

struct AnalysisResult {
  std::vector<Warning> raw; // one entry per (sequence, distinct warning)
  std::vector<Warning> warnings; // deduplicated
  std::uint64_t sequences_analyzed = 0;
  bool killed = false;
};

// Per-sequence heap: the component instance, statics and the framework
// objects handed to callbacks (one per parameter type).
struct SequenceState {
  Entry instance;
  Table statics;
  std::map<std::string, Entry> framework_objects;
};

// Analysis context for one app. Not thread-safe; create one per worker.
class TaintEngine {
 public:
  TaintEngine(const AppModel& app, const TaintConfig& config,
              Deadline deadline = {});

  // Runs <init> and then every callback in `callbacks` against a fresh
  // instance. Warnings are unique within the sequence.
  std::vector<Warning> analyze_sequence(const ComponentDef& comp,
                                        const CallbackSequence& callbacks);

  // Analyzes one method with the given receiver and arguments, as if called
  // from outside. Statics persist in `state`.
  std::optional<Entry> analyze_method(const MethodDef& method,
                                      std::optional<Entry> receiver,
                                      const std::vector<Entry>& args);

  // Warnings raised since the last call to take_warnings().
  std::vector<Warning> take_warnings();

  SequenceState& state() { return state_; }
  void reset_state(const std::string& instance_class);

  // Signatures on the current call chain.
  const std::vector<std::string>& method_stack() const {
    return method_stack_;
  }
  std::size_t max_context_depth() const { return max_depth_; }
  std::uint64_t skipped_recursive_calls() const { return skipped_calls_; }

 private:
  struct Frame;
  struct BlockOut;

  std::optional<Entry> invoke_app_method(const MethodDef& method,
                                         std::optional<Entry> receiver,
                                         const std::vector<Entry>& args);
  void execute(const MethodDef& method, int index, Frame& frame);
  void handle_invoke(const MethodDef& method, int index, Frame& frame);
  bool handle_discontinuity(const Instruction& ins,
                            const std::vector<Entry>& args);
  bool handle_specific_api(const Instruction& ins, std::vector<Entry>& args,
                           std::optional<Entry>& result);
  void report_sink(const Instruction& ins, const std::vector<Entry>& args,
                   const Location& where);
  Entry fresh_value(const std::string& type);
  Entry read_register(Frame& frame, const std::string& reg,
                      const Location& where);
  const std::pair<Cfg, std::vector<int>>& cfg_for(const MethodDef& method);
  void add_warning(Warning w);

  const AppModel& app_;
  const TaintConfig& config_;
  Deadline deadline_;
  SequenceState state_;
  std::vector<std::string> method_stack_; // S_m
  std::size_t context_depth_ = 0; // |S_c|
  std::size_t max_depth_ = 0;
  std::uint64_t skipped_calls_ = 0;
  std::uint64_t steps_ = 0;
  std::vector<Warning> warnings_;
  std::map<const MethodDef*, std::pair<Cfg, std::vector<int>>> cfgs_;
};

// Analyzes every sequence of the plan's m-way permutation.
AnalysisResult analyze_component(const AppModel& app,
                                 const ComponentDef& comp,
                                 const PermutationPlan& plan,
                                 const TaintConfig& config,
                                 const Deadline& deadline = {});

// Analyzes a single explicit callback sequence (m is recorded as 0).
AnalysisResult analyze_callback_sequence(const AppModel& app,
                                         const ComponentDef& comp,
                                         const CallbackSequence& callbacks,
                                         const TaintConfig& config);

} // namespace lifetaint
