/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lifetaint {

enum class ComponentKind { Activity, Service, Receiver };

enum class StateKind { Static, Transient };

enum class Color { White, Grey, Red };

const char* to_string(ComponentKind kind);
ComponentKind component_kind_from_string(const std::string& name);

struct LifecycleState {
  std::string name;
  StateKind kind = StateKind::Static;
  Color color = Color::White;
};

struct Guard {
  std::optional<std::string> current_event;
  std::optional<std::string> previous_event;
  bool is_else = false;

  bool always_true() const {
    return !current_event && !previous_event && !is_else;
  }
};

struct Transition {
  std::string source;
  std::string destination;
  Guard guard;
  std::vector<std::string> emitted_callbacks;
  std::optional<std::string> triggered_event;

  // Event introduced when this transition leaves a static state.
  std::optional<std::string> introduced_event() const {
    return triggered_event ? triggered_event : guard.current_event;
  }
};

// One sequence produced by derivation. `event_callbacks[i]` holds the
// callbacks fired while processing `events[i]`, and `landing[i]` is the
// static state reached afterwards. Callbacks are recorded per derived path
// because two transitions can share an event but emit different callbacks.
struct EventSequence {
  std::vector<std::string> events;
  std::vector<std::vector<std::string>> event_callbacks;
  std::vector<std::string> landing;

  std::vector<std::string> callbacks() const;
};

class LifecycleModel {
 public:
  ComponentKind component_kind = ComponentKind::Activity;
  std::vector<LifecycleState> states;
  std::string initial_state;
  std::string goal_state;
  std::vector<std::string> events;
  std::vector<std::string> callbacks;
  std::vector<Transition> transitions;

  const LifecycleState* find_state(const std::string& name) const;
  LifecycleState* find_state(const std::string& name);
  bool has_event(const std::string& name) const;
  bool has_callback(const std::string& name) const;

  // Transitions leaving `state`, in file order.
  std::vector<const Transition*> outgoing(const std::string& state) const;

  // Throws ValidationError on the first broken invariant.
  void validate() const;
};

LifecycleModel load_model(const std::string& path);
LifecycleModel parse_model(const std::string& json_text,
                           const std::string& origin = "<memory>");

// Colored depth-first derivation. Colors are reset to White on return.
std::vector<EventSequence> derive_event_sequences(LifecycleModel& model);

// Callbacks fired for `event` when taken from the first static state that
// accepts it (goal state preferred). Throws std::out_of_range if unknown.
std::vector<std::string> callbacks_for_event(const LifecycleModel& model,
                                             const std::string& event);

// Independent replay: explores every enabled transition for each event and
// reports whether some run ends in the goal state. Literal self-loops are
// allowed here even though derivation skips them.
bool replay_reaches_goal(const LifecycleModel& model,
                         const std::vector<std::string>& events);

// True if some run consumes every event, wherever it ends.
bool replay_accepts(const LifecycleModel& model,
                    const std::vector<std::string>& events);

// All callback lists some run of `events` can produce. With `require_goal`
// only runs ending in the goal state count.
std::vector<std::vector<std::string>> replay_callbacks(
    const LifecycleModel& model, const std::vector<std::string>& events,
    bool require_goal = true);

} // namespace lifetaint
