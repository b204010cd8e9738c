/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/lifecycle_model.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lifetaint/errors.h"

namespace lifetaint {

using nlohmann::json;

const char* to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Activity:
      return "ACTIVITY";
    case ComponentKind::Service:
      return "SERVICE";
    case ComponentKind::Receiver:
      return "RECEIVER";
  }
  return "?";
}

ComponentKind component_kind_from_string(const std::string& name) {
  if (name == "ACTIVITY") {
    return ComponentKind::Activity;
  }
  if (name == "SERVICE") {
    return ComponentKind::Service;
  }
  if (name == "RECEIVER") {
    return ComponentKind::Receiver;
  }
  throw LoadError("unknown component kind '" + name + "'");
}

std::vector<std::string> EventSequence::callbacks() const {
  std::vector<std::string> out;
  for (const auto& group : event_callbacks) {
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

const LifecycleState* LifecycleModel::find_state(
    const std::string& name) const {
  for (const auto& s : states) {
    if (s.name == name) {
      return &s;
    }
  }
  return nullptr;
}

LifecycleState* LifecycleModel::find_state(const std::string& name) {
  for (auto& s : states) {
    if (s.name == name) {
      return &s;
    }
  }
  return nullptr;
}

bool LifecycleModel::has_event(const std::string& name) const {
  return std::find(events.begin(), events.end(), name) != events.end();
}

bool LifecycleModel::has_callback(const std::string& name) const {
  return std::find(callbacks.begin(), callbacks.end(), name) !=
      callbacks.end();
}

std::vector<const Transition*> LifecycleModel::outgoing(
    const std::string& state) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions) {
    if (t.source == state) {
      out.push_back(&t);
    }
  }
  return out;
}

void LifecycleModel::validate() const {
  std::set<std::string> names;
  for (const auto& s : states) {
    if (!names.insert(s.name).second) {
      throw ValidationError("duplicate state '" + s.name + "'");
    }
  }
  std::set<std::string> seen_events;
  for (const auto& e : events) {
    if (!seen_events.insert(e).second) {
      throw ValidationError("duplicate event '" + e + "'");
    }
  }
  const auto* init = find_state(initial_state);
  if (init == nullptr) {
    throw ValidationError("initial state '" + initial_state + "' not found");
  }
  if (init->kind != StateKind::Static) {
    throw ValidationError("initial state '" + initial_state +
                          "' must be STATIC");
  }
  if (find_state(goal_state) == nullptr) {
    throw ValidationError("goal state '" + goal_state + "' not found");
  }
  for (size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    const std::string where = "transition #" + std::to_string(i);
    const auto* src = find_state(t.source);
    if (src == nullptr) {
      throw ValidationError(where + ": unknown source state '" + t.source +
                            "'");
    }
    if (find_state(t.destination) == nullptr) {
      throw ValidationError(where + ": unknown destination state '" +
                            t.destination + "'");
    }
    const auto& g = t.guard;
    if (g.is_else && (g.current_event || g.previous_event)) {
      throw ValidationError(where + ": else guard must not name events");
    }
    for (const auto* ev :
         {&g.current_event, &g.previous_event, &t.triggered_event}) {
      if (*ev && !has_event(**ev)) {
        throw ValidationError(where + ": unknown event '" + **ev + "'");
      }
    }
    if (t.triggered_event && g.current_event &&
        *t.triggered_event != *g.current_event) {
      throw ValidationError(where + ": guard event and triggers disagree");
    }
    if (src->kind == StateKind::Static && !t.introduced_event()) {
      throw ValidationError(where +
                            ": transition out of a static state must "
                            "introduce an event");
    }
    for (const auto& cb : t.emitted_callbacks) {
      if (!has_callback(cb)) {
        throw ValidationError(where + ": unknown callback '" + cb + "'");
      }
    }
  }
}

namespace {

std::string require_string(const json& obj, const char* key,
                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw LoadError(where + ": missing or non-string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key,
                                     const std::string& where,
                                     bool required) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) {
      throw LoadError(where + ": missing field '" + key + "'");
    }
    return out;
  }
  if (!it->is_array()) {
    throw LoadError(where + ": field '" + key + "' must be an array");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw LoadError(where + ": field '" + key + "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<std::string> last_event(const std::vector<std::string>& t) {
  if (t.empty()) {
    return std::nullopt;
  }
  return t.back();
}

// Guard check for a transition leaving static state `source`. An else
// guard is enabled when none of the sibling previous-event guards holds.
bool static_enabled(const LifecycleModel& model, const Transition& t,
                    const std::vector<std::string>& history) {
  auto prev = last_event(history);
  if (t.guard.previous_event && prev != t.guard.previous_event) {
    return false;
  }
  if (t.guard.is_else) {
    for (const auto* sib : model.outgoing(t.source)) {
      if (sib->guard.previous_event && prev == sib->guard.previous_event) {
        return false;
      }
    }
  }
  return true;
}

// Picks the transition a transient state takes for `event`. `history`
// already ends with `event`.
const Transition& transient_step(const LifecycleModel& model,
                                 const std::string& state,
                                 const std::string& event,
                                 const std::vector<std::string>& history) {
  std::optional<std::string> before;
  if (history.size() >= 2) {
    before = history[history.size() - 2];
  }
  const Transition* fallback = nullptr;
  for (const auto* t : model.outgoing(state)) {
    if (t->guard.is_else) {
      if (fallback == nullptr) {
        fallback = t;
      }
      continue;
    }
    if (t->guard.current_event && *t->guard.current_event != event) {
      continue;
    }
    if (t->guard.previous_event && before != t->guard.previous_event) {
      continue;
    }
    return *t;
  }
  if (fallback != nullptr) {
    return *fallback;
  }
  throw ModelError("transient state '" + state +
                   "' has no transition for event '" + event + "'");
}

// Follows transient states from `state` until a static one is reached.
// Returns the static state and appends emitted callbacks to `out`.
std::string settle(const LifecycleModel& model, std::string state,
                   const std::string& event,
                   const std::vector<std::string>& history,
                   std::vector<std::string>& out) {
  size_t guard_steps = 0;
  while (model.find_state(state)->kind == StateKind::Transient) {
    const auto& t = transient_step(model, state, event, history);
    out.insert(out.end(), t.emitted_callbacks.begin(),
               t.emitted_callbacks.end());
    if (t.destination == state || ++guard_steps > model.states.size()) {
      throw ModelError("transient cycle at '" + state + "' for event '" +
                       event + "'");
    }
    state = t.destination;
  }
  return state;
}

} // namespace

LifecycleModel parse_model(const std::string& json_text,
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
  LifecycleModel m;
  m.component_kind =
      component_kind_from_string(require_string(doc, "component_kind", origin));
  auto states = doc.find("states");
  if (states == doc.end() || !states->is_array()) {
    throw LoadError(origin + ": missing field 'states'");
  }
  for (const auto& s : *states) {
    LifecycleState st;
    st.name = require_string(s, "name", origin + ": states[]");
    auto kind = require_string(s, "kind", origin + ": states[" + st.name + "]");
    if (kind == "STATIC") {
      st.kind = StateKind::Static;
    } else if (kind == "TRANSIENT") {
      st.kind = StateKind::Transient;
    } else {
      throw LoadError(origin + ": state '" + st.name + "' has bad kind '" +
                      kind + "'");
    }
    m.states.push_back(st);
  }
  m.initial_state = require_string(doc, "initial", origin);
  m.goal_state = require_string(doc, "goal", origin);
  m.events = string_list(doc, "events", origin, true);
  auto transitions = doc.find("transitions");
  if (transitions == doc.end() || !transitions->is_array()) {
    throw LoadError(origin + ": missing field 'transitions'");
  }
  std::set<std::string> callbacks;
  for (size_t i = 0; i < transitions->size(); ++i) {
    const auto& j = (*transitions)[i];
    const std::string where = origin + ": transitions[" + std::to_string(i) +
        "]";
    Transition t;
    t.source = require_string(j, "from", where);
    t.destination = require_string(j, "to", where);
    if (auto g = j.find("guard"); g != j.end()) {
      if (!g->is_object()) {
        throw LoadError(where + ": 'guard' must be an object");
      }
      if (g->contains("event")) {
        t.guard.current_event = require_string(*g, "event", where + ".guard");
      }
      if (g->contains("prev_event")) {
        t.guard.previous_event =
            require_string(*g, "prev_event", where + ".guard");
      }
      if (auto e = g->find("else"); e != g->end()) {
        if (!e->is_boolean()) {
          throw LoadError(where + ".guard: 'else' must be boolean");
        }
        t.guard.is_else = e->get<bool>();
      }
    }
    t.emitted_callbacks = string_list(j, "callbacks", where, false);
    if (j.contains("triggers")) {
      t.triggered_event = require_string(j, "triggers", where);
    }
    for (const auto& cb : t.emitted_callbacks) {
      callbacks.insert(cb);
    }
    m.transitions.push_back(std::move(t));
  }
  if (doc.contains("callbacks")) {
    m.callbacks = string_list(doc, "callbacks", origin, true);
  } else {
    m.callbacks.assign(callbacks.begin(), callbacks.end());
  }
  m.validate();
  return m;
}

LifecycleModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open model file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), path);
}

std::vector<EventSequence> derive_event_sequences(LifecycleModel& model) {
  std::vector<EventSequence> result;
  EventSequence path;

  std::function<void(const std::string&, const std::string&)> visit =
      [&](const std::string& name, const std::string& event) {
        auto* state = model.find_state(name);
        if (state->kind == StateKind::Static && !path.landing.empty()) {
          path.landing.back() = name;
        }
        if (name == model.goal_state &&
            (state->color != Color::White || model.outgoing(name).empty())) {
          result.push_back(path);
          return;
        }
        if (state->kind == StateKind::Transient) {
          const auto& t = transient_step(model, name, event, path.events);
          if (t.destination == name) {
            return;
          }
          auto& group = path.event_callbacks.back();
          size_t mark = group.size();
          group.insert(group.end(), t.emitted_callbacks.begin(),
                       t.emitted_callbacks.end());
          visit(t.destination, event);
          path.event_callbacks.back().resize(mark);
          return;
        }
        if (state->color == Color::Red) {
          return;
        }
        Color saved = state->color;
        state->color = saved == Color::White ? Color::Grey : Color::Red;
        for (const auto* t : model.outgoing(name)) {
          if (t->destination == name) {
            continue;
          }
          if (!static_enabled(model, *t, path.events)) {
            continue;
          }
          const std::string next = *t->introduced_event();
          path.events.push_back(next);
          path.event_callbacks.push_back(t->emitted_callbacks);
          path.landing.emplace_back();
          visit(t->destination, next);
          path.events.pop_back();
          path.event_callbacks.pop_back();
          path.landing.pop_back();
        }
        state->color = saved;
      };

  try {
    visit(model.initial_state, "");
  } catch (...) {
    for (auto& s : model.states) {
      s.color = Color::White;
    }
    throw;
  }
  return result;
}

std::vector<std::string> callbacks_for_event(const LifecycleModel& model,
                                             const std::string& event) {
  if (!model.has_event(event)) {
    throw std::out_of_range("unknown event '" + event + "'");
  }
  std::vector<std::string> order{model.goal_state};
  for (const auto& s : model.states) {
    if (s.kind == StateKind::Static && s.name != model.goal_state) {
      order.push_back(s.name);
    }
  }
  for (const auto& name : order) {
    for (const auto* t : model.outgoing(name)) {
      if (t->introduced_event() != event) {
        continue;
      }
      std::vector<std::string> out = t->emitted_callbacks;
      settle(model, t->destination, event, {event}, out);
      return out;
    }
  }
  throw std::out_of_range("no static state accepts event '" + event + "'");
}

namespace {

struct ReplayRun {
  std::string state;
  std::vector<std::string> history;
  std::vector<std::string> callbacks;
};

std::vector<ReplayRun> replay_all(const LifecycleModel& model,
                                  const std::vector<std::string>& events) {
  std::vector<ReplayRun> runs{{model.initial_state, {}, {}}};
  for (const auto& ev : events) {
    std::vector<ReplayRun> next;
    for (const auto& run : runs) {
      for (const auto* t : model.outgoing(run.state)) {
        if (t->introduced_event() != ev ||
            !static_enabled(model, *t, run.history)) {
          continue;
        }
        ReplayRun r = run;
        r.history.push_back(ev);
        r.callbacks.insert(r.callbacks.end(), t->emitted_callbacks.begin(),
                           t->emitted_callbacks.end());
        try {
          r.state = settle(model, t->destination, ev, r.history, r.callbacks);
        } catch (const ModelError&) {
          continue;
        }
        next.push_back(std::move(r));
      }
    }
    runs = std::move(next);
    if (runs.empty()) {
      break;
    }
  }
  return runs;
}

} // namespace

bool replay_reaches_goal(const LifecycleModel& model,
                         const std::vector<std::string>& events) {
  for (const auto& r : replay_all(model, events)) {
    if (r.state == model.goal_state) {
      return true;
    }
  }
  return false;
}

bool replay_accepts(const LifecycleModel& model,
                    const std::vector<std::string>& events) {
  return !replay_all(model, events).empty();
}

std::vector<std::vector<std::string>> replay_callbacks(
    const LifecycleModel& model, const std::vector<std::string>& events,
    bool require_goal) {
  std::vector<std::vector<std::string>> out;
  for (auto& r : replay_all(model, events)) {
    if ((!require_goal || r.state == model.goal_state) &&
        std::find(out.begin(), out.end(), r.callbacks) == out.end()) {
      out.push_back(std::move(r.callbacks));
    }
  }
  return out;
}

} // namespace lifetaint
