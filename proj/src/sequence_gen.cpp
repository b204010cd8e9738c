/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/sequence_gen.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lifetaint {

const char* to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::LifecycleSubsequence:
      return "LIFECYCLE_SUBSEQUENCE";
    case UnitKind::AuiCallback:
      return "AUI_CALLBACK";
    case UnitKind::MiscCallback:
      return "MISC_CALLBACK";
  }
  return "?";
}

std::string resolve_callback(const AppModel& app, const ComponentDef& comp,
                             const std::string& callback) {
  const auto* cls = app.find_class(comp.class_name);
  if (cls == nullptr) {
    return {};
  }
  auto found = cls->methods_named(callback);
  if (found.empty()) {
    return {};
  }
  return found.front()->signature();
}

namespace {

CallbackSequence resolve_all(const AppModel& app, const ComponentDef& comp,
                             const std::vector<std::string>& names) {
  CallbackSequence out;
  for (const auto& n : names) {
    auto sig = resolve_callback(app, comp, n);
    if (!sig.empty()) {
      out.push_back(std::move(sig));
    }
  }
  return out;
}

void push_unique(std::vector<CallbackSequence>& out, CallbackSequence seq) {
  if (seq.empty()) {
    return;
  }
  if (std::find(out.begin(), out.end(), seq) == out.end()) {
    out.push_back(std::move(seq));
  }
}

// Receivers have one state; each of its self-loops is one invocation.
std::vector<std::vector<std::string>> receiver_entries(
    const LifecycleModel& model) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : model.transitions) {
    out.push_back(t.emitted_callbacks);
  }
  return out;
}

} // namespace

std::vector<CallbackSequence> derive_callback_sequences(
    const LifecycleModel& model, const AppModel& app,
    const ComponentDef& comp) {
  std::vector<CallbackSequence> out;
  if (model.component_kind == ComponentKind::Receiver) {
    for (const auto& names : receiver_entries(model)) {
      push_unique(out, resolve_all(app, comp, names));
    }
    return out;
  }
  LifecycleModel work = model;
  for (const auto& seq : derive_event_sequences(work)) {
    push_unique(out, resolve_all(app, comp, seq.callbacks()));
  }
  return out;
}

std::vector<PermutationUnit> build_permutation_units(
    const LifecycleModel& model, const AppModel& app,
    const ComponentDef& comp) {
  std::vector<PermutationUnit> units;
  auto add = [&](UnitKind kind, CallbackSequence cbs,
                 std::vector<std::string> events) {
    if (cbs.empty()) {
      return;
    }
    for (const auto& u : units) {
      if (u.callbacks == cbs) {
        return;
      }
    }
    units.push_back({kind, std::move(cbs), std::move(events)});
  };

  if (model.component_kind == ComponentKind::Receiver) {
    for (const auto& t : model.transitions) {
      add(UnitKind::LifecycleSubsequence,
          resolve_all(app, comp, t.emitted_callbacks),
          {*t.introduced_event()});
    }
  } else {
    LifecycleModel work = model;
    for (const auto& seq : derive_event_sequences(work)) {
      if (model.component_kind == ComponentKind::Service) {
        add(UnitKind::LifecycleSubsequence,
            resolve_all(app, comp, seq.callbacks()), seq.events);
        continue;
      }
      // Activity: split the tail after the leading event at every return
      // to the goal state.
      std::vector<std::string> events;
      std::vector<std::string> names;
      for (size_t i = 1; i < seq.events.size(); ++i) {
        events.push_back(seq.events[i]);
        names.insert(names.end(), seq.event_callbacks[i].begin(),
                     seq.event_callbacks[i].end());
        if (seq.landing[i] == model.goal_state) {
          add(UnitKind::LifecycleSubsequence, resolve_all(app, comp, names),
              events);
          events.clear();
          names.clear();
        }
      }
    }
  }

  const auto* cls = app.find_class(comp.class_name);
  auto add_single = [&](UnitKind kind, const std::string& name) {
    if (cls == nullptr) {
      return;
    }
    for (const auto* m : cls->methods_named(name)) {
      add(kind, {m->signature()}, {});
      return;
    }
  };
  if (model.component_kind == ComponentKind::Activity) {
    for (const auto& cb : comp.aui_callbacks) {
      add_single(UnitKind::AuiCallback, cb);
    }
  }
  for (const auto& cb : comp.misc_callbacks) {
    add_single(UnitKind::MiscCallback, cb);
  }
  return units;
}

PermutationPlan make_plan(const LifecycleModel& model, const AppModel& app,
                          const ComponentDef& comp, int m) {
  PermutationPlan plan;
  plan.m = m;
  plan.units = build_permutation_units(model, app, comp);
  if (m < 1 || static_cast<size_t>(m) > plan.units.size()) {
    throw std::invalid_argument("m=" + std::to_string(m) +
                                " outside [1, " +
                                std::to_string(plan.units.size()) + "]");
  }
  if (model.component_kind == ComponentKind::Activity) {
    LifecycleModel work = model;
    auto seqs = derive_event_sequences(work);
    if (!seqs.empty()) {
      plan.prefix_events = {seqs.front().events.front()};
      plan.prefix =
          resolve_all(app, comp, seqs.front().event_callbacks.front());
    }
  }
  return plan;
}

std::uint64_t permutation_count(std::uint64_t n, std::uint64_t m) {
  if (m > n) {
    return 0;
  }
  std::uint64_t out = 1;
  for (std::uint64_t k = 0; k < m; ++k) {
    std::uint64_t f = n - k;
    if (out > std::numeric_limits<std::uint64_t>::max() / f) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= f;
  }
  return out;
}

MWayPermutations::MWayPermutations(const PermutationPlan& plan)
    : plan_(plan), used_(plan.units.size(), false) {
  if (plan.m < 1 || static_cast<size_t>(plan.m) > plan.units.size()) {
    throw std::invalid_argument("m out of range");
  }
}

std::uint64_t MWayPermutations::total() const {
  return permutation_count(plan_.units.size(), plan_.m);
}

bool MWayPermutations::advance() {
  const size_t n = plan_.units.size();
  const size_t m = static_cast<size_t>(plan_.m);
  if (!started_) {
    started_ = true;
    for (size_t i = 0; i < m; ++i) {
      indices_.push_back(i);
      used_[i] = true;
    }
    return true;
  }
  // Find the rightmost position that can move to a larger unused index,
  // then fill the suffix with the smallest unused indices.
  for (size_t pos = m; pos-- > 0;) {
    used_[indices_[pos]] = false;
    size_t cand = indices_[pos] + 1;
    while (cand < n && used_[cand]) {
      ++cand;
    }
    if (cand < n) {
      indices_[pos] = cand;
      used_[cand] = true;
      size_t fill = 0;
      for (size_t k = pos + 1; k < m; ++k) {
        while (used_[fill]) {
          ++fill;
        }
        indices_[k] = fill;
        used_[fill] = true;
      }
      return true;
    }
  }
  return false;
}

bool MWayPermutations::next(CallbackSequence& out) {
  if (done_ || !advance()) {
    done_ = true;
    return false;
  }
  out = plan_.prefix;
  for (size_t idx : indices_) {
    const auto& cbs = plan_.units[idx].callbacks;
    out.insert(out.end(), cbs.begin(), cbs.end());
  }
  return true;
}

} // namespace lifetaint
