/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/symbol_space.h"

#include <utility>
#include <vector>

namespace lifetaint {

std::string Location::str() const {
  return class_name + "." + method + "@" + std::to_string(index);
}

const char* to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Primitive:
      return "PRIMITIVE";
    case ValueKind::ImmutableRef:
      return "IMMUTABLE_REF";
    case ValueKind::MutableRef:
      return "MUTABLE_REF";
    case ValueKind::Collection:
      return "COLLECTION";
  }
  return "?";
}

Entry make_entry(const std::string& name, ValueKind kind,
                 const std::string& class_name) {
  auto d = std::make_shared<EntryDetails>();
  d->kind = kind;
  d->class_name = class_name;
  return Entry{name, std::move(d)};
}

std::shared_ptr<EntryDetails> deep_copy(
    const std::shared_ptr<EntryDetails>& details, CopyMemo& memo) {
  if (!details) {
    return nullptr;
  }
  if (auto it = memo.find(details.get()); it != memo.end()) {
    return it->second;
  }
  auto copy = std::make_shared<EntryDetails>();
  memo.emplace(details.get(), copy);
  copy->taints = details->taints;
  copy->kind = details->kind;
  copy->const_value = details->const_value;
  copy->class_name = details->class_name;
  for (const auto& [field, e] : details->fields) {
    copy->fields.emplace(field, Entry{e.name, deep_copy(e.details, memo)});
  }
  return copy;
}

Entry deep_copy(const Entry& e, CopyMemo& memo) {
  return Entry{e.name, deep_copy(e.details, memo)};
}

Entry deep_copy(const Entry& e) {
  CopyMemo memo;
  return deep_copy(e, memo);
}

Entry assign_copy(const Entry& e, const std::string& new_name) {
  if (shares_on_copy(e.details->kind)) {
    return Entry{new_name, e.details};
  }
  CopyMemo memo;
  return Entry{new_name, deep_copy(e.details, memo)};
}

namespace {

void collect(const EntryDetails* d, std::set<const EntryDetails*>& seen,
             TaintSet& out) {
  if (d == nullptr || !seen.insert(d).second) {
    return;
  }
  out.insert(d->taints.begin(), d->taints.end());
  for (const auto& [_, f] : d->fields) {
    collect(f.details.get(), seen, out);
  }
}

using PairSet = std::set<std::pair<const EntryDetails*, const EntryDetails*>>;

void restore(EntryDetails& into, const EntryDetails& from, CopyMemo& memo,
             PairSet& seen) {
  if (&into == &from || !seen.insert({&into, &from}).second) {
    return;
  }
  into.taints.insert(from.taints.begin(), from.taints.end());
  for (const auto& [field, fe] : from.fields) {
    auto it = into.fields.find(field);
    if (it == into.fields.end()) {
      into.fields.emplace(field, deep_copy(fe, memo));
    } else if (it->second.details && fe.details) {
      restore(*it->second.details, *fe.details, memo, seen);
    }
  }
}

using MergeMemo =
    std::map<std::pair<const EntryDetails*, const EntryDetails*>,
             std::shared_ptr<EntryDetails>>;

std::shared_ptr<EntryDetails> merge(const std::shared_ptr<EntryDetails>& a,
                                    const std::shared_ptr<EntryDetails>& b,
                                    MergeMemo& memo) {
  if (a == b || !b) {
    return a;
  }
  if (!a) {
    return b;
  }
  auto key = std::make_pair(a.get(), b.get());
  if (auto it = memo.find(key); it != memo.end()) {
    return it->second;
  }
  auto out = std::make_shared<EntryDetails>();
  memo.emplace(key, out);
  out->kind = a->kind;
  out->class_name =
      a->class_name == b->class_name ? a->class_name : std::string{};
  out->taints = a->taints;
  out->taints.insert(b->taints.begin(), b->taints.end());
  if (a->const_value && b->const_value &&
      a->const_value->literal == b->const_value->literal) {
    out->const_value = a->const_value;
  }
  out->fields = a->fields;
  for (const auto& [field, fe] : b->fields) {
    auto it = out->fields.find(field);
    if (it == out->fields.end()) {
      out->fields.emplace(field, fe);
    } else {
      it->second.details = merge(it->second.details, fe.details, memo);
    }
  }
  return out;
}

} // namespace

TaintSet collect_taints(const Entry& e) {
  TaintSet out;
  std::set<const EntryDetails*> seen;
  collect(e.details.get(), seen, out);
  return out;
}

bool is_tainted(const Entry& e) {
  return !collect_taints(e).empty();
}

Table deep_copy(const Table& t, CopyMemo& memo) {
  Table out;
  for (const auto& [name, e] : t) {
    out.emplace(name, deep_copy(e, memo));
  }
  return out;
}

void restore_taints(Entry& into, const Entry& from, CopyMemo& memo) {
  if (!into.details || !from.details) {
    return;
  }
  PairSet seen;
  restore(*into.details, *from.details, memo, seen);
}

void restore_taints(Table& into, const Table& from, CopyMemo& memo) {
  PairSet seen;
  for (const auto& [name, fe] : from) {
    auto it = into.find(name);
    if (it == into.end()) {
      into.emplace(name, deep_copy(fe, memo));
    } else if (it->second.details && fe.details) {
      restore(*it->second.details, *fe.details, memo, seen);
    }
  }
}

Entry merge_entries(const Entry& a, const Entry& b) {
  MergeMemo memo;
  return Entry{a.name, merge(a.details, b.details, memo)};
}

Entry* SymbolSpace::lookup(const std::string& name) {
  for (auto* t : tables_) {
    if (auto it = t->find(name); it != t->end()) {
      return &it->second;
    }
  }
  return nullptr;
}

const Entry* SymbolSpace::lookup(const std::string& name) const {
  for (const auto* t : tables_) {
    if (auto it = t->find(name); it != t->end()) {
      return &it->second;
    }
  }
  return nullptr;
}

void SymbolSpace::define(const std::string& name, Entry e) {
  e.name = name;
  (*tables_[Block])[name] = std::move(e);
}

} // namespace lifetaint
