/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

namespace lifetaint {

struct Location {
  std::string class_name;
  std::string method; // local signature, e.g. "onResume/0"
  int index = -1;

  auto operator<=>(const Location&) const = default;
  std::string str() const;
};

struct TaintTag {
  std::string source_api;
  Location location;

  auto operator<=>(const TaintTag&) const = default;
};

using TaintSet = std::set<TaintTag>;

enum class ValueKind { Primitive, ImmutableRef, MutableRef, Collection };

const char* to_string(ValueKind kind);

// Aliasing follows Java value semantics: primitives and immutable objects
// are deep-copied on assignment, everything else is shared.
inline bool shares_on_copy(ValueKind kind) {
  return kind == ValueKind::MutableRef || kind == ValueKind::Collection;
}

struct ConstValue {
  std::string literal;
  Location origin;

  bool operator==(const ConstValue&) const = default;
};

struct EntryDetails;

struct Entry {
  std::string name;
  std::shared_ptr<EntryDetails> details;
};

struct EntryDetails {
  TaintSet taints;
  std::map<std::string, Entry> fields;
  ValueKind kind = ValueKind::MutableRef;
  std::optional<ConstValue> const_value;
  std::string class_name; // runtime type when known
};

Entry make_entry(const std::string& name, ValueKind kind,
                 const std::string& class_name = {});

// Memo keyed by source details so shared sub-objects stay shared (and
// cycles terminate) inside one copy operation.
using CopyMemo =
    std::unordered_map<const EntryDetails*, std::shared_ptr<EntryDetails>>;

std::shared_ptr<EntryDetails> deep_copy(
    const std::shared_ptr<EntryDetails>& details, CopyMemo& memo);
Entry deep_copy(const Entry& e, CopyMemo& memo);
Entry deep_copy(const Entry& e);

// Copy for assignment/parameter passing: shallow for mutable references,
// deep otherwise. The result carries `new_name`.
Entry assign_copy(const Entry& e, const std::string& new_name);

// Taints of the entry and of every reachable field.
TaintSet collect_taints(const Entry& e);

// True if `e` or any reachable field is tainted.
bool is_tainted(const Entry& e);

using Table = std::map<std::string, Entry>;

// Copies a table entry by entry with one memo, preserving aliasing among
// its entries.
Table deep_copy(const Table& t, CopyMemo& memo);

// Unions taints from `from` into the matching entries/fields of `into`.
// Fields present only in `from` are deep-copied over.
void restore_taints(Entry& into, const Entry& from, CopyMemo& memo);
void restore_taints(Table& into, const Table& from, CopyMemo& memo);

// Conservative join of two entries that may not alias. Shared details are
// returned unchanged; otherwise a fresh merged object is built.
Entry merge_entries(const Entry& a, const Entry& b);

// Layered lookup: block, method, class (instance), global (statics).
class SymbolSpace {
 public:
  enum Level { Block = 0, Method = 1, Class = 2, Global = 3 };

  SymbolSpace() = default;
  SymbolSpace(const SymbolSpace&) = delete;
  SymbolSpace& operator=(const SymbolSpace&) = delete;

  Table& level(Level l) { return *tables_[l]; }
  const Table& level(Level l) const { return *tables_[l]; }

  // Binds a level to an external table (e.g. the per-sequence statics).
  void bind(Level l, Table* t) { tables_[l] = t; }

  Entry* lookup(const std::string& name);
  const Entry* lookup(const std::string& name) const;

  // Writes into the block level, shadowing outer bindings.
  void define(const std::string& name, Entry e);

 private:
  Table own_[4];
  Table* tables_[4] = {&own_[0], &own_[1], &own_[2], &own_[3]};
};

} // namespace lifetaint
