/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lifetaint/lifecycle_model.h"

namespace lifetaint {

enum class ParentKind { Activity, Service, Receiver, Thread, AsyncTask, Plain };

const char* to_string(ParentKind kind);

enum class Opcode {
  ConstString,
  ConstNum,
  Move,
  NewInstance,
  InvokeVirtual,
  InvokeStatic,
  InvokeDirect,
  Iget,
  Iput,
  Sget,
  Sput,
  CollectionNew,
  CollectionPut,
  CollectionGet,
  IfGoto,
  Goto,
  Return,
  ReturnVoid,
};

const char* to_string(Opcode op);
std::optional<Opcode> opcode_from_string(const std::string& name);

bool is_invoke(Opcode op);
bool is_branch(Opcode op);
bool ends_block(Opcode op);

/*
 * Operand layout per opcode (registers are plain names):
 *
 *   CONST_STRING   dst "literal"
 *   CONST_NUM      dst number
 *   MOVE           dst src
 *   NEW_INSTANCE   dst Type
 *   INVOKE_*       "Class.method/N" [args...] [dst]
 *   IGET           dst obj field
 *   IPUT           val obj field
 *   SGET           dst "Class.field"
 *   SPUT           val "Class.field"
 *   COLLECTION_NEW dst
 *   COLLECTION_PUT coll key val
 *   COLLECTION_GET dst coll key
 *   IF_GOTO        reg label
 *   GOTO           label
 *   RETURN         reg
 *   RETURN_VOID
 *
 * For virtual and direct invokes args[0] is the receiver; N never counts
 * the receiver.
 */
struct Instruction {
  Opcode op = Opcode::ReturnVoid;
  std::vector<std::string> regs;
  std::string symbol; // method signature, field, type or label
  std::string literal; // CONST_STRING text or CONST_NUM spelling
  std::vector<std::string> args; // invoke arguments

  // Register written by this instruction, if any.
  std::optional<std::string> defined_register() const;
  // Registers read by this instruction.
  std::vector<std::string> used_registers() const;
};

struct Param {
  std::string name;
  std::string type; // empty when untyped
};

struct MethodDef {
  std::string class_name;
  std::string name;
  int arity = 0; // excludes the receiver
  bool is_static = false;
  std::vector<Param> params;
  std::vector<std::string> registers; // locals, params excluded
  std::vector<Instruction> instructions;
  std::map<std::string, int> labels;

  // "Class.name/N"
  std::string signature() const;
  // "name/N"
  std::string local_signature() const;
  bool declares(const std::string& reg) const;
};

struct ClassDef {
  std::string name;
  ParentKind parent_kind = ParentKind::Plain;
  std::vector<std::string> fields;
  std::vector<std::string> static_fields;
  std::vector<MethodDef> methods;

  const MethodDef* find_method(const std::string& local_sig) const;
  // Methods named `name`, any arity, in declaration order.
  std::vector<const MethodDef*> methods_named(const std::string& name) const;
};

struct ComponentDef {
  std::string class_name;
  ComponentKind kind = ComponentKind::Activity;
  std::vector<std::string> aui_callbacks;
  std::vector<std::string> misc_callbacks;
};

struct AppModel {
  std::string app_id;
  std::string version;
  std::vector<ClassDef> classes;
  std::vector<ComponentDef> components;

  const ClassDef* find_class(const std::string& name) const;
  // App-defined method for a full signature, or nullptr for external APIs.
  const MethodDef* resolve_method(const std::string& signature) const;
};

struct SignatureParts {
  std::string class_name;
  std::string method;
  int arity = 0;
};

// Splits "Class.method/N". Throws LoadError on malformed input.
SignatureParts parse_signature(const std::string& sig);

AppModel load_app(const std::string& path);
AppModel parse_app(const std::string& json_text,
                   const std::string& origin = "<memory>");

// Canonical JSON text (sorted keys, two-space indent).
std::string serialize_app(const AppModel& app);

} // namespace lifetaint
