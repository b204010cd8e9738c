/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/app_ir.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lifetaint/errors.h"

namespace lifetaint {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Opcode, const char*>, 18> kOpcodeNames{{
    {Opcode::ConstString, "CONST_STRING"},
    {Opcode::ConstNum, "CONST_NUM"},
    {Opcode::Move, "MOVE"},
    {Opcode::NewInstance, "NEW_INSTANCE"},
    {Opcode::InvokeVirtual, "INVOKE_VIRTUAL"},
    {Opcode::InvokeStatic, "INVOKE_STATIC"},
    {Opcode::InvokeDirect, "INVOKE_DIRECT"},
    {Opcode::Iget, "IGET"},
    {Opcode::Iput, "IPUT"},
    {Opcode::Sget, "SGET"},
    {Opcode::Sput, "SPUT"},
    {Opcode::CollectionNew, "COLLECTION_NEW"},
    {Opcode::CollectionPut, "COLLECTION_PUT"},
    {Opcode::CollectionGet, "COLLECTION_GET"},
    {Opcode::IfGoto, "IF_GOTO"},
    {Opcode::Goto, "GOTO"},
    {Opcode::Return, "RETURN"},
    {Opcode::ReturnVoid, "RETURN_VOID"},
}};

constexpr std::array<std::pair<ParentKind, const char*>, 6> kParentNames{{
    {ParentKind::Activity, "ACTIVITY"},
    {ParentKind::Service, "SERVICE"},
    {ParentKind::Receiver, "RECEIVER"},
    {ParentKind::Thread, "THREAD"},
    {ParentKind::AsyncTask, "ASYNC_TASK"},
    {ParentKind::Plain, "PLAIN"},
}};

ParentKind parent_kind_from_string(const std::string& name,
                                   const std::string& where) {
  for (const auto& [kind, text] : kParentNames) {
    if (name == text) {
      return kind;
    }
  }
  throw LoadError(where + ": unknown parent_kind '" + name + "'");
}

std::string get_string(const json& obj, const char* key,
                       const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw LoadError(where + ": missing or non-string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> get_strings(const json& obj, const char* key,
                                     const std::string& where) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) {
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

std::string operand_string(const json& ins, size_t i,
                           const std::string& where) {
  if (i >= ins.size() || !ins[i].is_string()) {
    throw LoadError(where + ": operand " + std::to_string(i) +
                    " must be a string");
  }
  return ins[i].get<std::string>();
}

Instruction parse_instruction(const json& ins, const std::string& where) {
  if (!ins.is_array() || ins.empty() || !ins[0].is_string()) {
    throw LoadError(where + ": instruction must be [\"OPCODE\", ...]");
  }
  auto name = ins[0].get<std::string>();
  auto op = opcode_from_string(name);
  if (!op) {
    throw LoadError(where + ": unknown opcode '" + name + "'");
  }
  Instruction out;
  out.op = *op;
  auto expect = [&](size_t lo, size_t hi) {
    if (ins.size() < lo || ins.size() > hi) {
      throw ValidationError(where + ": " + name + " takes " +
                            std::to_string(lo - 1) +
                            (lo == hi ? "" : "-" + std::to_string(hi - 1)) +
                            " operands");
    }
  };
  auto s = [&](size_t i) { return operand_string(ins, i, where); };
  switch (*op) {
    case Opcode::ConstString:
      expect(3, 3);
      out.regs = {s(1)};
      out.literal = s(2);
      break;
    case Opcode::ConstNum:
      expect(3, 3);
      if (!ins[2].is_number()) {
        throw LoadError(where + ": CONST_NUM literal must be a number");
      }
      out.regs = {s(1)};
      out.literal = ins[2].dump();
      break;
    case Opcode::Move:
      expect(3, 3);
      out.regs = {s(1), s(2)};
      break;
    case Opcode::NewInstance:
      expect(3, 3);
      out.regs = {s(1)};
      out.symbol = s(2);
      break;
    case Opcode::InvokeVirtual:
    case Opcode::InvokeStatic:
    case Opcode::InvokeDirect:
      expect(3, 4);
      out.symbol = s(1);
      if (!ins[2].is_array()) {
        throw LoadError(where + ": invoke arguments must be an array");
      }
      for (const auto& a : ins[2]) {
        if (!a.is_string()) {
          throw LoadError(where + ": invoke arguments must be registers");
        }
        out.args.push_back(a.get<std::string>());
      }
      if (ins.size() == 4) {
        out.regs = {s(3)};
      }
      break;
    case Opcode::Iget:
    case Opcode::Iput:
      expect(4, 4);
      out.regs = {s(1), s(2)};
      out.symbol = s(3);
      break;
    case Opcode::Sget:
    case Opcode::Sput:
      expect(3, 3);
      out.regs = {s(1)};
      out.symbol = s(2);
      break;
    case Opcode::CollectionNew:
      expect(2, 2);
      out.regs = {s(1)};
      break;
    case Opcode::CollectionPut:
    case Opcode::CollectionGet:
      expect(4, 4);
      out.regs = {s(1), s(2), s(3)};
      break;
    case Opcode::IfGoto:
      expect(3, 3);
      out.regs = {s(1)};
      out.symbol = s(2);
      break;
    case Opcode::Goto:
      expect(2, 2);
      out.symbol = s(1);
      break;
    case Opcode::Return:
      expect(2, 2);
      out.regs = {s(1)};
      break;
    case Opcode::ReturnVoid:
      expect(1, 1);
      break;
  }
  return out;
}

json instruction_to_json(const Instruction& ins) {
  json out = json::array({to_string(ins.op)});
  switch (ins.op) {
    case Opcode::ConstString:
      out.push_back(ins.regs[0]);
      out.push_back(ins.literal);
      break;
    case Opcode::ConstNum:
      out.push_back(ins.regs[0]);
      out.push_back(json::parse(ins.literal));
      break;
    case Opcode::Move:
      out.push_back(ins.regs[0]);
      out.push_back(ins.regs[1]);
      break;
    case Opcode::NewInstance:
    case Opcode::Sget:
    case Opcode::Sput:
    case Opcode::IfGoto:
      out.push_back(ins.regs[0]);
      out.push_back(ins.symbol);
      break;
    case Opcode::InvokeVirtual:
    case Opcode::InvokeStatic:
    case Opcode::InvokeDirect:
      out.push_back(ins.symbol);
      out.push_back(ins.args);
      if (!ins.regs.empty()) {
        out.push_back(ins.regs[0]);
      }
      break;
    case Opcode::Iget:
    case Opcode::Iput:
      out.push_back(ins.regs[0]);
      out.push_back(ins.regs[1]);
      out.push_back(ins.symbol);
      break;
    case Opcode::CollectionNew:
    case Opcode::Return:
      out.push_back(ins.regs[0]);
      break;
    case Opcode::CollectionPut:
    case Opcode::CollectionGet:
      for (const auto& r : ins.regs) {
        out.push_back(r);
      }
      break;
    case Opcode::Goto:
      out.push_back(ins.symbol);
      break;
    case Opcode::ReturnVoid:
      break;
  }
  return out;
}

MethodDef parse_method(const json& j, const std::string& class_name,
                       const std::string& where_class) {
  MethodDef m;
  m.class_name = class_name;
  auto sig = get_string(j, "sig", where_class);
  auto slash = sig.rfind('/');
  if (slash == std::string::npos || slash == 0) {
    throw LoadError(where_class + ": method sig '" + sig +
                    "' must look like name/N");
  }
  m.name = sig.substr(0, slash);
  try {
    size_t used = 0;
    m.arity = std::stoi(sig.substr(slash + 1), &used);
    if (used != sig.size() - slash - 1 || m.arity < 0) {
      throw std::invalid_argument("arity");
    }
  } catch (const std::exception&) {
    throw LoadError(where_class + ": method sig '" + sig +
                    "' has a bad arity");
  }
  const std::string where = where_class + " method " + sig;
  if (auto st = j.find("static"); st != j.end()) {
    if (!st->is_boolean()) {
      throw LoadError(where + ": 'static' must be boolean");
    }
    m.is_static = st->get<bool>();
  }
  for (const auto& p : get_strings(j, "params", where)) {
    Param param;
    auto colon = p.find(':');
    param.name = p.substr(0, colon);
    if (colon != std::string::npos) {
      param.type = p.substr(colon + 1);
    }
    m.params.push_back(param);
  }
  if (static_cast<int>(m.params.size()) != m.arity) {
    throw ValidationError(where + ": declares " +
                          std::to_string(m.params.size()) +
                          " params but arity " + std::to_string(m.arity));
  }
  m.registers = get_strings(j, "registers", where);
  auto ins = j.find("instructions");
  if (ins == j.end() || !ins->is_array()) {
    throw LoadError(where + ": missing 'instructions' array");
  }
  for (size_t i = 0; i < ins->size(); ++i) {
    m.instructions.push_back(parse_instruction(
        (*ins)[i], where + " instruction #" + std::to_string(i)));
  }
  if (auto labels = j.find("labels"); labels != j.end()) {
    if (!labels->is_object()) {
      throw LoadError(where + ": 'labels' must be an object");
    }
    for (const auto& [name, idx] : labels->items()) {
      if (!idx.is_number_integer()) {
        throw LoadError(where + ": label '" + name + "' must be an index");
      }
      m.labels[name] = idx.get<int>();
    }
  }
  return m;
}

void validate_method(const MethodDef& m, const AppModel& app,
                     const std::string& origin) {
  const std::string where = origin + ": method " + m.signature();
  std::set<std::string> seen;
  for (const auto& p : m.params) {
    if (!seen.insert(p.name).second) {
      throw ValidationError(where + ": duplicate register '" + p.name + "'");
    }
  }
  for (const auto& r : m.registers) {
    if (!seen.insert(r).second) {
      throw ValidationError(where + ": duplicate register '" + r + "'");
    }
  }
  const int n = static_cast<int>(m.instructions.size());
  for (const auto& [label, idx] : m.labels) {
    if (idx < 0 || idx >= n) {
      throw ValidationError(where + ": label '" + label +
                            "' points outside the method");
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto& ins = m.instructions[i];
    const std::string at = where + " instruction #" + std::to_string(i);
    for (const auto& r : ins.used_registers()) {
      if (!m.declares(r)) {
        throw ValidationError(at + ": undeclared register '" + r + "'");
      }
    }
    if (auto d = ins.defined_register(); d && !m.declares(*d)) {
      throw ValidationError(at + ": undeclared register '" + *d + "'");
    }
    if (is_branch(ins.op) && !m.labels.count(ins.symbol)) {
      throw ValidationError(at + ": unknown label '" + ins.symbol + "'");
    }
    if (is_invoke(ins.op)) {
      auto parts = parse_signature(ins.symbol);
      size_t want = static_cast<size_t>(parts.arity) +
          (ins.op == Opcode::InvokeStatic ? 0 : 1);
      if (ins.args.size() != want) {
        throw ValidationError(at + ": " + ins.symbol + " expects " +
                              std::to_string(want) + " argument registers");
      }
      if (const auto* callee = app.resolve_method(ins.symbol)) {
        if (callee->is_static != (ins.op == Opcode::InvokeStatic)) {
          throw ValidationError(at + ": invoke kind does not match " +
                                ins.symbol);
        }
      }
    }
    if (ins.op == Opcode::Sget || ins.op == Opcode::Sput) {
      auto dot = ins.symbol.rfind('.');
      if (dot == std::string::npos) {
        throw ValidationError(at + ": static field must be Class.field");
      }
      if (const auto* cls = app.find_class(ins.symbol.substr(0, dot))) {
        const auto field = ins.symbol.substr(dot + 1);
        if (std::find(cls->static_fields.begin(), cls->static_fields.end(),
                      field) == cls->static_fields.end()) {
          throw ValidationError(at + ": unknown static field " + ins.symbol);
        }
      }
    }
  }
}

} // namespace

const char* to_string(ParentKind kind) {
  for (const auto& [k, text] : kParentNames) {
    if (k == kind) {
      return text;
    }
  }
  return "?";
}

const char* to_string(Opcode op) {
  for (const auto& [o, text] : kOpcodeNames) {
    if (o == op) {
      return text;
    }
  }
  return "?";
}

std::optional<Opcode> opcode_from_string(const std::string& name) {
  for (const auto& [o, text] : kOpcodeNames) {
    if (name == text) {
      return o;
    }
  }
  return std::nullopt;
}

bool is_invoke(Opcode op) {
  return op == Opcode::InvokeVirtual || op == Opcode::InvokeStatic ||
      op == Opcode::InvokeDirect;
}

bool is_branch(Opcode op) {
  return op == Opcode::IfGoto || op == Opcode::Goto;
}

bool ends_block(Opcode op) {
  return is_branch(op) || op == Opcode::Return || op == Opcode::ReturnVoid;
}

std::optional<std::string> Instruction::defined_register() const {
  switch (op) {
    case Opcode::ConstString:
    case Opcode::ConstNum:
    case Opcode::Move:
    case Opcode::NewInstance:
    case Opcode::Iget:
    case Opcode::Sget:
    case Opcode::CollectionNew:
    case Opcode::CollectionGet:
      return regs[0];
    case Opcode::InvokeVirtual:
    case Opcode::InvokeStatic:
    case Opcode::InvokeDirect:
      if (!regs.empty()) {
        return regs[0];
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::vector<std::string> Instruction::used_registers() const {
  switch (op) {
    case Opcode::Move:
      return {regs[1]};
    case Opcode::InvokeVirtual:
    case Opcode::InvokeStatic:
    case Opcode::InvokeDirect:
      return args;
    case Opcode::Iget:
      return {regs[1]};
    case Opcode::Iput:
      return {regs[0], regs[1]};
    case Opcode::Sput:
    case Opcode::IfGoto:
    case Opcode::Return:
      return {regs[0]};
    case Opcode::CollectionPut:
      return regs;
    case Opcode::CollectionGet:
      return {regs[1], regs[2]};
    default:
      return {};
  }
}

std::string MethodDef::signature() const {
  return class_name + "." + local_signature();
}

std::string MethodDef::local_signature() const {
  return name + "/" + std::to_string(arity);
}

bool MethodDef::declares(const std::string& reg) const {
  if (reg == "this") {
    return !is_static;
  }
  for (const auto& p : params) {
    if (p.name == reg) {
      return true;
    }
  }
  return std::find(registers.begin(), registers.end(), reg) !=
      registers.end();
}

const MethodDef* ClassDef::find_method(const std::string& local_sig) const {
  for (const auto& m : methods) {
    if (m.local_signature() == local_sig) {
      return &m;
    }
  }
  return nullptr;
}

std::vector<const MethodDef*> ClassDef::methods_named(
    const std::string& method_name) const {
  std::vector<const MethodDef*> out;
  for (const auto& m : methods) {
    if (m.name == method_name) {
      out.push_back(&m);
    }
  }
  return out;
}

const ClassDef* AppModel::find_class(const std::string& name) const {
  for (const auto& c : classes) {
    if (c.name == name) {
      return &c;
    }
  }
  return nullptr;
}

const MethodDef* AppModel::resolve_method(const std::string& signature) const {
  auto dot = signature.rfind('.', signature.rfind('/'));
  if (dot == std::string::npos) {
    return nullptr;
  }
  const auto* cls = find_class(signature.substr(0, dot));
  if (cls == nullptr) {
    return nullptr;
  }
  return cls->find_method(signature.substr(dot + 1));
}

SignatureParts parse_signature(const std::string& sig) {
  auto slash = sig.rfind('/');
  if (slash == std::string::npos) {
    throw LoadError("malformed signature '" + sig + "'");
  }
  auto dot = sig.rfind('.', slash);
  if (dot == std::string::npos || dot == 0 || dot + 1 == slash) {
    throw LoadError("malformed signature '" + sig + "'");
  }
  SignatureParts out;
  out.class_name = sig.substr(0, dot);
  out.method = sig.substr(dot + 1, slash - dot - 1);
  try {
    size_t used = 0;
    out.arity = std::stoi(sig.substr(slash + 1), &used);
    if (used != sig.size() - slash - 1 || out.arity < 0) {
      throw std::invalid_argument("arity");
    }
  } catch (const std::exception&) {
    throw LoadError("malformed signature '" + sig + "'");
  }
  return out;
}

AppModel parse_app(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LoadError(origin + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw LoadError(origin + ": top level must be an object");
  }
  AppModel app;
  app.app_id = get_string(doc, "app_id", origin);
  if (doc.contains("version")) {
    app.version = get_string(doc, "version", origin);
  }
  auto classes = doc.find("classes");
  if (classes == doc.end() || !classes->is_array()) {
    throw LoadError(origin + ": missing 'classes' array");
  }
  std::set<std::string> class_names;
  for (const auto& c : *classes) {
    ClassDef cls;
    cls.name = get_string(c, "name", origin + ": classes[]");
    const std::string where = origin + ": class " + cls.name;
    if (!class_names.insert(cls.name).second) {
      throw ValidationError(where + ": duplicate class");
    }
    cls.parent_kind = c.contains("parent_kind")
        ? parent_kind_from_string(get_string(c, "parent_kind", where), where)
        : ParentKind::Plain;
    cls.fields = get_strings(c, "fields", where);
    cls.static_fields = get_strings(c, "static_fields", where);
    if (auto ms = c.find("methods"); ms != c.end()) {
      if (!ms->is_array()) {
        throw LoadError(where + ": 'methods' must be an array");
      }
      std::set<std::string> sigs;
      for (const auto& mj : *ms) {
        auto m = parse_method(mj, cls.name, where);
        if (!sigs.insert(m.local_signature()).second) {
          throw ValidationError(where + ": ambiguous method signature " +
                                m.local_signature());
        }
        cls.methods.push_back(std::move(m));
      }
    }
    app.classes.push_back(std::move(cls));
  }
  if (auto comps = doc.find("components"); comps != doc.end()) {
    if (!comps->is_array()) {
      throw LoadError(origin + ": 'components' must be an array");
    }
    for (const auto& cj : *comps) {
      ComponentDef comp;
      comp.class_name = get_string(cj, "class", origin + ": components[]");
      const std::string where = origin + ": component " + comp.class_name;
      comp.kind = component_kind_from_string(get_string(cj, "kind", where));
      comp.aui_callbacks = get_strings(cj, "aui_callbacks", where);
      comp.misc_callbacks = get_strings(cj, "misc_callbacks", where);
      app.components.push_back(std::move(comp));
    }
  }

  for (const auto& cls : app.classes) {
    for (const auto& m : cls.methods) {
      validate_method(m, app, origin);
    }
  }
  for (const auto& comp : app.components) {
    const std::string where = origin + ": component " + comp.class_name;
    const auto* cls = app.find_class(comp.class_name);
    if (cls == nullptr) {
      throw ValidationError(where + ": class not defined");
    }
    for (const auto* list : {&comp.aui_callbacks, &comp.misc_callbacks}) {
      for (const auto& cb : *list) {
        if (cls->methods_named(cb).empty()) {
          throw ValidationError(where + ": declared callback '" + cb +
                                "' is not a method of the class");
        }
      }
    }
  }
  return app;
}

AppModel load_app(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open app file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_app(buf.str(), path);
}

std::string serialize_app(const AppModel& app) {
  json doc;
  doc["app_id"] = app.app_id;
  if (!app.version.empty()) {
    doc["version"] = app.version;
  }
  doc["classes"] = json::array();
  for (const auto& cls : app.classes) {
    json c;
    c["name"] = cls.name;
    c["parent_kind"] = to_string(cls.parent_kind);
    c["fields"] = cls.fields;
    c["static_fields"] = cls.static_fields;
    c["methods"] = json::array();
    for (const auto& m : cls.methods) {
      json mj;
      mj["sig"] = m.local_signature();
      mj["static"] = m.is_static;
      json params = json::array();
      for (const auto& p : m.params) {
        params.push_back(p.type.empty() ? p.name : p.name + ":" + p.type);
      }
      mj["params"] = params;
      mj["registers"] = m.registers;
      json ins = json::array();
      for (const auto& i : m.instructions) {
        ins.push_back(instruction_to_json(i));
      }
      mj["instructions"] = ins;
      mj["labels"] = json::object();
      for (const auto& [label, idx] : m.labels) {
        mj["labels"][label] = idx;
      }
      c["methods"].push_back(mj);
    }
    doc["classes"].push_back(c);
  }
  doc["components"] = json::array();
  for (const auto& comp : app.components) {
    json cj;
    cj["class"] = comp.class_name;
    cj["kind"] = to_string(comp.kind);
    cj["aui_callbacks"] = comp.aui_callbacks;
    cj["misc_callbacks"] = comp.misc_callbacks;
    doc["components"].push_back(cj);
  }
  return doc.dump(2) + "\n";
}

} // namespace lifetaint
