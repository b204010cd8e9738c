/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/taint_engine.h"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "lifetaint/errors.h"

namespace lifetaint {

Deadline::Deadline(double seconds)
    : end_(std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(seconds))) {}

bool Deadline::expired() const {
  return end_ && std::chrono::steady_clock::now() >= *end_;
}

struct TaintEngine::Frame {
  const MethodDef* method = nullptr;
  Table block;
  Table locals; // parameters
  Table klass; // "this"
  SymbolSpace space;
  std::optional<Entry> ret;

  Frame(const MethodDef* m, Table* statics) : method(m) {
    space.bind(SymbolSpace::Block, &block);
    space.bind(SymbolSpace::Method, &locals);
    space.bind(SymbolSpace::Class, &klass);
    space.bind(SymbolSpace::Global, statics);
  }
};

struct TaintEngine::BlockOut {
  Table out; // OUT: entries share details with the live heap
  Table out_block; // OUT_d, split per level
  Table out_locals;
  Table out_klass;
  Table out_statics;
};

TaintEngine::TaintEngine(const AppModel& app, const TaintConfig& config,
                         Deadline deadline)
    : app_(app), config_(config), deadline_(deadline) {
  reset_state({});
}

void TaintEngine::reset_state(const std::string& instance_class) {
  state_ = SequenceState{};
  state_.instance = make_entry("this", ValueKind::MutableRef, instance_class);
}

std::vector<Warning> TaintEngine::take_warnings() {
  std::vector<Warning> out;
  out.swap(warnings_);
  return out;
}

void TaintEngine::add_warning(Warning w) {
  for (const auto& existing : warnings_) {
    if (existing.kind == w.kind && existing.sink_api == w.sink_api &&
        existing.source_apis == w.source_apis &&
        existing.locations == w.locations) {
      return;
    }
  }
  warnings_.push_back(std::move(w));
}

Entry TaintEngine::fresh_value(const std::string& type) {
  ValueKind kind = ValueKind::MutableRef;
  if (config_.collection_types.count(type)) {
    kind = ValueKind::Collection;
  } else if (config_.immutable_types.count(type)) {
    kind = ValueKind::ImmutableRef;
  } else if (config_.primitive_types.count(type)) {
    kind = ValueKind::Primitive;
  }
  return make_entry({}, kind, type);
}

const std::pair<Cfg, std::vector<int>>& TaintEngine::cfg_for(
    const MethodDef& method) {
  auto it = cfgs_.find(&method);
  if (it == cfgs_.end()) {
    auto cfg = remove_back_edges(build_cfg(method));
    auto rpo = reverse_post_order(cfg);
    it = cfgs_.emplace(&method, std::make_pair(std::move(cfg), rpo)).first;
  }
  return it->second;
}

Entry TaintEngine::read_register(Frame& frame, const std::string& reg,
                                 const Location& where) {
  if (!frame.method->declares(reg)) {
    throw AnalysisError(where.str() + ": undeclared register '" + reg + "'");
  }
  if (auto* e = frame.space.lookup(reg)) {
    return *e;
  }
  // Declared but not written on the analyzed path.
  Entry e = make_entry(reg, ValueKind::MutableRef);
  frame.space.define(reg, e);
  return e;
}

std::optional<Entry> TaintEngine::analyze_method(
    const MethodDef& method, std::optional<Entry> receiver,
    const std::vector<Entry>& args) {
  return invoke_app_method(method, std::move(receiver), args);
}

std::optional<Entry> TaintEngine::invoke_app_method(
    const MethodDef& method, std::optional<Entry> receiver,
    const std::vector<Entry>& args) {
  const std::string sig = method.signature();
  if (std::find(method_stack_.begin(), method_stack_.end(), sig) !=
      method_stack_.end()) {
    ++skipped_calls_;
    return std::nullopt;
  }
  method_stack_.push_back(sig);
  ++context_depth_;
  max_depth_ = std::max(max_depth_, context_depth_);
  struct Pop {
    TaintEngine* self;
    ~Pop() {
      self->method_stack_.pop_back();
      --self->context_depth_;
    }
  } pop{this};

  Frame frame(&method, &state_.statics);
  if (!method.is_static) {
    frame.klass["this"] = receiver
        ? assign_copy(*receiver, "this")
        : make_entry("this", ValueKind::MutableRef, method.class_name);
  }
  for (size_t i = 0; i < method.params.size(); ++i) {
    const auto& p = method.params[i];
    frame.locals[p.name] = i < args.size()
        ? assign_copy(args[i], p.name)
        : Entry{p.name, fresh_value(p.type).details};
  }

  const auto& [cfg, rpo] = cfg_for(method);
  std::map<int, BlockOut> outs;
  for (int b : rpo) {
    const auto& block = cfg.blocks[b];
    std::vector<const BlockOut*> preds;
    for (int p : block.predecessors) {
      if (auto it = outs.find(p); it != outs.end()) {
        preds.push_back(&it->second);
      }
    }
    if (b != cfg.entry && preds.empty()) {
      continue;
    }
    // IN: join of predecessor OUT tables, then taints preserved in each
    // predecessor's OUT_d are restored.
    frame.block.clear();
    for (const auto* p : preds) {
      for (const auto& [name, e] : p->out) {
        auto it = frame.block.find(name);
        if (it == frame.block.end()) {
          frame.block.emplace(name, e);
        } else {
          it->second = merge_entries(it->second, e);
        }
      }
    }
    for (const auto* p : preds) {
      CopyMemo memo;
      restore_taints(frame.block, p->out_block, memo);
      restore_taints(frame.locals, p->out_locals, memo);
      restore_taints(frame.klass, p->out_klass, memo);
      restore_taints(state_.statics, p->out_statics, memo);
    }

    for (int i = block.begin; i < block.end; ++i) {
      if ((++steps_ & 0xff) == 0 && deadline_.expired()) {
        throw BudgetExceeded();
      }
      execute(method, i, frame);
    }

    BlockOut out;
    out.out = frame.block;
    CopyMemo memo;
    out.out_block = deep_copy(frame.block, memo);
    out.out_locals = deep_copy(frame.locals, memo);
    out.out_klass = deep_copy(frame.klass, memo);
    out.out_statics = deep_copy(state_.statics, memo);
    outs.emplace(b, std::move(out));
  }
  return frame.ret;
}

void TaintEngine::execute(const MethodDef& method, int index, Frame& frame) {
  const auto& ins = method.instructions[index];
  const Location here{method.class_name, method.local_signature(), index};
  auto reg = [&](size_t i) { return read_register(frame, ins.regs[i], here); };
  auto define = [&](Entry e) {
    const auto& dst = ins.regs[0];
    if (!method.declares(dst)) {
      throw AnalysisError(here.str() + ": undeclared register '" + dst + "'");
    }
    frame.space.define(dst, std::move(e));
  };
  switch (ins.op) {
    case Opcode::ConstString: {
      Entry e = make_entry({}, ValueKind::ImmutableRef, "String");
      e.details->const_value = ConstValue{ins.literal, here};
      define(e);
      break;
    }
    case Opcode::ConstNum: {
      Entry e = make_entry({}, ValueKind::Primitive, "number");
      e.details->const_value = ConstValue{ins.literal, here};
      define(e);
      break;
    }
    case Opcode::Move:
      define(assign_copy(reg(1), ins.regs[0]));
      break;
    case Opcode::NewInstance:
      define(fresh_value(ins.symbol));
      break;
    case Opcode::InvokeVirtual:
    case Opcode::InvokeStatic:
    case Opcode::InvokeDirect:
      handle_invoke(method, index, frame);
      break;
    case Opcode::Iget: {
      Entry obj = reg(1);
      auto& fields = obj.details->fields;
      auto it = fields.find(ins.symbol);
      if (it == fields.end()) {
        it = fields.emplace(ins.symbol,
                            make_entry(ins.symbol, ValueKind::MutableRef))
                 .first;
      }
      define(assign_copy(it->second, ins.regs[0]));
      break;
    }
    case Opcode::Iput: {
      Entry val = reg(0);
      Entry obj = reg(1);
      obj.details->fields[ins.symbol] = assign_copy(val, ins.symbol);
      break;
    }
    case Opcode::Sget: {
      auto it = state_.statics.find(ins.symbol);
      if (it == state_.statics.end()) {
        it = state_.statics
                 .emplace(ins.symbol,
                          make_entry(ins.symbol, ValueKind::MutableRef))
                 .first;
      }
      define(assign_copy(it->second, ins.regs[0]));
      break;
    }
    case Opcode::Sput:
      state_.statics[ins.symbol] = assign_copy(reg(0), ins.symbol);
      break;
    case Opcode::CollectionNew:
      define(make_entry({}, ValueKind::Collection, "Collection"));
      break;
    case Opcode::CollectionPut: {
      Entry coll = reg(0);
      reg(1);
      auto taints = collect_taints(reg(2));
      coll.details->taints.insert(taints.begin(), taints.end());
      break;
    }
    case Opcode::CollectionGet: {
      Entry coll = reg(1);
      reg(2);
      Entry e = make_entry({}, ValueKind::MutableRef);
      e.details->taints = coll.details->taints;
      define(e);
      break;
    }
    case Opcode::IfGoto:
      reg(0);
      break;
    case Opcode::Goto:
      break;
    case Opcode::Return: {
      Entry r = reg(0);
      frame.ret = frame.ret ? merge_entries(*frame.ret, r) : r;
      break;
    }
    case Opcode::ReturnVoid:
      break;
  }
}

void TaintEngine::report_sink(const Instruction& ins,
                              const std::vector<Entry>& args,
                              const Location& where) {
  if (config_.is_sink(ins.symbol)) {
    Warning w;
    w.kind = WarningKind::InfoLeak;
    w.sink_api = ins.symbol;
    for (const auto& a : args) {
      for (const auto& tag : collect_taints(a)) {
        if (config_.is_source(tag.source_api)) {
          w.source_apis.insert(tag.source_api);
          w.locations.push_back({"source", tag.source_api, tag.location});
        }
      }
    }
    if (!w.source_apis.empty()) {
      w.locations.push_back({"sink", ins.symbol, where});
      std::sort(w.locations.begin(), w.locations.end());
      w.locations.erase(std::unique(w.locations.begin(), w.locations.end()),
                        w.locations.end());
      add_warning(std::move(w));
    }
  }
  if (const auto* sms = config_.sms_send_api(ins.symbol)) {
    size_t idx = static_cast<size_t>(sms->recipient_arg_index) +
        (ins.op == Opcode::InvokeStatic ? 0 : 1);
    if (idx < args.size()) {
      if (auto w = detect_sms_attack(*sms, args[idx], config_, where)) {
        add_warning(std::move(*w));
      }
    }
  }
}

bool TaintEngine::handle_discontinuity(const Instruction& ins,
                                       const std::vector<Entry>& args) {
  if (ins.op == Opcode::InvokeStatic || args.empty()) {
    return false;
  }
  const auto parts = parse_signature(ins.symbol);
  const auto* cls = app_.find_class(args[0].details->class_name);
  if (cls == nullptr) {
    return false;
  }
  auto first = [&](const char* name) -> const MethodDef* {
    auto found = cls->methods_named(name);
    return found.empty() ? nullptr : found.front();
  };
  if (cls->parent_kind == ParentKind::Thread && parts.method == "start" &&
      parts.arity == 0) {
    if (const auto* run = cls->find_method("run/0")) {
      invoke_app_method(*run, args[0], {});
    }
    return true;
  }
  if (cls->parent_kind == ParentKind::AsyncTask && parts.method == "execute") {
    std::vector<Entry> params(args.begin() + 1, args.end());
    if (const auto* m = first("onPreExecute")) {
      invoke_app_method(*m, args[0], {});
    }
    std::optional<Entry> result;
    if (const auto* m = first("doInBackground")) {
      result = invoke_app_method(*m, args[0], params);
    }
    if (const auto* m = first("onProgressUpdate")) {
      invoke_app_method(*m, args[0], {});
    }
    if (const auto* m = first("onPostExecute")) {
      std::vector<Entry> post;
      if (result) {
        post.push_back(*result);
      }
      invoke_app_method(*m, args[0], post);
    }
    return true;
  }
  return false;
}

bool TaintEngine::handle_specific_api(const Instruction& ins,
                                      std::vector<Entry>& args,
                                      std::optional<Entry>& result) {
  const auto& sig = ins.symbol;
  auto derived = [&](const TaintSet& taints) {
    Entry e = make_entry({}, ValueKind::ImmutableRef, "String");
    e.details->taints = taints;
    return e;
  };
  auto union_of = [&](size_t from) {
    TaintSet out;
    for (size_t i = from; i < args.size(); ++i) {
      auto t = collect_taints(args[i]);
      out.insert(t.begin(), t.end());
    }
    return out;
  };
  if (sig == "StringBuilder.append/1") {
    auto t = collect_taints(args[1]);
    args[0].details->taints.insert(t.begin(), t.end());
    result = args[0];
    return true;
  }
  if (sig == "StringBuilder.toString/0" || sig == "String.concat/1" ||
      sig == "String.valueOf/1" || sig == "String.format/2" ||
      sig == "String.format/3" || sig == "String.format/4") {
    result = derived(union_of(0));
    return true;
  }
  if (sig == "System.arraycopy/5") {
    auto t = collect_taints(args[0]);
    args[2].details->taints.insert(t.begin(), t.end());
    return true;
  }
  return false;
}

void TaintEngine::handle_invoke(const MethodDef& method, int index,
                                Frame& frame) {
  const auto& ins = method.instructions[index];
  const Location here{method.class_name, method.local_signature(), index};
  std::vector<Entry> args;
  for (const auto& a : ins.args) {
    args.push_back(read_register(frame, a, here));
  }
  std::optional<Entry> result;
  auto bind_result = [&]() {
    if (ins.regs.empty()) {
      return;
    }
    if (!method.declares(ins.regs[0])) {
      throw AnalysisError(here.str() + ": undeclared register '" +
                          ins.regs[0] + "'");
    }
    Entry e = result ? assign_copy(*result, ins.regs[0])
                     : make_entry(ins.regs[0], ValueKind::MutableRef);
    frame.space.define(ins.regs[0], std::move(e));
  };

  if (handle_discontinuity(ins, args)) {
    bind_result();
    return;
  }
  const bool is_source = config_.is_source(ins.symbol) ||
      config_.is_originating_address(ins.symbol);
  if (is_source) {
    Entry e = make_entry({}, ValueKind::ImmutableRef);
    e.details->taints.insert(TaintTag{ins.symbol, here});
    result = e;
    bind_result();
    return;
  }
  if (config_.is_sink(ins.symbol) || config_.sms_send_api(ins.symbol)) {
    report_sink(ins, args, here);
    bind_result();
    return;
  }

  const MethodDef* callee = nullptr;
  if (ins.op == Opcode::InvokeVirtual && !args.empty()) {
    if (const auto* cls = app_.find_class(args[0].details->class_name)) {
      auto parts = parse_signature(ins.symbol);
      callee = cls->find_method(parts.method + "/" +
                                std::to_string(parts.arity));
    }
  }
  if (callee == nullptr) {
    callee = app_.resolve_method(ins.symbol);
  }
  if (callee != nullptr) {
    std::optional<Entry> receiver;
    std::vector<Entry> actuals = args;
    if (!callee->is_static && !actuals.empty()) {
      receiver = actuals.front();
      actuals.erase(actuals.begin());
    }
    result = invoke_app_method(*callee, receiver, actuals);
    bind_result();
    return;
  }

  if (handle_specific_api(ins, args, result)) {
    bind_result();
    return;
  }

  // Default rule: tainted inputs taint the receiver and the return value.
  const bool has_receiver = ins.op != Opcode::InvokeStatic && !args.empty();
  TaintSet arg_taints;
  for (size_t i = has_receiver ? 1 : 0; i < args.size(); ++i) {
    auto t = collect_taints(args[i]);
    arg_taints.insert(t.begin(), t.end());
  }
  TaintSet all = arg_taints;
  if (has_receiver) {
    auto t = collect_taints(args[0]);
    all.insert(t.begin(), t.end());
    args[0].details->taints.insert(arg_taints.begin(), arg_taints.end());
  }
  if (!ins.regs.empty()) {
    Entry e = make_entry({}, ValueKind::ImmutableRef);
    e.details->taints = std::move(all);
    result = e;
  }
  bind_result();
}

std::vector<Warning> TaintEngine::analyze_sequence(
    const ComponentDef& comp, const CallbackSequence& callbacks) {
  reset_state(comp.class_name);
  warnings_.clear();
  const auto* cls = app_.find_class(comp.class_name);
  if (cls == nullptr) {
    throw AnalysisError("component class '" + comp.class_name +
                        "' not found");
  }
  if (const auto* init = cls->find_method("<init>/0")) {
    invoke_app_method(*init, state_.instance, {});
  }
  for (const auto& sig : callbacks) {
    const auto* m = app_.resolve_method(sig);
    if (m == nullptr) {
      continue;
    }
    std::vector<Entry> args;
    for (const auto& p : m->params) {
      if (p.type.empty()) {
        args.push_back(fresh_value({}));
        continue;
      }
      auto it = state_.framework_objects.find(p.type);
      if (it == state_.framework_objects.end()) {
        it = state_.framework_objects.emplace(p.type, fresh_value(p.type))
                 .first;
      }
      args.push_back(it->second);
    }
    std::optional<Entry> receiver;
    if (!m->is_static) {
      receiver = state_.instance;
    }
    invoke_app_method(*m, receiver, args);
  }
  return take_warnings();
}

AnalysisResult analyze_component(const AppModel& app,
                                 const ComponentDef& comp,
                                 const PermutationPlan& plan,
                                 const TaintConfig& config,
                                 const Deadline& deadline) {
  AnalysisResult result;
  TaintEngine engine(app, config, deadline);
  MWayPermutations perms(plan);
  CallbackSequence seq;
  std::uint64_t index = 0;
  try {
    while (perms.next(seq)) {
      if (deadline.expired()) {
        throw BudgetExceeded();
      }
      auto found = engine.analyze_sequence(comp, seq);
      ++result.sequences_analyzed;
      for (auto& w : found) {
        w.component = comp.class_name;
        w.sequence = SequenceDescriptor{plan.m, index, seq};
        result.raw.push_back(std::move(w));
      }
      ++index;
    }
  } catch (const BudgetExceeded&) {
    spdlog::warn("{}: time budget exhausted after {} sequence(s)",
                 comp.class_name, result.sequences_analyzed);
    result.killed = true;
  }
  result.warnings = dedup_warnings(result.raw);
  return result;
}

AnalysisResult analyze_callback_sequence(const AppModel& app,
                                         const ComponentDef& comp,
                                         const CallbackSequence& callbacks,
                                         const TaintConfig& config) {
  AnalysisResult result;
  TaintEngine engine(app, config);
  auto found = engine.analyze_sequence(comp, callbacks);
  result.sequences_analyzed = 1;
  for (auto& w : found) {
    w.component = comp.class_name;
    w.sequence = SequenceDescriptor{0, 0, callbacks};
    result.raw.push_back(std::move(w));
  }
  result.warnings = dedup_warnings(result.raw);
  return result;
}

} // namespace lifetaint
