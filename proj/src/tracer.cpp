// Copyright 2026 The exectrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "exectrace/tracer.hpp"

#include <algorithm>
#include <deque>
#include <json.hpp>
#include <set>

#include "exectrace/parser.hpp"

namespace exectrace {

namespace {

struct FuelOut {};
struct StopRun {};

struct Frame {
  const CodeObject* code = nullptr;
  int pc = 0;
  std::vector<std::optional<Value>> locals;
  std::vector<Value> stack;
  int depth = 0;
  bool traced = false;    // emits line/opcode events
  bool boundary = false;  // emits call/return events
  bool back_jump = false;
};

const char* IterKindName(IterKind k) {
  switch (k) {
    case IterKind::kRange:
      return "range";
    case IterKind::kList:
      return "list";
    case IterKind::kTuple:
      return "tuple";
    case IterKind::kStr:
      return "str";
    case IterKind::kDictKeys:
      return "dict-keys";
    case IterKind::kDictValues:
      return "dict-values";
    case IterKind::kDictItems:
      return "dict-items";
    case IterKind::kEnumerate:
      return "enumerate";
    case IterKind::kZip:
      return "zip";
    case IterKind::kForward:
      return "iterator";
  }
  return "iterator";
}

bool IsLoopIterator(const Value& v) { return v.is(Kind::kIter) && v.as_iter()->for_loop; }

std::vector<IteratorState> Iterators(const Frame& f) {
  std::vector<IteratorState> out;
  for (const auto& v : f.stack) {
    if (!IsLoopIterator(v)) continue;
    const IterObject& it = *v.as_iter();
    out.push_back(IteratorState{static_cast<int>(out.size()) + 1, it.yielded, it.exhausted,
                                IterKindName(it.kind)});
  }
  return out;
}

std::vector<std::string> StackReprs(const Frame& f) {
  std::vector<std::string> out;
  int slot = 0;
  for (const auto& v : f.stack) {
    out.push_back(IsLoopIterator(v) ? IteratorName(++slot) : Repr(v));
  }
  return out;
}

std::vector<std::pair<std::string, Value>> Locals(const Frame& f) {
  std::vector<std::pair<std::string, Value>> out;
  for (std::size_t i = 0; i < f.locals.size(); ++i) {
    if (f.locals[i]) out.emplace_back(f.code->local_names[i], DeepCopy(*f.locals[i]));
  }
  return out;
}

class Vm {
 public:
  Vm(const Module& module, const ExecOptions& options, Trace* trace)
      : module_(module), options_(options), trace_(trace) {}

  std::int64_t max_steps = -1;
  bool stopped = false;

  Frame NewFrame(const CodeObject& code, std::vector<Value> args, int depth, bool traced,
                 bool boundary) {
    Frame f;
    f.code = &code;
    f.locals.resize(code.local_names.size());
    for (std::size_t i = 0; i < args.size(); ++i) f.locals[i] = std::move(args[i]);
    f.depth = depth;
    f.traced = traced;
    f.boundary = boundary;
    return f;
  }

  void EmitCall(const Frame& f) {
    if (!trace_ || !f.boundary) return;
    TraceEvent ev;
    ev.kind = EventKind::kCall;
    ev.depth = f.depth;
    ev.func = f.code->name;
    ev.line = f.code->def_line;
    ev.locals = Locals(f);
    Push(std::move(ev));
  }

  // Runs until the bottom frame returns. With stop_pc >= 0 execution halts
  // silently when the bottom frame reaches that offset.
  Outcome Run(std::vector<Frame>& frames, int stop_pc = -1) {
    int line = 0;
    try {
      while (true) {
        Frame& f = frames.back();
        if (stop_pc >= 0 && frames.size() == 1 && f.pc == stop_pc) return Outcome::Return(Value());
        const Instruction& ins = f.code->code[static_cast<std::size_t>(f.pc)];
        line = ins.line;
        bool line_event = ins.is_line_start || f.back_jump;
        f.back_jump = false;
        if (f.traced && trace_) {
          if (line_event) EmitStep(f, ins, EventKind::kLine);
          if (options_.granularity == Granularity::kInstruction) {
            EmitStep(f, ins, EventKind::kOpcode);
          }
        } else if (line_event) {
          Spend();
        }
        std::optional<Value> result = Step(frames, ins);
        if (result) return Outcome::Return(std::move(*result));
      }
    } catch (const ExecError& e) {
      return Outcome::Error(e.kind(), e.what(), line);
    } catch (const FuelOut&) {
      return Outcome::Fuel(options_.fuel);
    } catch (const StopRun&) {
      stopped = true;
      return Outcome::Fuel(options_.fuel);
    }
  }

 private:
  void Spend() {
    if (used_ >= options_.fuel) throw FuelOut{};
    ++used_;
  }

  void Push(TraceEvent ev) {
    Spend();
    ev.index = static_cast<int>(trace_->events.size());
    trace_->events.push_back(std::move(ev));
  }

  void EmitStep(const Frame& f, const Instruction& ins, EventKind kind) {
    bool is_step = f.depth == 0 && (kind == EventKind::kOpcode) ==
                                       (options_.granularity == Granularity::kInstruction);
    if (is_step && max_steps >= 0 && steps_ > max_steps) throw StopRun{};
    TraceEvent ev;
    ev.kind = kind;
    ev.depth = f.depth;
    ev.func = f.code->name;
    ev.line = ins.line;
    ev.offset = ins.offset;
    ev.locals = Locals(f);
    ev.iterators = Iterators(f);
    if (kind == EventKind::kOpcode) {
      ev.stack = StackReprs(f);
      ev.instr = FormatInstruction(*f.code, ins);
    }
    Push(std::move(ev));
    if (is_step) ++steps_;
  }

  void EmitReturn(const Frame& f, const Instruction& ins, const Value& v) {
    if (!trace_ || !f.boundary) return;
    TraceEvent ev;
    ev.kind = EventKind::kReturn;
    ev.depth = f.depth;
    ev.func = f.code->name;
    ev.line = ins.line;
    ev.offset = ins.offset;
    ev.locals = Locals(f);
    ev.iterators = Iterators(f);
    ev.retval = DeepCopy(v);
    Push(std::move(ev));
  }

  static Value Pop(Frame& f) {
    Value v = std::move(f.stack.back());
    f.stack.pop_back();
    return v;
  }

  static std::vector<Value> PopN(Frame& f, int n) {
    std::vector<Value> out(f.stack.end() - n, f.stack.end());
    f.stack.resize(f.stack.size() - static_cast<std::size_t>(n));
    return out;
  }

  static void JumpTo(Frame& f, int target) {
    if (target <= f.pc) f.back_jump = true;
    f.pc = target;
  }

  // Executes one instruction of the top frame. Returns the result once the
  // bottom frame returns.
  std::optional<Value> Step(std::vector<Frame>& frames, const Instruction& ins) {
    Frame& f = frames.back();
    int next = f.pc + 1;
    switch (ins.op) {
      case Opcode::kLoadConst:
        f.stack.push_back(f.code->consts[static_cast<std::size_t>(ins.arg)]);
        break;
      case Opcode::kLoadLocal: {
        const auto& slot = f.locals[static_cast<std::size_t>(ins.arg)];
        if (!slot) {
          throw ExecError("UnboundLocalError", "cannot access local variable '" + ins.name +
                                                   "' where it is not associated with a value");
        }
        f.stack.push_back(*slot);
        break;
      }
      case Opcode::kStoreLocal:
        f.locals[static_cast<std::size_t>(ins.arg)] = Pop(f);
        break;
      case Opcode::kLoadGlobal:
        if (module_.find(ins.name)) {
          f.stack.push_back(Value(FuncRef{ins.name, false}));
        } else if (IsBuiltin(ins.name)) {
          f.stack.push_back(Value(FuncRef{ins.name, true}));
        } else {
          throw ExecError("NameError", "name '" + ins.name + "' is not defined");
        }
        break;
      case Opcode::kBinaryOp: {
        Value b = Pop(f);
        Value a = Pop(f);
        f.stack.push_back(BinaryOperation(static_cast<BinOp>(ins.arg), a, b, ins.inplace));
        break;
      }
      case Opcode::kUnaryOp:
        f.stack.back() = UnaryOperation(static_cast<UnaryOp>(ins.arg), f.stack.back());
        break;
      case Opcode::kCompareOp: {
        Value b = Pop(f);
        Value a = Pop(f);
        f.stack.push_back(Value(Compare(static_cast<CmpOp>(ins.arg), a, b)));
        break;
      }
      case Opcode::kJump:
        JumpTo(f, ins.arg);
        return std::nullopt;
      case Opcode::kPopJumpIfFalse:
      case Opcode::kPopJumpIfTrue: {
        bool t = Truthy(Pop(f));
        if (t == (ins.op == Opcode::kPopJumpIfTrue)) {
          JumpTo(f, ins.arg);
          return std::nullopt;
        }
        break;
      }
      case Opcode::kJumpIfFalseOrPop:
      case Opcode::kJumpIfTrueOrPop: {
        bool t = Truthy(f.stack.back());
        if (t == (ins.op == Opcode::kJumpIfTrueOrPop)) {
          JumpTo(f, ins.arg);
          return std::nullopt;
        }
        f.stack.pop_back();
        break;
      }
      case Opcode::kGetIter:
        f.stack.back() = Value(GetIter(f.stack.back(), true));
        break;
      case Opcode::kForIter: {
        std::optional<Value> item = IterNext(*f.stack.back().as_iter());
        if (item) {
          f.stack.push_back(std::move(*item));
        } else {
          f.stack.pop_back();
          JumpTo(f, ins.arg);
          return std::nullopt;
        }
        break;
      }
      case Opcode::kBuildList:
        f.stack.push_back(Value::MakeList(PopN(f, ins.arg)));
        break;
      case Opcode::kBuildTuple:
        f.stack.push_back(Value::MakeTuple(PopN(f, ins.arg)));
        break;
      case Opcode::kBuildMap: {
        std::vector<Value> parts = PopN(f, 2 * ins.arg);
        Value d = Value::MakeDict();
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) d.as_dict()->set(parts[i], parts[i + 1]);
        f.stack.push_back(std::move(d));
        break;
      }
      case Opcode::kIndex: {
        Value i = Pop(f);
        Value c = Pop(f);
        f.stack.push_back(Index(c, i));
        break;
      }
      case Opcode::kStoreIndex: {
        Value i = Pop(f);
        Value c = Pop(f);
        Value v = Pop(f);
        StoreIndex(c, i, std::move(v));
        break;
      }
      case Opcode::kSlice: {
        Value st = Pop(f);
        Value hi = Pop(f);
        Value lo = Pop(f);
        Value c = Pop(f);
        f.stack.push_back(Slice(c, lo, hi, st));
        break;
      }
      case Opcode::kCall: {
        std::vector<Value> args = PopN(f, ins.arg);
        Value callee = Pop(f);
        if (!callee.is(Kind::kFunc)) {
          throw ExecError("TypeError", "'" + TypeName(callee) + "' object is not callable");
        }
        const FuncRef& ref = callee.as_func();
        if (ref.builtin) {
          f.stack.push_back(CallBuiltin(ref.name, args));
          break;
        }
        const CodeObject* code = module_.find(ref.name);
        if (args.size() != code->params.size()) {
          throw ExecError("TypeError", ref.name + "() takes " +
                                           std::to_string(code->params.size()) +
                                           " positional arguments but " +
                                           std::to_string(args.size()) + " were given");
        }
        int depth = f.depth + 1;
        if (depth > kMaxCallDepth) {
          throw ExecError("RecursionError", "maximum recursion depth exceeded");
        }
        bool traced = f.traced && options_.step_into;
        bool boundary = f.traced;
        f.pc = next;
        frames.push_back(NewFrame(*code, std::move(args), depth, traced, boundary));
        EmitCall(frames.back());
        return std::nullopt;
      }
      case Opcode::kCallMethod: {
        std::vector<Value> args = PopN(f, ins.arg);
        Value self = Pop(f);
        f.stack.push_back(CallMethod(self, ins.name, args));
        break;
      }
      case Opcode::kUnpack: {
        std::vector<Value> items = Materialize(Pop(f));
        std::size_t n = static_cast<std::size_t>(ins.arg);
        if (items.size() > n) {
          throw ExecError("ValueError",
                          "too many values to unpack (expected " + std::to_string(n) + ")");
        }
        if (items.size() < n) {
          throw ExecError("ValueError", "not enough values to unpack (expected " +
                                            std::to_string(n) + ", got " +
                                            std::to_string(items.size()) + ")");
        }
        for (auto it = items.rbegin(); it != items.rend(); ++it) f.stack.push_back(*it);
        break;
      }
      case Opcode::kPopTop:
        f.stack.pop_back();
        break;
      case Opcode::kDupTop:
        f.stack.push_back(f.stack.back());
        break;
      case Opcode::kDupTopTwo: {
        std::size_t n = f.stack.size();
        Value a = f.stack[n - 2];
        Value b = f.stack[n - 1];
        f.stack.push_back(std::move(a));
        f.stack.push_back(std::move(b));
        break;
      }
      case Opcode::kRotTwo:
        std::swap(f.stack[f.stack.size() - 1], f.stack[f.stack.size() - 2]);
        break;
      case Opcode::kRotThree: {
        // [a, b, c] -> [c, a, b]
        std::size_t n = f.stack.size();
        std::rotate(f.stack.begin() + static_cast<std::ptrdiff_t>(n - 3),
                    f.stack.begin() + static_cast<std::ptrdiff_t>(n - 1), f.stack.end());
        break;
      }
      case Opcode::kReturnValue: {
        Value v = Pop(f);
        EmitReturn(f, ins, v);
        frames.pop_back();
        if (frames.empty()) return v;
        frames.back().stack.push_back(std::move(v));
        return std::nullopt;
      }
    }
    f.pc = next;
    return std::nullopt;
  }

  const Module& module_;
  ExecOptions options_;
  Trace* trace_;
  std::int64_t used_ = 0;
  std::int64_t steps_ = 0;
};

bool IsStepEvent(const TraceEvent& ev, Granularity g) {
  return ev.kind == (g == Granularity::kLine ? EventKind::kLine : EventKind::kOpcode);
}

SelfContainedState FromEvent(const TraceEvent& ev, Granularity g, const std::string& source) {
  SelfContainedState s;
  s.source = source;
  s.granularity = g;
  s.location = g == Granularity::kLine ? ev.line : ev.offset;
  for (const auto& [name, v] : ev.locals) s.locals.emplace_back(name, Repr(v));
  for (const auto& it : ev.iterators) s.iterators.emplace_back(it.slot, it.count);
  if (ev.kind == EventKind::kReturn) {
    s.return_repr = Repr(*ev.retval);
  } else if (g == Granularity::kInstruction && ev.stack) {
    s.stack = *ev.stack;
  }
  return s;
}

// Iterator setup instructions reach GET_ITER with the iterable on top.
Value EvaluateIterable(const Module& module, const ExecOptions& options, const Frame& base,
                       const LoopInfo& loop) {
  Frame f = base;
  f.stack.clear();
  f.pc = loop.setup_start;
  f.traced = false;
  f.boundary = false;
  f.back_jump = false;
  std::vector<Frame> frames{std::move(f)};
  Vm vm(module, options, nullptr);
  Outcome o = vm.Run(frames, loop.get_iter);
  if (o.kind != OutcomeKind::kReturn) {
    throw ResumeError("loop iterable at line " + std::to_string(loop.line) +
                      " failed: " + Describe(o));
  }
  if (frames.size() != 1 || frames[0].stack.size() != 1) {
    throw ResumeError("loop iterable evaluation left an unexpected stack");
  }
  return frames[0].stack.back();
}

std::vector<const LoopInfo*> EnclosingLoops(const CodeObject& code, int pc) {
  std::vector<const LoopInfo*> out;
  for (const auto& l : code.loops) {
    if (l.for_iter <= pc && pc < l.exit) out.push_back(&l);
  }
  return out;
}

Value RebuildIterator(const Module& module, const ExecOptions& options, const Frame& base,
                      const LoopInfo& loop, std::int64_t count) {
  Value iterable = EvaluateIterable(module, options, base, loop);
  Iter it = GetIter(iterable, true);
  for (std::int64_t i = 0; i < count; ++i) {
    if (!IterNext(*it)) {
      throw ResumeError("iterator at line " + std::to_string(loop.line) + " has fewer than " +
                        std::to_string(count) + " items");
    }
  }
  return Value(it);
}

// For each offset, the local slot each stack entry was loaded from, or -1
// when it is a computed value. An entry keeps its slot only while that local
// has not been rebound, so it denotes the very object the local holds.
std::vector<std::optional<std::vector<int>>> StackSources(const CodeObject& code) {
  const int n = static_cast<int>(code.code.size());
  std::vector<std::optional<std::vector<int>>> at(static_cast<std::size_t>(n));
  std::deque<int> work;
  auto flow = [&](int to, const std::vector<int>& s) {
    if (to < 0 || to >= n) return;
    auto& slot = at[static_cast<std::size_t>(to)];
    if (!slot) {
      slot = s;
      work.push_back(to);
      return;
    }
    if (slot->size() != s.size()) return;
    bool changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if ((*slot)[i] != s[i] && (*slot)[i] != -1) {
        (*slot)[i] = -1;
        changed = true;
      }
    }
    if (changed) work.push_back(to);
  };
  flow(0, {});
  while (!work.empty()) {
    const int pc = work.front();
    work.pop_front();
    const Instruction& ins = code.code[static_cast<std::size_t>(pc)];
    std::vector<int> s = *at[static_cast<std::size_t>(pc)];
    auto pop = [&](int k) { s.resize(s.size() - std::min(s.size(), static_cast<std::size_t>(k))); };
    switch (ins.op) {
      case Opcode::kLoadLocal:
        s.push_back(ins.arg);
        break;
      case Opcode::kLoadConst:
      case Opcode::kLoadGlobal:
        s.push_back(-1);
        break;
      case Opcode::kStoreLocal:
        pop(1);
        std::replace(s.begin(), s.end(), ins.arg, -1);
        break;
      case Opcode::kPopTop:
        pop(1);
        break;
      case Opcode::kBinaryOp:
      case Opcode::kCompareOp:
      case Opcode::kIndex:
        pop(2);
        s.push_back(-1);
        break;
      case Opcode::kUnaryOp:
      case Opcode::kGetIter:
        pop(1);
        s.push_back(-1);
        break;
      case Opcode::kJump:
        flow(ins.arg, s);
        continue;
      case Opcode::kPopJumpIfFalse:
      case Opcode::kPopJumpIfTrue:
        pop(1);
        flow(ins.arg, s);
        break;
      case Opcode::kJumpIfFalseOrPop:
      case Opcode::kJumpIfTrueOrPop:
        flow(ins.arg, s);
        pop(1);
        break;
      case Opcode::kForIter: {
        std::vector<int> done = s;
        done.pop_back();
        flow(ins.arg, done);
        s.push_back(-1);
        break;
      }
      case Opcode::kBuildList:
      case Opcode::kBuildTuple:
        pop(ins.arg);
        s.push_back(-1);
        break;
      case Opcode::kBuildMap:
        pop(2 * ins.arg);
        s.push_back(-1);
        break;
      case Opcode::kStoreIndex:
        pop(3);
        break;
      case Opcode::kSlice:
        pop(4);
        s.push_back(-1);
        break;
      case Opcode::kCall:
      case Opcode::kCallMethod:
        pop(ins.arg + 1);
        s.push_back(-1);
        break;
      case Opcode::kUnpack:
        pop(1);
        s.insert(s.end(), static_cast<std::size_t>(ins.arg), -1);
        break;
      case Opcode::kDupTop:
        s.push_back(s.back());
        break;
      case Opcode::kDupTopTwo: {
        int a = s[s.size() - 2], b = s.back();
        s.push_back(a);
        s.push_back(b);
        break;
      }
      case Opcode::kRotTwo:
        std::swap(s[s.size() - 1], s[s.size() - 2]);
        break;
      case Opcode::kRotThree:
        std::rotate(s.end() - 3, s.end() - 1, s.end());
        break;
      case Opcode::kReturnValue:
        continue;
    }
    flow(pc + 1, s);
  }
  return at;
}

}  // namespace

std::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kCall:
      return "call";
    case EventKind::kLine:
      return "line";
    case EventKind::kOpcode:
      return "opcode";
    case EventKind::kReturn:
      return "return";
  }
  return "";
}

Trace Execute(const Module& module, const std::string& unit_id, const std::vector<Value>& args,
              const ExecOptions& options) {
  const CodeObject& code = module.main_code();
  if (args.size() != code.params.size()) {
    throw ArityError(code.name + "() takes " + std::to_string(code.params.size()) +
                     " arguments, got " + std::to_string(args.size()));
  }
  Trace trace;
  trace.unit_id = unit_id;
  trace.args = args;
  trace.granularity = options.granularity;
  trace.func = code.name;
  for (const auto& n : module.function_names()) {
    if (n != code.name) trace.globals.push_back(n);
  }
  Vm vm(module, options, &trace);
  std::vector<Value> copies;
  for (const auto& a : args) copies.push_back(DeepCopy(a));
  std::vector<Frame> frames;
  frames.push_back(vm.NewFrame(code, std::move(copies), 0, true, true));
  try {
    vm.EmitCall(frames.back());
  } catch (const FuelOut&) {
    trace.outcome = Outcome::Fuel(options.fuel);
    return trace;
  }
  trace.outcome = vm.Run(frames);
  return trace;
}

Trace Execute(const SourceUnit& unit, const std::vector<Value>& args, const ExecOptions& options) {
  return Execute(CompileUnit(unit), unit.unit_id, args, options);
}

std::int64_t LineStepCount(const Trace& trace) {
  return std::count_if(trace.events.begin(), trace.events.end(),
                       [](const TraceEvent& e) { return e.kind == EventKind::kLine; });
}

std::vector<int> LineCoverage(const Trace& trace) {
  std::set<int> lines;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::kLine) lines.insert(e.line);
  }
  return {lines.begin(), lines.end()};
}

std::vector<SelfContainedState> StateSequence(const Trace& trace, const std::string& source) {
  std::vector<SelfContainedState> out;
  for (const auto& ev : trace.events) {
    if (ev.depth != 0) continue;
    if (IsStepEvent(ev, trace.granularity) || ev.kind == EventKind::kReturn) {
      out.push_back(FromEvent(ev, trace.granularity, source));
      out.back().step = static_cast<int>(out.size()) - 1;
    }
  }
  return out;
}

SelfContainedState StateAt(const Trace& trace, std::size_t event_index,
                           const std::string& source) {
  if (event_index >= trace.events.size()) throw std::out_of_range("event index out of range");
  const TraceEvent& ev = trace.events[event_index];
  if (ev.kind == EventKind::kReturn) return FromEvent(ev, trace.granularity, source);
  if (ev.kind != EventKind::kCall && !IsStepEvent(ev, trace.granularity)) {
    throw std::invalid_argument("event kind does not match the trace granularity");
  }
  for (std::size_t i = event_index + 1; i < trace.events.size(); ++i) {
    const TraceEvent& next = trace.events[i];
    if (next.depth != ev.depth) continue;
    if (IsStepEvent(next, trace.granularity) || next.kind == EventKind::kReturn) {
      return FromEvent(next, trace.granularity, source);
    }
  }
  throw std::out_of_range("execution ended before the state after event " +
                          std::to_string(event_index));
}

Value ParseReprValue(std::string_view text) {
  if (text.size() > 2 && text.front() == '<' && text.back() == '>') {
    std::string_view inner = text.substr(1, text.size() - 2);
    constexpr std::string_view kUser = "function ";
    constexpr std::string_view kBuiltin = "built-in function ";
    if (inner.rfind(kBuiltin, 0) == 0) {
      return Value(FuncRef{std::string(inner.substr(kBuiltin.size())), true});
    }
    if (inner.rfind(kUser, 0) == 0) {
      return Value(FuncRef{std::string(inner.substr(kUser.size())), false});
    }
  }
  try {
    return ParseLiteral(text);
  } catch (const SyntaxError& e) {
    throw ResumeError("cannot rebuild value from '" + std::string(text) + "'");
  }
}

ResumeResult Resume(const Module& module, const SelfContainedState& start,
                    std::int64_t max_steps, const ExecOptions& options) {
  const CodeObject& code = module.main_code();
  ResumeResult result;
  if (start.terminal()) {
    result.states.push_back(start);
    result.outcome = Outcome::Return(ParseReprValue(*start.return_repr));
    return result;
  }
  const Granularity g = start.granularity;
  ExecOptions run_options = options;
  run_options.granularity = g;

  Frame base;
  base.code = &code;
  base.locals.resize(code.local_names.size());
  for (const auto& [name, repr] : start.locals) {
    auto it = std::find(code.local_names.begin(), code.local_names.end(), name);
    if (it == code.local_names.end()) throw ResumeError("unknown local '" + name + "'");
    base.locals[static_cast<std::size_t>(it - code.local_names.begin())] = ParseReprValue(repr);
  }
  for (std::size_t i = 0; i < start.iterators.size(); ++i) {
    if (start.iterators[i].first != static_cast<int>(i) + 1 || start.iterators[i].second < 0) {
      throw ResumeError("iterator slots must be numbered 1..k");
    }
  }

  // Pick the instruction the state is about to run.
  int pc = -1;
  const std::size_t live = start.iterators.size();
  if (g == Granularity::kLine) {
    for (const auto& ins : code.code) {
      bool candidate = (ins.is_line_start && ins.line == start.location) ||
                       (ins.op == Opcode::kForIter && ins.line == start.location);
      if (candidate && EnclosingLoops(code, ins.offset).size() == live) {
        pc = ins.offset;
        break;
      }
    }
    if (pc < 0) {
      throw ResumeError("no resumable position for line " + std::to_string(start.location) +
                        " with " + std::to_string(live) + " live iterators");
    }
  } else {
    if (start.location < 0 || start.location >= static_cast<int>(code.code.size())) {
      throw ResumeError("offset out of range");
    }
    pc = start.location;
  }
  std::vector<const LoopInfo*> loops = EnclosingLoops(code, pc);
  if (loops.size() != live) throw ResumeError("iterator entries do not match enclosing loops");

  std::vector<Value> iterators;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    iterators.push_back(RebuildIterator(module, options, base, *loops[i], start.iterators[i].second));
  }
  if (g == Granularity::kLine) {
    base.stack = iterators;
  } else {
    std::vector<int> depths = VerifyStackDepth(code);
    if (depths[static_cast<std::size_t>(pc)] != static_cast<int>(start.stack.size())) {
      throw ResumeError("stack depth does not match offset " + std::to_string(pc));
    }
    // Entries loaded from a local are that local's object, so later in-place
    // mutation through the stack reaches the local too.
    const std::vector<int> sources = *StackSources(code)[static_cast<std::size_t>(pc)];
    const LoopInfo* setup = nullptr;
    for (const auto& l : code.loops) {
      if (l.get_iter == pc) setup = &l;
    }
    std::size_t used = 0;
    for (std::size_t i = 0; i < start.stack.size(); ++i) {
      const std::string& repr = start.stack[i];
      const int src = i < sources.size() ? sources[i] : -1;
      const auto& local = src >= 0 ? base.locals[static_cast<std::size_t>(src)] : std::nullopt;
      if (repr.rfind("__for_iterator_", 0) == 0) {
        if (used >= iterators.size() || repr != IteratorName(static_cast<int>(used) + 1)) {
          throw ResumeError("unexpected iterator tag '" + repr + "' on the stack");
        }
        base.stack.push_back(iterators[used++]);
      } else if (local && Repr(*local) == repr) {
        base.stack.push_back(*local);
      } else if (setup && i + 1 == start.stack.size()) {
        // The iterable about to be wrapped by GET_ITER; iterator objects
        // such as enumerate have no literal form.
        base.stack.push_back(EvaluateIterable(module, options, base, *setup));
      } else {
        base.stack.push_back(ParseReprValue(repr));
      }
    }
    if (used != iterators.size()) throw ResumeError("stack is missing loop iterators");
  }
  base.pc = pc;
  base.depth = 0;
  base.traced = true;
  base.boundary = true;
  // Loop headers reached through the back edge still open with a line event.
  base.back_jump = g == Granularity::kLine;

  Trace trace;
  trace.granularity = g;
  trace.func = code.name;
  Vm vm(module, run_options, &trace);
  vm.max_steps = max_steps;
  std::vector<Frame> frames{std::move(base)};
  result.outcome = vm.Run(frames);
  result.stopped = vm.stopped;
  result.states = StateSequence(trace, start.source);
  return result;
}

std::string TraceToJsonl(const Trace& trace) {
  using nlohmann::ordered_json;
  std::string args_repr = Repr(Value::MakeTuple(trace.args));
  std::string out;
  for (const auto& ev : trace.events) {
    ordered_json row;
    row["unit_id"] = trace.unit_id;
    row["args_repr"] = args_repr;
    row["event_index"] = ev.index;
    row["kind"] = std::string(EventKindName(ev.kind));
    row["depth"] = ev.depth;
    row["func"] = ev.func;
    row["line"] = ev.line;
    ordered_json locals = ordered_json::object();
    for (const auto& [name, v] : ev.locals) locals[name] = Repr(v);
    row["locals"] = locals;
    ordered_json iters = ordered_json::object();
    for (const auto& it : ev.iterators) iters[IteratorName(it.slot)] = it.count;
    row["iterators"] = iters;
    row["stack"] = ev.stack ? ordered_json(*ev.stack) : ordered_json(nullptr);
    row["instr"] = ev.instr ? ordered_json(*ev.instr) : ordered_json(nullptr);
    row["retval"] = ev.retval ? ordered_json(Repr(*ev.retval)) : ordered_json(nullptr);
    out += row.dump() + "\n";
  }
  ordered_json last;
  switch (trace.outcome.kind) {
    case OutcomeKind::kReturn:
      last["outcome"] = "return";
      last["value_or_message"] = Repr(trace.outcome.value);
      break;
    case OutcomeKind::kError:
      last["outcome"] = "error";
      last["value_or_message"] = trace.outcome.error_kind + ": " + trace.outcome.message;
      last["line"] = trace.outcome.line;
      break;
    case OutcomeKind::kFuel:
      last["outcome"] = "fuel";
      last["value_or_message"] = "fuel exhausted after " + std::to_string(trace.outcome.fuel) +
                                 " events";
      break;
  }
  out += last.dump() + "\n";
  return out;
}

}  // namespace exectrace
