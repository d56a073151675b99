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

#include "exectrace/ast_eval.hpp"

#include <map>
#include <optional>
#include <set>

namespace exectrace {

std::string_view GranularityName(Granularity g) {
  return g == Granularity::kLine ? "line" : "instruction";
}

Granularity ParseGranularity(std::string_view name) {
  if (name == "line") return Granularity::kLine;
  if (name == "instruction") return Granularity::kInstruction;
  throw std::invalid_argument("unknown granularity '" + std::string(name) + "'");
}

std::string Describe(const Outcome& o) {
  switch (o.kind) {
    case OutcomeKind::kReturn:
      return "return " + Repr(o.value);
    case OutcomeKind::kError:
      return "error " + o.error_kind + " at line " + std::to_string(o.line) + ": " + o.message;
    case OutcomeKind::kFuel:
      return "fuel " + std::to_string(o.fuel);
  }
  return "";
}

bool SameOutcome(const Outcome& a, const Outcome& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case OutcomeKind::kReturn:
      return Repr(a.value) == Repr(b.value);
    case OutcomeKind::kError:
      return a.error_kind == b.error_kind && a.line == b.line;
    case OutcomeKind::kFuel:
      return true;
  }
  return false;
}

namespace {

struct FuelOut {};

enum class Flow { kNormal, kBreak, kContinue, kReturn };

class Evaluator {
 public:
  Evaluator(const Program& program, std::int64_t fuel) : program_(program), fuel_(fuel) {}

  Value CallFunction(const FunctionDef& fn, std::vector<Value> args, int depth) {
    if (depth > kMaxCallDepth) {
      throw ExecError("RecursionError", "maximum recursion depth exceeded");
    }
    Frame frame;
    frame.fn = &fn;
    frame.depth = depth;
    for (const auto& n : LocalNames(fn)) frame.local_names.insert(n);
    for (std::size_t i = 0; i < args.size(); ++i) frame.locals[fn.params[i]] = args[i];
    Value result;
    Flow flow = ExecBlock(frame, fn.body, &result);
    if (flow != Flow::kReturn) return Value();
    return result;
  }

  int current_line() const { return line_; }

 private:
  struct Frame {
    const FunctionDef* fn = nullptr;
    std::map<std::string, Value> locals;
    std::set<std::string> local_names;
    int depth = 0;
  };

  void Tick(int line) {
    line_ = line;
    if (--fuel_ < 0) throw FuelOut{};
  }

  Flow ExecBlock(Frame& f, const Block& block, Value* result) {
    for (const auto& s : block) {
      Flow flow = ExecStmt(f, *s, result);
      if (flow != Flow::kNormal) return flow;
    }
    return Flow::kNormal;
  }

  Flow ExecStmt(Frame& f, const Stmt& s, Value* result) {
    Tick(s.line);
    switch (s.kind) {
      case StmtKind::kAssign: {
        Value v = Eval(f, *s.value);
        for (const auto& t : s.targets) Assign(f, *t, v);
        return Flow::kNormal;
      }
      case StmtKind::kAugAssign: {
        const Expr& t = *s.targets[0];
        if (t.kind == ExprKind::kName) {
          Value cur = LoadName(f, t.name);
          Value rhs = Eval(f, *s.value);
          f.locals[t.name] = BinaryOperation(s.aug_op, cur, rhs, true);
        } else {
          Value container = Eval(f, *t.children[0]);
          Value index = Eval(f, *t.children[1]);
          Value cur = Index(container, index);
          Value rhs = Eval(f, *s.value);
          StoreIndex(container, index, BinaryOperation(s.aug_op, cur, rhs, true));
        }
        return Flow::kNormal;
      }
      case StmtKind::kExpr:
        Eval(f, *s.value);
        return Flow::kNormal;
      case StmtKind::kIf: {
        if (Truthy(Eval(f, *s.value))) return ExecBlock(f, s.body, result);
        if (s.orelse.size() == 1 && s.orelse[0]->is_elif) {
          return ExecStmt(f, *s.orelse[0], result);
        }
        return ExecBlock(f, s.orelse, result);
      }
      case StmtKind::kWhile: {
        bool first = true;
        while (true) {
          if (!first) Tick(s.line);
          first = false;
          if (!Truthy(Eval(f, *s.value))) return Flow::kNormal;
          Flow flow = ExecBlock(f, s.body, result);
          if (flow == Flow::kBreak) return Flow::kNormal;
          if (flow == Flow::kReturn) return flow;
        }
      }
      case StmtKind::kFor: {
        Iter it = GetIter(Eval(f, *s.value), true);
        bool first = true;
        while (true) {
          if (!first) Tick(s.line);
          first = false;
          std::optional<Value> item = IterNext(*it);
          if (!item) return Flow::kNormal;
          Assign(f, *s.targets[0], *item);
          Flow flow = ExecBlock(f, s.body, result);
          if (flow == Flow::kBreak) return Flow::kNormal;
          if (flow == Flow::kReturn) return flow;
        }
      }
      case StmtKind::kReturn:
        *result = s.value ? Eval(f, *s.value) : Value();
        return Flow::kReturn;
      case StmtKind::kBreak:
        return Flow::kBreak;
      case StmtKind::kContinue:
        return Flow::kContinue;
      case StmtKind::kPass:
        return Flow::kNormal;
    }
    return Flow::kNormal;
  }

  void Assign(Frame& f, const Expr& target, const Value& v) {
    switch (target.kind) {
      case ExprKind::kName:
        f.locals[target.name] = v;
        return;
      case ExprKind::kIndex: {
        Value container = Eval(f, *target.children[0]);
        Value index = Eval(f, *target.children[1]);
        StoreIndex(container, index, v);
        return;
      }
      case ExprKind::kTuple:
      case ExprKind::kList: {
        std::vector<Value> items = Materialize(v);
        std::size_t n = target.children.size();
        if (items.size() > n) {
          throw ExecError("ValueError",
                          "too many values to unpack (expected " + std::to_string(n) + ")");
        }
        if (items.size() < n) {
          throw ExecError("ValueError", "not enough values to unpack (expected " +
                                            std::to_string(n) + ", got " +
                                            std::to_string(items.size()) + ")");
        }
        for (std::size_t i = 0; i < n; ++i) Assign(f, *target.children[i], items[i]);
        return;
      }
      default:
        throw ExecError("SyntaxError", "cannot assign to expression");
    }
  }

  Value LoadName(const Frame& f, const std::string& name) {
    auto it = f.locals.find(name);
    if (it != f.locals.end()) return it->second;
    if (f.local_names.count(name)) {
      throw ExecError("UnboundLocalError", "cannot access local variable '" + name +
                                               "' where it is not associated with a value");
    }
    return LoadGlobal(name);
  }

  Value LoadGlobal(const std::string& name) {
    if (program_.find(name)) return Value(FuncRef{name, false});
    if (IsBuiltin(name)) return Value(FuncRef{name, true});
    throw ExecError("NameError", "name '" + name + "' is not defined");
  }

  Value Eval(Frame& f, const Expr& e) {
    switch (e.kind) {
      case ExprKind::kLiteral:
        return e.literal;
      case ExprKind::kName:
        return LoadName(f, e.name);
      case ExprKind::kBinary: {
        Value a = Eval(f, *e.children[0]);
        Value b = Eval(f, *e.children[1]);
        return BinaryOperation(e.bin_op, a, b);
      }
      case ExprKind::kUnary:
        return UnaryOperation(e.unary_op, Eval(f, *e.children[0]));
      case ExprKind::kCompare: {
        Value left = Eval(f, *e.children[0]);
        for (std::size_t i = 0; i < e.cmp_ops.size(); ++i) {
          Value right = Eval(f, *e.children[i + 1]);
          if (!Compare(e.cmp_ops[i], left, right)) return Value(false);
          left = right;
        }
        return Value(true);
      }
      case ExprKind::kBoolOp: {
        Value v;
        for (std::size_t i = 0; i < e.children.size(); ++i) {
          v = Eval(f, *e.children[i]);
          bool t = Truthy(v);
          if (e.bool_and ? !t : t) return v;
        }
        return v;
      }
      case ExprKind::kIndex: {
        Value c = Eval(f, *e.children[0]);
        Value i = Eval(f, *e.children[1]);
        return Index(c, i);
      }
      case ExprKind::kSlice: {
        Value c = Eval(f, *e.children[0]);
        Value lo = e.children[1] ? Eval(f, *e.children[1]) : Value();
        Value hi = e.children[2] ? Eval(f, *e.children[2]) : Value();
        Value st = e.children[3] ? Eval(f, *e.children[3]) : Value();
        return Slice(c, lo, hi, st);
      }
      case ExprKind::kCall: {
        Value callee = LoadName(f, e.name);
        std::vector<Value> args;
        for (const auto& c : e.children) args.push_back(Eval(f, *c));
        return Call(f, callee, std::move(args));
      }
      case ExprKind::kMethodCall: {
        Value self = Eval(f, *e.children[0]);
        std::vector<Value> args;
        for (std::size_t i = 1; i < e.children.size(); ++i) args.push_back(Eval(f, *e.children[i]));
        return CallMethod(self, e.name, args);
      }
      case ExprKind::kList:
      case ExprKind::kTuple: {
        std::vector<Value> items;
        for (const auto& c : e.children) items.push_back(Eval(f, *c));
        return e.kind == ExprKind::kList ? Value::MakeList(std::move(items))
                                         : Value::MakeTuple(std::move(items));
      }
      case ExprKind::kDict: {
        std::vector<Value> parts;
        for (const auto& c : e.children) parts.push_back(Eval(f, *c));
        Value d = Value::MakeDict();
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) d.as_dict()->set(parts[i], parts[i + 1]);
        return d;
      }
      case ExprKind::kIfExp:
        return Truthy(Eval(f, *e.children[0])) ? Eval(f, *e.children[1])
                                               : Eval(f, *e.children[2]);
    }
    return Value();
  }

  Value Call(Frame& f, const Value& callee, std::vector<Value> args) {
    if (!callee.is(Kind::kFunc)) {
      throw ExecError("TypeError", "'" + TypeName(callee) + "' object is not callable");
    }
    const FuncRef& ref = callee.as_func();
    if (ref.builtin) return CallBuiltin(ref.name, args);
    const FunctionDef* fn = program_.find(ref.name);
    if (args.size() != fn->params.size()) {
      throw ExecError("TypeError", ref.name + "() takes " + std::to_string(fn->params.size()) +
                                       " positional arguments but " +
                                       std::to_string(args.size()) + " were given");
    }
    int saved = line_;
    Value v = CallFunction(*fn, std::move(args), f.depth + 1);
    line_ = saved;
    return v;
  }

  const Program& program_;
  std::int64_t fuel_;
  int line_ = 0;
};

}  // namespace

Outcome EvaluateAst(const Program& program, const std::string& function,
                    const std::vector<Value>& args, const AstEvalOptions& options) {
  const FunctionDef* fn = program.find(function);
  if (!fn) throw std::invalid_argument("no function named '" + function + "'");
  if (args.size() != fn->params.size()) {
    throw ArityError(function + "() takes " + std::to_string(fn->params.size()) +
                     " arguments, got " + std::to_string(args.size()));
  }
  Evaluator ev(program, options.fuel);
  try {
    return Outcome::Return(ev.CallFunction(*fn, args, 0));
  } catch (const FuelOut&) {
    return Outcome::Fuel(options.fuel);
  } catch (const ExecError& e) {
    return Outcome::Error(e.kind(), e.what(), ev.current_line());
  }
}

}  // namespace exectrace
