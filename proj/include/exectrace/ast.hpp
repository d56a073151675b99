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

// MiniLang abstract syntax. Nodes are immutable once built and shared by
// pointer, so rewrites copy only the spine they change.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "exectrace/runtime_ops.hpp"
#include "exectrace/value.hpp"

namespace exectrace {

enum class ExprKind {
  kLiteral,
  kName,
  kBinary,
  kUnary,
  kCompare,
  kBoolOp,
  kIndex,
  kSlice,
  kCall,
  kMethodCall,
  kList,
  kTuple,
  kDict,
  kIfExp,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Operand layout per kind:
//   kBinary      children = {lhs, rhs}
//   kUnary       children = {operand}
//   kCompare     children = operands (cmp_ops.size() + 1)
//   kBoolOp      children = operands (>= 2), bool_and selects and/or
//   kIndex       children = {object, index}
//   kSlice       children = {object, lower, upper, step}; bounds may be null
//   kCall        name = callee, children = args
//   kMethodCall  name = method, children = {object, args...}
//   kList/kTuple children = elements
//   kDict        children = {k0, v0, k1, v1, ...}
//   kIfExp       children = {test, body, orelse}
struct Expr {
  ExprKind kind = ExprKind::kLiteral;
  int line = 0;
  Value literal;
  std::string name;
  BinOp bin_op = BinOp::kAdd;
  UnaryOp unary_op = UnaryOp::kNeg;
  bool bool_and = true;
  std::vector<CmpOp> cmp_ops;
  std::vector<ExprPtr> children;
};

enum class StmtKind {
  kAssign,
  kAugAssign,
  kExpr,
  kIf,
  kWhile,
  kFor,
  kReturn,
  kBreak,
  kContinue,
  kPass,
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtPtr>;

// Field use per kind:
//   kAssign     targets (chained `a = b = v`), value
//   kAugAssign  targets[0], aug_op, value
//   kExpr       value
//   kIf         value = test, body, orelse (an elif is a lone kIf in orelse
//               with is_elif set)
//   kWhile      value = test, body
//   kFor        targets[0], value = iterable, body
//   kReturn     value (may be null)
struct Stmt {
  StmtKind kind = StmtKind::kPass;
  int line = 0;
  std::vector<ExprPtr> targets;
  ExprPtr value;
  BinOp aug_op = BinOp::kAdd;
  Block body;
  Block orelse;
  bool is_elif = false;
};

struct FunctionDef {
  std::string name;
  std::vector<std::string> params;
  Block body;
  int line = 0;
};

struct Program {
  std::vector<FunctionDef> functions;
  int source_lines = 0;

  const FunctionDef* find(const std::string& name) const;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line),
        message_(message) {}
  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  std::string message_;
};

// Canonical pretty-printer: four-space indentation, one statement per line,
// minimal parentheses. Parsing the output gives back the same structure.
std::string Render(const Program& program);
std::string RenderFunction(const FunctionDef& fn);
std::string RenderExpr(const Expr& expr);

// Structural dump used for AST equality; line numbers optional.
std::string DumpAst(const Program& program, bool with_lines);
std::string DumpExpr(const Expr& expr, bool with_lines);

// Names bound anywhere in a function (params first, then first-assignment
// order in a pre-order walk of the body).
std::vector<std::string> LocalNames(const FunctionDef& fn);

}  // namespace exectrace
