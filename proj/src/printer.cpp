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

#include <algorithm>
#include <set>

#include "exectrace/ast.hpp"

namespace exectrace {

namespace {

// Binding strength, weakest first.
enum Prec {
  kPrecTest = 1,
  kPrecOr,
  kPrecAnd,
  kPrecNot,
  kPrecCompare,
  kPrecArith,
  kPrecTerm,
  kPrecFactor,
  kPrecPower,
  kPrecAtom,
};

int PrecOf(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kIfExp:
      return kPrecTest;
    case ExprKind::kBoolOp:
      return e.bool_and ? kPrecAnd : kPrecOr;
    case ExprKind::kUnary:
      return e.unary_op == UnaryOp::kNot ? kPrecNot : kPrecFactor;
    case ExprKind::kCompare:
      return kPrecCompare;
    case ExprKind::kBinary:
      switch (e.bin_op) {
        case BinOp::kAdd:
        case BinOp::kSub:
          return kPrecArith;
        case BinOp::kPow:
          return kPrecPower;
        default:
          return kPrecTerm;
      }
    default:
      return kPrecAtom;
  }
}

void Emit(const Expr& e, int min_prec, std::string& out);

void EmitList(const std::vector<ExprPtr>& items, std::size_t from, std::string& out) {
  for (std::size_t i = from; i < items.size(); ++i) {
    if (i > from) out += ", ";
    Emit(*items[i], kPrecTest, out);
  }
}

void EmitInner(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      out += Repr(e.literal);
      return;
    case ExprKind::kName:
      out += e.name;
      return;
    case ExprKind::kBinary: {
      int p = PrecOf(e);
      if (e.bin_op == BinOp::kPow) {
        Emit(*e.children[0], kPrecAtom, out);
        out += " ** ";
        Emit(*e.children[1], kPrecFactor, out);
      } else {
        Emit(*e.children[0], p, out);
        out += ' ';
        out += Symbol(e.bin_op);
        out += ' ';
        Emit(*e.children[1], p + 1, out);
      }
      return;
    }
    case ExprKind::kUnary:
      if (e.unary_op == UnaryOp::kNot) {
        out += "not ";
        Emit(*e.children[0], kPrecNot, out);
      } else {
        out += '-';
        Emit(*e.children[0], kPrecFactor, out);
      }
      return;
    case ExprKind::kCompare:
      Emit(*e.children[0], kPrecArith, out);
      for (std::size_t i = 0; i < e.cmp_ops.size(); ++i) {
        out += ' ';
        out += Symbol(e.cmp_ops[i]);
        out += ' ';
        Emit(*e.children[i + 1], kPrecArith, out);
      }
      return;
    case ExprKind::kBoolOp:
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i > 0) out += e.bool_and ? " and " : " or ";
        Emit(*e.children[i], PrecOf(e) + 1, out);
      }
      return;
    case ExprKind::kIndex:
      Emit(*e.children[0], kPrecAtom, out);
      out += '[';
      Emit(*e.children[1], kPrecTest, out);
      out += ']';
      return;
    case ExprKind::kSlice:
      Emit(*e.children[0], kPrecAtom, out);
      out += '[';
      if (e.children[1]) Emit(*e.children[1], kPrecTest, out);
      out += ':';
      if (e.children[2]) Emit(*e.children[2], kPrecTest, out);
      if (e.children[3]) {
        out += ':';
        Emit(*e.children[3], kPrecTest, out);
      }
      out += ']';
      return;
    case ExprKind::kCall:
      out += e.name;
      out += '(';
      EmitList(e.children, 0, out);
      out += ')';
      return;
    case ExprKind::kMethodCall: {
      const Expr& obj = *e.children[0];
      // `1.upper()` would lex as a float.
      bool wrap = obj.kind == ExprKind::kLiteral && obj.literal.is_numeric();
      if (wrap) out += '(';
      Emit(obj, kPrecAtom, out);
      if (wrap) out += ')';
      out += '.';
      out += e.name;
      out += '(';
      EmitList(e.children, 1, out);
      out += ')';
      return;
    }
    case ExprKind::kList:
      out += '[';
      EmitList(e.children, 0, out);
      out += ']';
      return;
    case ExprKind::kTuple:
      out += '(';
      EmitList(e.children, 0, out);
      if (e.children.size() == 1) out += ',';
      out += ')';
      return;
    case ExprKind::kDict:
      out += '{';
      for (std::size_t i = 0; i + 1 < e.children.size(); i += 2) {
        if (i > 0) out += ", ";
        Emit(*e.children[i], kPrecTest, out);
        out += ": ";
        Emit(*e.children[i + 1], kPrecTest, out);
      }
      out += '}';
      return;
    case ExprKind::kIfExp:
      Emit(*e.children[1], kPrecOr, out);
      out += " if ";
      Emit(*e.children[0], kPrecOr, out);
      out += " else ";
      Emit(*e.children[2], kPrecTest, out);
      return;
  }
}

void Emit(const Expr& e, int min_prec, std::string& out) {
  bool paren = PrecOf(e) < min_prec;
  if (paren) out += '(';
  EmitInner(e, out);
  if (paren) out += ')';
}

// Targets and returned tuples are printed without the outer parentheses.
void EmitTopLevel(const Expr& e, std::string& out) {
  if (e.kind == ExprKind::kTuple && !e.children.empty()) {
    EmitList(e.children, 0, out);
    if (e.children.size() == 1) out += ',';
    return;
  }
  Emit(e, kPrecTest, out);
}

void EmitBlock(const Block& block, int indent, std::string& out);

void EmitStmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  out += pad;
  switch (s.kind) {
    case StmtKind::kAssign:
      for (const auto& t : s.targets) {
        EmitTopLevel(*t, out);
        out += " = ";
      }
      EmitTopLevel(*s.value, out);
      out += '\n';
      return;
    case StmtKind::kAugAssign:
      EmitTopLevel(*s.targets[0], out);
      out += ' ';
      out += Symbol(s.aug_op);
      out += "= ";
      EmitTopLevel(*s.value, out);
      out += '\n';
      return;
    case StmtKind::kExpr:
      EmitTopLevel(*s.value, out);
      out += '\n';
      return;
    case StmtKind::kIf: {
      const Stmt* cur = &s;
      out += "if ";
      while (true) {
        Emit(*cur->value, kPrecTest, out);
        out += ":\n";
        EmitBlock(cur->body, indent + 1, out);
        if (cur->orelse.size() == 1 && cur->orelse[0]->is_elif) {
          cur = cur->orelse[0].get();
          out += pad + "elif ";
          continue;
        }
        if (!cur->orelse.empty()) {
          out += pad + "else:\n";
          EmitBlock(cur->orelse, indent + 1, out);
        }
        return;
      }
    }
    case StmtKind::kWhile:
      out += "while ";
      Emit(*s.value, kPrecTest, out);
      out += ":\n";
      EmitBlock(s.body, indent + 1, out);
      return;
    case StmtKind::kFor:
      out += "for ";
      EmitTopLevel(*s.targets[0], out);
      out += " in ";
      EmitTopLevel(*s.value, out);
      out += ":\n";
      EmitBlock(s.body, indent + 1, out);
      return;
    case StmtKind::kReturn:
      out += "return";
      if (s.value) {
        out += ' ';
        EmitTopLevel(*s.value, out);
      }
      out += '\n';
      return;
    case StmtKind::kBreak:
      out += "break\n";
      return;
    case StmtKind::kContinue:
      out += "continue\n";
      return;
    case StmtKind::kPass:
      out += "pass\n";
      return;
  }
}

void EmitBlock(const Block& block, int indent, std::string& out) {
  if (block.empty()) {
    out += std::string(static_cast<std::size_t>(indent) * 4, ' ') + "pass\n";
    return;
  }
  for (const auto& s : block) EmitStmt(*s, indent, out);
}

void DumpExprInto(const Expr& e, bool with_lines, std::string& out) {
  out += '(';
  switch (e.kind) {
    case ExprKind::kLiteral:
      out += "lit " + Repr(e.literal);
      break;
    case ExprKind::kName:
      out += "name " + e.name;
      break;
    case ExprKind::kBinary:
      out += "bin ";
      out += Symbol(e.bin_op);
      break;
    case ExprKind::kUnary:
      out += "unary ";
      out += Symbol(e.unary_op);
      break;
    case ExprKind::kCompare:
      out += "cmp";
      for (CmpOp op : e.cmp_ops) {
        out += ' ';
        out += Symbol(op);
      }
      break;
    case ExprKind::kBoolOp:
      out += e.bool_and ? "and" : "or";
      break;
    case ExprKind::kIndex:
      out += "index";
      break;
    case ExprKind::kSlice:
      out += "slice";
      break;
    case ExprKind::kCall:
      out += "call " + e.name;
      break;
    case ExprKind::kMethodCall:
      out += "method " + e.name;
      break;
    case ExprKind::kList:
      out += "list";
      break;
    case ExprKind::kTuple:
      out += "tuple";
      break;
    case ExprKind::kDict:
      out += "dict";
      break;
    case ExprKind::kIfExp:
      out += "ifexp";
      break;
  }
  if (with_lines) out += " @" + std::to_string(e.line);
  for (const auto& c : e.children) {
    out += ' ';
    if (c) {
      DumpExprInto(*c, with_lines, out);
    } else {
      out += "_";
    }
  }
  out += ')';
}

constexpr const char* kStmtNames[] = {"assign", "augassign", "expr",  "if",       "while",
                                      "for",    "return",    "break", "continue", "pass"};

void DumpBlock(const Block& block, bool with_lines, std::string& out);

void DumpStmt(const Stmt& s, bool with_lines, std::string& out) {
  out += '(';
  out += kStmtNames[static_cast<int>(s.kind)];
  if (s.kind == StmtKind::kAugAssign) {
    out += ' ';
    out += Symbol(s.aug_op);
  }
  if (s.is_elif) out += " elif";
  if (with_lines) out += " @" + std::to_string(s.line);
  for (const auto& t : s.targets) {
    out += ' ';
    DumpExprInto(*t, with_lines, out);
  }
  if (s.value) {
    out += ' ';
    DumpExprInto(*s.value, with_lines, out);
  }
  if (!s.body.empty()) {
    out += ' ';
    DumpBlock(s.body, with_lines, out);
  }
  if (!s.orelse.empty()) {
    out += " else ";
    DumpBlock(s.orelse, with_lines, out);
  }
  out += ')';
}

void DumpBlock(const Block& block, bool with_lines, std::string& out) {
  out += '[';
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (i > 0) out += ' ';
    DumpStmt(*block[i], with_lines, out);
  }
  out += ']';
}

void CollectTargetNames(const Expr& e, std::vector<std::string>& names,
                        std::set<std::string>& seen) {
  if (e.kind == ExprKind::kName) {
    if (seen.insert(e.name).second) names.push_back(e.name);
  } else if (e.kind == ExprKind::kTuple || e.kind == ExprKind::kList) {
    for (const auto& c : e.children) CollectTargetNames(*c, names, seen);
  }
}

void CollectBlockNames(const Block& block, std::vector<std::string>& names,
                       std::set<std::string>& seen) {
  for (const auto& s : block) {
    for (const auto& t : s->targets) CollectTargetNames(*t, names, seen);
    CollectBlockNames(s->body, names, seen);
    CollectBlockNames(s->orelse, names, seen);
  }
}

}  // namespace

std::string RenderExpr(const Expr& expr) {
  std::string out;
  Emit(expr, kPrecTest, out);
  return out;
}

std::string RenderFunction(const FunctionDef& fn) {
  std::string out = "def " + fn.name + "(";
  for (std::size_t i = 0; i < fn.params.size(); ++i) {
    if (i > 0) out += ", ";
    out += fn.params[i];
  }
  out += "):\n";
  EmitBlock(fn.body, 1, out);
  return out;
}

std::string Render(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (i > 0) out += '\n';
    out += RenderFunction(program.functions[i]);
  }
  return out;
}

std::string DumpExpr(const Expr& expr, bool with_lines) {
  std::string out;
  DumpExprInto(expr, with_lines, out);
  return out;
}

std::string DumpAst(const Program& program, bool with_lines) {
  std::string out;
  for (const auto& fn : program.functions) {
    out += "(def " + fn.name + " (";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      if (i > 0) out += ' ';
      out += fn.params[i];
    }
    out += ')';
    if (with_lines) out += " @" + std::to_string(fn.line);
    out += ' ';
    DumpBlock(fn.body, with_lines, out);
    out += ")\n";
  }
  return out;
}

std::vector<std::string> LocalNames(const FunctionDef& fn) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& p : fn.params) {
    if (seen.insert(p).second) names.push_back(p);
  }
  CollectBlockNames(fn.body, names, seen);
  return names;
}

}  // namespace exectrace
