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

#include "exectrace/parser.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <set>

namespace exectrace {

namespace {

constexpr std::array<std::string_view, 17> kKeywords = {
    "def", "return", "if", "elif", "else", "while", "for", "in", "not",
    "and", "or", "break", "continue", "pass", "True", "False", "None"};

constexpr std::array<std::string_view, 18> kUnsupportedKeywords = {
    "class", "lambda", "import", "from", "try", "except", "finally", "with", "yield",
    "global", "nonlocal", "del", "assert", "raise", "async", "await", "is", "as"};

bool IsKeyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

bool IsUnsupportedKeyword(std::string_view s) {
  return std::find(kUnsupportedKeywords.begin(), kUnsupportedKeywords.end(), s) !=
         kUnsupportedKeywords.end();
}

std::shared_ptr<Expr> NewExpr(ExprKind kind, int line) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->line = line;
  return e;
}

std::shared_ptr<Stmt> NewStmt(StmtKind kind, int line) {
  auto s = std::make_shared<Stmt>();
  s->kind = kind;
  s->line = line;
  return s;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, ParseOptions options)
      : toks_(std::move(tokens)), options_(options) {}

  Program ParseProgram() {
    Program program;
    std::set<std::string> names;
    while (!At(TokenKind::kEnd)) {
      if (At(TokenKind::kNewline)) {
        Advance();
        continue;
      }
      if (!AtName("def")) {
        throw SyntaxError(Peek().line, "only function definitions are allowed at top level");
      }
      FunctionDef fn = ParseFunction();
      if (!names.insert(fn.name).second) {
        throw SyntaxError(fn.line, "duplicate function name '" + fn.name + "'");
      }
      program.functions.push_back(std::move(fn));
    }
    return program;
  }

  ExprPtr ParseStandaloneExpression() {
    while (At(TokenKind::kNewline)) Advance();
    ExprPtr e = ParseTestList();
    while (At(TokenKind::kNewline)) Advance();
    if (!At(TokenKind::kEnd)) throw SyntaxError(Peek().line, "unexpected trailing tokens");
    return e;
  }

 private:
  const Token& Peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool At(TokenKind k) const { return Peek().kind == k; }
  bool AtOp(std::string_view op) const { return At(TokenKind::kOp) && Peek().text == op; }
  bool AtName(std::string_view n) const { return At(TokenKind::kName) && Peek().text == n; }
  const Token& Advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void Fail(const std::string& msg) const { throw SyntaxError(Peek().line, msg); }

  void ExpectOp(std::string_view op) {
    if (!AtOp(op)) Fail("expected '" + std::string(op) + "'");
    Advance();
  }

  void ExpectName(std::string_view n) {
    if (!AtName(n)) Fail("expected '" + std::string(n) + "'");
    Advance();
  }

  std::string Identifier() {
    if (!At(TokenKind::kName)) Fail("expected identifier");
    const Token& t = Peek();
    if (IsKeyword(t.text) || IsUnsupportedKeyword(t.text)) {
      Fail("invalid syntax: unexpected keyword '" + t.text + "'");
    }
    CheckReserved(t.text, t.line);
    Advance();
    return t.text;
  }

  void CheckReserved(const std::string& name, int line) const {
    if (!options_.allow_reserved && name.rfind(kReservedPrefix, 0) == 0) {
      throw SyntaxError(line, "identifier '" + name + "' uses the reserved prefix __idx_");
    }
  }

  FunctionDef ParseFunction() {
    FunctionDef fn;
    fn.line = Peek().line;
    ExpectName("def");
    fn.name = Identifier();
    ExpectOp("(");
    std::set<std::string> seen;
    while (!AtOp(")")) {
      if (AtOp("*") || AtOp("**")) Fail("variadic parameters are not supported");
      std::string p = Identifier();
      if (AtOp("=")) Fail("default arguments are not supported");
      if (AtOp(":")) Fail("annotations are not supported");
      if (!seen.insert(p).second) Fail("duplicate argument '" + p + "' in function definition");
      fn.params.push_back(p);
      if (!AtOp(",")) break;
      Advance();
    }
    ExpectOp(")");
    if (AtOp("->")) Fail("annotations are not supported");
    fn.body = ParseSuite(fn.line, 0);
    return fn;
  }

  Block ParseSuite(int header_line, int loop_depth) {
    ExpectOp(":");
    Block block;
    if (!At(TokenKind::kNewline)) {
      // Simple statement on the header line.
      block.push_back(ParseSimple(loop_depth));
      EndOfStatement();
      (void)header_line;
      return block;
    }
    Advance();
    if (!At(TokenKind::kIndent)) Fail("expected an indented block");
    Advance();
    while (!At(TokenKind::kDedent) && !At(TokenKind::kEnd)) {
      block.push_back(ParseStatement(loop_depth));
    }
    if (At(TokenKind::kDedent)) Advance();
    return block;
  }

  void EndOfStatement() {
    if (AtOp(";")) Fail("multiple statements on one line are not supported");
    if (!At(TokenKind::kNewline)) Fail("invalid syntax");
    Advance();
  }

  StmtPtr ParseStatement(int loop_depth) {
    if (AtName("if")) return ParseIf(loop_depth, false);
    if (AtName("while")) return ParseWhile(loop_depth);
    if (AtName("for")) return ParseFor(loop_depth);
    if (AtName("def")) Fail("nested function definitions are not supported");
    if (AtName("else") || AtName("elif")) Fail("invalid syntax");
    StmtPtr s = ParseSimple(loop_depth);
    EndOfStatement();
    return s;
  }

  StmtPtr ParseIf(int loop_depth, bool is_elif) {
    auto s = NewStmt(StmtKind::kIf, Peek().line);
    s->is_elif = is_elif;
    Advance();
    s->value = ParseTest();
    s->body = ParseSuite(s->line, loop_depth);
    if (AtName("elif")) {
      s->orelse.push_back(ParseIf(loop_depth, true));
    } else if (AtName("else")) {
      int line = Peek().line;
      Advance();
      s->orelse = ParseSuite(line, loop_depth);
    }
    return s;
  }

  StmtPtr ParseWhile(int loop_depth) {
    auto s = NewStmt(StmtKind::kWhile, Peek().line);
    Advance();
    s->value = ParseTest();
    s->body = ParseSuite(s->line, loop_depth + 1);
    if (AtName("else")) Fail("loop else clauses are not supported");
    return s;
  }

  StmtPtr ParseFor(int loop_depth) {
    auto s = NewStmt(StmtKind::kFor, Peek().line);
    Advance();
    ExprPtr target = ParseTargetList();
    ValidateTarget(*target);
    s->targets.push_back(target);
    ExpectName("in");
    s->value = ParseTestList();
    s->body = ParseSuite(s->line, loop_depth + 1);
    if (AtName("else")) Fail("loop else clauses are not supported");
    return s;
  }

  StmtPtr ParseSimple(int loop_depth) {
    int line = Peek().line;
    if (AtName("pass")) {
      Advance();
      return NewStmt(StmtKind::kPass, line);
    }
    if (AtName("break") || AtName("continue")) {
      bool is_break = Peek().text == "break";
      if (loop_depth == 0) {
        Fail(std::string("'") + (is_break ? "break" : "continue") + "' outside loop");
      }
      Advance();
      return NewStmt(is_break ? StmtKind::kBreak : StmtKind::kContinue, line);
    }
    if (AtName("return")) {
      Advance();
      auto s = NewStmt(StmtKind::kReturn, line);
      if (!At(TokenKind::kNewline) && !AtOp(";")) s->value = ParseTestList();
      return s;
    }
    if (At(TokenKind::kName) && IsUnsupportedKeyword(Peek().text)) {
      Fail("'" + Peek().text + "' is not supported");
    }
    ExprPtr first = ParseTestList();
    if (AtOp("=")) {
      auto s = NewStmt(StmtKind::kAssign, line);
      std::vector<ExprPtr> chain{first};
      while (AtOp("=")) {
        Advance();
        chain.push_back(ParseTestList());
      }
      s->value = chain.back();
      chain.pop_back();
      for (const auto& t : chain) ValidateTarget(*t);
      s->targets = std::move(chain);
      return s;
    }
    static const std::array<std::pair<std::string_view, BinOp>, 7> kAug = {{
        {"+=", BinOp::kAdd},
        {"-=", BinOp::kSub},
        {"*=", BinOp::kMul},
        {"/=", BinOp::kDiv},
        {"//=", BinOp::kFloorDiv},
        {"%=", BinOp::kMod},
        {"**=", BinOp::kPow},
    }};
    for (const auto& [op, bin] : kAug) {
      if (AtOp(op)) {
        Advance();
        if (first->kind != ExprKind::kName && first->kind != ExprKind::kIndex) {
          throw SyntaxError(line, "illegal expression for augmented assignment");
        }
        auto s = NewStmt(StmtKind::kAugAssign, line);
        s->targets.push_back(first);
        s->aug_op = bin;
        s->value = ParseTestList();
        return s;
      }
    }
    if (AtOp(":")) Fail("annotated assignments are not supported");
    auto s = NewStmt(StmtKind::kExpr, line);
    s->value = first;
    return s;
  }

  void ValidateTarget(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::kName:
        return;
      case ExprKind::kIndex:
        return;
      case ExprKind::kTuple:
      case ExprKind::kList:
        if (e.children.empty()) throw SyntaxError(e.line, "cannot assign to empty sequence");
        for (const auto& c : e.children) ValidateTarget(*c);
        return;
      case ExprKind::kSlice:
        throw SyntaxError(e.line, "slice assignment is not supported");
      default:
        throw SyntaxError(e.line, "cannot assign to expression");
    }
  }

  // for-loop targets stop before `in`.
  ExprPtr ParseTargetList() {
    int line = Peek().line;
    std::vector<ExprPtr> items{ParseArith()};
    bool trailing = false;
    while (AtOp(",")) {
      Advance();
      trailing = true;
      if (AtName("in")) break;
      items.push_back(ParseArith());
      trailing = false;
    }
    if (items.size() == 1 && !trailing) return items[0];
    auto t = NewExpr(ExprKind::kTuple, line);
    t->children = std::move(items);
    return t;
  }

  bool StartsExpression() const {
    if (At(TokenKind::kName)) {
      const std::string& t = Peek().text;
      if (t == "not" || t == "True" || t == "False" || t == "None") return true;
      return !IsKeyword(t);
    }
    if (At(TokenKind::kInt) || At(TokenKind::kFloat) || At(TokenKind::kString)) return true;
    return AtOp("(") || AtOp("[") || AtOp("{") || AtOp("-") || AtOp("+");
  }

  ExprPtr ParseTestList() {
    int line = Peek().line;
    ExprPtr first = ParseTest();
    if (!AtOp(",")) return first;
    auto t = NewExpr(ExprKind::kTuple, line);
    t->children.push_back(first);
    while (AtOp(",")) {
      Advance();
      if (!StartsExpression()) break;
      t->children.push_back(ParseTest());
    }
    return t;
  }

  ExprPtr ParseTest() {
    if (AtName("lambda")) Fail("lambda is not supported");
    ExprPtr body = ParseOr();
    if (AtName("if")) {
      int line = body->line;
      Advance();
      ExprPtr test = ParseOr();
      ExpectName("else");
      ExprPtr orelse = ParseTest();
      auto e = NewExpr(ExprKind::kIfExp, line);
      e->children = {test, body, orelse};
      return e;
    }
    return body;
  }

  ExprPtr ParseBool(bool is_and) {
    ExprPtr first = is_and ? ParseNot() : ParseBool(true);
    std::string_view kw = is_and ? "and" : "or";
    if (!AtName(kw)) return first;
    auto e = NewExpr(ExprKind::kBoolOp, first->line);
    e->bool_and = is_and;
    e->children.push_back(first);
    while (AtName(kw)) {
      Advance();
      e->children.push_back(is_and ? ParseNot() : ParseBool(true));
    }
    return e;
  }

  ExprPtr ParseOr() { return ParseBool(false); }

  ExprPtr ParseNot() {
    if (AtName("not")) {
      int line = Peek().line;
      Advance();
      auto e = NewExpr(ExprKind::kUnary, line);
      e->unary_op = UnaryOp::kNot;
      e->children.push_back(ParseNot());
      return e;
    }
    return ParseComparison();
  }

  bool ComparisonOp(CmpOp* out) {
    static const std::array<std::pair<std::string_view, CmpOp>, 6> kOps = {{
        {"==", CmpOp::kEq},
        {"!=", CmpOp::kNe},
        {"<=", CmpOp::kLe},
        {">=", CmpOp::kGe},
        {"<", CmpOp::kLt},
        {">", CmpOp::kGt},
    }};
    for (const auto& [text, op] : kOps) {
      if (AtOp(text)) {
        Advance();
        *out = op;
        return true;
      }
    }
    if (AtName("in")) {
      Advance();
      *out = CmpOp::kIn;
      return true;
    }
    if (AtName("not") && Peek(1).kind == TokenKind::kName && Peek(1).text == "in") {
      Advance();
      Advance();
      *out = CmpOp::kNotIn;
      return true;
    }
    if (AtName("is")) Fail("'is' comparisons are not supported");
    return false;
  }

  ExprPtr ParseComparison() {
    ExprPtr first = ParseArith();
    CmpOp op;
    if (!ComparisonOp(&op)) return first;
    auto e = NewExpr(ExprKind::kCompare, first->line);
    e->children.push_back(first);
    e->cmp_ops.push_back(op);
    e->children.push_back(ParseArith());
    while (ComparisonOp(&op)) {
      e->cmp_ops.push_back(op);
      e->children.push_back(ParseArith());
    }
    return e;
  }

  ExprPtr Binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = NewExpr(ExprKind::kBinary, lhs->line);
    e->bin_op = op;
    e->children = {std::move(lhs), std::move(rhs)};
    return e;
  }

  ExprPtr ParseArith() {
    ExprPtr lhs = ParseTerm();
    while (AtOp("+") || AtOp("-")) {
      BinOp op = Peek().text == "+" ? BinOp::kAdd : BinOp::kSub;
      Advance();
      lhs = Binary(op, lhs, ParseTerm());
    }
    return lhs;
  }

  ExprPtr ParseTerm() {
    ExprPtr lhs = ParseFactor();
    while (true) {
      BinOp op;
      if (AtOp("*")) {
        op = BinOp::kMul;
      } else if (AtOp("/")) {
        op = BinOp::kDiv;
      } else if (AtOp("//")) {
        op = BinOp::kFloorDiv;
      } else if (AtOp("%")) {
        op = BinOp::kMod;
      } else {
        return lhs;
      }
      Advance();
      lhs = Binary(op, lhs, ParseFactor());
    }
  }

  ExprPtr ParseFactor() {
    if (AtOp("-")) {
      int line = Peek().line;
      Advance();
      auto e = NewExpr(ExprKind::kUnary, line);
      e->unary_op = UnaryOp::kNeg;
      e->children.push_back(ParseFactor());
      return e;
    }
    if (AtOp("+")) Fail("unary '+' is not supported");
    return ParsePower();
  }

  ExprPtr ParsePower() {
    ExprPtr base = ParsePrimary();
    if (AtOp("**")) {
      Advance();
      return Binary(BinOp::kPow, base, ParseFactor());
    }
    return base;
  }

  std::vector<ExprPtr> ParseArgs() {
    std::vector<ExprPtr> args;
    ExpectOp("(");
    while (!AtOp(")")) {
      if (AtOp("*") || AtOp("**")) Fail("argument unpacking is not supported");
      if (At(TokenKind::kName) && Peek(1).kind == TokenKind::kOp && Peek(1).text == "=") {
        Fail("keyword arguments are not supported");
      }
      args.push_back(ParseTest());
      if (AtName("for")) Fail("generator expressions are not supported");
      if (!AtOp(",")) break;
      Advance();
    }
    ExpectOp(")");
    return args;
  }

  ExprPtr ParsePrimary() {
    ExprPtr e = ParseAtom();
    while (true) {
      if (AtOp("(")) {
        if (e->kind != ExprKind::kName) Fail("only named functions can be called");
        auto call = NewExpr(ExprKind::kCall, e->line);
        call->name = e->name;
        call->children = ParseArgs();
        e = call;
      } else if (AtOp("[")) {
        Advance();
        e = ParseSubscript(e);
        ExpectOp("]");
      } else if (AtOp(".")) {
        Advance();
        std::string method = Identifier();
        if (!AtOp("(")) Fail("attribute access is only supported for method calls");
        auto call = NewExpr(ExprKind::kMethodCall, e->line);
        call->name = method;
        call->children.push_back(e);
        for (auto& a : ParseArgs()) call->children.push_back(std::move(a));
        e = call;
      } else {
        return e;
      }
    }
  }

  ExprPtr ParseSubscript(ExprPtr object) {
    int line = object->line;
    std::array<ExprPtr, 3> parts{};
    bool is_slice = false;
    if (!AtOp(":")) {
      ExprPtr idx = ParseTest();
      if (AtOp(",")) {
        auto t = NewExpr(ExprKind::kTuple, idx->line);
        t->children.push_back(idx);
        while (AtOp(",")) {
          Advance();
          if (AtOp("]")) break;
          t->children.push_back(ParseTest());
        }
        idx = t;
      }
      parts[0] = idx;
    }
    if (AtOp(":")) {
      is_slice = true;
      Advance();
      if (!AtOp("]") && !AtOp(":")) parts[1] = ParseTest();
      if (AtOp(":")) {
        Advance();
        if (!AtOp("]")) parts[2] = ParseTest();
      }
    }
    if (!is_slice) {
      auto e = NewExpr(ExprKind::kIndex, line);
      e->children = {object, parts[0]};
      return e;
    }
    auto e = NewExpr(ExprKind::kSlice, line);
    e->children = {object, parts[0], parts[1], parts[2]};
    return e;
  }

  ExprPtr ParseAtom() {
    const Token& t = Peek();
    int line = t.line;
    switch (t.kind) {
      case TokenKind::kInt: {
        auto e = NewExpr(ExprKind::kLiteral, line);
        if (t.text.size() > 4300) Fail("integer literal too long");
        e->literal = Value(BigInt(t.text));
        Advance();
        return e;
      }
      case TokenKind::kFloat: {
        auto e = NewExpr(ExprKind::kLiteral, line);
        e->literal = Value(std::strtod(t.text.c_str(), nullptr));
        Advance();
        return e;
      }
      case TokenKind::kString: {
        std::string text;
        while (At(TokenKind::kString)) text += Advance().text;
        auto e = NewExpr(ExprKind::kLiteral, line);
        e->literal = Value::FromUtf8(text);
        return e;
      }
      case TokenKind::kName: {
        if (t.text == "True" || t.text == "False" || t.text == "None") {
          auto e = NewExpr(ExprKind::kLiteral, line);
          if (t.text == "None") {
            e->literal = Value();
          } else {
            e->literal = Value(t.text == "True");
          }
          Advance();
          return e;
        }
        auto e = NewExpr(ExprKind::kName, line);
        e->name = Identifier();
        return e;
      }
      case TokenKind::kOp:
        if (t.text == "(") return ParseParen();
        if (t.text == "[") return ParseListDisplay();
        if (t.text == "{") return ParseDictDisplay();
        break;
      default:
        break;
    }
    Fail("invalid syntax");
  }

  ExprPtr ParseParen() {
    int line = Peek().line;
    Advance();
    if (AtOp(")")) {
      Advance();
      return NewExpr(ExprKind::kTuple, line);
    }
    ExprPtr first = ParseTest();
    if (AtName("for")) Fail("generator expressions are not supported");
    if (AtOp(")")) {
      Advance();
      return first;
    }
    auto t = NewExpr(ExprKind::kTuple, line);
    t->children.push_back(first);
    while (AtOp(",")) {
      Advance();
      if (AtOp(")")) break;
      t->children.push_back(ParseTest());
    }
    ExpectOp(")");
    return t;
  }

  ExprPtr ParseListDisplay() {
    auto e = NewExpr(ExprKind::kList, Peek().line);
    Advance();
    while (!AtOp("]")) {
      e->children.push_back(ParseTest());
      if (AtName("for")) Fail("list comprehensions are not supported");
      if (!AtOp(",")) break;
      Advance();
    }
    ExpectOp("]");
    return e;
  }

  ExprPtr ParseDictDisplay() {
    auto e = NewExpr(ExprKind::kDict, Peek().line);
    Advance();
    while (!AtOp("}")) {
      if (AtOp("**")) Fail("dict unpacking is not supported");
      ExprPtr key = ParseTest();
      if (!AtOp(":")) Fail("set displays are not supported");
      Advance();
      ExprPtr value = ParseTest();
      if (AtName("for")) Fail("dict comprehensions are not supported");
      e->children.push_back(key);
      e->children.push_back(value);
      if (!AtOp(",")) break;
      Advance();
    }
    ExpectOp("}");
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions options_;
};

int CountLines(std::string_view source) {
  int n = static_cast<int>(std::count(source.begin(), source.end(), '\n'));
  if (!source.empty() && source.back() != '\n') ++n;
  return n;
}

Value EvalLiteral(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      return e.literal;
    case ExprKind::kUnary:
      if (e.unary_op == UnaryOp::kNeg && e.children[0]->kind == ExprKind::kLiteral &&
          e.children[0]->literal.is_numeric()) {
        return UnaryOperation(UnaryOp::kNeg, e.children[0]->literal);
      }
      break;
    case ExprKind::kList:
    case ExprKind::kTuple: {
      std::vector<Value> items;
      for (const auto& c : e.children) items.push_back(EvalLiteral(*c));
      return e.kind == ExprKind::kList ? Value::MakeList(std::move(items))
                                       : Value::MakeTuple(std::move(items));
    }
    case ExprKind::kDict: {
      Value d = Value::MakeDict();
      for (std::size_t i = 0; i + 1 < e.children.size(); i += 2) {
        d.as_dict()->set(EvalLiteral(*e.children[i]), EvalLiteral(*e.children[i + 1]));
      }
      return d;
    }
    case ExprKind::kCall:
      if (e.name == "range") {
        std::vector<Value> args;
        for (const auto& c : e.children) args.push_back(EvalLiteral(*c));
        return CallBuiltin("range", args);
      }
      break;
    default:
      break;
  }
  throw SyntaxError(e.line, "not a literal value");
}

}  // namespace

const FunctionDef* Program::find(const std::string& name) const {
  for (const auto& fn : functions) {
    if (fn.name == name) return &fn;
  }
  return nullptr;
}

Program Parse(std::string_view source, const ParseOptions& options) {
  Parser parser(Tokenize(source), options);
  Program program = parser.ParseProgram();
  program.source_lines = CountLines(source);
  return program;
}

ExprPtr ParseExpression(std::string_view text) {
  Parser parser(Tokenize(text), ParseOptions{});
  return parser.ParseStandaloneExpression();
}

Value ParseLiteral(std::string_view text) {
  ExprPtr e = ParseExpression(text);
  try {
    return EvalLiteral(*e);
  } catch (const ExecError& err) {
    throw SyntaxError(e->line, err.what());
  }
}

}  // namespace exectrace
