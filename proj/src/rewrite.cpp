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

// Nested for-loops become
//
//   __idx_seq_k__ = __idx_iterable__(<iterable>)
//   __idx_k__ = 0
//   while __idx_k__ < __idx_len__(__idx_seq_k__):
//       <target> = __idx_seq_k__[__idx_k__]
//       __idx_k__ += 1
//       <body>
//
// The index is bumped before the body so `continue` needs no special case.
// Lists are indexed live, so appends inside the loop are still visited.

#include <set>

#include "exectrace/source_unit.hpp"

namespace exectrace {

namespace {

ExprPtr NameExpr(const std::string& name, int line) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::kName;
  e->name = name;
  e->line = line;
  return e;
}

ExprPtr IntExpr(int v, int line) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::kLiteral;
  e->literal = Value(v);
  e->line = line;
  return e;
}

ExprPtr CallExpr(std::string_view fn, ExprPtr arg, int line) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::kCall;
  e->name = std::string(fn);
  e->children.push_back(std::move(arg));
  e->line = line;
  return e;
}

class Rewriter {
 public:
  explicit Rewriter(const FunctionDef& fn) {
    std::set<std::string> used;
    for (const auto& n : LocalNames(fn)) used.insert(n);
    while (used.count(IndexName(next_)) || used.count(SeqName(next_))) ++next_;
    used_ = std::move(used);
  }

  Block RewriteBlock(const Block& block, int for_depth) {
    Block out;
    for (const auto& s : block) {
      if (s->kind == StmtKind::kFor && for_depth > 0) {
        for (auto& r : LowerFor(*s, for_depth)) out.push_back(std::move(r));
        continue;
      }
      auto copy = std::make_shared<Stmt>(*s);
      int inner = for_depth + (s->kind == StmtKind::kFor ? 1 : 0);
      copy->body = RewriteBlock(s->body, inner);
      copy->orelse = RewriteBlock(s->orelse, for_depth);
      out.push_back(copy);
    }
    return out;
  }

 private:
  static std::string IndexName(int k) { return "__idx_" + std::to_string(k) + "__"; }
  static std::string SeqName(int k) { return "__idx_seq_" + std::to_string(k) + "__"; }

  Block LowerFor(const Stmt& loop, int for_depth) {
    while (used_.count(IndexName(next_)) || used_.count(SeqName(next_))) ++next_;
    int k = next_++;
    int line = loop.line;
    std::string idx = IndexName(k);
    std::string seq = SeqName(k);

    auto init_seq = std::make_shared<Stmt>();
    init_seq->kind = StmtKind::kAssign;
    init_seq->line = line;
    init_seq->targets.push_back(NameExpr(seq, line));
    init_seq->value = CallExpr(kIterableHelper, loop.value, line);

    auto init_idx = std::make_shared<Stmt>();
    init_idx->kind = StmtKind::kAssign;
    init_idx->line = line;
    init_idx->targets.push_back(NameExpr(idx, line));
    init_idx->value = IntExpr(0, line);

    auto test = std::make_shared<Expr>();
    test->kind = ExprKind::kCompare;
    test->line = line;
    test->cmp_ops.push_back(CmpOp::kLt);
    test->children = {NameExpr(idx, line), CallExpr(kLengthHelper, NameExpr(seq, line), line)};

    auto element = std::make_shared<Expr>();
    element->kind = ExprKind::kIndex;
    element->line = line;
    element->children = {NameExpr(seq, line), NameExpr(idx, line)};

    auto bind = std::make_shared<Stmt>();
    bind->kind = StmtKind::kAssign;
    bind->line = line;
    bind->targets.push_back(loop.targets[0]);
    bind->value = element;

    auto bump = std::make_shared<Stmt>();
    bump->kind = StmtKind::kAugAssign;
    bump->line = line;
    bump->aug_op = BinOp::kAdd;
    bump->targets.push_back(NameExpr(idx, line));
    bump->value = IntExpr(1, line);

    auto loop_stmt = std::make_shared<Stmt>();
    loop_stmt->kind = StmtKind::kWhile;
    loop_stmt->line = line;
    loop_stmt->value = test;
    loop_stmt->body.push_back(bind);
    loop_stmt->body.push_back(bump);
    for (auto& s : RewriteBlock(loop.body, for_depth + 1)) loop_stmt->body.push_back(s);

    return {init_seq, init_idx, loop_stmt};
  }

  std::set<std::string> used_;
  int next_ = 0;
};

}  // namespace

Program RewriteNestedFor(const Program& program) {
  Program out = program;
  for (auto& fn : out.functions) {
    Rewriter rewriter(fn);
    fn.body = rewriter.RewriteBlock(fn.body, 0);
  }
  return out;
}

SourceUnit RewriteNestedFor(const SourceUnit& unit) {
  Program rewritten = RewriteNestedFor(unit.Parse());
  SourceUnit out = MakeUnit(unit.unit_id, Render(rewritten), true);
  out.anonymized = unit.anonymized;
  return out;
}

}  // namespace exectrace
