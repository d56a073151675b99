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

#include "exectrace/bytecode.hpp"

#include <algorithm>
#include <deque>

namespace exectrace {

namespace {

constexpr std::string_view kOpcodeNames[] = {
    "LOAD_CONST",        "LOAD_LOCAL",          "STORE_LOCAL", "LOAD_GLOBAL", "BINARY_OP",
    "UNARY_OP",          "COMPARE_OP",          "JUMP",        "POP_JUMP_IF_FALSE",
    "POP_JUMP_IF_TRUE",  "JUMP_IF_FALSE_OR_POP", "JUMP_IF_TRUE_OR_POP", "GET_ITER",
    "FOR_ITER",          "BUILD_LIST",          "BUILD_TUPLE", "BUILD_MAP",   "INDEX",
    "STORE_INDEX",       "SLICE",               "CALL",        "CALL_METHOD", "UNPACK",
    "POP_TOP",           "DUP_TOP",             "DUP_TOP_TWO", "ROT_TWO",     "ROT_THREE",
    "RETURN_VALUE",
};

struct LoopContext {
  bool is_for = false;
  int head = 0;                 // FOR_ITER or while test
  std::vector<int> break_jumps;  // patched to the loop exit
};

class Compiler {
 public:
  explicit Compiler(const FunctionDef& fn) : fn_(fn) {
    code_.name = fn.name;
    code_.params = fn.params;
    code_.local_names = LocalNames(fn);
    code_.def_line = fn.line;
  }

  CodeObject Run() {
    CompileBlock(fn_.body);
    int last_line = fn_.body.empty() ? fn_.line : fn_.body.back()->line;
    stmt_line_ = last_line;
    // Implicit `return None`; never a line start.
    Emit(Opcode::kLoadConst, Const(Value()), false);
    Emit(Opcode::kReturnValue, 0, false);
    std::sort(code_.loops.begin(), code_.loops.end(),
              [](const LoopInfo& a, const LoopInfo& b) { return a.for_iter < b.for_iter; });
    return std::move(code_);
  }

 private:
  int Here() const { return static_cast<int>(code_.code.size()); }

  int Emit(Opcode op, int arg = 0, bool allow_start = true) {
    Instruction ins;
    ins.offset = Here();
    ins.op = op;
    ins.arg = arg;
    ins.line = stmt_line_;
    if (allow_start && pending_start_) {
      ins.is_line_start = true;
      pending_start_ = false;
    }
    code_.code.push_back(std::move(ins));
    return code_.code.back().offset;
  }

  int EmitNamed(Opcode op, std::string name, int arg = 0) {
    int at = Emit(op, arg);
    code_.code[static_cast<std::size_t>(at)].name = std::move(name);
    return at;
  }

  void Patch(int at, int target) { code_.code[static_cast<std::size_t>(at)].arg = target; }

  int Const(const Value& v) {
    for (std::size_t i = 0; i < code_.consts.size(); ++i) {
      const Value& c = code_.consts[i];
      if (c.kind() == v.kind() && Repr(c) == Repr(v)) return static_cast<int>(i);
    }
    code_.consts.push_back(v);
    return static_cast<int>(code_.consts.size() - 1);
  }

  bool IsLocal(const std::string& name) const {
    return std::find(code_.local_names.begin(), code_.local_names.end(), name) !=
           code_.local_names.end();
  }

  // The first instruction of a statement on a new source line starts it.
  void BeginStatement(int line) {
    stmt_line_ = line;
    if (line != started_line_) {
      pending_start_ = true;
      started_line_ = line;
    }
  }

  void CompileBlock(const Block& block) {
    for (const auto& s : block) CompileStmt(*s);
  }

  void CompileStmt(const Stmt& s) {
    BeginStatement(s.line);
    switch (s.kind) {
      case StmtKind::kAssign:
        CompileExpr(*s.value);
        for (std::size_t i = 0; i < s.targets.size(); ++i) {
          if (i + 1 < s.targets.size()) Emit(Opcode::kDupTop);
          CompileStore(*s.targets[i]);
        }
        return;
      case StmtKind::kAugAssign: {
        const Expr& t = *s.targets[0];
        if (t.kind == ExprKind::kName) {
          LoadName(t.name);
          CompileExpr(*s.value);
          EmitBinary(s.aug_op, true);
          EmitNamed(Opcode::kStoreLocal, t.name, code_.LocalIndex(t.name));
        } else {
          CompileExpr(*t.children[0]);
          CompileExpr(*t.children[1]);
          Emit(Opcode::kDupTopTwo);
          Emit(Opcode::kIndex);
          CompileExpr(*s.value);
          EmitBinary(s.aug_op, true);
          Emit(Opcode::kRotThree);
          Emit(Opcode::kStoreIndex);
        }
        return;
      }
      case StmtKind::kExpr:
        CompileExpr(*s.value);
        Emit(Opcode::kPopTop);
        return;
      case StmtKind::kIf:
        CompileIf(s);
        return;
      case StmtKind::kWhile: {
        int head = Here();
        CompileExpr(*s.value);
        int exit_jump = Emit(Opcode::kPopJumpIfFalse);
        loops_.push_back(LoopContext{false, head, {}});
        CompileBlock(s.body);
        stmt_line_ = s.line;
        Emit(Opcode::kJump, head, false);
        FinishLoop(exit_jump);
        return;
      }
      case StmtKind::kFor: {
        LoopInfo info;
        info.line = s.line;
        info.setup_start = Here();
        CompileExpr(*s.value);
        info.get_iter = Emit(Opcode::kGetIter);
        info.for_iter = Emit(Opcode::kForIter);
        CompileStore(*s.targets[0]);
        loops_.push_back(LoopContext{true, info.for_iter, {}});
        CompileBlock(s.body);
        stmt_line_ = s.line;
        Emit(Opcode::kJump, info.for_iter, false);
        FinishLoop(info.for_iter);
        info.exit = Here();
        code_.loops.push_back(info);
        return;
      }
      case StmtKind::kReturn: {
        for (const auto& l : loops_) {
          if (l.is_for) Emit(Opcode::kPopTop);
        }
        if (s.value) {
          CompileExpr(*s.value);
        } else {
          Emit(Opcode::kLoadConst, Const(Value()));
        }
        Emit(Opcode::kReturnValue);
        return;
      }
      case StmtKind::kBreak: {
        LoopContext& l = loops_.back();
        if (l.is_for) Emit(Opcode::kPopTop);
        l.break_jumps.push_back(Emit(Opcode::kJump));
        return;
      }
      case StmtKind::kContinue:
        Emit(Opcode::kJump, loops_.back().head);
        return;
      case StmtKind::kPass:
        // Needs an instruction so the line still produces an event.
        Emit(Opcode::kLoadConst, Const(Value()));
        Emit(Opcode::kPopTop);
        return;
    }
    throw CompileError("unsupported statement");
  }

  // Patches the exit jump and every break of the innermost loop to Here().
  void FinishLoop(int exit_jump) {
    LoopContext l = std::move(loops_.back());
    loops_.pop_back();
    Patch(exit_jump, Here());
    for (int j : l.break_jumps) Patch(j, Here());
  }

  void CompileIf(const Stmt& s) {
    CompileExpr(*s.value);
    int else_jump = Emit(Opcode::kPopJumpIfFalse);
    CompileBlock(s.body);
    if (s.orelse.empty()) {
      Patch(else_jump, Here());
      return;
    }
    stmt_line_ = s.body.empty() ? s.line : stmt_line_;
    int end_jump = Emit(Opcode::kJump, 0, false);
    Patch(else_jump, Here());
    if (s.orelse.size() == 1 && s.orelse[0]->is_elif) {
      CompileStmt(*s.orelse[0]);
    } else {
      CompileBlock(s.orelse);
    }
    Patch(end_jump, Here());
  }

  void CompileStore(const Expr& t) {
    switch (t.kind) {
      case ExprKind::kName:
        EmitNamed(Opcode::kStoreLocal, t.name, code_.LocalIndex(t.name));
        return;
      case ExprKind::kIndex:
        CompileExpr(*t.children[0]);
        CompileExpr(*t.children[1]);
        Emit(Opcode::kStoreIndex);
        return;
      case ExprKind::kTuple:
      case ExprKind::kList:
        Emit(Opcode::kUnpack, static_cast<int>(t.children.size()));
        for (const auto& c : t.children) CompileStore(*c);
        return;
      default:
        throw CompileError("cannot assign to expression");
    }
  }

  void LoadName(const std::string& name) {
    if (IsLocal(name)) {
      EmitNamed(Opcode::kLoadLocal, name, code_.LocalIndex(name));
    } else {
      EmitNamed(Opcode::kLoadGlobal, name);
    }
  }

  void EmitBinary(BinOp op, bool inplace) {
    int at = Emit(Opcode::kBinaryOp, static_cast<int>(op));
    code_.code[static_cast<std::size_t>(at)].inplace = inplace;
  }

  void CompileExpr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::kLiteral:
        Emit(Opcode::kLoadConst, Const(e.literal));
        return;
      case ExprKind::kName:
        LoadName(e.name);
        return;
      case ExprKind::kBinary:
        CompileExpr(*e.children[0]);
        CompileExpr(*e.children[1]);
        EmitBinary(e.bin_op, false);
        return;
      case ExprKind::kUnary:
        CompileExpr(*e.children[0]);
        Emit(Opcode::kUnaryOp, static_cast<int>(e.unary_op));
        return;
      case ExprKind::kCompare:
        CompileCompare(e);
        return;
      case ExprKind::kBoolOp: {
        std::vector<int> jumps;
        Opcode op = e.bool_and ? Opcode::kJumpIfFalseOrPop : Opcode::kJumpIfTrueOrPop;
        for (std::size_t i = 0; i < e.children.size(); ++i) {
          CompileExpr(*e.children[i]);
          if (i + 1 < e.children.size()) jumps.push_back(Emit(op));
        }
        for (int j : jumps) Patch(j, Here());
        return;
      }
      case ExprKind::kIndex:
        CompileExpr(*e.children[0]);
        CompileExpr(*e.children[1]);
        Emit(Opcode::kIndex);
        return;
      case ExprKind::kSlice:
        CompileExpr(*e.children[0]);
        for (int i = 1; i <= 3; ++i) {
          if (e.children[static_cast<std::size_t>(i)]) {
            CompileExpr(*e.children[static_cast<std::size_t>(i)]);
          } else {
            Emit(Opcode::kLoadConst, Const(Value()));
          }
        }
        Emit(Opcode::kSlice);
        return;
      case ExprKind::kCall:
        LoadName(e.name);
        for (const auto& c : e.children) CompileExpr(*c);
        Emit(Opcode::kCall, static_cast<int>(e.children.size()));
        return;
      case ExprKind::kMethodCall:
        for (const auto& c : e.children) CompileExpr(*c);
        EmitNamed(Opcode::kCallMethod, e.name, static_cast<int>(e.children.size()) - 1);
        return;
      case ExprKind::kList:
      case ExprKind::kTuple:
        for (const auto& c : e.children) CompileExpr(*c);
        Emit(e.kind == ExprKind::kList ? Opcode::kBuildList : Opcode::kBuildTuple,
             static_cast<int>(e.children.size()));
        return;
      case ExprKind::kDict:
        for (const auto& c : e.children) CompileExpr(*c);
        Emit(Opcode::kBuildMap, static_cast<int>(e.children.size() / 2));
        return;
      case ExprKind::kIfExp: {
        CompileExpr(*e.children[0]);
        int else_jump = Emit(Opcode::kPopJumpIfFalse);
        CompileExpr(*e.children[1]);
        int end_jump = Emit(Opcode::kJump);
        Patch(else_jump, Here());
        CompileExpr(*e.children[2]);
        Patch(end_jump, Here());
        return;
      }
    }
    throw CompileError("unsupported expression");
  }

  // a < b < c keeps b alive across the first comparison:
  //   a b DUP_TOP ROT_THREE COMPARE JUMP_IF_FALSE_OR_POP cleanup
  //   c COMPARE JUMP end; cleanup: ROT_TWO POP_TOP; end:
  void CompileCompare(const Expr& e) {
    CompileExpr(*e.children[0]);
    std::size_t n = e.cmp_ops.size();
    std::vector<int> cleanup_jumps;
    for (std::size_t i = 0; i < n; ++i) {
      CompileExpr(*e.children[i + 1]);
      if (i + 1 < n) {
        Emit(Opcode::kDupTop);
        Emit(Opcode::kRotThree);
        Emit(Opcode::kCompareOp, static_cast<int>(e.cmp_ops[i]));
        cleanup_jumps.push_back(Emit(Opcode::kJumpIfFalseOrPop));
      } else {
        Emit(Opcode::kCompareOp, static_cast<int>(e.cmp_ops[i]));
      }
    }
    if (cleanup_jumps.empty()) return;
    int end_jump = Emit(Opcode::kJump);
    for (int j : cleanup_jumps) Patch(j, Here());
    Emit(Opcode::kRotTwo);
    Emit(Opcode::kPopTop);
    Patch(end_jump, Here());
  }

  const FunctionDef& fn_;
  CodeObject code_;
  std::vector<LoopContext> loops_;
  int stmt_line_ = 0;
  int started_line_ = -1;
  bool pending_start_ = false;
};

std::string StripLine(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view OpcodeName(Opcode op) { return kOpcodeNames[static_cast<int>(op)]; }

bool IsJump(Opcode op) {
  switch (op) {
    case Opcode::kJump:
    case Opcode::kPopJumpIfFalse:
    case Opcode::kPopJumpIfTrue:
    case Opcode::kJumpIfFalseOrPop:
    case Opcode::kJumpIfTrueOrPop:
    case Opcode::kForIter:
      return true;
    default:
      return false;
  }
}

int CodeObject::LocalIndex(const std::string& n) const {
  auto it = std::find(local_names.begin(), local_names.end(), n);
  if (it == local_names.end()) throw CompileError("unknown local '" + n + "'");
  return static_cast<int>(it - local_names.begin());
}

const CodeObject* Module::find(const std::string& n) const {
  for (const auto& c : functions) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

std::vector<std::string> Module::function_names() const {
  std::vector<std::string> out;
  for (const auto& c : functions) out.push_back(c.name);
  return out;
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

CodeObject Compile(const FunctionDef& fn) {
  CodeObject code = Compiler(fn).Run();
  VerifyStackDepth(code);
  return code;
}

Module CompileProgram(const Program& program, std::string source, std::string main) {
  Module m;
  m.source_lines = SplitLines(source);
  m.source = std::move(source);
  m.main = std::move(main);
  for (const auto& fn : program.functions) m.functions.push_back(Compile(fn));
  if (!m.find(m.main)) throw CompileError("no function named '" + m.main + "'");
  return m;
}

Module CompileUnit(const SourceUnit& unit) {
  return CompileProgram(unit.Parse(), unit.FullSource(), unit.MainName());
}

std::string FormatInstruction(const CodeObject& code, const Instruction& ins) {
  std::string out = std::to_string(ins.offset) + " " + std::string(OpcodeName(ins.op));
  switch (ins.op) {
    case Opcode::kLoadConst:
      out += " " + Repr(code.consts[static_cast<std::size_t>(ins.arg)]);
      break;
    case Opcode::kLoadLocal:
    case Opcode::kStoreLocal:
    case Opcode::kLoadGlobal:
      out += " " + ins.name;
      break;
    case Opcode::kBinaryOp:
      out += " ";
      out += Symbol(static_cast<BinOp>(ins.arg));
      if (ins.inplace) out += "=";
      break;
    case Opcode::kUnaryOp:
      out += " ";
      out += Symbol(static_cast<UnaryOp>(ins.arg));
      break;
    case Opcode::kCompareOp:
      out += " ";
      out += Symbol(static_cast<CmpOp>(ins.arg));
      break;
    case Opcode::kCallMethod:
      out += " " + ins.name + " " + std::to_string(ins.arg);
      break;
    case Opcode::kJump:
    case Opcode::kPopJumpIfFalse:
    case Opcode::kPopJumpIfTrue:
    case Opcode::kJumpIfFalseOrPop:
    case Opcode::kJumpIfTrueOrPop:
    case Opcode::kForIter:
    case Opcode::kBuildList:
    case Opcode::kBuildTuple:
    case Opcode::kBuildMap:
    case Opcode::kCall:
    case Opcode::kUnpack:
      out += " " + std::to_string(ins.arg);
      break;
    default:
      break;
  }
  return out;
}

std::string Disassemble(const CodeObject& code, const std::vector<std::string>& source_lines) {
  std::string out;
  for (const auto& ins : code.code) {
    out += FormatInstruction(code, ins);
    if (ins.is_line_start && ins.line >= 1 &&
        static_cast<std::size_t>(ins.line) <= source_lines.size()) {
      out += "  # " + StripLine(source_lines[static_cast<std::size_t>(ins.line - 1)]);
    }
    out += '\n';
  }
  return out;
}

std::vector<int> VerifyStackDepth(const CodeObject& code) {
  const int n = static_cast<int>(code.code.size());
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  if (n == 0) throw CompileError(code.name + ": empty code object");
  std::deque<int> work;
  auto flow = [&](int from, int to, int d) {
    if (to < 0 || to >= n) {
      throw CompileError(code.name + ": jump from " + std::to_string(from) + " out of range");
    }
    if (d < 0) {
      throw CompileError(code.name + ": negative stack depth at " + std::to_string(from));
    }
    int& slot = depth[static_cast<std::size_t>(to)];
    if (slot == -1) {
      slot = d;
      work.push_back(to);
    } else if (slot != d) {
      throw CompileError(code.name + ": inconsistent stack depth at " + std::to_string(to) +
                         " (" + std::to_string(slot) + " vs " + std::to_string(d) + ")");
    }
  };
  flow(0, 0, 0);
  while (!work.empty()) {
    int pc = work.front();
    work.pop_front();
    const Instruction& ins = code.code[static_cast<std::size_t>(pc)];
    int d = depth[static_cast<std::size_t>(pc)];
    auto need = [&](int k) {
      if (d < k) {
        throw CompileError(code.name + ": stack underflow at " + std::to_string(pc));
      }
    };
    switch (ins.op) {
      case Opcode::kLoadConst:
      case Opcode::kLoadLocal:
      case Opcode::kLoadGlobal:
        flow(pc, pc + 1, d + 1);
        break;
      case Opcode::kStoreLocal:
      case Opcode::kPopTop:
        need(1);
        flow(pc, pc + 1, d - 1);
        break;
      case Opcode::kBinaryOp:
      case Opcode::kCompareOp:
      case Opcode::kIndex:
        need(2);
        flow(pc, pc + 1, d - 1);
        break;
      case Opcode::kUnaryOp:
      case Opcode::kGetIter:
        need(1);
        flow(pc, pc + 1, d);
        break;
      case Opcode::kJump:
        flow(pc, ins.arg, d);
        break;
      case Opcode::kPopJumpIfFalse:
      case Opcode::kPopJumpIfTrue:
        need(1);
        flow(pc, ins.arg, d - 1);
        flow(pc, pc + 1, d - 1);
        break;
      case Opcode::kJumpIfFalseOrPop:
      case Opcode::kJumpIfTrueOrPop:
        need(1);
        flow(pc, ins.arg, d);
        flow(pc, pc + 1, d - 1);
        break;
      case Opcode::kForIter:
        need(1);
        flow(pc, ins.arg, d - 1);
        flow(pc, pc + 1, d + 1);
        break;
      case Opcode::kBuildList:
      case Opcode::kBuildTuple:
        need(ins.arg);
        flow(pc, pc + 1, d - ins.arg + 1);
        break;
      case Opcode::kBuildMap:
        need(2 * ins.arg);
        flow(pc, pc + 1, d - 2 * ins.arg + 1);
        break;
      case Opcode::kStoreIndex:
        need(3);
        flow(pc, pc + 1, d - 3);
        break;
      case Opcode::kSlice:
        need(4);
        flow(pc, pc + 1, d - 3);
        break;
      case Opcode::kCall:
      case Opcode::kCallMethod:
        need(ins.arg + 1);
        flow(pc, pc + 1, d - ins.arg);
        break;
      case Opcode::kUnpack:
        need(1);
        flow(pc, pc + 1, d - 1 + ins.arg);
        break;
      case Opcode::kDupTop:
        need(1);
        flow(pc, pc + 1, d + 1);
        break;
      case Opcode::kDupTopTwo:
        need(2);
        flow(pc, pc + 1, d + 2);
        break;
      case Opcode::kRotTwo:
        need(2);
        flow(pc, pc + 1, d);
        break;
      case Opcode::kRotThree:
        need(3);
        flow(pc, pc + 1, d);
        break;
      case Opcode::kReturnValue:
        if (d != 1) {
          throw CompileError(code.name + ": stack depth " + std::to_string(d) +
                             " at RETURN_VALUE " + std::to_string(pc));
        }
        break;
    }
  }
  return depth;
}

}  // namespace exectrace
