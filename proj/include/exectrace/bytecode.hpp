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

// Stack-machine code for MiniLang functions.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "exectrace/ast.hpp"
#include "exectrace/source_unit.hpp"

namespace exectrace {

enum class Opcode {
  kLoadConst,
  kLoadLocal,
  kStoreLocal,
  kLoadGlobal,
  kBinaryOp,
  kUnaryOp,
  kCompareOp,
  kJump,
  kPopJumpIfFalse,
  kPopJumpIfTrue,
  kJumpIfFalseOrPop,
  kJumpIfTrueOrPop,
  kGetIter,
  kForIter,
  kBuildList,
  kBuildTuple,
  kBuildMap,
  kIndex,
  kStoreIndex,
  kSlice,
  kCall,
  kCallMethod,
  kUnpack,
  kPopTop,
  kDupTop,
  kDupTopTwo,
  kRotTwo,
  kRotThree,
  kReturnValue,
};

std::string_view OpcodeName(Opcode op);
bool IsJump(Opcode op);

// Operand meaning by opcode:
//   LOAD_CONST                 arg = constant index
//   LOAD_LOCAL / STORE_LOCAL   arg = local slot
//   LOAD_GLOBAL / CALL_METHOD  name
//   BINARY_OP                  arg = BinOp, inplace for augmented assignment
//   UNARY_OP / COMPARE_OP      arg = UnaryOp / CmpOp
//   jumps, FOR_ITER            arg = target offset (FOR_ITER: loop exit)
//   BUILD_*, UNPACK            arg = element count (BUILD_MAP: pairs)
//   CALL / CALL_METHOD         arg = argument count
struct Instruction {
  int offset = 0;
  Opcode op = Opcode::kPopTop;
  int arg = 0;
  bool inplace = false;
  std::string name;
  int line = 0;
  bool is_line_start = false;
};

// One compiled for-loop. The iterable is computed by [setup_start, get_iter),
// the iterator lives on the stack while for_iter <= pc < exit.
struct LoopInfo {
  int setup_start = 0;
  int get_iter = 0;
  int for_iter = 0;
  int exit = 0;
  int line = 0;
};

struct CodeObject {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> local_names;  // params first
  std::vector<Value> consts;
  std::vector<Instruction> code;
  std::vector<LoopInfo> loops;  // ordered by for_iter
  int def_line = 0;

  int LocalIndex(const std::string& name) const;
};

// Compiled helpers plus main function of one unit.
struct Module {
  std::string source;
  std::vector<std::string> source_lines;
  std::vector<CodeObject> functions;
  std::string main;

  const CodeObject* find(const std::string& name) const;
  const CodeObject& main_code() const { return *find(main); }
  std::vector<std::string> function_names() const;
};

class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CodeObject Compile(const FunctionDef& fn);
Module CompileProgram(const Program& program, std::string source, std::string main);
Module CompileUnit(const SourceUnit& unit);

// `offset OPNAME arg`, with `  # <source>` on the first instruction of each
// line.
std::string Disassemble(const CodeObject& code, const std::vector<std::string>& source_lines);
std::string FormatInstruction(const CodeObject& code, const Instruction& ins);

// Abstract interpretation of stack depth. Returns the depth before each
// instruction (-1 when unreachable). Throws CompileError when depths
// disagree between paths, go negative, or RETURN_VALUE sees depth != 1.
std::vector<int> VerifyStackDepth(const CodeObject& code);

std::vector<std::string> SplitLines(std::string_view text);

}  // namespace exectrace
