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


#include <doctest.h>

#include <algorithm>
#include <set>

#include "exectrace/ast_eval.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

using testing::ReadFile;

std::vector<std::string> Listing(const CodeObject& code) {
  std::vector<std::string> out;
  for (const auto& ins : code.code) out.push_back(FormatInstruction(code, ins));
  return out;
}

TEST_CASE("minimal bodies compile to the expected instructions") {
  Module one = CompileUnit(MakeUnit("f", "def f():\n    return 1\n"));
  auto l1 = Listing(one.main_code());
  REQUIRE(l1.size() >= 2);
  CHECK(l1[0] == "0 LOAD_CONST 1");
  CHECK(l1[1] == "1 RETURN_VALUE");
  CHECK(one.main_code().code[0].line == 2);

  Module inc = CompileUnit(MakeUnit("f", "def f(n):\n    return n+1\n"));
  auto l2 = Listing(inc.main_code());
  CHECK(std::vector<std::string>(l2.begin(), l2.begin() + 4) ==
        std::vector<std::string>{"0 LOAD_LOCAL n", "1 LOAD_CONST 1", "2 BINARY_OP +",
                                 "3 RETURN_VALUE"});
}

TEST_CASE("every path ends in a return") {
  Module m = CompileUnit(MakeUnit("f", "def f(n):\n    n += 1\n"));
  const auto& code = m.main_code().code;
  CHECK(code.back().op == Opcode::kReturnValue);
  CHECK(Execute(MakeUnit("f", "def f(n):\n    n += 1\n"), {Value(1)}).outcome.value.is_none());
}

TEST_CASE("collatz has no FOR_ITER and tests the while condition") {
  Module m = CompileUnit(testing::Bench("collatz"));
  const CodeObject& c = m.main_code();
  CHECK(std::none_of(c.code.begin(), c.code.end(),
                     [](const Instruction& i) { return i.op == Opcode::kForIter; }));
  bool while_test = false;
  for (const auto& i : c.code) {
    if (i.op == Opcode::kPopJumpIfFalse && i.line == 3) while_test = true;
  }
  CHECK(while_test);
  for (int n = 1; n <= 50; ++n) {
    SourceUnit u = testing::Bench("collatz");
    CHECK(SameOutcome(Execute(u, {Value(n)}).outcome,
                      EvaluateAst(u.Parse(), u.MainName(), {Value(n)})));
  }
}

TEST_CASE("collatz disassembly matches the golden listing") {
  Module m = CompileUnit(testing::Bench("collatz"));
  std::string text = Disassemble(m.main_code(), m.source_lines);
  CHECK(text == ReadFile(EXECTRACE_TEST_DATA "/golden/collatz.dis"));
  CHECK(text.find("2 LOAD_LOCAL n  # while n > 1:\n") != std::string::npos);
  Module again = CompileUnit(testing::Bench("collatz"));
  CHECK(Disassemble(again.main_code(), again.source_lines) == text);
}

TEST_CASE("minimal listing annotates one instruction") {
  Module m = CompileUnit(MakeUnit("f", "def f():\n    return 1\n"));
  std::string text = Disassemble(m.main_code(), m.source_lines);
  CHECK(text.rfind("0 LOAD_CONST 1  # return 1\n1 RETURN_VALUE\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '#') == 1);
}

TEST_CASE("jump targets are valid and every instruction has a line") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Module m = CompileUnit(GenerateProgram(seed).unit);
    for (const auto& code : m.functions) {
      const int size = static_cast<int>(code.code.size());
      for (const auto& ins : code.code) {
        CHECK(ins.line >= 1);
        if (IsJump(ins.op) || ins.op == Opcode::kForIter) {
          CHECK(ins.arg >= 0);
          CHECK(ins.arg < size);
        }
      }
    }
  }
}

TEST_CASE("stack depth is consistent on fuzzed programs") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Module m = CompileUnit(GenerateProgram(seed).unit);
    for (const auto& code : m.functions) {
      std::vector<int> depth;
      REQUIRE_NOTHROW(depth = VerifyStackDepth(code));
      for (std::size_t i = 0; i < code.code.size(); ++i) {
        if (depth[i] < 0) continue;
        if (code.code[i].op == Opcode::kReturnValue) CHECK(depth[i] == 1);
      }
    }
  }
}

TEST_CASE("stack verifier rejects unbalanced code") {
  Module m = CompileUnit(MakeUnit("f", "def f(n):\n    return n\n"));
  CodeObject bad = m.main_code();
  bad.code.insert(bad.code.begin(), Instruction{0, Opcode::kPopTop, 0, false, "", 2, false});
  for (std::size_t i = 0; i < bad.code.size(); ++i) bad.code[i].offset = static_cast<int>(i);
  CHECK_THROWS_AS(VerifyStackDepth(bad), CompileError);
}

TEST_CASE("lines hit at line granularity are the lines of executed line starts") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto c = testing::ReturningCase(seed);
    ExecOptions o;
    o.granularity = Granularity::kInstruction;
    o.step_into = false;
    Trace ins = Execute(c.unit, c.args, o);
    Module m = CompileUnit(c.unit);
    const CodeObject& code = m.main_code();
    std::set<int> starts;
    for (const auto& ev : ins.events) {
      if (ev.kind != EventKind::kOpcode || ev.depth != 0) continue;
      const Instruction& i = code.code[static_cast<std::size_t>(ev.offset)];
      if (i.is_line_start) starts.insert(i.line);
    }
    o.granularity = Granularity::kLine;
    Trace line = Execute(c.unit, c.args, o);
    std::set<int> hit;
    for (const auto& ev : line.events) {
      if (ev.kind == EventKind::kLine && ev.depth == 0) hit.insert(ev.line);
    }
    CHECK(hit == starts);
  }
}

}  // namespace
}  // namespace exectrace
