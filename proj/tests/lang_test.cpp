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


#include <functional>

#include <doctest.h>

#include "exectrace/ast_eval.hpp"
#include "exectrace/parser.hpp"
#include "exectrace/runtime_ops.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

using testing::Bench;
using testing::ReturningCase;

TEST_CASE("minimal function parses with line numbers") {
  Program p = Parse("def f(n):\n    return n");
  REQUIRE(p.functions.size() == 1);
  const FunctionDef& fn = p.functions[0];
  CHECK(fn.name == "f");
  CHECK(fn.params == std::vector<std::string>{"n"});
  REQUIRE(fn.body.size() == 1);
  CHECK(fn.body[0]->kind == StmtKind::kReturn);
  CHECK(fn.body[0]->line == 2);
}

TEST_CASE("collatz parses to a definition plus seven statements, while on line 3") {
  Program p = Parse(FindBench("collatz").source);
  const FunctionDef& fn = p.functions.at(0);
  int count = 0;
  int while_line = 0;
  std::function<void(const Block&)> walk = [&](const Block& b) {
    for (const auto& s : b) {
      ++count;
      if (s->kind == StmtKind::kWhile) while_line = s->line;
      walk(s->body);
      walk(s->orelse);
    }
  };
  walk(fn.body);
  CHECK(count + 1 == 8);
  CHECK(while_line == 3);
}

TEST_CASE("syntax errors carry the line") {
  try {
    Parse("def f(:");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(Parse("def f():\n    x = [i for i in y]\n"), SyntaxError);
  CHECK_THROWS_AS(Parse("def f():\n    break\n"), SyntaxError);
  CHECK_THROWS_AS(Parse("def f():\n    __idx_0__ = 1\n    return 0\n"), SyntaxError);
  CHECK_THROWS_AS(Parse("def f(x=1):\n    return x\n"), SyntaxError);
  CHECK_THROWS_AS(Parse("class A:\n    pass\n"), SyntaxError);
}

TEST_CASE("render then parse is stable") {
  for (const auto& b : BenchPrograms()) {
    Program p = Parse(b.source);
    std::string once = Render(p);
    CHECK(DumpAst(Parse(once), false) == DumpAst(p, false));
    CHECK(Render(Parse(once)) == once);
  }
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    FuzzedProgram f = GenerateProgram(seed);
    Program p = f.unit.Parse();
    std::string once = Render(p);
    INFO(f.unit.FullSource());
    CHECK(DumpAst(Parse(once), false) == DumpAst(p, false));
  }
}

TEST_CASE("every node line lies within the source") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    FuzzedProgram f = GenerateProgram(seed);
    std::string src = f.unit.FullSource();
    Program p = Parse(src);
    int lines = static_cast<int>(SplitLines(src).size());
    std::function<void(const Block&)> walk = [&](const Block& b) {
      for (const auto& s : b) {
        CHECK(s->line >= 1);
        CHECK(s->line <= lines);
        walk(s->body);
        walk(s->orelse);
      }
    };
    for (const auto& fn : p.functions) {
      CHECK(fn.line >= 1);
      walk(fn.body);
    }
  }
}

TEST_CASE("anonymize renames the main function only") {
  SourceUnit u = MakeUnit("collatz", FindBench("collatz").source);
  SourceUnit a = Anonymize(u);
  CHECK(a.anonymized);
  CHECK(a.main_source.rfind("def f(n):\n", 0) == 0);
  CHECK(a.main_source.substr(a.main_source.find('\n')) ==
        u.main_source.substr(u.main_source.find('\n')));
  SourceUnit again = Anonymize(a);
  CHECK(again.main_source == a.main_source);

  SourceUnit rec = Anonymize(MakeUnit("fact", "def fact(n):\n    if n < 2:\n        return 1\n"
                                              "    return n * fact(n - 1)\n"));
  CHECK(rec.main_source.find("f(n - 1)") != std::string::npos);
  CHECK(rec.main_source.find("fact") == std::string::npos);
  CHECK(Execute(rec, {Value(5)}).outcome.value.as_int() == 120);

  SourceUnit clash = MakeUnit("g", "def f(x):\n    return x\n\ndef g(y):\n    return f(y)\n");
  CHECK_THROWS_AS(Anonymize(clash), NameCollision);
}

TEST_CASE("helper names must be distinct") {
  CHECK_THROWS(MakeUnit("u", "def g(x):\n    return x\n\ndef g(y):\n    return y\n"));
}

std::string NestedSource() {
  return "def f(s):\n"
         "    for i in range(2):\n"
         "        for j in range(2):\n"
         "            s += 1\n"
         "    return s\n";
}

TEST_CASE("nested for rewrite keeps the outer loop") {
  SourceUnit u = MakeUnit("f", NestedSource());
  SourceUnit r = RewriteNestedFor(u);
  std::string text = r.FullSource();
  CHECK(text.find("for i in range(2):") != std::string::npos);
  CHECK(text.find("for j in") == std::string::npos);
  CHECK(text.find("while __idx_") != std::string::npos);
  CHECK(Execute(r, {Value(0)}).outcome.value.as_int() == 4);
  CHECK(Execute(u, {Value(0)}).outcome.value.as_int() == 4);
}

TEST_CASE("rewrite leaves single loops alone and is idempotent") {
  Program single = Parse(FindBench("binary_counter").source);
  CHECK(DumpAst(RewriteNestedFor(single), false) == DumpAst(single, false));

  Program triple = Parse(
      "def f(n):\n"
      "    t = 0\n"
      "    for a in range(n):\n"
      "        for b in range(a):\n"
      "            for c in [1, 2]:\n"
      "                t += a * b + c\n"
      "    return t\n");
  Program once = RewriteNestedFor(triple);
  std::string text = Render(once);
  CHECK(text.find("for a in range(n):") != std::string::npos);
  CHECK(text.find("for b") == std::string::npos);
  CHECK(text.find("for c") == std::string::npos);
  CHECK(DumpAst(RewriteNestedFor(once), false) == DumpAst(once, false));
  for (int n = 0; n < 6; ++n) {
    CHECK(SameOutcome(EvaluateAst(triple, "f", {Value(n)}), EvaluateAst(once, "f", {Value(n)})));
  }
}

TEST_CASE("rewrite preserves outcomes of fuzzed nested loops") {
  ProgramFuzzOptions opt;
  opt.force_nested_for = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = ReturningCase(seed, opt);
    SourceUnit r = RewriteNestedFor(c.unit);
    INFO(c.unit.FullSource());
    CHECK(SameOutcome(Execute(c.unit, c.args).outcome, Execute(r, c.args).outcome));
  }
}

TEST_CASE("reprs follow the canonical convention") {
  CHECK(Repr(Value(0)) == "0");
  CHECK(Repr(Value(-7)) == "-7");
  CHECK(Repr(Value(true)) == "True");
  CHECK(Repr(Value()) == "None");
  CHECK(Repr(Value::FromUtf8("ab")) == "'ab'");
  CHECK(Repr(Value::FromUtf8("it's")) == "\"it's\"");
  CHECK(Repr(Value::FromUtf8("a'b\"c")) == "'a\\'b\"c'");
  CHECK(Repr(Value::FromUtf8("x\ny\t\\")) == "'x\\ny\\t\\\\'");
  CHECK(Repr(Value::MakeTuple({Value(1)})) == "(1,)");
  CHECK(Repr(Value::MakeTuple({})) == "()");
  CHECK(Repr(Value::MakeTuple({Value(1), Value(2)})) == "(1, 2)");
  CHECK(Repr(Value::MakeList({Value(1), Value::FromUtf8("a")})) == "[1, 'a']");
  CHECK(Repr(Value(0.1)) == "0.1");
  CHECK(Repr(Value(1.0)) == "1.0");
  CHECK(Repr(Value(1e100)) == "1e+100");
  CHECK(Repr(Value(2.5e-7)) == "2.5e-07");
  CHECK(Repr(ParseLiteral("{2: 'b', 1: 'a'}")) == "{2: 'b', 1: 'a'}");
  CHECK(Repr(Value(Range{0, 5, 1})) == "range(0, 5)");
  CHECK(Repr(Value(Range{0, 5, 2})) == "range(0, 5, 2)");
}

TEST_CASE("runtime semantics") {
  auto run = [](const std::string& body, std::vector<Value> args = {}) {
    return Execute(MakeUnit("f", "def f(x):\n" + body), args.empty() ? std::vector<Value>{Value(0)} : args)
        .outcome;
  };
  CHECK(Repr(run("    return 7 // -2\n").value) == "-4");
  CHECK(Repr(run("    return -7 % 3\n").value) == "2");
  CHECK(Repr(run("    return 2 ** 70\n").value) == "1180591620717411303424");
  CHECK(Repr(run("    return 1 / 4\n").value) == "0.25");
  CHECK(Repr(run("    return True + True\n").value) == "2");
  CHECK(Repr(run("    return 1 < 2 < 3\n").value) == "True");
  CHECK(Repr(run("    return [] or 'x'\n").value) == "'x'");
  CHECK(Repr(run("    return 'a,b'.split(',')\n").value) == "['a', 'b']");
  CHECK(Repr(run("    return sorted([3, 1, 2])[1:]\n").value) == "[2, 3]");
  CHECK(Repr(run("    d = {}\n    d[(1, 2)] = 3\n    return d\n").value) == "{(1, 2): 3}");

  Outcome e = run("    return 1 // x\n");
  CHECK(e.kind == OutcomeKind::kError);
  CHECK(e.error_kind == "ZeroDivisionError");
  CHECK(e.line == 2);
  CHECK(run("    return 1 < 'a'\n").error_kind == "TypeError");
  CHECK(run("    return [1][3]\n").error_kind == "IndexError");
  CHECK(run("    return {}[1]\n").error_kind == "KeyError");
  CHECK(run("    return y\n").error_kind == "NameError");
  CHECK(run("    d = {}\n    d[[1]] = 2\n    return d\n").error_kind == "TypeError");
  CHECK(run("    return range(1, 2, 0)\n").error_kind == "ValueError");
}

TEST_CASE("tree evaluator agrees with the bytecode vm") {
  for (const auto& b : BenchPrograms()) {
    SourceUnit u = BenchUnit(b);
    for (int n = 0; n < 40; ++n) {
      CHECK(SameOutcome(EvaluateAst(u.Parse(), u.MainName(), {Value(n)}),
                        Execute(u, {Value(n)}).outcome));
    }
  }
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    FuzzedProgram f = GenerateProgram(seed);
    Rng rng(seed);
    std::vector<Value> args = SampleArgs(f.grammar, rng);
    INFO(f.unit.FullSource());
    CHECK(SameOutcome(EvaluateAst(f.unit.Parse(), f.unit.MainName(), args),
                      Execute(f.unit, args).outcome));
  }
}

}  // namespace
}  // namespace exectrace
