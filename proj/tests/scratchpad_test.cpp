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

#include <json.hpp>
#include <map>

#include "exectrace/pairs.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

using testing::Bench;
using testing::RunBench;

int Count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

std::vector<std::string> Lines(const std::string& text) { return SplitLines(text); }

TEST_CASE("collatz scratchpad") {
  TextPair p = RenderScratchpad(RunBench("collatz", 4), Bench("collatz").FullSource());
  CHECK(p.prompt == Bench("collatz").FullSource() + "### call\nf(4)\n");
  CHECK(Count(p.target, "line ") == 11);
  CHECK(p.target.size() > 10);
  CHECK(p.target.substr(p.target.size() - 10) == "return: 2\n");
  auto lines = Lines(p.target);
  CHECK(lines[0] == "line 2: steps = 0");
  CHECK(lines[1] == "state: {n: 4, steps: 0}");
  CHECK(lines[2] == "line 3: while n > 1:");
  CHECK(lines[3] == "state: {n: 4, steps: 0}");
}

TEST_CASE("trivial and fibonacci scratchpads") {
  Trace t = testing::RunText("def f():\n    return 0\n", {});
  TextPair p = RenderScratchpad(t, "def f():\n    return 0\n");
  CHECK(p.target == "line 2: return 0\nstate: {}\nreturn: 0\n");

  TextPair fib = RenderScratchpad(RunBench("fibonacci", 5), Bench("fibonacci").FullSource());
  CHECK(Count(fib.target, "line ") == 22);
  CHECK(fib.target.substr(fib.target.size() - 10) == "return: 5\n");
}

TEST_CASE("direct targets hold only the return value") {
  TextPair p = RenderDirect(RunBench("collatz", 5), Bench("collatz").FullSource());
  CHECK(p.target == "return: 5\n");
}

TEST_CASE("failed runs cannot be rendered") {
  Trace t = testing::RunText("def f(n):\n    return 1//n\n", {Value(0)});
  CHECK_THROWS_AS(RenderScratchpad(t, "def f(n):\n    return 1//n\n"), UnsupportedOutcome);
  CHECK_THROWS_AS(RenderCompact(t, "def f(n):\n    return 1//n\n", true), UnsupportedOutcome);
  CHECK_THROWS_AS(EmitDynamicPairs(t, "def f(n):\n    return 1//n\n", 3), UnsupportedOutcome);
  CHECK_THROWS_AS(EmitReversePairs(t, "def f(n):\n    return 1//n\n"), UnsupportedOutcome);
}

TEST_CASE("compact scratchpad lists changes only") {
  TextPair p = RenderCompact(RunBench("collatz", 4), Bench("collatz").FullSource(), false);
  auto lines = Lines(p.target);
  CHECK(lines[0] == "line 2: steps = 0");
  CHECK(lines[1] == "state: {n: 4, steps: 0}");
  CHECK(lines[2] == "line 3: while n > 1:");
  CHECK(lines[3] == "state: {}");
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    if (lines[i] == "line 6: n = n // 2") {
      CHECK(lines[i + 1] == "state: {n: 2}");
      break;
    }
  }
}

const char* kHelper =
    "def g(x):\n"
    "    y = x * 2\n"
    "    return y + 1\n"
    "\n"
    "def f(n):\n"
    "    a = g(n)\n"
    "    return a\n";

TEST_CASE("compact step-in brackets helper frames") {
  Trace t = testing::RunText(kHelper, {Value(3)});
  TextPair in = RenderCompact(t, kHelper, true);
  CHECK(Count(in.target, "call g(") == 1);
  CHECK(in.target ==
        "line 6: a = g(n)\n"
        "  call g(3)\n"
        "  line 2: y = x * 2\n"
        "  state: {x: 3, y: 6}\n"
        "  line 3: return y + 1\n"
        "  state: {}\n"
        "  -> 7\n"
        "state: {n: 3, a: 7}\n"
        "line 7: return a\n"
        "state: {}\n"
        "return: 7\n");
  TextPair out = RenderCompact(t, kHelper, false);
  CHECK(Count(out.target, "call g(") == 0);
}

TEST_CASE("compact diffs rebuild the full scratchpad") {
  auto check = [](const SourceUnit& unit, const std::vector<Value>& args) {
    ExecOptions o;
    o.step_into = false;
    Trace t = Execute(unit, args, o);
    std::string src = unit.FullSource();
    TextPair full = RenderScratchpad(t, src);
    TextPair compact = RenderCompact(t, src, false);
    CHECK(CompactToFull(compact.prompt, compact.target) == full.target);
  };
  for (const auto& b : BenchPrograms()) check(BenchUnit(b), {Value(18)});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = testing::ReturningCase(seed);
    check(c.unit, c.args);
  }
}

TEST_CASE("dynamic pair counts") {
  Trace t = RunBench("collatz", 4);
  std::string src = Bench("collatz").FullSource();
  const std::int64_t L = LineStepCount(t);
  REQUIRE(L == 11);
  CHECK(EmitDynamicPairs(t, src, 1).size() == 11);
  std::size_t expect = 0;
  for (int n = 1; n <= 10; ++n) expect += static_cast<std::size_t>(L - n + 1);
  CHECK(EmitDynamicPairs(t, src, 10).size() == expect);
  CHECK(expect == 65);
  CHECK_THROWS(EmitDynamicPairs(t, src, 0));
}

TEST_CASE("two steps into collatz") {
  Trace t = RunBench("collatz", 4);
  std::string src = Bench("collatz").FullSource();
  for (const auto& p : EmitDynamicPairs(t, src, 2)) {
    SelfContainedState from = ParseState(p.prompt);
    if (p.n == 2 && RenderLocals(from.locals) == "{n: 4, steps: 0}" && from.location == 3) {
      CHECK(p.target == "line: 5\nlocals: {n: 4, steps: 1}\niterators: {}\n");
      CHECK(p.prompt.substr(p.prompt.size() - 9) == "steps: 2\n");
      return;
    }
  }
  FAIL("pair not found");
}

TEST_CASE("the last dynamic pair carries the return value") {
  Trace t = RunBench("collatz", 4);
  auto pairs = EmitDynamicPairs(t, Bench("collatz").FullSource(), 1);
  CHECK(pairs.back().target.find("return: 2\n") != std::string::npos);
}

TEST_CASE("reverse pairs transpose forward pairs") {
  Trace t = RunBench("collatz", 4);
  std::string src = Bench("collatz").FullSource();
  auto fwd = EmitDynamicPairs(t, src, 1);
  auto rev = EmitReversePairs(t, src);
  REQUIRE(rev.size() == fwd.size());
  CHECK(rev.size() == 11);
  auto states = StateSequence(t, src);
  for (std::size_t i = 0; i < rev.size(); ++i) {
    CHECK(rev[i].n == -1);
    CHECK(rev[i].direction == Direction::kReverse);
    CHECK(RenderState(ParseState(rev[i].prompt)) == fwd[i].target);
    CHECK(rev[i].target == RenderState(ParseState(fwd[i].prompt)));
    CHECK(rev[i].prompt.substr(rev[i].prompt.size() - 10) == "steps: -1\n");
  }
  CHECK(rev.back().target == RenderState(states[states.size() - 2]));
}

TEST_CASE("n-step targets compose from single steps") {
  auto check = [](const SourceUnit& unit, const std::vector<Value>& args) {
    ExecOptions o;
    o.step_into = false;
    Trace t = Execute(unit, args, o);
    auto pairs = EmitDynamicPairs(t, unit.FullSource(), 10);
    std::map<std::string, std::string> next;
    for (const auto& p : pairs) {
      if (p.n == 1) next[RenderState(ParseState(p.prompt))] = p.target;
    }
    for (const auto& p : pairs) {
      std::string s = RenderState(ParseState(p.prompt));
      for (int k = 0; k < p.n; ++k) s = next.at(s);
      CHECK(s == p.target);
    }
  };
  for (const auto& b : BenchPrograms()) check(BenchUnit(b), {Value(8)});
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto c = testing::ReturningCase(seed);
    check(c.unit, c.args);
  }
}

TEST_CASE("instruction pairs include the listing") {
  Trace t = RunBench("collatz", 4, Granularity::kInstruction);
  Module m = CompileUnit(Bench("collatz"));
  auto pairs = EmitDynamicPairs(t, Bench("collatz").FullSource(), 2, MainDisassembly(m));
  REQUIRE(!pairs.empty());
  CHECK(pairs[0].prompt.find("### bytecode\n0 LOAD_CONST 0  # steps = 0\n") != std::string::npos);
  CHECK(pairs[0].granularity == Granularity::kInstruction);
  CHECK(pairs[0].target.rfind("offset: ", 0) == 0);
  CHECK(pairs[0].target.find("stack: [") != std::string::npos);
}

TEST_CASE("pair rows use the published key order") {
  Trace t = RunBench("collatz", 4);
  auto pairs = EmitDynamicPairs(t, Bench("collatz").FullSource(), 1);
  auto row = nlohmann::ordered_json::parse(PairToJson(pairs[0]));
  std::vector<std::string> keys;
  for (auto it = row.begin(); it != row.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"unit_id", "args_repr", "granularity", "direction", "n",
                                         "prompt", "target"});
  CHECK(row["args_repr"] == "(4,)");
  CHECK(row["granularity"] == "line");
  CHECK(row["direction"] == "forward");

  PredictionPair whole = WholeTracePair(t, RenderScratchpad(t, Bench("collatz").FullSource()));
  CHECK(whole.n == 1);
}

}  // namespace
}  // namespace exectrace
