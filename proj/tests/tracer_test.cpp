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

#include "exectrace/parser.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

using testing::RunBench;
using testing::RunText;

std::int64_t CountLines(const Trace& t) {
  std::int64_t n = 0;
  for (const auto& e : t.events) n += e.kind == EventKind::kLine;
  return n;
}

TEST_CASE("bench runs produce the expected line events and values") {
  Trace c = RunBench("collatz", 4);
  CHECK(CountLines(c) == 11);
  CHECK(c.outcome.kind == OutcomeKind::kReturn);
  CHECK(Repr(c.outcome.value) == "2");

  Trace f = RunBench("fibonacci", 18);
  CHECK(LineStepCount(f) == 74);
  CHECK(Repr(f.outcome.value) == "2584");

  CHECK(LineStepCount(RunBench("collatz", 5)) == 23);
  CHECK(LineStepCount(RunBench("binary_counter", 8)) == 43);
  CHECK(LineStepCount(RunText("def f():\n    return 0\n", {})) == 1);
}

TEST_CASE("events start with a call and end with the matching return") {
  Trace t = RunBench("fibonacci", 8);
  REQUIRE(!t.events.empty());
  CHECK(t.events.front().kind == EventKind::kCall);
  CHECK(t.events.back().kind == EventKind::kReturn);
  CHECK(t.events.back().depth == 0);
  CHECK(Equal(*t.events.back().retval, t.outcome.value));
  for (std::size_t i = 0; i < t.events.size(); ++i) CHECK(t.events[i].index == static_cast<int>(i));
}

TEST_CASE("runtime errors end the trace at the failing line") {
  Trace t = RunText("def f(n):\n    return 1//n\n", {Value(0)});
  CHECK(t.outcome.kind == OutcomeKind::kError);
  CHECK(t.outcome.error_kind == "ZeroDivisionError");
  CHECK(t.outcome.line == 2);
  CHECK(t.events.back().kind == EventKind::kLine);
  CHECK(t.events.back().line == 2);
}

TEST_CASE("fuel bounds the event count") {
  ExecOptions o;
  o.fuel = 1000;
  Trace t = Execute(testing::Bench("binary_counter"), {Value(3038)}, o);
  CHECK(t.outcome.kind == OutcomeKind::kFuel);
  CHECK(static_cast<std::int64_t>(t.events.size()) <= 1000);
}

TEST_CASE("hidden helpers still spend fuel") {
  const char* src =
      "def spin(n):\n"
      "    while True:\n"
      "        n += 1\n"
      "    return n\n"
      "\n"
      "def f(n):\n"
      "    return spin(n)\n";
  ExecOptions o;
  o.fuel = 500;
  o.step_into = false;
  CHECK(Execute(MakeUnit("f", src), {Value(1)}, o).outcome.kind == OutcomeKind::kFuel);
}

TEST_CASE("arity is checked") {
  CHECK_THROWS_AS(Execute(testing::Bench("collatz"), {}), ArityError);
}

const char* kHelperSource =
    "def g(x):\n"
    "    y = x * 2\n"
    "    return y + 1\n"
    "\n"
    "def f(n):\n"
    "    a = g(n)\n"
    "    return a\n";

TEST_CASE("step-into controls whether helper frames are traced") {
  Trace in = RunText(kHelperSource, {Value(3)}, Granularity::kLine, true);
  Trace out = RunText(kHelperSource, {Value(3)}, Granularity::kLine, false);
  auto depth1 = [](const Trace& t, EventKind k) {
    int n = 0;
    for (const auto& e : t.events) n += e.depth == 1 && e.kind == k;
    return n;
  };
  CHECK(depth1(in, EventKind::kLine) == 2);
  CHECK(depth1(out, EventKind::kLine) == 0);
  CHECK(depth1(out, EventKind::kCall) == 1);
  CHECK(depth1(out, EventKind::kReturn) == 1);
  CHECK(Repr(in.outcome.value) == "7");
  CHECK(Repr(out.outcome.value) == "7");
  CHECK(in.globals == std::vector<std::string>{"g"});
}

TEST_CASE("builtins are never stepped into") {
  Trace t = RunText("def f(xs):\n    return sorted(xs)\n", {ParseLiteral("[3, 1]")});
  for (const auto& e : t.events) CHECK(e.depth == 0);
}

TEST_CASE("snapshots are deep copies") {
  Trace t = RunText("def f(n):\n    xs = []\n    xs.append(n)\n    xs.append(n)\n    return 0\n",
                    {Value(5)});
  std::vector<std::string> seen;
  for (const auto& e : t.events) {
    for (const auto& [name, v] : e.locals) {
      if (name == "xs") seen.push_back(Repr(v));
    }
  }
  CHECK(seen == std::vector<std::string>{"[]", "[5]", "[5, 5]", "[5, 5]"});
}

TEST_CASE("state after the first line of collatz") {
  Trace t = RunBench("collatz", 4);
  std::string src = testing::Bench("collatz").FullSource();
  std::size_t first = 1;
  REQUIRE(t.events[first].kind == EventKind::kLine);
  SelfContainedState s = StateAt(t, first, src);
  CHECK(RenderLocals(s.locals) == "{n: 4, steps: 0}");
  CHECK(s.iterators.empty());
  CHECK(s.location == 3);
  CHECK_THROWS_AS(StateAt(t, t.events.size(), src), std::out_of_range);
}

TEST_CASE("first loop iteration of fibonacci carries one yielded item") {
  Trace t = RunBench("fibonacci", 4);
  std::string src = testing::Bench("fibonacci").FullSource();
  // The first line event inside the loop body sees i == 2.
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const auto& e = t.events[i];
    if (e.kind != EventKind::kLine || e.line != 9) continue;
    SelfContainedState s = StateAt(t, i, src);
    REQUIRE(s.iterators.size() == 1);
    CHECK(s.iterators[0] == std::pair<int, std::int64_t>(1, 1));
    CHECK(RenderState(s).find("iterators: {__for_iterator_1__=1}") != std::string::npos);
    break;
  }
}

TEST_CASE("the last event maps to the terminal state") {
  for (const auto& b : BenchPrograms()) {
    Trace t = RunBench(b.name, 8);
    SelfContainedState s = StateAt(t, t.events.size() - 1, BenchUnit(b).FullSource());
    REQUIRE(s.terminal());
    CHECK(*s.return_repr == Repr(t.outcome.value));
    CHECK(s.location == t.events.back().line);
  }
}

TEST_CASE("state sequence has one more state than steps") {
  Trace t = RunBench("collatz", 18);
  auto states = StateSequence(t, testing::Bench("collatz").FullSource());
  CHECK(static_cast<std::int64_t>(states.size()) == LineStepCount(t) + 1);
  CHECK(states.back().terminal());
  for (std::size_t i = 0; i + 1 < states.size(); ++i) CHECK(!states[i].terminal());
}

TEST_CASE("traces are deterministic") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto c = testing::ReturningCase(seed);
    CHECK(TraceToJsonl(Execute(c.unit, c.args)) == TraceToJsonl(Execute(c.unit, c.args)));
  }
}

TEST_CASE("instruction traces project onto line traces") {
  auto check = [](const SourceUnit& unit, const std::vector<Value>& args) {
    ExecOptions o;
    Trace line = Execute(unit, args, o);
    o.granularity = Granularity::kInstruction;
    Trace ins = Execute(unit, args, o);
    std::vector<std::string> a, b;
    auto key = [](const TraceEvent& e) {
      std::string k = std::string(EventKindName(e.kind)) + "@" + std::to_string(e.depth) + ":" +
                      std::to_string(e.line);
      for (const auto& [n, v] : e.locals) k += " " + n + "=" + Repr(v);
      for (const auto& it : e.iterators) k += " it" + std::to_string(it.slot) + "=" +
                                             std::to_string(it.count);
      return k;
    };
    for (const auto& e : line.events) a.push_back(key(e));
    for (const auto& e : ins.events) {
      if (e.kind != EventKind::kOpcode) b.push_back(key(e));
    }
    CHECK(a == b);
    CHECK(SameOutcome(line.outcome, ins.outcome));
  };
  for (const auto& b : BenchPrograms()) check(BenchUnit(b), {Value(18)});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto c = testing::ReturningCase(seed);
    check(c.unit, c.args);
  }
}

TEST_CASE("range iterators end at their length") {
  for (int a = -3; a <= 3; ++a) {
    for (int b = -3; b <= 6; ++b) {
      for (int step : {1, 2, 3, -1, -2}) {
        std::string src = "def f(a, b, s):\n    t = 0\n    for x in range(a, b, s):\n"
                          "        t += 1\n    return t\n";
        Trace t = RunText(src, {Value(a), Value(b), Value(step)});
        std::int64_t last = -1;
        for (const auto& e : t.events) {
          if (e.kind == EventKind::kLine && e.line == 3 && !e.iterators.empty()) {
            last = e.iterators[0].count;
          }
        }
        std::int64_t expect = step > 0 ? std::max(0, (b - a + step - 1) / step)
                                       : std::max(0, (a - b - step - 1) / -step);
        CHECK(Repr(t.outcome.value) == std::to_string(expect));
        if (expect > 0) CHECK(last == expect);
      }
    }
  }
}

TEST_CASE("iterator counts never decrease within a loop") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = testing::ReturningCase(seed);
    Trace t = Execute(c.unit, c.args);
    std::map<int, std::int64_t> last;
    for (const auto& e : t.events) {
      if (e.depth != 0 || e.kind == EventKind::kCall) continue;
      std::map<int, std::int64_t> now;
      for (const auto& it : e.iterators) now[it.slot] = it.count;
      for (const auto& [slot, count] : now) {
        auto p = last.find(slot);
        // A slot that stays live keeps counting up, or restarts at zero for
        // a fresh iterator.
        if (p != last.end() && count < p->second) CHECK(count <= 1);
      }
      last = now;
    }
  }
}

TEST_CASE("resuming from any state reproduces the rest of the run") {
  auto check = [](const SourceUnit& unit, const std::vector<Value>& args, Granularity g) {
    ExecOptions o;
    o.granularity = g;
    o.step_into = false;
    Module m = CompileUnit(unit);
    Trace t = Execute(m, unit.unit_id, args, o);
    auto states = StateSequence(t, unit.FullSource());
    for (std::size_t i = 0; i < states.size(); i += std::max<std::size_t>(1, states.size() / 12)) {
      // Only the rendered text is carried over.
      SelfContainedState s = ParseState(RenderState(states[i]));
      s.source = unit.FullSource();
      INFO(unit.FullSource() << RenderState(states[i]));
      ResumeResult r;
      REQUIRE_NOTHROW(r = Resume(m, s, -1, o));
      CHECK(SameOutcome(r.outcome, t.outcome));
      REQUIRE(r.states.size() == states.size() - i);
      for (std::size_t k = 0; k < r.states.size(); ++k) {
        CHECK(RenderState(r.states[k]) == RenderState(states[i + k]));
      }
    }
  };
  for (const auto& b : BenchPrograms()) {
    check(BenchUnit(b), {Value(18)}, Granularity::kLine);
    check(BenchUnit(b), {Value(8)}, Granularity::kInstruction);
  }
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto c = testing::ReturningCase(seed);
    check(c.unit, c.args, seed % 2 ? Granularity::kInstruction : Granularity::kLine);
  }
}

TEST_CASE("resume follows the granularity of the state") {
  const SourceUnit unit = BenchUnit(BenchPrograms()[0]);
  ExecOptions o;
  o.granularity = Granularity::kInstruction;
  Module m = CompileUnit(unit);
  auto states = StateSequence(Execute(m, unit.unit_id, {Value(5)}, o), unit.FullSource());
  ResumeResult r = Resume(m, states[3], 4);
  REQUIRE(r.states.size() == 5);
  CHECK(RenderState(r.states[4]) == RenderState(states[7]));
}

TEST_CASE("jsonl export follows the row schema") {
  Trace t = RunBench("collatz", 4);
  std::string text = TraceToJsonl(t);
  std::vector<nlohmann::json> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    rows.push_back(nlohmann::json::parse(text.substr(pos, eol - pos)));
    pos = eol + 1;
  }
  REQUIRE(rows.size() == t.events.size() + 1);
  for (const char* key : {"unit_id", "args_repr", "event_index", "kind", "depth", "func", "line",
                          "locals", "iterators", "stack", "instr", "retval"}) {
    CHECK(rows[1].contains(key));
  }
  CHECK(rows[1]["kind"] == "line");
  CHECK(rows[1]["args_repr"] == "(4,)");
  CHECK(rows[1]["locals"]["n"] == "4");
  CHECK(rows[1]["stack"].is_null());
  CHECK(rows.back()["outcome"] == "return");
  CHECK(rows.back()["value_or_message"] == "2");

  Trace e = RunText("def f(n):\n    return 1//n\n", {Value(0)});
  std::string et = TraceToJsonl(e);
  auto last = nlohmann::json::parse(et.substr(et.rfind('\n', et.size() - 2) + 1));
  CHECK(last["outcome"] == "error");
}

}  // namespace
}  // namespace exectrace
