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

#include <cmath>
#include <json.hpp>

#include "exectrace/channel.hpp"
#include "exectrace/metrics.hpp"
#include "exectrace/strategies.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

using testing::Bench;

EpisodeContext BenchContext(const std::string& name, int n,
                            Granularity g = Granularity::kLine) {
  return MakeContext(Bench(name), {Value(n)}, g);
}

NoiseConfig Noise(double cf, double vars, double iter, NllModel model = NllModel::kCalibrated) {
  NoiseConfig c;
  c.p_control_flow = cf;
  c.p_vars = vars;
  c.p_iterator = iter;
  c.model = model;
  c.seed = 11;
  return c;
}

TEST_CASE("contexts require a returning run") {
  CHECK_THROWS_AS(MakeContext(MakeUnit("inv", "def inv(n):\n    return 1//n\n"), {Value(0)},
                              Granularity::kLine),
                  UnsupportedOutcome);
  EpisodeContext ctx = BenchContext("collatz", 4);
  CHECK(ctx.L() == 11);
  CHECK(ctx.Find(ctx.states[3]) == 3u);
}

TEST_CASE("oracle answers") {
  EpisodeContext ctx = BenchContext("collatz", 4);
  OraclePredictor o;
  auto c = o.Propose(ctx, {ctx.states[0], 1, Direction::kForward});
  REQUIRE(c.size() == 1);
  CHECK(RenderState(c[0].state) == ctx.rendered[1]);
  CHECK(c[0].nll == 0);
  auto past = o.Propose(ctx, {ctx.states[8], 10, Direction::kForward});
  CHECK(past[0].state.terminal());
  CHECK(RenderState(past[0].state) == ctx.rendered.back());
  CHECK_THROWS_AS(o.Propose(ctx, {ctx.states[0], 1, Direction::kReverse}), NoPredecessor);
  CHECK(RenderState(o.Propose(ctx, {ctx.states[5], 1, Direction::kReverse})[0].state) ==
        ctx.rendered[4]);
}

TEST_CASE("oracle continues off-trace states") {
  EpisodeContext ctx = BenchContext("collatz", 4);
  SelfContainedState s = ctx.states[0];
  s.locals = {{"n", "5"}};
  SelfContainedState next = OraclePredictor::Successor(ctx, s, 2);
  CHECK(RenderLocals(next.locals) == "{n: 5, steps: 0}");
  CHECK(next.location == 4);

  SelfContainedState broken = ctx.states[2];
  broken.locals = {{"n", "'x'"}, {"steps", "0"}};
  SelfContainedState end = OraclePredictor::Successor(ctx, broken, 3);
  REQUIRE(end.terminal());
  CHECK(*end.return_repr == "<error TypeError>");

  SelfContainedState nowhere = ctx.states[2];
  nowhere.location = 99;
  CHECK(*OraclePredictor::Successor(ctx, nowhere, 1).return_repr == "<error ResumeError>");
}

TEST_CASE("noise-free noisy predictor is the oracle") {
  EpisodeContext ctx = BenchContext("collatz", 18);
  NoisyPredictor p(Noise(0, 0, 0));
  OraclePredictor o;
  for (std::size_t t = 0; t < ctx.L(); ++t) {
    for (int n = 1; n <= 3; ++n) {
      CHECK(RenderState(p.Propose(ctx, {ctx.states[t], n, Direction::kForward})[0].state) ==
            RenderState(o.Propose(ctx, {ctx.states[t], n, Direction::kForward})[0].state));
    }
  }
}

TEST_CASE("forced variable errors") {
  EpisodeContext ctx = BenchContext("fibonacci", 8);
  NoisyPredictor p(Noise(0, 1, 0));
  for (std::size_t t = 0; t < ctx.L(); ++t) {
    auto c = p.Propose(ctx, {ctx.states[t], 1, Direction::kForward});
    FacetResult r = CompareStates(c[0].state, ctx.states[t + 1]);
    CHECK(!r.vars);
    CHECK(r.control_flow);
    CHECK(r.iterator);
  }
  EpisodeResult e = RunGreedy(p, ctx, {});
  CHECK(!e.process_correct);
}

TEST_CASE("noisy answers do not depend on query order") {
  EpisodeContext ctx = BenchContext("collatz", 18);
  NoisyPredictor p(Noise(0.3, 0.3, 0.3));
  std::vector<std::string> first, second;
  for (std::size_t t = 0; t < ctx.L(); ++t) {
    first.push_back(RenderState(p.Propose(ctx, {ctx.states[t], 2, Direction::kForward})[0].state));
  }
  for (std::size_t t = ctx.L(); t-- > 0;) {
    second.push_back(RenderState(p.Propose(ctx, {ctx.states[t], 2, Direction::kForward})[0].state));
  }
  std::reverse(second.begin(), second.end());
  CHECK(first == second);
}

TEST_CASE("control-flow error rate matches the planted probability") {
  NoisyPredictor p(Noise(0.1, 0, 0));
  int wrong = 0, total = 0;
  for (int input : {103, 457, 1127, 2620, 3038}) {
    EpisodeContext ctx = BenchContext("binary_counter", input);
    for (std::size_t t = 0; t < ctx.L() && total < 10000; ++t) {
      auto c = p.Propose(ctx, {ctx.states[t], 1, Direction::kForward});
      wrong += !CompareStates(c[0].state, ctx.states[t + 1]).control_flow;
      ++total;
    }
  }
  REQUIRE(total == 10000);
  double rate = static_cast<double>(wrong) / total;
  CHECK(std::abs(rate - 0.1) <= 3 * std::sqrt(0.1 * 0.9 / total));
}

TEST_CASE("greedy oracle reproduces the line counts") {
  OraclePredictor o;
  EpisodeResult c = RunGreedy(o, BenchContext("collatz", 3038), {});
  CHECK(c.outcome_correct);
  CHECK(c.process_correct);
  CHECK(c.steps_used == 619);
  EpisodeResult b = RunGreedy(o, BenchContext("binary_counter", 3038), {});
  CHECK(b.outcome_correct);
  CHECK(b.steps_used == 14055);
  // A four-bit counter: bits of 3038 mod 16, most significant first.
  int v = 3038 % 16;
  std::string expect = "(";
  for (int bit = 3; bit >= 0; --bit) {
    expect += (v >> bit & 1) ? "True" : "False";
    expect += bit ? ", " : ")";
  }
  CHECK(*b.predicted_return == expect);
}

TEST_CASE("argmin with flat zero nll matches greedy") {
  OraclePredictor o;
  EpisodeContext ctx = BenchContext("collatz", 18);
  EpisodeResult g = RunGreedy(o, ctx, {});
  EpisodeResult a = RunArgminNll(o, ctx, {});
  CHECK(a.steps_used == g.steps_used);
  for (const auto& s : a.steps) CHECK(s.n == 1);
}

TEST_CASE("argmin with nll rising in n takes single steps") {
  NoisyPredictor p(Noise(0, 0, 0));
  EpisodeContext ctx = BenchContext("collatz", 18);
  EpisodeResult a = RunArgminNll(p, ctx, {});
  CHECK(a.outcome_correct);
  CHECK(a.steps_used == static_cast<std::int64_t>(ctx.L()));
}

TEST_CASE("argmin follows the most confident exact horizon") {
  NoiseConfig c = Noise(1, 1, 1);
  c.exact_up_to = 3;
  c.base_nll = {0.3, 0.2, 0.1, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
  c.noise = 0;
  NoisyPredictor p(c);
  EpisodeContext ctx = BenchContext("collatz", 18);
  REQUIRE(ctx.L() == 83);
  EpisodeResult a = RunArgminNll(p, ctx, {});
  CHECK(a.outcome_correct);
  CHECK(a.process_correct);
  CHECK(a.steps_used == 28);
}

TEST_CASE("dijkstra with the oracle needs ceil(L / n_max) steps") {
  OraclePredictor o;
  EpisodeContext ctx = BenchContext("collatz", 3038);
  EpisodeResult d = RunDijkstra(o, ctx, {});
  CHECK(d.outcome_correct);
  CHECK(d.process_correct);
  CHECK(d.steps_used == 62);
  EpisodeResult a = RunArgminNll(o, ctx, {});
  EpisodeResult g = RunGreedy(o, ctx, {});
  CHECK(d.steps_used <= a.steps_used);
  CHECK(a.steps_used <= g.steps_used);
}

TEST_CASE("dijkstra degenerates with weak predictors") {
  EpisodeContext ctx = BenchContext("collatz", 18);
  NoiseConfig only_one = Noise(1, 1, 1);
  only_one.exact_up_to = 1;
  NoisyPredictor p(only_one);
  EpisodeResult d = RunDijkstra(p, ctx, {});
  CHECK(d.outcome_correct);
  CHECK(d.steps_used == static_cast<std::int64_t>(ctx.L()));

  NoisyPredictor never(Noise(1, 0, 0));
  EpisodeResult none = RunDijkstra(never, ctx, {});
  CHECK(!none.outcome_correct);
  CHECK(!none.reason.empty());
}

TEST_CASE("reverse walk recovers the initial state") {
  OraclePredictor o;
  EpisodeContext ctx = BenchContext("fibonacci", 18);
  EpisodeResult r = RunReverse(o, ctx, {});
  CHECK(r.outcome_correct);
  CHECK(r.process_correct);
  CHECK(r.steps_used == static_cast<std::int64_t>(ctx.L()));
  NoisyPredictor bad(Noise(0, 1, 0));
  CHECK(!RunReverse(bad, ctx, {}).outcome_correct);
}

TEST_CASE("instruction-level episodes") {
  OraclePredictor o;
  EpisodeContext ctx = BenchContext("fibonacci", 8, Granularity::kInstruction);
  EpisodeResult d = RunDijkstra(o, ctx, {});
  CHECK(d.process_correct);
  CHECK(d.steps_used ==
        static_cast<std::int64_t>((ctx.L() + 9) / 10));
  for (const auto& s : d.steps) CHECK(s.facets.stack == std::optional<bool>(true));
}

TEST_CASE("suite scoring") {
  CHECK_THROWS_AS(ScoreSuite({}), EmptySuite);
  OraclePredictor o;
  std::vector<EpisodeResult> eps;
  for (int n : {4, 5, 8}) eps.push_back(RunGreedy(o, BenchContext("collatz", n), {}));
  MetricsReport r = ScoreSuite(eps);
  CHECK(r.outcome_accuracy == 1.0);
  CHECK(r.process_accuracy == 1.0);
  CHECK(r.facets.full == 1.0);
  CHECK(*r.avg_steps == doctest::Approx((11 + 23 + 15) / 3.0));
  CHECK(SummaryCell(r) == "3/3 (16.3)");

  std::vector<EpisodeResult> nine(9);
  for (int i = 0; i < 9; ++i) {
    nine[i].outcome_correct = i < 4;
    nine[i].steps_used = 1;
  }
  MetricsReport m = ScoreSuite(nine);
  CHECK(m.outcome_accuracy == doctest::Approx(4.0 / 9.0));
  CHECK(SummaryCell(m) == "4/9 (1)");
  CHECK(FormatSteps(98.64) == "98.6");
  CHECK(FormatSteps(2.0) == "2");

  std::vector<EpisodeResult> none(2);
  CHECK(SummaryCell(ScoreSuite(none)) == "0/2 (-)");
}

TEST_CASE("planted full-state error shows in the pooled accuracy") {
  NoisyPredictor p(Noise(0, 0.1, 0));
  EpisodeResult pooled;
  for (int input : {457, 1127, 2620, 3038}) {
    EpisodeContext ctx = BenchContext("binary_counter", input);
    for (std::size_t t = 0; t < ctx.L() && pooled.steps.size() < 10000; ++t) {
      auto c = p.Propose(ctx, {ctx.states[t], 1, Direction::kForward});
      StepRecord rec;
      rec.facets = CompareStates(c[0].state, ctx.states[t + 1]);
      pooled.steps.push_back(rec);
    }
  }
  REQUIRE(pooled.steps.size() == 10000);
  MetricsReport r = ScoreSuite({pooled});
  CHECK(std::abs(r.facets.full - 0.9) <= 3 * std::sqrt(0.09 / 10000));
  CHECK(r.per_n.count(1));
}

TEST_CASE("process correctness implies outcome correctness") {
  NoisyPredictor p(Noise(0.05, 0.05, 0.05));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto c = testing::ReturningCase(seed);
    EpisodeContext ctx = MakeContext(c.unit, c.args, Granularity::kLine);
    for (Strategy s : {Strategy::kGreedy, Strategy::kArgmin, Strategy::kDijkstra}) {
      EpisodeResult e = RunEpisode(s, p, ctx, {});
      if (e.process_correct) CHECK(e.outcome_correct);
      CHECK(e.steps_used >= 1);
    }
  }
}

TEST_CASE("report json echoes the config") {
  OraclePredictor o;
  std::vector<EpisodeResult> eps{RunGreedy(o, BenchContext("collatz", 4), {})};
  auto j = nlohmann::json::parse(MetricsToJson(ScoreSuite(eps), eps, R"({"seed": 7})"));
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["outcome_accuracy"] == 1.0);
  CHECK(j["results"].size() == 1);
  CHECK(j["results"][0]["steps_used"] == 11);
  CHECK(j["per_n"][0]["n"] == 1);
}

// Stub models talking through in-process channels.
std::unique_ptr<Channel> Stub(std::function<std::string(const nlohmann::json&)> answer) {
  return std::make_unique<FunctionChannel>([answer](const std::string& line) {
    auto req = nlohmann::json::parse(line);
    nlohmann::json resp;
    resp["id"] = req["id"];
    resp["candidates"] = nlohmann::json::array({{{"text", answer(req)}, {"nll", 0.5}}});
    return resp.dump();
  });
}

TEST_CASE("echo stub never moves") {
  EpisodeContext ctx = BenchContext("collatz", 5);
  ExternalPredictor p(Stub([](const nlohmann::json& r) { return r["prompt"].get<std::string>(); }));
  EpisodeConfig cfg;
  cfg.max_predictions = 15;
  EpisodeResult e = RunGreedy(p, ctx, cfg);
  CHECK(e.steps_used == 15);
  for (const auto& s : e.steps) CHECK(!s.facets.control_flow);
  CHECK(!e.outcome_correct);
}

TEST_CASE("oracle replay stub matches the oracle") {
  EpisodeContext ctx = BenchContext("fibonacci", 8);
  ExternalPredictor p(Stub([&](const nlohmann::json& r) {
    SelfContainedState s = ParseState(r["prompt"].get<std::string>());
    return RenderState(OraclePredictor::Successor(ctx, s, r["n"].get<int>()));
  }));
  OraclePredictor o;
  for (Strategy s : {Strategy::kGreedy, Strategy::kArgmin, Strategy::kDijkstra}) {
    EpisodeResult a = RunEpisode(s, p, ctx, {});
    EpisodeResult b = RunEpisode(s, o, ctx, {});
    CHECK(a.outcome_correct == b.outcome_correct);
    CHECK(a.process_correct == b.process_correct);
    CHECK(a.steps_used == b.steps_used);
    CHECK(a.predicted_return == b.predicted_return);
  }
}

TEST_CASE("malformed stub output is scored wrong") {
  EpisodeContext ctx = BenchContext("collatz", 5);
  ExternalPredictor p(Stub([](const nlohmann::json&) { return std::string("line: ??"); }));
  EpisodeResult e = RunGreedy(p, ctx, {});
  REQUIRE(e.steps.size() == 1);
  CHECK(e.steps[0].parse_failed);
  CHECK(!e.steps[0].facets.full);
  CHECK(!e.outcome_correct);
  CHECK(!e.infrastructure_failure);

  ExternalPredictor junk(std::make_unique<FunctionChannel>(
      [](const std::string&) { return std::string("not json"); }));
  EpisodeResult j = RunDijkstra(junk, ctx, {});
  CHECK(!j.outcome_correct);
  CHECK(!j.infrastructure_failure);
}

TEST_CASE("channel failures are infrastructure failures") {
  EpisodeContext ctx = BenchContext("collatz", 5);
  ExternalPredictor dead(std::make_unique<FunctionChannel>(
      [](const std::string&) -> std::string { throw ChannelError("eof"); }));
  EpisodeResult e = RunGreedy(dead, ctx, {});
  CHECK(e.infrastructure_failure);
  CHECK(!e.outcome_correct);
  MetricsReport r = ScoreSuite({e});
  CHECK(r.infrastructure_failures == 1);

  ExternalPredictor wrong_id(std::make_unique<FunctionChannel>([](const std::string&) {
    return std::string(R"({"id": 999, "candidates": [{"text": "x", "nll": 0}]})");
  }));
  CHECK(RunGreedy(wrong_id, ctx, {}).infrastructure_failure);
}

TEST_CASE("predictor factory") {
  CHECK(MakePredictor("oracle", {})->Name() == "oracle");
  CHECK(MakePredictor("noisy", {})->Name() == "noisy");
  CHECK_THROWS(MakePredictor("psychic", {}));
  CHECK(ParseStrategy("dijkstra") == Strategy::kDijkstra);
  CHECK_THROWS(ParseStrategy("beam"));
  CHECK(ParseNllModel("flat") == NllModel::kFlat);
}

}  // namespace
}  // namespace exectrace
