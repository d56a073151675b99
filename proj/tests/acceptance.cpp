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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "exectrace/bench.hpp"
#include "exectrace/evaluation.hpp"
#include "exectrace/pairs.hpp"
#include "exectrace/scratchpad.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void Fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::int64_t Lines(const std::string& bench, int n) {
  return LineStepCount(testing::RunBench(bench, n));
}

std::string Join(const std::vector<std::int64_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return "(" + s + ")";
}

Verdict StepCounts() {
  const std::map<std::string, std::vector<std::pair<int, std::int64_t>>> expected = {
      {"collatz", {{4, 11}, {5, 23}, {8, 15}, {18, 83}, {103, 351}, {3038, 619}}},
      {"fibonacci", {{4, 18}, {5, 22}, {8, 34}, {18, 74}, {103, 414}}},
      {"binary_counter",
       {{4, 24}, {5, 27}, {8, 43}, {18, 88}, {103, 479}, {457, 2118}, {1127, 5215},
        {3038, 14055}}}};
  Verdict v;
  auto start = Clock::now();
  int checked = 0;
  for (const auto& [name, rows] : expected) {
    for (auto [n, want] : rows) {
      std::int64_t got = Lines(name, n);
      ++checked;
      if (got != want) {
        v.Fail(name + "(" + std::to_string(n) + ") = " + std::to_string(got) + ", expected " +
               std::to_string(want));
      }
    }
  }
  double s = Seconds(start);
  if (s >= 5) v.Fail("took " + std::to_string(s) + " s");
  if (v.pass) v.detail = std::to_string(checked) + " counts exact in " + std::to_string(s) + " s";
  return v;
}

Verdict ClosedForms() {
  Verdict v;
  for (int n = 1; n <= 200; ++n) {
    std::int64_t k = 0;
    for (std::int64_t x = n; x > 1; ++k) x = x % 2 ? 3 * x + 1 : x / 2;
    if (Lines("collatz", n) != 4 * k + 3) v.Fail("collatz(" + std::to_string(n) + ")");
    if (n >= 2 && Lines("fibonacci", n) != 4 * n + 2) v.Fail("fibonacci(" + std::to_string(n) + ")");
  }
  if (v.pass) v.detail = "collatz 4k+3 and fibonacci 4n+2 on 1..200";
  return v;
}

std::vector<EvalItem> FuzzItems(int count, const ProgramFuzzOptions& options = {}) {
  std::vector<EvalItem> items;
  for (int i = 0; i < count; ++i) {
    auto c = testing::ReturningCase(static_cast<std::uint64_t>(i) + 1000, options);
    items.push_back({c.unit, c.args});
  }
  return items;
}

Verdict OracleSupremacy() {
  Verdict v;
  auto start = Clock::now();
  std::vector<EvalItem> items = BenchItems();
  const std::size_t bench = items.size();
  for (auto& it : FuzzItems(100)) items.push_back(std::move(it));
  for (Strategy s : {Strategy::kGreedy, Strategy::kArgmin, Strategy::kDijkstra}) {
    EvalConfig config;
    config.strategy = s;
    config.jobs = 4;
    EvalRun run = Evaluate(items, config);
    if (!run.skipped.empty()) v.Fail(std::to_string(run.skipped.size()) + " items skipped");
    if (run.report.outcome_accuracy != 1.0 || run.report.process_accuracy != 1.0) {
      v.Fail(std::string(StrategyName(s)) + ": " + SummaryCell(run.report));
    }
  }
  double s = Seconds(start);
  if (s >= 120) v.Fail("took " + std::to_string(s) + " s");
  if (v.pass) {
    v.detail = std::to_string(bench) + " bench + 100 fuzzed episodes, 3 strategies, all 1.0 in " +
               std::to_string(s) + " s";
  }
  return v;
}

Verdict DijkstraOptimality() {
  Verdict v;
  // Shortest paths found with an imperfect model bound ours from above.
  const std::map<std::string, std::vector<std::int64_t>> model_paths = {
      {"collatz", {2, 3, 2, 9, 36, 53, 57, 62, 67}},
      {"binary_counter", {3, 3, 5, 10, 52, 229, 564, 1310, 1520}},
      {"fibonacci", {2, 3, 4, 8, 42}}};
  std::vector<std::int64_t> collatz_small;
  OraclePredictor oracle;
  for (const auto& b : BenchPrograms()) {
    const auto& reported = model_paths.at(b.name);
    for (std::size_t i = 0; i < b.inputs.size(); ++i) {
      EpisodeContext ctx = MakeContext(BenchUnit(b), {Value(b.inputs[i])}, Granularity::kLine);
      EpisodeResult r = RunDijkstra(oracle, ctx, {});
      const auto bound = static_cast<std::int64_t>((ctx.L() + 9) / 10);
      if (!r.process_correct || r.steps_used != bound) {
        v.Fail(b.name + "(" + std::to_string(b.inputs[i]) + ") took " +
               std::to_string(r.steps_used) + ", optimum " + std::to_string(bound));
      }
      if (i < reported.size() && reported[i] < r.steps_used) {
        v.Fail("model path " + b.name + "(" + std::to_string(b.inputs[i]) + ") = " +
               std::to_string(reported[i]) + " is below ours " + std::to_string(r.steps_used));
      }
      if (b.name == "collatz" && i < 5) collatz_small.push_back(r.steps_used);
    }
  }
  if (collatz_small != std::vector<std::int64_t>{2, 3, 2, 9, 36}) {
    v.Fail("collatz " + Join(collatz_small));
  }
  if (v.pass) {
    v.detail = "steps = ceil(L/10) on all 23 inputs, collatz " + Join(collatz_small) +
               ", every model path >= ours";
  }
  return v;
}

Verdict CompactRoundTrip() {
  Verdict v;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto c = testing::ReturningCase(seed + 5000);
    ExecOptions o;
    o.step_into = false;
    Trace t = Execute(c.unit, c.args, o);
    const std::string src = c.unit.FullSource();
    TextPair compact = RenderCompact(t, src, false);
    if (CompactToFull(compact.prompt, compact.target) != RenderScratchpad(t, src).target) {
      v.Fail("mismatch on fuzz seed " + std::to_string(seed));
    }
  }
  if (v.pass) v.detail = "1000 fuzzed traces byte-exact";
  return v;
}

Verdict Semigroup() {
  Verdict v;
  std::int64_t pairs_checked = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto c = testing::ReturningCase(seed + 5000);
    ExecOptions o;
    o.step_into = false;
    Trace t = Execute(c.unit, c.args, o);
    auto pairs = EmitDynamicPairs(t, c.unit.FullSource(), 10);
    // Execution is deterministic, so a state's single-step target is a
    // function of the state text alone.
    std::map<std::string, std::string> next;
    std::vector<std::string> start(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      start[i] = RenderState(ParseState(pairs[i].prompt));
      if (pairs[i].n == 1) next.emplace(start[i], pairs[i].target);
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::string s = start[i];
      for (int k = 0; k < pairs[i].n; ++k) {
        auto it = next.find(s);
        if (it == next.end()) break;
        s = it->second;
      }
      ++pairs_checked;
      if (s != pairs[i].target) v.Fail("mismatch on fuzz seed " + std::to_string(seed));
    }
  }
  if (v.pass) v.detail = "1000 fuzzed traces, " + std::to_string(pairs_checked) + " pairs byte-exact";
  return v;
}

Verdict Calibration() {
  Verdict v;
  std::vector<EpisodeContext> contexts;
  for (int n : {457, 1127, 2620, 3038}) {
    contexts.push_back(MakeContext(testing::Bench("binary_counter"), {Value(n)}, Granularity::kLine));
  }
  std::ostringstream detail;
  for (double p : {0.05, 0.1, 0.2}) {
    NoisyPredictor noisy(NoiseConfig::Uniform(p, NllModel::kCalibrated, kDefaultSeed));
    std::int64_t total = 0, cf = 0, vars = 0, iter = 0;
    for (const auto& ctx : contexts) {
      for (std::size_t t = 0; t < ctx.L() && total < 20000; ++t) {
        int n = 1 + static_cast<int>(t % 10);
        std::size_t to = std::min(t + static_cast<std::size_t>(n), ctx.L());
        auto c = noisy.Propose(ctx, {ctx.states[t], n, Direction::kForward});
        FacetResult r = CompareStates(c[0].state, ctx.states[to]);
        cf += !r.control_flow;
        vars += !r.vars;
        iter += !r.iterator;
        ++total;
      }
    }
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(total));
    detail << "p=" << p << ":";
    for (auto [name, wrong] : {std::pair<const char*, std::int64_t>{"cf", cf}, {"vars", vars},
                               {"iter", iter}}) {
      double rate = static_cast<double>(wrong) / static_cast<double>(total);
      detail << " " << name << "=" << rate;
      if (std::abs(rate - p) > 3 * sigma) v.Fail(std::string(name) + " rate " + std::to_string(rate) + " for p=" + std::to_string(p));
    }
    detail << " over " << total << ";";
  }
  if (v.pass) {
    v.detail = detail.str();
    v.detail.pop_back();
  }
  return v;
}

// P(X >= k) for X ~ Binomial(n, 1/2).
double UpperTail(int k, int n) {
  double sum = 0;
  for (int i = k; i <= n; ++i) {
    sum += std::exp(std::lgamma(n + 1) - std::lgamma(i + 1) - std::lgamma(n - i + 1) - n * std::log(2.0));
  }
  return sum;
}

Verdict NllBenefit() {
  Verdict v;
  std::vector<EvalItem> items = FuzzItems(200);
  int better = 0, worse = 0, calibrated_ok = 0, flat_ok = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    EpisodeContext ctx = MakeContext(items[i].unit, items[i].args, Granularity::kLine);
    // An episode twice as long as the true run has already gone astray.
    EpisodeConfig config;
    config.max_predictions = 2 * static_cast<std::int64_t>(ctx.L()) + 10;
    bool ok[2];
    int m = 0;
    for (NllModel model : {NllModel::kCalibrated, NllModel::kFlat}) {
      NoisyPredictor p(NoiseConfig::Uniform(0.05, model, 1000 + i));
      ok[m++] = RunArgminNll(p, ctx, config).outcome_correct;
    }
    calibrated_ok += ok[0];
    flat_ok += ok[1];
    better += ok[0] && !ok[1];
    worse += !ok[0] && ok[1];
  }
  const double pvalue = UpperTail(better, better + worse);
  std::ostringstream d;
  d << "outcome " << calibrated_ok << "/200 calibrated vs " << flat_ok << "/200 flat, sign test "
    << better << "+/" << worse << "- p=" << pvalue;
  v.detail = d.str();
  if (!(calibrated_ok > flat_ok && pvalue < 0.05)) v.pass = false;
  return v;
}

Verdict RewriteEquivalence() {
  Verdict v;
  ProgramFuzzOptions options;
  options.force_nested_for = true;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto c = testing::ReturningCase(seed + 9000, options);
    SourceUnit rewritten = RewriteNestedFor(c.unit);
    if (!SameOutcome(Execute(c.unit, c.args).outcome, Execute(rewritten, c.args).outcome)) {
      v.Fail("outcome differs on fuzz seed " + std::to_string(seed));
    }
  }
  if (v.pass) v.detail = "500 nested-loop programs outcome-identical";
  return v;
}

std::map<std::string, std::string> Snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    files[e.path().filename().string()] = testing::ReadFile(e.path());
  }
  return files;
}

Verdict Determinism() {
  Verdict v;
  std::vector<DatasetInput> corpus;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    FuzzedProgram p = GenerateProgram(seed + 300);
    corpus.push_back({p.unit, p.grammar, {}});
  }
  DatasetConfig config;
  config.representations = RepresentationNames();
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2; ++run) {
    auto dir = testing::TempDir("acceptance_dataset_" + std::to_string(run));
    EmitDataset(corpus, config, dir);
    auto files = Snapshot(dir);
    if (run == 0) {
      first = files;
    } else if (files != first) {
      v.Fail("dataset files differ between runs");
    }
    std::filesystem::remove_all(dir);
  }

  std::vector<EvalItem> items = BenchItems("collatz");
  for (auto& it : FuzzItems(20)) items.push_back(std::move(it));
  EvalConfig eval;
  eval.predictor = "noisy";
  eval.strategy = Strategy::kArgmin;
  eval.noise = NoiseConfig::Uniform(0.05, NllModel::kCalibrated, kDefaultSeed);
  std::string report = EvalReportJson(Evaluate(items, eval), eval);
  eval.jobs = 4;
  if (EvalReportJson(Evaluate(items, eval), eval) != report) v.Fail("eval reports differ");
  if (v.pass) {
    v.detail = std::to_string(first.size()) + " dataset files and a " +
               std::to_string(report.size()) + "-byte eval report identical across runs";
  }
  return v;
}

}  // namespace
}  // namespace exectrace

int main() {
  using namespace exectrace;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"step-count reproduction", StepCounts},
      {"closed-form laws", ClosedForms},
      {"oracle supremacy", OracleSupremacy},
      {"dijkstra step optimality", DijkstraOptimality},
      {"compact scratchpad round trip", CompactRoundTrip},
      {"dynamic-pair semigroup", Semigroup},
      {"metric calibration", Calibration},
      {"nll-selection benefit", NllBenefit},
      {"for-while rewrite equivalence", RewriteEquivalence},
      {"determinism", Determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    auto start = Clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v.Fail(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                Seconds(start));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
