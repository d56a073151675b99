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


#include "exectrace/evaluation.hpp"

#include <atomic>
#include <optional>
#include <thread>

#include <json.hpp>

#include "exectrace/bench.hpp"
#include "exectrace/scratchpad.hpp"

namespace exectrace {

std::vector<EvalItem> BenchItems(const std::string& name) {
  std::vector<EvalItem> items;
  for (const auto& b : BenchPrograms()) {
    if (!name.empty() && b.name != name) continue;
    SourceUnit unit = BenchUnit(b);
    for (int n : b.inputs) items.push_back({unit, {Value(n)}});
  }
  if (!name.empty() && items.empty()) FindBench(name);  // throws for unknown names
  return items;
}

std::vector<EvalItem> CorpusItems(const std::vector<DatasetInput>& corpus,
                                  const DatasetConfig& config) {
  std::vector<EvalItem> items;
  for (const auto& input : corpus) {
    SourceUnit unit = config.anonymize ? Anonymize(input.unit) : input.unit;
    if (!input.extra_inputs.empty()) {
      for (const auto& args : input.extra_inputs) items.push_back({unit, args});
      continue;
    }
    try {
      for (auto& c : SelectInputs(unit, input, config)) items.push_back({unit, std::move(c.args)});
    } catch (const EmptyInput&) {
      // Every sampled input failed; the unit contributes no episodes.
    }
  }
  return items;
}

EvalRun Evaluate(const std::vector<EvalItem>& items, const EvalConfig& config) {
  const bool exclusive = config.predictor.rfind("external:", 0) == 0;
  const std::size_t workers =
      exclusive ? 1
                : std::max<std::size_t>(
                      1, std::min(static_cast<std::size_t>(std::max(1, config.jobs)), items.size()));

  // One slot per item keeps aggregation independent of scheduling.
  std::vector<std::optional<EpisodeResult>> results(items.size());
  std::vector<std::optional<SkippedItem>> skipped(items.size());
  std::atomic<std::size_t> next{0};
  std::unique_ptr<Predictor> shared;
  if (exclusive) shared = MakePredictor(config.predictor, config.noise, config.timeout_seconds);

  auto work = [&] {
    std::unique_ptr<Predictor> own;
    Predictor* p = shared.get();
    if (!p) {
      own = MakePredictor(config.predictor, config.noise, config.timeout_seconds);
      p = own.get();
    }
    for (std::size_t i; (i = next.fetch_add(1)) < items.size();) {
      const EvalItem& item = items[i];
      try {
        EpisodeContext ctx = MakeContext(item.unit, item.args, config.granularity, config.fuel);
        results[i] = RunEpisode(config.strategy, *p, ctx, config.episode);
      } catch (const UnsupportedOutcome& e) {
        skipped[i] = SkippedItem{item.unit.unit_id, Repr(Value::MakeTuple(item.args)), e.what()};
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EvalRun run;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (results[i]) {
      run.channel_failure = run.channel_failure || results[i]->infrastructure_failure;
      run.episodes.push_back(std::move(*results[i]));
    }
    if (skipped[i]) run.skipped.push_back(std::move(*skipped[i]));
  }
  run.report = ScoreSuite(run.episodes);
  return run;
}

std::string EvalConfigJson(const EvalConfig& config) {
  nlohmann::ordered_json j;
  j["predictor"] = config.predictor;
  j["strategy"] = std::string(StrategyName(config.strategy));
  j["granularity"] = std::string(GranularityName(config.granularity));
  j["n_max"] = config.episode.n_max;
  j["max_predictions"] = config.episode.max_predictions;
  j["fuel"] = config.fuel;
  if (config.predictor == "noisy") {
    const NoiseConfig& n = config.noise;
    j["noise"] = {{"p_control_flow", n.p_control_flow},
                  {"p_vars", n.p_vars},
                  {"p_iterator", n.p_iterator},
                  {"p_stack", n.p_stack},
                  {"nll_model", std::string(NllModelName(n.model))},
                  {"slope", n.slope},
                  {"penalty", n.penalty},
                  {"noise", n.noise},
                  {"exact_up_to", n.exact_up_to},
                  {"base_nll", n.base_nll},
                  {"beam_width", n.beam_width}};
  }
  j["seed"] = config.noise.seed;
  return j.dump();
}

std::string EvalReportJson(const EvalRun& run, const EvalConfig& config) {
  auto j = nlohmann::ordered_json::parse(MetricsToJson(run.report, run.episodes,
                                                       EvalConfigJson(config)));
  j["skipped"] = nlohmann::ordered_json::array();
  for (const auto& s : run.skipped) {
    j["skipped"].push_back({{"unit_id", s.unit_id}, {"args_repr", s.args_repr}, {"reason", s.reason}});
  }
  return j.dump(2) + "\n";
}

}  // namespace exectrace
