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


// Suite runner: episodes over a set of (unit, args) items, scored into a
// report with the configuration echoed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exectrace/dataset.hpp"
#include "exectrace/metrics.hpp"

namespace exectrace {

struct EvalItem {
  SourceUnit unit;
  std::vector<Value> args;
};

struct EvalConfig {
  std::string predictor = "oracle";  // see MakePredictor
  Strategy strategy = Strategy::kGreedy;
  Granularity granularity = Granularity::kLine;
  EpisodeConfig episode;
  NoiseConfig noise;
  std::int64_t fuel = 1'000'000;
  double timeout_seconds = 30.0;
  // Worker threads; external predictors always run on one.
  int jobs = 1;
};

struct SkippedItem {
  std::string unit_id;
  std::string args_repr;
  std::string reason;
};

struct EvalRun {
  std::vector<EpisodeResult> episodes;  // in item order
  std::vector<SkippedItem> skipped;     // ground truth does not return
  MetricsReport report;
  bool channel_failure = false;
};

// Anonymized bench units with their bundled inputs; `name` empty for all.
std::vector<EvalItem> BenchItems(const std::string& name = "");

// `.inputs` rows when a unit has them, otherwise coverage-selected fuzzed
// inputs drawn with the dataset settings.
std::vector<EvalItem> CorpusItems(const std::vector<DatasetInput>& corpus,
                                  const DatasetConfig& config);

// Throws EmptySuite when no item yields an episode.
EvalRun Evaluate(const std::vector<EvalItem>& items, const EvalConfig& config);

std::string EvalConfigJson(const EvalConfig& config);
// Full report: metrics, config echo and skipped items.
std::string EvalReportJson(const EvalRun& run, const EvalConfig& config);

}  // namespace exectrace
