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

// Episode strategies that chain predictions into a full execution.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exectrace/predictor.hpp"

namespace exectrace {

enum class Strategy { kGreedy, kArgmin, kDijkstra, kReverse };
std::string_view StrategyName(Strategy s);
Strategy ParseStrategy(std::string_view name);

struct EpisodeConfig {
  int n_max = 10;
  // Maximum number of accepted predictions.
  std::int64_t max_predictions = 100'000;
};

struct StepRecord {
  int n = 1;
  FacetResult facets;
  double nll = 0;
  bool parse_failed = false;
};

struct EpisodeResult {
  std::string unit_id;
  std::string args_repr;
  Strategy strategy = Strategy::kGreedy;
  bool outcome_correct = false;
  bool process_correct = false;
  std::int64_t steps_used = 0;
  std::vector<StepRecord> steps;
  std::optional<std::string> predicted_return;
  std::string truth_return;
  // Empty on a normal finish; otherwise why the episode stopped early.
  std::string reason;
  bool infrastructure_failure = false;
};

// Next-step prediction from the initial state until a terminal state.
EpisodeResult RunGreedy(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config);
// At each state, accepts the lowest-nll candidate over n = 1..n_max (ties
// prefer the smaller n).
EpisodeResult RunArgminNll(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config);
// Shortest path over true states with an edge t -> min(t + n, L) whenever the
// top candidate matches the true state on every facet.
EpisodeResult RunDijkstra(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config);
// Walks back from the terminal state to the initial one.
EpisodeResult RunReverse(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config);

EpisodeResult RunEpisode(Strategy s, Predictor& p, const EpisodeContext& ctx,
                         const EpisodeConfig& config);

}  // namespace exectrace
