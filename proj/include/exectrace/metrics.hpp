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

// Suite-level accuracy metrics.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "exectrace/strategies.hpp"

namespace exectrace {

class EmptySuite : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FacetAccuracy {
  std::int64_t count = 0;
  double control_flow = 0;
  double vars = 0;
  double iterator = 0;
  std::optional<double> stack;  // only when some prediction had a stack
  double full = 0;
  double mean_nll = 0;
};

struct MetricsReport {
  std::int64_t episodes = 0;
  std::int64_t outcome_correct = 0;
  std::int64_t process_correct = 0;
  std::int64_t infrastructure_failures = 0;
  double outcome_accuracy = 0;
  double process_accuracy = 0;
  // Mean steps_used over outcome-correct episodes; nullopt when none.
  std::optional<double> avg_steps;
  FacetAccuracy facets;               // pooled over every scored prediction
  std::map<int, FacetAccuracy> per_n;  // keyed by step size
};

MetricsReport ScoreSuite(const std::vector<EpisodeResult>& episodes);

// Report plus config echo; `config` must be a JSON object text.
std::string MetricsToJson(const MetricsReport& report, const std::vector<EpisodeResult>& episodes,
                          const std::string& config_json);

// `k/N (avg)`, e.g. `4/9 (98.6)`; avg is `-` when nothing was correct.
std::string SummaryCell(const MetricsReport& report);
std::string FormatSteps(double avg);

}  // namespace exectrace
