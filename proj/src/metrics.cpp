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

#include "exectrace/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace exectrace {

namespace {

struct Tally {
  std::int64_t count = 0, cf = 0, vars = 0, iter = 0, stack = 0, stack_count = 0, full = 0;
  double nll = 0;

  void Add(const StepRecord& s) {
    ++count;
    cf += s.facets.control_flow;
    vars += s.facets.vars;
    iter += s.facets.iterator;
    if (s.facets.stack) {
      ++stack_count;
      stack += *s.facets.stack;
    }
    full += s.facets.full;
    nll += s.nll;
  }

  FacetAccuracy Get() const {
    FacetAccuracy a;
    a.count = count;
    if (count == 0) return a;
    const double n = static_cast<double>(count);
    a.control_flow = static_cast<double>(cf) / n;
    a.vars = static_cast<double>(vars) / n;
    a.iterator = static_cast<double>(iter) / n;
    if (stack_count) a.stack = static_cast<double>(stack) / static_cast<double>(stack_count);
    a.full = static_cast<double>(full) / n;
    a.mean_nll = nll / n;
    return a;
  }
};

nlohmann::ordered_json FacetJson(const FacetAccuracy& a) {
  nlohmann::ordered_json j;
  j["count"] = a.count;
  j["control_flow"] = a.control_flow;
  j["vars"] = a.vars;
  j["iterator"] = a.iterator;
  j["stack"] = a.stack ? nlohmann::ordered_json(*a.stack) : nlohmann::ordered_json(nullptr);
  j["full"] = a.full;
  j["mean_nll"] = a.mean_nll;
  return j;
}

}  // namespace

MetricsReport ScoreSuite(const std::vector<EpisodeResult>& episodes) {
  if (episodes.empty()) throw EmptySuite("no episodes to score");
  MetricsReport r;
  Tally pooled;
  std::map<int, Tally> per_n;
  double steps = 0;
  for (const auto& e : episodes) {
    ++r.episodes;
    r.outcome_correct += e.outcome_correct;
    r.process_correct += e.process_correct;
    r.infrastructure_failures += e.infrastructure_failure;
    if (e.outcome_correct) steps += static_cast<double>(e.steps_used);
    for (const auto& s : e.steps) {
      pooled.Add(s);
      per_n[s.n].Add(s);
    }
  }
  r.outcome_accuracy = static_cast<double>(r.outcome_correct) / static_cast<double>(r.episodes);
  r.process_accuracy = static_cast<double>(r.process_correct) / static_cast<double>(r.episodes);
  if (r.outcome_correct) r.avg_steps = steps / static_cast<double>(r.outcome_correct);
  r.facets = pooled.Get();
  for (const auto& [n, t] : per_n) r.per_n[n] = t.Get();
  return r;
}

std::string MetricsToJson(const MetricsReport& report, const std::vector<EpisodeResult>& episodes,
                          const std::string& config_json) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["config"] = ordered_json::parse(config_json);
  j["episodes"] = report.episodes;
  j["outcome_accuracy"] = report.outcome_accuracy;
  j["process_accuracy"] = report.process_accuracy;
  j["avg_steps"] = report.avg_steps ? ordered_json(*report.avg_steps) : ordered_json(nullptr);
  j["infrastructure_failures"] = report.infrastructure_failures;
  j["facets"] = FacetJson(report.facets);
  ordered_json per_n = ordered_json::array();
  for (const auto& [n, a] : report.per_n) {
    ordered_json row = FacetJson(a);
    row["n"] = n;
    per_n.push_back(row);
  }
  j["per_n"] = per_n;
  ordered_json rows = ordered_json::array();
  for (const auto& e : episodes) {
    ordered_json row;
    row["unit_id"] = e.unit_id;
    row["args_repr"] = e.args_repr;
    row["strategy"] = std::string(StrategyName(e.strategy));
    row["outcome_correct"] = e.outcome_correct;
    row["process_correct"] = e.process_correct;
    row["steps_used"] = e.steps_used;
    row["predicted_return"] =
        e.predicted_return ? ordered_json(*e.predicted_return) : ordered_json(nullptr);
    row["truth_return"] = e.truth_return;
    row["reason"] = e.reason;
    rows.push_back(row);
  }
  j["results"] = rows;
  return j.dump(2);
}

std::string FormatSteps(double avg) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", std::round(avg * 10.0) / 10.0);
  std::string s = buf;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s;
}

std::string SummaryCell(const MetricsReport& report) {
  return std::to_string(report.outcome_correct) + "/" + std::to_string(report.episodes) + " (" +
         (report.avg_steps ? FormatSteps(*report.avg_steps) : std::string("-")) + ")";
}

}  // namespace exectrace
