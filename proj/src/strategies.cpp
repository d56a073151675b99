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

#include "exectrace/strategies.hpp"

#include <algorithm>
#include <deque>

namespace exectrace {

namespace {

EpisodeResult Start(const EpisodeContext& ctx, Strategy s) {
  EpisodeResult r;
  r.unit_id = ctx.unit_id;
  r.args_repr = ctx.args_repr;
  r.strategy = s;
  r.truth_return = *ctx.states.back().return_repr;
  return r;
}

StepRecord Score(const Candidate& c, const SelfContainedState& truth, int n) {
  StepRecord rec;
  rec.n = n;
  rec.nll = c.nll;
  rec.parse_failed = c.parse_failed;
  rec.facets = c.parse_failed ? FacetResult::AllWrong(truth.granularity)
                              : CompareStates(c.state, truth);
  return rec;
}

bool AllFull(const std::vector<StepRecord>& steps) {
  return std::all_of(steps.begin(), steps.end(), [](const StepRecord& s) { return s.facets.full; });
}

void Finish(EpisodeResult& r) {
  r.steps_used = static_cast<std::int64_t>(r.steps.size());
  r.outcome_correct = r.reason.empty() && r.predicted_return == r.truth_return;
  r.process_correct = r.outcome_correct && AllFull(r.steps);
}

// Shared loop of the forward strategies: `choose` picks the accepted
// candidate and its step size from the current state.
template <typename Choose>
EpisodeResult Walk(Strategy s, const EpisodeContext& ctx, const EpisodeConfig& config,
                   Choose choose) {
  EpisodeResult r = Start(ctx, s);
  SelfContainedState state = ctx.states.front();
  std::size_t pos = 0;
  try {
    while (true) {
      if (static_cast<std::int64_t>(r.steps.size()) >= config.max_predictions) {
        r.reason = "prediction budget exhausted";
        break;
      }
      auto [cand, n] = choose(state);
      pos = std::min(pos + static_cast<std::size_t>(n), ctx.L());
      r.steps.push_back(Score(cand, ctx.states[pos], n));
      if (cand.parse_failed) {
        r.reason = "unparseable prediction";
        break;
      }
      state = std::move(cand.state);
      if (state.terminal()) {
        r.predicted_return = state.return_repr;
        break;
      }
    }
  } catch (const ChannelError& e) {
    r.reason = std::string("channel failure: ") + e.what();
    r.infrastructure_failure = true;
  }
  Finish(r);
  return r;
}

Candidate Top(Predictor& p, const EpisodeContext& ctx, const SelfContainedState& state, int n,
              Direction d = Direction::kForward) {
  std::vector<Candidate> c = p.Propose(ctx, {state, n, d});
  if (c.empty()) throw ChannelError("predictor returned no candidates");
  return std::move(c.front());
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kGreedy:
      return "greedy";
    case Strategy::kArgmin:
      return "argmin";
    case Strategy::kDijkstra:
      return "dijkstra";
    case Strategy::kReverse:
      return "reverse";
  }
  return "";
}

Strategy ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kGreedy, Strategy::kArgmin, Strategy::kDijkstra,
                     Strategy::kReverse}) {
    if (StrategyName(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

EpisodeResult RunGreedy(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config) {
  return Walk(Strategy::kGreedy, ctx, config, [&](const SelfContainedState& s) {
    return std::pair<Candidate, int>(Top(p, ctx, s, 1), 1);
  });
}

EpisodeResult RunArgminNll(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config) {
  if (config.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  return Walk(Strategy::kArgmin, ctx, config, [&](const SelfContainedState& s) {
    std::pair<Candidate, int> best(Top(p, ctx, s, 1), 1);
    for (int n = 2; n <= config.n_max; ++n) {
      Candidate c = Top(p, ctx, s, n);
      if (c.nll < best.first.nll) best = {std::move(c), n};
    }
    return best;
  });
}

EpisodeResult RunDijkstra(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config) {
  if (config.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  EpisodeResult r = Start(ctx, Strategy::kDijkstra);
  const std::size_t L = ctx.L();
  // Unit edge weights make the search a breadth-first one.
  std::vector<long> parent(L + 1, -1);
  std::vector<StepRecord> via(L + 1);
  std::vector<bool> seen(L + 1, false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::int64_t queries = 0;
  try {
    while (!queue.empty() && !seen[L]) {
      std::size_t t = queue.front();
      queue.pop_front();
      for (int n = 1; n <= config.n_max; ++n) {
        std::size_t to = std::min(t + static_cast<std::size_t>(n), L);
        if (seen[to]) continue;
        if (queries++ >= config.max_predictions) throw std::length_error("budget");
        StepRecord rec = Score(Top(p, ctx, ctx.states[t], n), ctx.states[to], n);
        if (!rec.facets.full) continue;
        seen[to] = true;
        parent[to] = static_cast<long>(t);
        via[to] = rec;
        queue.push_back(to);
        if (to == L) break;
      }
    }
  } catch (const ChannelError& e) {
    r.reason = std::string("channel failure: ") + e.what();
    r.infrastructure_failure = true;
  } catch (const std::length_error&) {
    r.reason = "prediction budget exhausted";
  }
  if (r.reason.empty()) {
    if (seen[L] && L > 0) {
      for (std::size_t v = L; v != 0; v = static_cast<std::size_t>(parent[v])) {
        r.steps.push_back(via[v]);
      }
      std::reverse(r.steps.begin(), r.steps.end());
      r.predicted_return = ctx.states[L].return_repr;
    } else if (L == 0) {
      r.predicted_return = ctx.states[0].return_repr;
    } else {
      r.reason = "no verified path to the return state";
    }
  }
  Finish(r);
  return r;
}

EpisodeResult RunReverse(Predictor& p, const EpisodeContext& ctx, const EpisodeConfig& config) {
  EpisodeResult r = Start(ctx, Strategy::kReverse);
  SelfContainedState state = ctx.states.back();
  std::size_t pos = ctx.L();
  bool reached = pos == 0;
  try {
    while (pos > 0) {
      if (static_cast<std::int64_t>(r.steps.size()) >= config.max_predictions) {
        r.reason = "prediction budget exhausted";
        break;
      }
      Candidate c = Top(p, ctx, state, 1, Direction::kReverse);
      --pos;
      r.steps.push_back(Score(c, ctx.states[pos], -1));
      if (c.parse_failed) {
        r.reason = "unparseable prediction";
        break;
      }
      state = std::move(c.state);
      reached = pos == 0;
    }
  } catch (const ChannelError& e) {
    r.reason = std::string("channel failure: ") + e.what();
    r.infrastructure_failure = true;
  } catch (const NoPredecessor& e) {
    r.reason = std::string("no predecessor: ") + e.what();
  }
  // The reverse outcome is recovering the initial state, arguments included.
  r.steps_used = static_cast<std::int64_t>(r.steps.size());
  r.outcome_correct =
      r.reason.empty() && reached && CompareStates(state, ctx.states.front()).full;
  r.process_correct = r.outcome_correct && AllFull(r.steps);
  if (r.outcome_correct) r.predicted_return = r.truth_return;
  return r;
}

EpisodeResult RunEpisode(Strategy s, Predictor& p, const EpisodeContext& ctx,
                         const EpisodeConfig& config) {
  switch (s) {
    case Strategy::kGreedy:
      return RunGreedy(p, ctx, config);
    case Strategy::kArgmin:
      return RunArgminNll(p, ctx, config);
    case Strategy::kDijkstra:
      return RunDijkstra(p, ctx, config);
    case Strategy::kReverse:
      return RunReverse(p, ctx, config);
  }
  return RunGreedy(p, ctx, config);
}

}  // namespace exectrace
