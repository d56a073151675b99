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

// State predictors: the exact oracle, a noisy oracle with planted errors and
// a bridge to external models.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "exectrace/pairs.hpp"
#include "exectrace/random.hpp"

namespace exectrace {

class Channel;

// Ground truth for one (unit, args) episode.
struct EpisodeContext {
  std::string unit_id;
  std::vector<Value> args;
  std::string args_repr;
  Granularity granularity = Granularity::kLine;
  Module module;
  std::string source;
  std::string disassembly;  // instruction granularity only
  ExecOptions exec;
  Trace trace;
  std::vector<SelfContainedState> states;  // L + 1 states, the last terminal
  std::vector<std::string> rendered;
  std::unordered_map<std::string, std::size_t> index;  // rendered -> first position
  std::vector<int> locations;  // lines or offsets a state may point at

  std::size_t L() const { return states.size() - 1; }
  // Position of `state` on the true trajectory, if it is there.
  std::optional<std::size_t> Find(const SelfContainedState& state) const;
};

// Throws UnsupportedOutcome unless the run returns within `fuel`.
EpisodeContext MakeContext(const SourceUnit& unit, const std::vector<Value>& args,
                           Granularity granularity, std::int64_t fuel = 1'000'000);

struct Candidate {
  SelfContainedState state;
  double nll = 0;
  std::string text;           // raw text for external candidates
  bool parse_failed = false;  // always scored wrong
  int corrupted = 0;          // planted facet errors (noisy predictor)
};

struct PredictorQuery {
  SelfContainedState state;
  int n = 1;
  Direction direction = Direction::kForward;
};

class NoPredecessor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Infrastructure failure talking to an external predictor.
class ChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  // At least one candidate, sorted by ascending nll.
  virtual std::vector<Candidate> Propose(const EpisodeContext& ctx, const PredictorQuery& q) = 0;
  virtual std::string Name() const = 0;
};

class OraclePredictor : public Predictor {
 public:
  std::vector<Candidate> Propose(const EpisodeContext& ctx, const PredictorQuery& q) override;
  std::string Name() const override { return "oracle"; }

  // The true successor of an arbitrary state; off-trace states are continued
  // with Resume. Failed continuations end in a terminal `<error Kind>` state.
  static SelfContainedState Successor(const EpisodeContext& ctx, const SelfContainedState& s,
                                      int n);
};

enum class NllModel { kCalibrated, kAnticalibrated, kFlat };
std::string_view NllModelName(NllModel m);
NllModel ParseNllModel(std::string_view name);

struct NoiseConfig {
  double p_control_flow = 0;
  double p_vars = 0;
  double p_iterator = 0;
  double p_stack = 0;
  NllModel model = NllModel::kCalibrated;
  double slope = 0.1;    // base nll per step ahead
  double penalty = 1.0;  // per corrupted facet
  double noise = 0.05;   // uniform [0, noise)
  // Queries with n <= exact_up_to are never corrupted.
  int exact_up_to = 0;
  // When nonempty, base nll for step n is base_nll[n - 1] instead of slope * n.
  std::vector<double> base_nll;
  int beam_width = 1;
  std::uint64_t seed = kDefaultSeed;

  static NoiseConfig Uniform(double p, NllModel model, std::uint64_t seed);
};

// Corrupts oracle answers facet by facet. Each query draws from its own
// generator seeded by (seed, query), so answers do not depend on query order.
class NoisyPredictor : public Predictor {
 public:
  explicit NoisyPredictor(NoiseConfig config) : config_(std::move(config)) {}
  std::vector<Candidate> Propose(const EpisodeContext& ctx, const PredictorQuery& q) override;
  std::string Name() const override { return "noisy"; }
  const NoiseConfig& config() const { return config_; }

 private:
  Candidate Corrupt(const EpisodeContext& ctx, const SelfContainedState& truth, int n,
                    Rng& rng) const;

  NoiseConfig config_;
  OraclePredictor oracle_;
};

// Speaks the JSON-lines protocol over a channel:
//   -> {"id": 7, "prompt": "...", "n": 3, "direction": "forward"}
//   <- {"id": 7, "candidates": [{"text": "line: 4\n...", "nll": 0.3}]}
class ExternalPredictor : public Predictor {
 public:
  explicit ExternalPredictor(std::unique_ptr<Channel> channel, int beam_width = 1);
  ~ExternalPredictor() override;
  std::vector<Candidate> Propose(const EpisodeContext& ctx, const PredictorQuery& q) override;
  std::string Name() const override { return "external"; }

 private:
  std::unique_ptr<Channel> channel_;
  int beam_width_;
  std::int64_t next_id_ = 0;
};

// "oracle", "noisy" or "external:<address>".
std::unique_ptr<Predictor> MakePredictor(const std::string& spec, const NoiseConfig& noise,
                                         double timeout_seconds = 30.0);

}  // namespace exectrace
