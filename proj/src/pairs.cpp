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

#include "exectrace/pairs.hpp"

#include <json.hpp>

namespace exectrace {

namespace {

std::vector<SelfContainedState> ReturnStates(const Trace& trace, const std::string& source) {
  if (trace.outcome.kind != OutcomeKind::kReturn) {
    throw UnsupportedOutcome("trace ended in " + Describe(trace.outcome));
  }
  return StateSequence(trace, source);
}

PredictionPair MakePair(const Trace& trace, std::string prompt, std::string target, int n,
                        Direction d) {
  PredictionPair p;
  p.prompt = std::move(prompt);
  p.target = std::move(target);
  p.n = n;
  p.granularity = trace.granularity;
  p.direction = d;
  p.unit_id = trace.unit_id;
  p.args_repr = ArgsRepr(trace);
  return p;
}

}  // namespace

std::string_view DirectionName(Direction d) {
  return d == Direction::kForward ? "forward" : "reverse";
}

std::string MainDisassembly(const Module& module) {
  return Disassemble(module.main_code(), module.source_lines);
}

std::string StatePrompt(const SelfContainedState& state, int n, const std::string& disassembly) {
  std::string out = state.source;
  if (!out.empty() && out.back() != '\n') out += '\n';
  if (!disassembly.empty()) {
    out += std::string(kBytecodeMarker) + "\n" + disassembly;
    if (out.back() != '\n') out += '\n';
  }
  out += std::string(kStateMarker) + "\n" + RenderState(state);
  out += "steps: " + std::to_string(n) + "\n";
  return out;
}

std::vector<PredictionPair> EmitDynamicPairs(const Trace& trace, const std::string& source,
                                             int n_max, const std::string& disassembly) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  std::vector<SelfContainedState> states = ReturnStates(trace, source);
  std::vector<std::string> rendered;
  for (const auto& s : states) rendered.push_back(RenderState(s));
  std::vector<PredictionPair> out;
  const std::size_t last = states.size() - 1;
  for (std::size_t t = 0; t < last; ++t) {
    for (int n = 1; n <= n_max && t + static_cast<std::size_t>(n) <= last; ++n) {
      out.push_back(MakePair(trace, StatePrompt(states[t], n, disassembly),
                             rendered[t + static_cast<std::size_t>(n)], n, Direction::kForward));
    }
  }
  return out;
}

std::vector<PredictionPair> EmitReversePairs(const Trace& trace, const std::string& source,
                                             const std::string& disassembly) {
  std::vector<SelfContainedState> states = ReturnStates(trace, source);
  std::vector<PredictionPair> out;
  for (std::size_t t = 1; t < states.size(); ++t) {
    out.push_back(MakePair(trace, StatePrompt(states[t], -1, disassembly),
                           RenderState(states[t - 1]), -1, Direction::kReverse));
  }
  return out;
}

PredictionPair WholeTracePair(const Trace& trace, const TextPair& text) {
  return MakePair(trace, text.prompt, text.target, 1, Direction::kForward);
}

std::string ArgsRepr(const Trace& trace) { return Repr(Value::MakeTuple(trace.args)); }

std::string PairToJson(const PredictionPair& pair) {
  nlohmann::ordered_json j;
  j["unit_id"] = pair.unit_id;
  j["args_repr"] = pair.args_repr;
  j["granularity"] = std::string(GranularityName(pair.granularity));
  j["direction"] = std::string(DirectionName(pair.direction));
  j["n"] = pair.n;
  j["prompt"] = pair.prompt;
  j["target"] = pair.target;
  return j.dump();
}

}  // namespace exectrace
