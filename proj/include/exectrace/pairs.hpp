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

// Prompt/target pairs for training and evaluation.
#pragma once

#include <string>
#include <vector>

#include "exectrace/scratchpad.hpp"

namespace exectrace {

enum class Direction { kForward, kReverse };
std::string_view DirectionName(Direction d);

struct PredictionPair {
  std::string prompt;
  std::string target;
  int n = 1;  // -1 for reverse pairs
  Granularity granularity = Granularity::kLine;
  Direction direction = Direction::kForward;
  std::string unit_id;
  std::string args_repr;
};

// Listing of the main function, shown in instruction-mode prompts.
std::string MainDisassembly(const Module& module);

// `<source>[### bytecode\n<listing>]### state\n<fields>steps: n\n`. The
// listing is included only when nonempty.
std::string StatePrompt(const SelfContainedState& state, int n, const std::string& disassembly);

// Pairs (state_t, state_{t+n}) for 1 <= n <= n_max and t + n <= L.
std::vector<PredictionPair> EmitDynamicPairs(const Trace& trace, const std::string& source,
                                             int n_max, const std::string& disassembly = "");
// Pairs (state_t, state_{t-1}) for t >= 1.
std::vector<PredictionPair> EmitReversePairs(const Trace& trace, const std::string& source,
                                             const std::string& disassembly = "");
// Whole-trace representations packed as a single pair.
PredictionPair WholeTracePair(const Trace& trace, const TextPair& text);

std::string ArgsRepr(const Trace& trace);
std::string PairToJson(const PredictionPair& pair);

}  // namespace exectrace
