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

// Whole-trace text targets.
//
//   line 2: steps = 0
//   state: {n: 4, steps: 0}
//   ...
//   return: 2
//
// The compact form prints only changed bindings (`state: {}` when nothing
// changed). With step-in, nested frames are indented two spaces per depth
// and bracketed by `call g(3)` and `-> 7`.
#pragma once

#include <stdexcept>
#include <string>

#include "exectrace/tracer.hpp"

namespace exectrace {

class UnsupportedOutcome : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TextPair {
  std::string prompt;
  std::string target;
};

// `<source>### call\nf(4)\n`.
std::string CallPrompt(const Trace& trace, const std::string& source);

TextPair RenderScratchpad(const Trace& trace, const std::string& source);
TextPair RenderCompact(const Trace& trace, const std::string& source, bool step_into);
// Prompt as above, target `return: <repr>`.
TextPair RenderDirect(const Trace& trace, const std::string& source);

// Rebuilds the full scratchpad target from a compact (non step-in) pair by
// applying each diff to the running locals. Locals are ordered by the main
// function's binding order, which is recovered from the prompt's source.
std::string CompactToFull(const std::string& prompt, const std::string& compact_target);

}  // namespace exectrace
