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

// Self-contained program states and their text form.
//
//   line: 5                      (offset: N at instruction granularity)
//   locals: {n: 4, steps: 1}
//   iterators: {__for_iterator_1__=2}
//   stack: [4, __for_iterator_1__]   (instruction granularity only)
//   return: 2                    (terminal states only)
//
// The full grammar is in docs/state_grammar.md.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exectrace/outcome.hpp"

namespace exectrace {

inline constexpr std::string_view kStateMarker = "### state";
inline constexpr std::string_view kBytecodeMarker = "### bytecode";
inline constexpr std::string_view kCallMarker = "### call";

struct SelfContainedState {
  std::string source;
  Granularity granularity = Granularity::kLine;
  // Next line to run (line mode) or next instruction offset. Terminal
  // states keep the location of the return.
  int location = 0;
  std::vector<std::pair<std::string, std::string>> locals;  // name -> repr
  std::vector<std::pair<int, std::int64_t>> iterators;       // slot -> count
  std::vector<std::string> stack;                            // instruction mode
  std::optional<std::string> return_repr;
  int step = 0;

  bool terminal() const { return return_repr.has_value(); }
};

struct FacetResult {
  bool control_flow = false;
  bool vars = false;
  bool iterator = false;
  std::optional<bool> stack;  // not applicable at line granularity
  bool full = false;

  static FacetResult AllWrong(Granularity g);
};

class StateParseError : public std::runtime_error {
 public:
  StateParseError(std::size_t position, const std::string& reason)
      : std::runtime_error("state parse error at " + std::to_string(position) + ": " + reason),
        position_(position),
        reason_(reason) {}
  std::size_t position() const { return position_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

std::string IteratorName(int slot);

// Field block only, newline terminated.
std::string RenderState(const SelfContainedState& s);
std::string RenderLocals(const std::vector<std::pair<std::string, std::string>>& locals);

// Accepts a bare field block or a full prompt (source, optional bytecode
// listing, `### state`, fields, optional `steps:` line).
SelfContainedState ParseState(std::string_view text);

FacetResult CompareStates(const SelfContainedState& predicted, const SelfContainedState& truth);

// Splits `{a: 1, b: [2, 3]}` style text at top-level commas. Throws
// StateParseError on unbalanced brackets or quotes; `base` offsets positions.
std::vector<std::string> SplitTopLevel(std::string_view inner, std::size_t base = 0);

}  // namespace exectrace
