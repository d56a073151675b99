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

// Bytecode VM with a trace hook.
//
// A line event fires when a frame reaches the first instruction of a source
// line, or arrives anywhere through a backward jump (loop headers re-fire on
// every iteration, including the final failing check). Snapshots attached
// to call/line/opcode events describe the frame *before* the event's code
// runs; a return event carries the state after the return.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "exectrace/bytecode.hpp"
#include "exectrace/outcome.hpp"
#include "exectrace/source_unit.hpp"
#include "exectrace/state.hpp"

namespace exectrace {

enum class EventKind { kCall, kLine, kOpcode, kReturn };
std::string_view EventKindName(EventKind kind);

struct IteratorState {
  int slot = 0;  // 1-based, outermost live loop first
  std::int64_t count = 0;
  bool exhausted = false;
  std::string source_kind;
};

struct TraceEvent {
  EventKind kind = EventKind::kLine;
  int index = 0;
  int depth = 0;
  std::string func;
  int line = 0;
  int offset = -1;
  std::vector<std::pair<std::string, Value>> locals;  // deep copies
  std::vector<IteratorState> iterators;
  std::optional<std::vector<std::string>> stack;  // opcode events, reprs
  std::optional<std::string> instr;              // opcode events
  std::optional<Value> retval;                   // return events
};

struct Trace {
  std::string unit_id;
  std::vector<Value> args;
  Granularity granularity = Granularity::kLine;
  std::string func;
  // MiniLang has no module state; globals are the helper function names.
  std::vector<std::string> globals;
  std::vector<TraceEvent> events;
  Outcome outcome;
};

struct ExecOptions {
  // Maximum number of events. Untraced frames spend one unit per line.
  std::int64_t fuel = 1'000'000;
  Granularity granularity = Granularity::kLine;
  bool step_into = true;
};

Trace Execute(const Module& module, const std::string& unit_id, const std::vector<Value>& args,
              const ExecOptions& options = {});
Trace Execute(const SourceUnit& unit, const std::vector<Value>& args,
              const ExecOptions& options = {});

// Line events across every traced frame.
std::int64_t LineStepCount(const Trace& trace);

// Lines owning at least one executed line event.
std::vector<int> LineCoverage(const Trace& trace);

// State sequence of the outermost frame: the state before each step event
// (line or opcode, by granularity) followed by the terminal state when the
// frame returned. A run with L steps yields L + 1 states.
std::vector<SelfContainedState> StateSequence(const Trace& trace, const std::string& source);

// State immediately after `event_index`: a call maps to the first state of
// the frame, a line/opcode event to the state once it has run, a return to
// the terminal state. Throws std::out_of_range when no such state exists.
SelfContainedState StateAt(const Trace& trace, std::size_t event_index,
                           const std::string& source);

class ResumeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResumeResult {
  // states[0] is the rebuilt start state.
  std::vector<SelfContainedState> states;
  Outcome outcome;
  // True when the run stopped after max_steps rather than finishing.
  bool stopped = false;
};

// Continues the module's main function from a rendered state with no access
// to its history: locals are rebuilt from their reprs and every live loop
// iterator by re-evaluating its iterable and advancing it. Throws
// ResumeError when the state does not describe a reachable frame layout.
ResumeResult Resume(const Module& module, const SelfContainedState& start,
                    std::int64_t max_steps, const ExecOptions& options = {});

// Parses a repr as produced by the tracer, including `<function g>`.
Value ParseReprValue(std::string_view text);

// Rows of the trace JSONL export, one JSON object per line; the last row is
// the outcome.
std::string TraceToJsonl(const Trace& trace);

}  // namespace exectrace
