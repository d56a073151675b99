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
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "exectrace/value.hpp"

namespace exectrace {

// Unit of one trace step.
enum class Granularity { kLine, kInstruction };
// "line" / "instruction".
std::string_view GranularityName(Granularity g);
Granularity ParseGranularity(std::string_view name);

enum class OutcomeKind { kReturn, kError, kFuel };

// How an execution ended. `value` is set for kReturn, error_kind/message/line
// for kError, fuel for kFuel.
struct Outcome {
  OutcomeKind kind = OutcomeKind::kReturn;
  Value value;
  std::string error_kind;
  std::string message;
  int line = 0;
  std::int64_t fuel = 0;

  static Outcome Return(Value v) {
    Outcome o;
    o.value = std::move(v);
    return o;
  }
  static Outcome Error(std::string kind, std::string message, int line) {
    Outcome o;
    o.kind = OutcomeKind::kError;
    o.error_kind = std::move(kind);
    o.message = std::move(message);
    o.line = line;
    return o;
  }
  static Outcome Fuel(std::int64_t fuel) {
    Outcome o;
    o.kind = OutcomeKind::kFuel;
    o.fuel = fuel;
    return o;
  }
};

// Wrong number of arguments for the entry function.
class ArityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Frames deeper than this raise RecursionError.
inline constexpr int kMaxCallDepth = 500;

// "return 2", "error ZeroDivisionError at line 1: ...", "fuel 1000".
std::string Describe(const Outcome& o);

// Same kind and same return repr / error kind. Used by differential checks.
bool SameOutcome(const Outcome& a, const Outcome& b);

}  // namespace exectrace
