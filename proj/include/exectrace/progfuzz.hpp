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

// Random MiniLang functions for property tests and synthetic corpora.
//
// Generated functions terminate (loops run over bounded ranges, short
// parameters or fresh counters), never rebind or mutate a variable that a
// live for-loop header reads, never alias containers, and only read
// variables that are bound on every path. Arithmetic is kept in range with
// small moduli. The header rule keeps rendered states self-contained: a
// loop's iterable can be recomputed from the current locals.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exectrace/grammar.hpp"
#include "exectrace/source_unit.hpp"

namespace exectrace {

struct ProgramFuzzOptions {
  int max_statements = 7;  // per block
  int max_nesting = 3;
  // Guarantees at least one for-loop nested inside another.
  bool force_nested_for = false;
  // Emits a helper function called from the main one.
  bool allow_helper = true;
};

struct FuzzedProgram {
  SourceUnit unit;
  UnitGrammar grammar;
};

FuzzedProgram GenerateProgram(std::uint64_t seed, const ProgramFuzzOptions& options = {});

}  // namespace exectrace
