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

// Bundled long-execution benchmarks.
#pragma once

#include <string>
#include <vector>

#include "exectrace/source_unit.hpp"

namespace exectrace {

struct BenchProgram {
  std::string name;
  std::string source;  // original function name
  std::vector<int> inputs;
};

// collatz, binary_counter, fibonacci.
const std::vector<BenchProgram>& BenchPrograms();
// Throws std::invalid_argument for unknown names.
const BenchProgram& FindBench(const std::string& name);
// Unit with the function renamed to `f`, ready for rendering.
SourceUnit BenchUnit(const BenchProgram& program);

}  // namespace exectrace
