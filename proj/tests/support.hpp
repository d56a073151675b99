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

// Shared fixtures for the test binaries.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "exectrace/bench.hpp"
#include "exectrace/progfuzz.hpp"
#include "exectrace/random.hpp"
#include "exectrace/tracer.hpp"

namespace exectrace::testing {

inline SourceUnit Bench(const std::string& name) { return BenchUnit(FindBench(name)); }

inline Trace RunBench(const std::string& name, int n, Granularity g = Granularity::kLine) {
  ExecOptions o;
  o.granularity = g;
  return Execute(Bench(name), {Value(n)}, o);
}

inline Trace RunText(const std::string& text, std::vector<Value> args,
                     Granularity g = Granularity::kLine, bool step_into = true) {
  ExecOptions o;
  o.granularity = g;
  o.step_into = step_into;
  return Execute(MakeUnit("t", text), args, o);
}

// Fuzzed program plus sampled arguments whose run returns.
struct FuzzCase {
  SourceUnit unit;
  std::vector<Value> args;
};

inline FuzzCase ReturningCase(std::uint64_t seed, const ProgramFuzzOptions& options = {}) {
  for (std::uint64_t k = 0;; ++k) {
    FuzzedProgram p = GenerateProgram(seed * 7919 + k, options);
    Rng rng(seed ^ (k << 32));
    std::vector<Value> args = SampleArgs(p.grammar, rng);
    ExecOptions o;
    o.fuel = 200'000;
    if (Execute(p.unit, args, o).outcome.kind == OutcomeKind::kReturn) return {p.unit, args};
  }
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("exectrace_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace exectrace::testing
