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

#include "exectrace/bench.hpp"

#include <stdexcept>

namespace exectrace {

namespace {

constexpr const char* kCollatz = R"(def collatz(n):
    steps = 0
    while n > 1:
        steps += 1
        if n % 2 == 0:
            n = n // 2
        else:
            n = 3 * n + 1
    return steps
)";

constexpr const char* kBinaryCounter = R"(def binary_counter(n):
    a = False
    b = False
    c = False
    d = False
    for i in range(n):
        if not d:
            d = True
        elif not c:
            c = True
            d = False
        elif not b:
            b = True
            c = False
            d = False
        else:
            a = not a
            b = False
            c = False
            d = False
    return a, b, c, d
)";

constexpr const char* kFibonacci = R"(def fibonacci(n):
    if n == 0:
        return 0
    elif n == 1:
        return 1
    prev_prev = 0
    prev = 1
    for i in range(2, n + 1):
        curr = prev_prev + prev
        prev_prev = prev
        prev = curr
    return prev
)";

}  // namespace

const std::vector<BenchProgram>& BenchPrograms() {
  static const std::vector<BenchProgram> programs = {
      {"collatz", kCollatz, {4, 5, 8, 18, 103, 457, 1127, 2620, 3038}},
      {"binary_counter", kBinaryCounter, {4, 5, 8, 18, 103, 457, 1127, 2620, 3038}},
      {"fibonacci", kFibonacci, {4, 5, 8, 18, 103}},
  };
  return programs;
}

const BenchProgram& FindBench(const std::string& name) {
  for (const auto& p : BenchPrograms()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown benchmark '" + name + "'");
}

SourceUnit BenchUnit(const BenchProgram& program) {
  return Anonymize(MakeUnit(program.name, program.source));
}

}  // namespace exectrace
