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

// Tree-walking evaluator. It shares the value and operator semantics with
// the bytecode VM but none of the control-flow machinery, which makes it a
// useful differential oracle for the compiler.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exectrace/ast.hpp"
#include "exectrace/outcome.hpp"

namespace exectrace {

struct AstEvalOptions {
  // Statements plus loop-header evaluations.
  std::int64_t fuel = 1'000'000;
};

Outcome EvaluateAst(const Program& program, const std::string& function,
                    const std::vector<Value>& args, const AstEvalOptions& options = {});

}  // namespace exectrace
