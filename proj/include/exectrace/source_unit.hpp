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

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "exectrace/ast.hpp"

namespace exectrace {

// One traced function plus the helpers it calls. Helpers come first in the
// file, the main function is the last definition.
struct SourceUnit {
  std::string unit_id;
  std::string main_source;
  std::vector<std::string> aux_sources;
  bool anonymized = false;
  // Set on units produced by rewrites, whose fresh names use the reserved
  // prefix.
  bool allow_reserved = false;

  // Helpers followed by the main function; line numbers refer to this text.
  std::string FullSource() const;
  Program Parse() const;
  std::string MainName() const;
};

class NameCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits a file into top-level definitions. Raises SyntaxError when the text
// does not parse or helper names clash.
SourceUnit MakeUnit(std::string unit_id, std::string_view text, bool allow_reserved = false);
SourceUnit LoadUnit(const std::filesystem::path& path);

// Renames the main function to `f`, including recursive references.
SourceUnit Anonymize(const SourceUnit& unit);

// Turns every for-loop nested inside another for-loop into an index-driven
// while-loop. Outermost for-loops are kept.
Program RewriteNestedFor(const Program& program);
SourceUnit RewriteNestedFor(const SourceUnit& unit);

}  // namespace exectrace
