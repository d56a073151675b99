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

#include <string>
#include <string_view>
#include <vector>

#include "exectrace/ast.hpp"

namespace exectrace {

enum class TokenKind { kName, kInt, kFloat, kString, kOp, kNewline, kIndent, kDedent, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;    // operator / name text, or decoded UTF-8 string payload
  int line = 0;
  std::size_t offset = 0;  // byte offset of the token start in the source
};

// Indentation-aware tokenizer. Newlines inside brackets are ignored.
std::vector<Token> Tokenize(std::string_view source);

struct ParseOptions {
  // Allow identifiers with the reserved rewrite prefix (rendered rewrites).
  bool allow_reserved = false;
};

// Parses a sequence of top-level function definitions.
Program Parse(std::string_view source, const ParseOptions& options = {});

// Parses a single expression; used for CLI argument tuples and grammar
// files. Only literal forms are accepted by ParseLiteral.
ExprPtr ParseExpression(std::string_view text);
Value ParseLiteral(std::string_view text);

}  // namespace exectrace
