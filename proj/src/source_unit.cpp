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

#include "exectrace/source_unit.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "exectrace/parser.hpp"

namespace exectrace {

namespace {

constexpr std::string_view kAnonymousName = "f";

bool StartsDefinition(std::string_view line) { return line.rfind("def ", 0) == 0; }

std::vector<std::string> SplitDefinitions(std::string_view text) {
  std::vector<std::string> chunks;
  std::string current;
  bool seen_def = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    std::size_t next = end == std::string_view::npos ? text.size() : end + 1;
    std::string_view line = text.substr(pos, next - pos);
    if (StartsDefinition(line)) {
      if (seen_def) {
        chunks.push_back(std::move(current));
        current.clear();
      }
      seen_def = true;
    }
    current += line;
    pos = next;
  }
  if (!current.empty() || chunks.empty()) chunks.push_back(std::move(current));
  if (!chunks.back().empty() && chunks.back().back() != '\n') chunks.back() += '\n';
  return chunks;
}

std::string FunctionName(const std::string& chunk, bool allow_reserved) {
  Program p = Parse(chunk, ParseOptions{allow_reserved});
  if (p.functions.size() != 1) {
    throw SyntaxError(1, "expected exactly one function definition per chunk");
  }
  return p.functions[0].name;
}

// Replaces every identifier token `from` by `to`, keeping all other bytes.
std::string RenameIdentifier(const std::string& text, const std::string& from,
                             std::string_view to) {
  std::string out;
  std::size_t last = 0;
  for (const Token& t : Tokenize(text)) {
    if (t.kind != TokenKind::kName || t.text != from) continue;
    out.append(text, last, t.offset - last);
    out += to;
    last = t.offset + from.size();
  }
  out.append(text, last, std::string::npos);
  return out;
}

bool UsesIdentifier(const std::string& text, std::string_view name) {
  for (const Token& t : Tokenize(text)) {
    if (t.kind == TokenKind::kName && t.text == name) return true;
  }
  return false;
}

}  // namespace

std::string SourceUnit::FullSource() const {
  std::string out;
  for (const auto& aux : aux_sources) out += aux;
  out += main_source;
  return out;
}

Program SourceUnit::Parse() const {
  return exectrace::Parse(FullSource(), ParseOptions{allow_reserved});
}

std::string SourceUnit::MainName() const { return FunctionName(main_source, allow_reserved); }

SourceUnit MakeUnit(std::string unit_id, std::string_view text, bool allow_reserved) {
  SourceUnit unit;
  unit.unit_id = std::move(unit_id);
  unit.allow_reserved = allow_reserved;
  std::vector<std::string> chunks = SplitDefinitions(text);
  std::set<std::string> names;
  for (const auto& chunk : chunks) {
    std::string name = FunctionName(chunk, allow_reserved);
    if (!names.insert(name).second) {
      throw SyntaxError(1, "duplicate function name '" + name + "'");
    }
  }
  unit.main_source = chunks.back();
  chunks.pop_back();
  unit.aux_sources = std::move(chunks);
  unit.anonymized = unit.MainName() == kAnonymousName;
  // Validates the whole file once more so line numbers are checked in context.
  unit.Parse();
  return unit;
}

SourceUnit LoadUnit(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return MakeUnit(path.stem().string(), buffer.str());
}

SourceUnit Anonymize(const SourceUnit& unit) {
  SourceUnit out = unit;
  std::string name = unit.MainName();
  if (name == kAnonymousName) {
    out.anonymized = true;
    return out;
  }
  for (const auto& aux : unit.aux_sources) {
    if (FunctionName(aux, unit.allow_reserved) == kAnonymousName) {
      throw NameCollision("helper function already named 'f'");
    }
  }
  if (UsesIdentifier(unit.FullSource(), kAnonymousName)) {
    throw NameCollision("identifier 'f' already used in unit " + unit.unit_id);
  }
  out.main_source = RenameIdentifier(unit.main_source, name, kAnonymousName);
  for (auto& aux : out.aux_sources) aux = RenameIdentifier(aux, name, kAnonymousName);
  out.anonymized = true;
  return out;
}

}  // namespace exectrace
