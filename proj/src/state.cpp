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

#include "exectrace/state.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace exectrace {

namespace {

constexpr std::string_view kIterPrefix = "__for_iterator_";
constexpr std::string_view kIterSuffix = "__";

bool IsIdentifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool ParseNumber(std::string_view s, T* out) {
  s = Trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Strips the surrounding brackets of `{...}` / `[...]`.
std::string_view Inner(std::string_view value, char open, char close, std::size_t pos) {
  value = Trim(value);
  if (value.size() < 2 || value.front() != open || value.back() != close) {
    throw StateParseError(pos, std::string("expected ") + open + "..." + close);
  }
  return value.substr(1, value.size() - 2);
}

std::vector<std::string> SortedLocals(const SelfContainedState& s) {
  std::vector<std::string> out;
  for (const auto& [k, v] : s.locals) out.push_back(k + '\x1f' + v);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FacetResult FacetResult::AllWrong(Granularity g) {
  FacetResult r;
  if (g == Granularity::kInstruction) r.stack = false;
  return r;
}

std::string IteratorName(int slot) {
  return std::string(kIterPrefix) + std::to_string(slot) + std::string(kIterSuffix);
}

std::string RenderLocals(const std::vector<std::pair<std::string, std::string>>& locals) {
  std::string out = "{";
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (i) out += ", ";
    out += locals[i].first + ": " + locals[i].second;
  }
  return out + "}";
}

std::string RenderState(const SelfContainedState& s) {
  std::string out;
  out += s.granularity == Granularity::kLine ? "line: " : "offset: ";
  out += std::to_string(s.location) + "\n";
  out += "locals: " + RenderLocals(s.locals) + "\n";
  out += "iterators: {";
  for (std::size_t i = 0; i < s.iterators.size(); ++i) {
    if (i) out += ", ";
    out += IteratorName(s.iterators[i].first) + "=" + std::to_string(s.iterators[i].second);
  }
  out += "}\n";
  if (s.granularity == Granularity::kInstruction) {
    out += "stack: [";
    for (std::size_t i = 0; i < s.stack.size(); ++i) {
      if (i) out += ", ";
      out += s.stack[i];
    }
    out += "]\n";
  }
  if (s.return_repr) out += "return: " + *s.return_repr + "\n";
  return out;
}

std::vector<std::string> SplitTopLevel(std::string_view inner, std::size_t base) {
  std::vector<std::string> parts;
  std::vector<char> closers;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    char c = inner[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    switch (c) {
      case '\'':
      case '"':
        quote = c;
        break;
      case '(':
        closers.push_back(')');
        break;
      case '[':
        closers.push_back(']');
        break;
      case '{':
        closers.push_back('}');
        break;
      case ')':
      case ']':
      case '}':
        if (closers.empty() || closers.back() != c) {
          throw StateParseError(base + i, std::string("unbalanced '") + c + "'");
        }
        closers.pop_back();
        break;
      case ',':
        if (closers.empty()) {
          parts.emplace_back(Trim(inner.substr(start, i - start)));
          start = i + 1;
        }
        break;
      default:
        break;
    }
  }
  if (quote) throw StateParseError(base + inner.size(), "unterminated string");
  if (!closers.empty()) throw StateParseError(base + inner.size(), "unclosed bracket");
  std::string_view last = Trim(inner.substr(start));
  if (!last.empty() || !parts.empty()) {
    if (last.empty()) throw StateParseError(base + inner.size(), "empty item");
    parts.emplace_back(last);
  }
  for (const auto& p : parts) {
    if (p.empty()) throw StateParseError(base, "empty item");
  }
  return parts;
}

SelfContainedState ParseState(std::string_view text) {
  SelfContainedState s;
  std::size_t body = 0;
  std::size_t marker = text.rfind(std::string(kStateMarker) + "\n");
  if (marker != std::string_view::npos && (marker == 0 || text[marker - 1] == '\n')) {
    std::size_t src_end = marker;
    std::size_t bc = text.find(std::string(kBytecodeMarker) + "\n");
    if (bc != std::string_view::npos && bc < marker && (bc == 0 || text[bc - 1] == '\n')) {
      src_end = bc;
    }
    s.source = std::string(text.substr(0, src_end));
    body = marker + kStateMarker.size() + 1;
  }

  bool have_location = false, have_locals = false, have_iters = false, have_stack = false;
  std::size_t pos = body;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = Trim(text.substr(pos, eol - pos));
    std::size_t line_pos = pos;
    pos = eol + 1;
    if (line.empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) throw StateParseError(line_pos, "expected 'field: value'");
    std::string_view key = line.substr(0, colon);
    std::string_view value = Trim(line.substr(colon + 1));
    std::size_t value_pos = line_pos + colon + 1;
    if (key == "line" || key == "offset") {
      if (have_location) throw StateParseError(line_pos, "duplicate location");
      if (!ParseNumber(value, &s.location)) throw StateParseError(value_pos, "bad location");
      s.granularity = key == "line" ? Granularity::kLine : Granularity::kInstruction;
      have_location = true;
    } else if (key == "locals") {
      if (have_locals) throw StateParseError(line_pos, "duplicate locals");
      for (const auto& item : SplitTopLevel(Inner(value, '{', '}', value_pos), value_pos)) {
        std::size_t c = item.find(':');
        if (c == std::string::npos) throw StateParseError(value_pos, "local without ':'");
        std::string name(Trim(std::string_view(item).substr(0, c)));
        std::string repr(Trim(std::string_view(item).substr(c + 1)));
        if (!IsIdentifier(name)) throw StateParseError(value_pos, "bad local name '" + name + "'");
        if (repr.empty()) throw StateParseError(value_pos, "empty value for '" + name + "'");
        for (const auto& [n, r] : s.locals) {
          if (n == name) throw StateParseError(value_pos, "duplicate local '" + name + "'");
        }
        s.locals.emplace_back(std::move(name), std::move(repr));
      }
      have_locals = true;
    } else if (key == "iterators") {
      if (have_iters) throw StateParseError(line_pos, "duplicate iterators");
      for (const auto& item : SplitTopLevel(Inner(value, '{', '}', value_pos), value_pos)) {
        std::size_t eq = item.find('=');
        std::string_view name = eq == std::string::npos ? "" : std::string_view(item).substr(0, eq);
        if (name.size() <= kIterPrefix.size() + kIterSuffix.size() ||
            name.substr(0, kIterPrefix.size()) != kIterPrefix ||
            name.substr(name.size() - kIterSuffix.size()) != kIterSuffix) {
          throw StateParseError(value_pos, "bad iterator entry '" + item + "'");
        }
        int slot = 0;
        std::int64_t count = 0;
        std::string_view digits = name.substr(kIterPrefix.size(), name.size() - kIterPrefix.size() -
                                                                      kIterSuffix.size());
        if (!ParseNumber(digits, &slot) || slot < 1 ||
            !ParseNumber(std::string_view(item).substr(eq + 1), &count) || count < 0) {
          throw StateParseError(value_pos, "bad iterator entry '" + item + "'");
        }
        s.iterators.emplace_back(slot, count);
      }
      have_iters = true;
    } else if (key == "stack") {
      if (have_stack) throw StateParseError(line_pos, "duplicate stack");
      s.stack = SplitTopLevel(Inner(value, '[', ']', value_pos), value_pos);
      have_stack = true;
    } else if (key == "return") {
      if (s.return_repr) throw StateParseError(line_pos, "duplicate return");
      if (value.empty()) throw StateParseError(value_pos, "empty return value");
      SplitTopLevel(value, value_pos);  // bracket balance check only
      s.return_repr = std::string(value);
    } else if (key == "steps") {
      int n = 0;
      if (!ParseNumber(value, &n)) throw StateParseError(value_pos, "bad steps marker");
    } else {
      throw StateParseError(line_pos, "unknown field '" + std::string(key) + "'");
    }
  }
  if (!have_location) throw StateParseError(body, "missing location");
  if (!have_locals) throw StateParseError(body, "missing locals");
  if (!have_iters) throw StateParseError(body, "missing iterators");
  if (have_stack != (s.granularity == Granularity::kInstruction)) {
    throw StateParseError(body, have_stack ? "stack given at line granularity"
                                           : "missing stack at instruction granularity");
  }
  return s;
}

FacetResult CompareStates(const SelfContainedState& predicted, const SelfContainedState& truth) {
  if (predicted.granularity != truth.granularity) return FacetResult::AllWrong(truth.granularity);
  FacetResult r;
  r.control_flow =
      predicted.location == truth.location && predicted.terminal() == truth.terminal();
  r.vars = SortedLocals(predicted) == SortedLocals(truth) &&
           predicted.return_repr == truth.return_repr;
  r.iterator = predicted.iterators == truth.iterators;
  if (truth.granularity == Granularity::kInstruction) r.stack = predicted.stack == truth.stack;
  r.full = r.control_flow && r.vars && r.iterator && r.stack.value_or(true);
  return r;
}

}  // namespace exectrace
