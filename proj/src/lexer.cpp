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

#include <array>
#include <cctype>

#include "exectrace/parser.hpp"

namespace exectrace {

namespace {

constexpr std::array<std::string_view, 22> kOperators = {
    "**=", "//=", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "->",
    "+",   "-",   "*",  "/",  "%",  "<",  ">",  "="};

constexpr std::string_view kPunct = "()[]{},:.;";

bool IsNameStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsNameChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

void AppendCodepoint(std::string& out, char32_t c) { out += ToUtf8(std::u32string(1, c)); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> Run() {
    indents_.push_back(0);
    bool at_line_start = true;
    while (pos_ < src_.size()) {
      if (at_line_start && depth_ == 0) {
        if (!HandleIndentation()) continue;
        at_line_start = false;
      }
      char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        if (depth_ == 0) {
          Emit(TokenKind::kNewline, "", pos_ - 1);
          at_line_start = true;
        }
        ++line_;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          pos_ += 2;
          ++line_;
          continue;
        }
        throw SyntaxError(line_, "unexpected character after line continuation character");
      }
      if (IsNameStart(c)) {
        LexName();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        LexNumber();
        continue;
      }
      if (c == '\'' || c == '"') {
        LexString();
        continue;
      }
      LexOperator();
    }
    if (depth_ > 0) throw SyntaxError(line_, "unexpected EOF: unclosed bracket");
    if (!tokens_.empty() && tokens_.back().kind != TokenKind::kNewline &&
        tokens_.back().kind != TokenKind::kDedent) {
      Emit(TokenKind::kNewline, "", pos_);
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      Emit(TokenKind::kDedent, "", pos_);
    }
    Emit(TokenKind::kEnd, "", pos_);
    return std::move(tokens_);
  }

 private:
  // Returns false when the physical line was blank or comment-only.
  bool HandleIndentation() {
    int col = 0;
    std::size_t p = pos_;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
      col = src_[p] == '\t' ? (col / 8 + 1) * 8 : col + 1;
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return false;
    }
    if (src_[p] == '\n' || src_[p] == '#' || (src_[p] == '\r')) {
      while (p < src_.size() && src_[p] != '\n') ++p;
      if (p < src_.size()) {
        ++p;
        ++line_;
      }
      pos_ = p;
      return false;
    }
    pos_ = p;
    if (col > indents_.back()) {
      indents_.push_back(col);
      Emit(TokenKind::kIndent, "", pos_);
    } else {
      while (col < indents_.back()) {
        indents_.pop_back();
        Emit(TokenKind::kDedent, "", pos_);
      }
      if (col != indents_.back()) {
        throw SyntaxError(line_, "unindent does not match any outer indentation level");
      }
    }
    return true;
  }

  void Emit(TokenKind kind, std::string text, std::size_t offset) {
    tokens_.push_back(Token{kind, std::move(text), line_, offset});
  }

  void LexName() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && IsNameChar(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"')) {
      throw SyntaxError(line_, "string prefixes are not supported");
    }
    Emit(TokenKind::kName, std::string(src_.substr(start, pos_ - start)), start);
  }

  void LexNumber() {
    std::size_t start = pos_;
    bool is_float = false;
    auto digits = [&](auto pred) {
      bool any = false;
      while (pos_ < src_.size() && (pred(src_[pos_]) || src_[pos_] == '_')) {
        if (src_[pos_] == '_' && (!any || pos_ + 1 >= src_.size() || !pred(src_[pos_ + 1]))) {
          throw SyntaxError(line_, "invalid decimal literal");
        }
        any = true;
        ++pos_;
      }
      return any;
    };
    auto is_dec = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      char base_c = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_ + 1])));
      pos_ += 2;
      int base = base_c == 'x' ? 16 : base_c == 'o' ? 8 : 2;
      std::size_t body = pos_;
      while (pos_ < src_.size() &&
             (std::isxdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      std::string text;
      for (std::size_t i = body; i < pos_; ++i) {
        if (src_[i] != '_') text.push_back(src_[i]);
      }
      BigInt value;
      if (text.empty() || value.set_str(text, base) != 0) {
        throw SyntaxError(line_, "invalid literal");
      }
      Emit(TokenKind::kInt, value.get_str(), start);
      return;
    }
    digits(is_dec);
    if (pos_ < src_.size() && src_[pos_] == '.') {
      is_float = true;
      ++pos_;
      digits(is_dec);
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits(is_dec)) {
        is_float = true;
      } else {
        pos_ = save;
      }
    }
    if (pos_ < src_.size() && (IsNameStart(src_[pos_]))) {
      throw SyntaxError(line_, "invalid decimal literal");
    }
    std::string text;
    for (std::size_t i = start; i < pos_; ++i) {
      if (src_[i] != '_') text.push_back(src_[i]);
    }
    if (!is_float) {
      if (text.size() > 1 && text[0] == '0' && text.find_first_not_of('0') != std::string::npos) {
        throw SyntaxError(line_, "leading zeros in decimal integer literals are not permitted");
      }
    }
    Emit(is_float ? TokenKind::kFloat : TokenKind::kInt, text, start);
  }

  void LexString() {
    std::size_t start = pos_;
    int start_line = line_;
    char quote = src_[pos_];
    bool triple = src_.substr(pos_, 3) == std::string(3, quote);
    pos_ += triple ? 3 : 1;
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) throw SyntaxError(start_line, "unterminated string literal");
      char c = src_[pos_];
      if (triple) {
        if (src_.substr(pos_, 3) == std::string(3, quote)) {
          pos_ += 3;
          break;
        }
      } else if (c == quote) {
        ++pos_;
        break;
      }
      if (c == '\n') {
        if (!triple) throw SyntaxError(start_line, "unterminated string literal");
        ++line_;
        out.push_back(c);
        ++pos_;
        continue;
      }
      if (c == '\\') {
        ++pos_;
        if (pos_ >= src_.size()) throw SyntaxError(start_line, "unterminated string literal");
        char e = src_[pos_++];
        switch (e) {
          case '\n':
            ++line_;
            break;
          case 'n':
            out.push_back('\n');
            break;
          case 't':
            out.push_back('\t');
            break;
          case 'r':
            out.push_back('\r');
            break;
          case '0':
            out.push_back('\0');
            break;
          case '\\':
          case '\'':
          case '"':
            out.push_back(e);
            break;
          case 'x':
          case 'u':
          case 'U': {
            int width = e == 'x' ? 2 : e == 'u' ? 4 : 8;
            if (pos_ + static_cast<std::size_t>(width) > src_.size()) {
              throw SyntaxError(line_, "truncated escape sequence");
            }
            std::string hex(src_.substr(pos_, static_cast<std::size_t>(width)));
            for (char h : hex) {
              if (!std::isxdigit(static_cast<unsigned char>(h))) {
                throw SyntaxError(line_, "truncated escape sequence");
              }
            }
            pos_ += static_cast<std::size_t>(width);
            AppendCodepoint(out, static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
            break;
          }
          default:
            out.push_back('\\');
            out.push_back(e);
        }
        continue;
      }
      out.push_back(c);
      ++pos_;
    }
    Emit(TokenKind::kString, std::move(out), start);
    tokens_.back().line = start_line;
  }

  void LexOperator() {
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        Emit(TokenKind::kOp, std::string(op), pos_);
        pos_ += op.size();
        return;
      }
    }
    char c = src_[pos_];
    if (kPunct.find(c) != std::string_view::npos) {
      if (c == '(' || c == '[' || c == '{') ++depth_;
      if (c == ')' || c == ']' || c == '}') {
        if (depth_ == 0) throw SyntaxError(line_, std::string("unmatched '") + c + "'");
        --depth_;
      }
      Emit(TokenKind::kOp, std::string(1, c), pos_);
      ++pos_;
      return;
    }
    throw SyntaxError(line_, std::string("invalid character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int depth_ = 0;
  std::vector<int> indents_;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> Tokenize(std::string_view source) { return Lexer(source).Run(); }

}  // namespace exectrace
