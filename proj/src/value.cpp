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

#include "exectrace/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

namespace exectrace {

namespace {

constexpr int kMaxNesting = 400;

void CheckDepth(int depth) {
  if (depth > kMaxNesting) {
    throw ExecError("RecursionError",
                    "maximum recursion depth exceeded in comparison");
  }
}

void AppendUtf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

bool IsPrintable(char32_t c) {
  if (c < 0x20 || c == 0x7F) return false;
  if (c >= 0x80 && c <= 0xA0) return false;
  if (c == 0xAD) return false;
  if (c >= 0xD800 && c <= 0xDFFF) return false;
  if (c == 0x2028 || c == 0x2029) return false;
  return c <= 0x10FFFF;
}

void AppendHex(std::string& out, char32_t c, int width) {
  static const char* kDigits = "0123456789abcdef";
  for (int shift = (width - 1) * 4; shift >= 0; shift -= 4) {
    out.push_back(kDigits[(c >> shift) & 0xF]);
  }
}

int CompareIntFloat(const BigInt& i, double d) {
  // mpz_cmp_d accepts infinities; NaN is handled by callers.
  return mpz_cmp_d(i.get_mpz_t(), d);
}

void ReprInto(const Value& v, std::string& out,
              std::unordered_set<const void*>& active);

template <typename Seq>
void ReprSeq(const Seq& items, std::string& out,
             std::unordered_set<const void*>& active) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    ReprInto(items[i], out, active);
  }
}

std::string IterName(const IterObject& it) {
  switch (it.kind) {
    case IterKind::kRange:
      return "<range_iterator>";
    case IterKind::kList:
      return "<list_iterator>";
    case IterKind::kTuple:
      return "<tuple_iterator>";
    case IterKind::kStr:
      return "<str_iterator>";
    case IterKind::kDictKeys:
      return "<dict_keyiterator>";
    case IterKind::kDictValues:
      return "<dict_valueiterator>";
    case IterKind::kDictItems:
      return "<dict_itemiterator>";
    case IterKind::kEnumerate:
      return "<enumerate object>";
    case IterKind::kZip:
      return "<zip object>";
    case IterKind::kForward:
      return it.inner.empty() ? "<iterator>" : IterName(*it.inner.front());
  }
  return "<iterator>";
}

void ReprInto(const Value& v, std::string& out,
              std::unordered_set<const void*>& active) {
  switch (v.kind()) {
    case Kind::kNone:
      out += "None";
      return;
    case Kind::kBool:
      out += v.as_bool() ? "True" : "False";
      return;
    case Kind::kInt:
      out += v.as_int().get_str();
      return;
    case Kind::kFloat:
      out += FormatFloat(v.as_float());
      return;
    case Kind::kStr:
      out += ReprString(v.as_str());
      return;
    case Kind::kList: {
      const void* key = v.as_list().get();
      if (active.count(key)) {
        out += "[...]";
        return;
      }
      active.insert(key);
      out += '[';
      ReprSeq(v.as_list()->items, out, active);
      out += ']';
      active.erase(key);
      return;
    }
    case Kind::kTuple: {
      const auto& items = *v.as_tuple();
      out += '(';
      ReprSeq(items, out, active);
      if (items.size() == 1) out += ',';
      out += ')';
      return;
    }
    case Kind::kDict: {
      const void* key = v.as_dict().get();
      if (active.count(key)) {
        out += "{...}";
        return;
      }
      active.insert(key);
      out += '{';
      bool first = true;
      for (const auto& [k, val] : v.as_dict()->items) {
        if (!first) out += ", ";
        first = false;
        ReprInto(k, out, active);
        out += ": ";
        ReprInto(val, out, active);
      }
      out += '}';
      active.erase(key);
      return;
    }
    case Kind::kRange: {
      const Range& r = v.as_range();
      out += "range(" + std::to_string(r.start) + ", " + std::to_string(r.stop);
      if (r.step != 1) out += ", " + std::to_string(r.step);
      out += ')';
      return;
    }
    case Kind::kFunc:
      if (v.as_func().builtin) {
        out += "<built-in function " + v.as_func().name + ">";
      } else {
        out += "<function " + v.as_func().name + ">";
      }
      return;
    case Kind::kIter:
      out += IterName(*v.as_iter());
      return;
    case Kind::kDictView: {
      const DictView& view = v.as_view();
      const char* names[] = {"dict_keys", "dict_values", "dict_items"};
      out += names[static_cast<int>(view.kind)];
      out += "([";
      bool first = true;
      for (const auto& [k, val] : view.dict->items) {
        if (!first) out += ", ";
        first = false;
        if (view.kind == ViewKind::kKeys) {
          ReprInto(k, out, active);
        } else if (view.kind == ViewKind::kValues) {
          ReprInto(val, out, active);
        } else {
          out += '(';
          ReprInto(k, out, active);
          out += ", ";
          ReprInto(val, out, active);
          out += ')';
        }
      }
      out += "])";
      return;
    }
  }
}

bool EqualImpl(const Value& a, const Value& b, int depth);

template <typename Seq>
bool SeqEqual(const Seq& x, const Seq& y, int depth) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!EqualImpl(x[i], y[i], depth + 1)) return false;
  }
  return true;
}

bool EqualImpl(const Value& a, const Value& b, int depth) {
  CheckDepth(depth);
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_integral() && b.is_integral()) return a.integral() == b.integral();
    if (a.is(Kind::kFloat) && b.is(Kind::kFloat)) {
      return a.as_float() == b.as_float();
    }
    const Value& f = a.is(Kind::kFloat) ? a : b;
    const Value& i = a.is(Kind::kFloat) ? b : a;
    double d = f.as_float();
    if (std::isnan(d)) return false;
    return CompareIntFloat(i.integral(), d) == 0;
  }
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::kNone:
      return true;
    case Kind::kStr:
      return a.as_str() == b.as_str();
    case Kind::kList:
      if (a.as_list() == b.as_list()) return true;
      return SeqEqual(a.as_list()->items, b.as_list()->items, depth);
    case Kind::kTuple:
      if (a.as_tuple() == b.as_tuple()) return true;
      return SeqEqual(*a.as_tuple(), *b.as_tuple(), depth);
    case Kind::kDict: {
      const auto& x = *a.as_dict();
      const auto& y = *b.as_dict();
      if (&x == &y) return true;
      if (x.size() != y.size()) return false;
      for (const auto& [k, v] : x.items) {
        const Value* other = y.find(k);
        if (other == nullptr || !EqualImpl(v, *other, depth + 1)) return false;
      }
      return true;
    }
    case Kind::kRange: {
      const Range& x = a.as_range();
      const Range& y = b.as_range();
      std::int64_t n = x.size();
      if (n != y.size()) return false;
      if (n == 0) return true;
      if (x.start != y.start) return false;
      return n == 1 || x.step == y.step;
    }
    case Kind::kFunc:
      return a.as_func().name == b.as_func().name &&
             a.as_func().builtin == b.as_func().builtin;
    case Kind::kIter:
      return a.as_iter() == b.as_iter();
    case Kind::kDictView:
      return a.as_view().kind != ViewKind::kValues &&
             a.as_view().kind == b.as_view().kind &&
             a.as_view().dict == b.as_view().dict;
    default:
      return false;
  }
}

bool LessImpl(const Value& a, const Value& b, int depth);

template <typename Seq>
bool SeqLess(const Seq& x, const Seq& y, int depth) {
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!EqualImpl(x[i], y[i], depth + 1)) return LessImpl(x[i], y[i], depth + 1);
  }
  return x.size() < y.size();
}

bool LessImpl(const Value& a, const Value& b, int depth) {
  CheckDepth(depth);
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_integral() && b.is_integral()) return a.integral() < b.integral();
    if (a.is(Kind::kFloat) && b.is(Kind::kFloat)) return a.as_float() < b.as_float();
    if (a.is(Kind::kFloat)) {
      if (std::isnan(a.as_float())) return false;
      return CompareIntFloat(b.integral(), a.as_float()) > 0;
    }
    if (std::isnan(b.as_float())) return false;
    return CompareIntFloat(a.integral(), b.as_float()) < 0;
  }
  if (a.is(Kind::kStr) && b.is(Kind::kStr)) return a.as_str() < b.as_str();
  if (a.is(Kind::kList) && b.is(Kind::kList)) {
    return SeqLess(a.as_list()->items, b.as_list()->items, depth);
  }
  if (a.is(Kind::kTuple) && b.is(Kind::kTuple)) {
    return SeqLess(*a.as_tuple(), *b.as_tuple(), depth);
  }
  throw ExecError("TypeError", "'<' not supported between instances of '" +
                                   TypeName(a) + "' and '" + TypeName(b) + "'");
}

Value DeepCopyImpl(const Value& v, std::unordered_map<const void*, Value>& memo);

Iter CopyIter(const Iter& it, std::unordered_map<const void*, Value>& memo) {
  auto found = memo.find(it.get());
  if (found != memo.end()) return found->second.as_iter();
  auto copy = std::make_shared<IterObject>(*it);
  memo.emplace(it.get(), Value(copy));
  copy->source = DeepCopyImpl(it->source, memo);
  for (auto& inner : copy->inner) inner = CopyIter(inner, memo);
  return copy;
}

Value DeepCopyImpl(const Value& v, std::unordered_map<const void*, Value>& memo) {
  switch (v.kind()) {
    case Kind::kList: {
      auto found = memo.find(v.as_list().get());
      if (found != memo.end()) return found->second;
      auto copy = std::make_shared<ListObject>();
      memo.emplace(v.as_list().get(), Value(copy));
      copy->items.reserve(v.as_list()->items.size());
      for (const auto& item : v.as_list()->items) {
        copy->items.push_back(DeepCopyImpl(item, memo));
      }
      return Value(copy);
    }
    case Kind::kTuple: {
      std::vector<Value> items;
      items.reserve(v.as_tuple()->size());
      for (const auto& item : *v.as_tuple()) items.push_back(DeepCopyImpl(item, memo));
      return Value::MakeTuple(std::move(items));
    }
    case Kind::kDict: {
      auto found = memo.find(v.as_dict().get());
      if (found != memo.end()) return found->second;
      auto copy = std::make_shared<DictObject>();
      memo.emplace(v.as_dict().get(), Value(copy));
      copy->index = v.as_dict()->index;
      copy->items.reserve(v.as_dict()->items.size());
      for (const auto& [k, val] : v.as_dict()->items) {
        copy->items.emplace_back(k, DeepCopyImpl(val, memo));
      }
      return Value(copy);
    }
    case Kind::kIter:
      return Value(CopyIter(v.as_iter(), memo));
    case Kind::kDictView: {
      Value dict = DeepCopyImpl(Value(v.as_view().dict), memo);
      return Value(DictView{v.as_view().kind, dict.as_dict()});
    }
    default:
      return v;
  }
}

}  // namespace

std::int64_t Range::size() const {
  __int128 lo = start, hi = stop, st = step;
  __int128 n = 0;
  if (st > 0 && lo < hi) n = (hi - lo + st - 1) / st;
  if (st < 0 && lo > hi) n = (lo - hi - st - 1) / (-st);
  return static_cast<std::int64_t>(n);
}

Value Value::FromUtf8(std::string_view utf8) {
  return Value(std::make_shared<const std::u32string>(exectrace::FromUtf8(utf8)));
}

Value Value::FromU32(std::u32string s) {
  return Value(std::make_shared<const std::u32string>(std::move(s)));
}

Value Value::MakeList(std::vector<Value> items) {
  auto list = std::make_shared<ListObject>();
  list->items = std::move(items);
  return Value(list);
}

Value Value::MakeTuple(std::vector<Value> items) {
  return Value(std::make_shared<const std::vector<Value>>(std::move(items)));
}

Value Value::MakeDict() { return Value(std::make_shared<DictObject>()); }

BigInt Value::integral() const {
  if (is(Kind::kBool)) return BigInt(as_bool() ? 1 : 0);
  return as_int();
}

double Value::to_double() const {
  if (is(Kind::kFloat)) return as_float();
  BigInt i = integral();
  if (mpz_sizeinbase(i.get_mpz_t(), 2) <= 53) return i.get_d();
  // Round-to-nearest through the decimal text, as the reference does.
  std::string text = i.get_str();
  double d = std::strtod(text.c_str(), nullptr);
  if (std::isinf(d)) {
    throw ExecError("OverflowError", "int too large to convert to float");
  }
  return d;
}

const Value* DictObject::find(const Value& key) const {
  auto it = index.find(HashKey(key));
  if (it == index.end()) return nullptr;
  return &items[it->second].second;
}

void DictObject::set(const Value& key, Value value) {
  std::string hk = HashKey(key);
  auto it = index.find(hk);
  if (it != index.end()) {
    items[it->second].second = std::move(value);
    return;
  }
  index.emplace(std::move(hk), items.size());
  items.emplace_back(key, std::move(value));
}

std::string FormatFloat(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  bool negative = false;
  std::size_t pos = 0;
  if (sci[0] == '-') {
    negative = true;
    pos = 1;
  }
  std::size_t epos = sci.find('e');
  std::string mantissa = sci.substr(pos, epos - pos);
  int exponent = std::stoi(sci.substr(epos + 1));
  std::string digits;
  for (char c : mantissa) {
    if (c != '.') digits.push_back(c);
  }
  int decpt = exponent + 1;
  std::string out = negative ? "-" : "";
  if (decpt > 16 || decpt <= -4) {
    out += digits[0];
    if (digits.size() > 1) {
      out += '.';
      out += digits.substr(1);
    }
    int e = decpt - 1;
    out += e < 0 ? "e-" : "e+";
    std::string ed = std::to_string(std::abs(e));
    if (ed.size() < 2) ed = "0" + ed;
    out += ed;
    return out;
  }
  if (decpt <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-decpt), '0');
    out += digits;
  } else if (static_cast<std::size_t>(decpt) >= digits.size()) {
    out += digits;
    out.append(static_cast<std::size_t>(decpt) - digits.size(), '0');
    out += ".0";
  } else {
    out += digits.substr(0, static_cast<std::size_t>(decpt));
    out += '.';
    out += digits.substr(static_cast<std::size_t>(decpt));
  }
  return out;
}

std::string ReprString(const std::u32string& s) {
  bool has_single = s.find(U'\'') != std::u32string::npos;
  bool has_double = s.find(U'"') != std::u32string::npos;
  char32_t quote = (has_single && !has_double) ? U'"' : U'\'';
  std::string out;
  out.push_back(static_cast<char>(quote));
  for (char32_t c : s) {
    if (c == quote || c == U'\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(c));
    } else if (c == U'\n') {
      out += "\\n";
    } else if (c == U'\t') {
      out += "\\t";
    } else if (c == U'\r') {
      out += "\\r";
    } else if (IsPrintable(c)) {
      AppendUtf8(out, c);
    } else if (c < 0x100) {
      out += "\\x";
      AppendHex(out, c, 2);
    } else if (c < 0x10000) {
      out += "\\u";
      AppendHex(out, c, 4);
    } else {
      out += "\\U";
      AppendHex(out, c, 8);
    }
  }
  out.push_back(static_cast<char>(quote));
  return out;
}

std::string Repr(const Value& v) {
  std::string out;
  std::unordered_set<const void*> active;
  ReprInto(v, out, active);
  return out;
}

std::string ToDisplayString(const Value& v) {
  if (v.is(Kind::kStr)) return ToUtf8(v.as_str());
  return Repr(v);
}

std::string TypeName(const Value& v) {
  switch (v.kind()) {
    case Kind::kNone:
      return "NoneType";
    case Kind::kBool:
      return "bool";
    case Kind::kInt:
      return "int";
    case Kind::kFloat:
      return "float";
    case Kind::kStr:
      return "str";
    case Kind::kList:
      return "list";
    case Kind::kTuple:
      return "tuple";
    case Kind::kDict:
      return "dict";
    case Kind::kRange:
      return "range";
    case Kind::kFunc:
      return v.as_func().builtin ? "builtin_function_or_method" : "function";
    case Kind::kIter: {
      std::string name = IterName(*v.as_iter());
      name = name.substr(1, name.size() - 2);
      auto space = name.find(' ');
      return space == std::string::npos ? name : name.substr(0, space);
    }
    case Kind::kDictView: {
      const char* names[] = {"dict_keys", "dict_values", "dict_items"};
      return names[static_cast<int>(v.as_view().kind)];
    }
  }
  return "object";
}

bool Truthy(const Value& v) {
  switch (v.kind()) {
    case Kind::kNone:
      return false;
    case Kind::kBool:
      return v.as_bool();
    case Kind::kInt:
      return v.as_int() != 0;
    case Kind::kFloat:
      return v.as_float() != 0.0;
    case Kind::kStr:
      return !v.as_str().empty();
    case Kind::kList:
      return !v.as_list()->items.empty();
    case Kind::kTuple:
      return !v.as_tuple()->empty();
    case Kind::kDict:
      return v.as_dict()->size() != 0;
    case Kind::kRange:
      return v.as_range().size() != 0;
    case Kind::kDictView:
      return v.as_view().dict->size() != 0;
    default:
      return true;
  }
}

bool Equal(const Value& a, const Value& b) { return EqualImpl(a, b, 0); }

bool Less(const Value& a, const Value& b) { return LessImpl(a, b, 0); }

std::string HashKey(const Value& v) {
  switch (v.kind()) {
    case Kind::kBool:
    case Kind::kInt:
      return "i" + v.integral().get_str();
    case Kind::kStr:
      return "s" + ReprString(v.as_str());
    case Kind::kTuple: {
      std::string out = "t(";
      for (const auto& item : *v.as_tuple()) {
        out += HashKey(item);
        out += ',';
      }
      out += ')';
      return out;
    }
    default:
      throw ExecError("TypeError", "unhashable type: '" + TypeName(v) + "'");
  }
}

Value DeepCopy(const Value& v) {
  std::unordered_map<const void*, Value> memo;
  return DeepCopyImpl(v, memo);
}

std::string ToUtf8(const std::u32string& s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) AppendUtf8(out, c);
  return out;
}

std::u32string FromUtf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b = static_cast<unsigned char>(s[i]);
    char32_t c = 0xFFFD;
    std::size_t len = 1;
    if (b < 0x80) {
      c = b;
    } else if ((b >> 5) == 0x6) {
      len = 2;
    } else if ((b >> 4) == 0xE) {
      len = 3;
    } else if ((b >> 3) == 0x1E) {
      len = 4;
    }
    if (len > 1) {
      if (i + len > s.size()) {
        len = 1;
      } else {
        c = b & (0x7F >> len);
        for (std::size_t k = 1; k < len; ++k) {
          auto cont = static_cast<unsigned char>(s[i + k]);
          if ((cont >> 6) != 0x2) {
            c = 0xFFFD;
            len = 1;
            break;
          }
          c = (c << 6) | (cont & 0x3F);
        }
      }
    }
    out.push_back(c);
    i += len;
  }
  return out;
}

}  // namespace exectrace
