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

#include "exectrace/runtime_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace exectrace {

namespace {

// Resource caps standing in for the reference runtime's memory limits.
constexpr std::size_t kMaxSequence = 10'000'000;
constexpr std::size_t kMaxIntBits = 1'000'000;

[[noreturn]] void TypeError(const std::string& msg) { throw ExecError("TypeError", msg); }
[[noreturn]] void ValueError(const std::string& msg) { throw ExecError("ValueError", msg); }

[[noreturn]] void Unsupported(std::string_view sym, const Value& a, const Value& b) {
  TypeError("unsupported operand type(s) for " + std::string(sym) + ": '" + TypeName(a) +
            "' and '" + TypeName(b) + "'");
}

void CheckSize(std::size_t n) {
  if (n > kMaxSequence) throw ExecError("MemoryError", "sequence too large");
}

void CheckIntSize(const BigInt& i) {
  if (mpz_sizeinbase(i.get_mpz_t(), 2) > kMaxIntBits) {
    throw ExecError("MemoryError", "integer too large");
  }
}

std::int64_t ToInt64(const BigInt& i, const char* what) {
  if (!i.fits_slong_p()) {
    throw ExecError("OverflowError", std::string("Python int too large to convert to C ") + what);
  }
  return i.get_si();
}

std::int64_t RepeatCount(const Value& v) {
  BigInt n = v.integral();
  if (n <= 0) return 0;
  if (!n.fits_slong_p()) throw ExecError("MemoryError", "repeat count too large");
  return n.get_si();
}

Value FloatResult(double d) { return Value(d); }

double FloatFloorDiv(double a, double b, bool want_mod, double* mod_out) {
  if (b == 0.0) {
    throw ExecError("ZeroDivisionError",
                    want_mod ? "float modulo by zero" : "float floor division by zero");
  }
  double mod = std::fmod(a, b);
  double div = (a - mod) / b;
  if (mod != 0.0) {
    if ((b < 0) != (mod < 0)) {
      mod += b;
      div -= 1.0;
    }
  } else {
    mod = std::copysign(0.0, b);
  }
  double floordiv;
  if (div != 0.0) {
    floordiv = std::floor(div);
    if (div - floordiv > 0.5) floordiv += 1.0;
  } else {
    floordiv = std::copysign(0.0, a / b);
  }
  if (mod_out) *mod_out = mod;
  return floordiv;
}

Value IntTrueDiv(const BigInt& a, const BigInt& b) {
  if (b == 0) throw ExecError("ZeroDivisionError", "division by zero");
  if (mpz_sizeinbase(a.get_mpz_t(), 2) <= 53 && mpz_sizeinbase(b.get_mpz_t(), 2) <= 53) {
    return Value(a.get_d() / b.get_d());
  }
  mpf_class q(a, 512);
  q /= mpf_class(b, 512);
  mp_exp_t exp = 0;
  std::string digits = q.get_str(exp, 10, 40);
  if (digits.empty()) return Value(0.0);
  bool neg = digits[0] == '-';
  if (neg) digits.erase(0, 1);
  std::string text = (neg ? "-0." : "0.") + digits + "e" + std::to_string(exp);
  double d = std::strtod(text.c_str(), nullptr);
  if (std::isinf(d)) {
    throw ExecError("OverflowError", "integer division result too large for a float");
  }
  return Value(d);
}

Value IntPow(const BigInt& base, const BigInt& exp) {
  if (exp < 0) {
    double b = Value(base).to_double();
    if (b == 0.0) {
      throw ExecError("ZeroDivisionError", "0.0 cannot be raised to a negative power");
    }
    double r = std::pow(b, exp.get_d());
    return Value(r);
  }
  if (base == 0 || base == 1) return Value(exp == 0 ? BigInt(1) : base);
  if (base == -1) return Value(BigInt(mpz_even_p(exp.get_mpz_t()) ? 1 : -1));
  if (!exp.fits_ulong_p()) throw ExecError("MemoryError", "integer too large");
  unsigned long e = exp.get_ui();
  double bits = static_cast<double>(mpz_sizeinbase(base.get_mpz_t(), 2)) * static_cast<double>(e);
  if (bits > static_cast<double>(kMaxIntBits)) {
    throw ExecError("MemoryError", "integer too large");
  }
  BigInt r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return Value(r);
}

Value FloatPow(double a, double b) {
  if (a == 0.0 && b < 0.0) {
    throw ExecError("ZeroDivisionError", "0.0 cannot be raised to a negative power");
  }
  if (a < 0.0 && std::isfinite(b) && std::floor(b) != b) {
    ValueError("negative number cannot be raised to a fractional power");
  }
  double r = std::pow(a, b);
  if (std::isinf(r) && std::isfinite(a) && std::isfinite(b)) {
    throw ExecError("OverflowError", "(34, 'Numerical result out of range')");
  }
  return Value(r);
}

template <typename Seq>
std::vector<Value> Repeat(const Seq& items, std::int64_t n) {
  std::vector<Value> out;
  CheckSize(items.size() * static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  for (std::int64_t i = 0; i < n; ++i) out.insert(out.end(), items.begin(), items.end());
  return out;
}

Value Arith(BinOp op, const Value& a, const Value& b, bool inplace) {
  std::string_view sym = Symbol(op);
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_integral() && b.is_integral()) {
      BigInt x = a.integral();
      BigInt y = b.integral();
      BigInt r;
      switch (op) {
        case BinOp::kAdd:
          r = x + y;
          break;
        case BinOp::kSub:
          r = x - y;
          break;
        case BinOp::kMul:
          if (mpz_sizeinbase(x.get_mpz_t(), 2) + mpz_sizeinbase(y.get_mpz_t(), 2) > kMaxIntBits) {
            throw ExecError("MemoryError", "integer too large");
          }
          r = x * y;
          break;
        case BinOp::kDiv:
          return IntTrueDiv(x, y);
        case BinOp::kFloorDiv:
          if (y == 0) throw ExecError("ZeroDivisionError", "integer division or modulo by zero");
          mpz_fdiv_q(r.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
          break;
        case BinOp::kMod:
          if (y == 0) throw ExecError("ZeroDivisionError", "integer modulo by zero");
          mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
          break;
        case BinOp::kPow:
          return IntPow(x, y);
      }
      CheckIntSize(r);
      return Value(std::move(r));
    }
    double x = a.to_double();
    double y = b.to_double();
    switch (op) {
      case BinOp::kAdd:
        return FloatResult(x + y);
      case BinOp::kSub:
        return FloatResult(x - y);
      case BinOp::kMul:
        return FloatResult(x * y);
      case BinOp::kDiv:
        if (y == 0.0) throw ExecError("ZeroDivisionError", "float division by zero");
        return FloatResult(x / y);
      case BinOp::kFloorDiv:
        return FloatResult(FloatFloorDiv(x, y, false, nullptr));
      case BinOp::kMod: {
        double mod = 0;
        FloatFloorDiv(x, y, true, &mod);
        return FloatResult(mod);
      }
      case BinOp::kPow:
        return FloatPow(x, y);
    }
  }
  if (op == BinOp::kAdd) {
    if (a.is(Kind::kStr) && b.is(Kind::kStr)) {
      CheckSize(a.as_str().size() + b.as_str().size());
      return Value::FromU32(a.as_str() + b.as_str());
    }
    if (a.is(Kind::kList) && inplace) {
      std::vector<Value> extra = Materialize(b);
      auto& items = a.as_list()->items;
      CheckSize(items.size() + extra.size());
      items.insert(items.end(), extra.begin(), extra.end());
      return a;
    }
    if (a.is(Kind::kList) && b.is(Kind::kList)) {
      std::vector<Value> items = a.as_list()->items;
      const auto& rhs = b.as_list()->items;
      CheckSize(items.size() + rhs.size());
      items.insert(items.end(), rhs.begin(), rhs.end());
      return Value::MakeList(std::move(items));
    }
    if (a.is(Kind::kTuple) && b.is(Kind::kTuple)) {
      std::vector<Value> items = *a.as_tuple();
      CheckSize(items.size() + b.as_tuple()->size());
      items.insert(items.end(), b.as_tuple()->begin(), b.as_tuple()->end());
      return Value::MakeTuple(std::move(items));
    }
    if (a.is(Kind::kList) || b.is(Kind::kList)) {
      TypeError("can only concatenate list (not \"" + TypeName(a.is(Kind::kList) ? b : a) +
                "\") to list");
    }
    if (a.is(Kind::kStr)) {
      TypeError("can only concatenate str (not \"" + TypeName(b) + "\") to str");
    }
  }
  if (op == BinOp::kMul) {
    const Value* seq = nullptr;
    const Value* count = nullptr;
    if (b.is_integral()) {
      seq = &a;
      count = &b;
    } else if (a.is_integral()) {
      seq = &b;
      count = &a;
    }
    if (seq != nullptr) {
      std::int64_t n = RepeatCount(*count);
      if (seq->is(Kind::kStr)) {
        const auto& s = seq->as_str();
        CheckSize(s.size() * static_cast<std::size_t>(n));
        std::u32string out;
        out.reserve(s.size() * static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) out += s;
        return Value::FromU32(std::move(out));
      }
      if (seq->is(Kind::kList)) {
        std::vector<Value> out = Repeat(seq->as_list()->items, n);
        if (inplace && seq == &a) {
          a.as_list()->items = std::move(out);
          return a;
        }
        return Value::MakeList(std::move(out));
      }
      if (seq->is(Kind::kTuple)) return Value::MakeTuple(Repeat(*seq->as_tuple(), n));
    }
    if ((a.is(Kind::kStr) || a.is(Kind::kList) || a.is(Kind::kTuple)) && !b.is_integral()) {
      TypeError("can't multiply sequence by non-int of type '" + TypeName(b) + "'");
    }
  }
  if (op == BinOp::kMod && a.is(Kind::kStr)) {
    TypeError("not all arguments converted during string formatting");
  }
  Unsupported(inplace ? std::string(sym) + "=" : std::string(sym), a, b);
}

bool Contains(const Value& container, const Value& needle) {
  switch (container.kind()) {
    case Kind::kStr: {
      if (!needle.is(Kind::kStr)) {
        TypeError("'in <string>' requires string as left operand, not " + TypeName(needle));
      }
      return container.as_str().find(needle.as_str()) != std::u32string::npos;
    }
    case Kind::kList:
      for (const auto& item : container.as_list()->items) {
        if (Equal(item, needle)) return true;
      }
      return false;
    case Kind::kTuple:
      for (const auto& item : *container.as_tuple()) {
        if (Equal(item, needle)) return true;
      }
      return false;
    case Kind::kDict:
      return container.as_dict()->find(needle) != nullptr;
    case Kind::kRange: {
      const Range& r = container.as_range();
      if (needle.is_integral()) {
        BigInt v = needle.integral();
        if (!v.fits_slong_p()) return false;
        __int128 x = v.get_si();
        __int128 n = r.size();
        if (n == 0) return false;
        __int128 off = x - r.start;
        if (off % r.step != 0) return false;
        __int128 idx = off / r.step;
        return idx >= 0 && idx < n;
      }
      for (std::int64_t i = 0; i < r.size(); ++i) {
        if (Equal(Value(static_cast<long>(r.at(i))), needle)) return true;
      }
      return false;
    }
    case Kind::kDictView: {
      const DictView& view = container.as_view();
      if (view.kind == ViewKind::kKeys) return view.dict->find(needle) != nullptr;
      for (const auto& [k, v] : view.dict->items) {
        if (view.kind == ViewKind::kValues) {
          if (Equal(v, needle)) return true;
        } else if (Equal(Value::MakeTuple({k, v}), needle)) {
          return true;
        }
      }
      return false;
    }
    default:
      TypeError("argument of type '" + TypeName(container) + "' is not iterable");
  }
}

bool Order(CmpOp op, const Value& a, const Value& b) {
  try {
    switch (op) {
      case CmpOp::kLt:
        return Less(a, b);
      case CmpOp::kGt:
        return Less(b, a);
      case CmpOp::kLe:
        return Less(a, b) || Equal(a, b);
      case CmpOp::kGe:
        return Less(b, a) || Equal(a, b);
      default:
        return false;
    }
  } catch (const ExecError& e) {
    if (e.kind() != "TypeError") throw;
    TypeError("'" + std::string(Symbol(op)) + "' not supported between instances of '" +
              TypeName(a) + "' and '" + TypeName(b) + "'");
  }
}

std::int64_t NormalizeIndex(const Value& index, std::int64_t size, const char* what) {
  if (!index.is_integral()) {
    TypeError(std::string(what) + " indices must be integers or slices, not " + TypeName(index));
  }
  BigInt i = index.integral();
  if (i < 0) i += size;
  if (i < 0 || i >= size) {
    throw ExecError("IndexError", std::string(what) + " index out of range");
  }
  return i.get_si();
}

// Slice bounds resolution following the reference algorithm.
struct SliceSpec {
  std::int64_t start, stop, step, length;
};

std::int64_t ClampBound(const Value& v, std::int64_t size, std::int64_t step, bool is_start) {
  if (v.is_none()) {
    if (step > 0) return is_start ? 0 : size;
    return is_start ? size - 1 : -1;
  }
  if (!v.is_integral()) {
    TypeError("slice indices must be integers or None or have an __index__ method");
  }
  BigInt b = v.integral();
  if (b < 0) {
    b += size;
    if (b < 0) return step < 0 ? -1 : 0;
    return b.get_si();
  }
  if (b >= size) return step < 0 ? size - 1 : size;
  return b.get_si();
}

SliceSpec ResolveSlice(const Value& lower, const Value& upper, const Value& step_v,
                       std::int64_t size) {
  std::int64_t step = 1;
  if (!step_v.is_none()) {
    if (!step_v.is_integral()) {
      TypeError("slice indices must be integers or None or have an __index__ method");
    }
    step = ToInt64(step_v.integral(), "ssize_t");
    if (step == 0) ValueError("slice step cannot be zero");
  }
  SliceSpec s{};
  s.step = step;
  s.start = ClampBound(lower, size, step, true);
  s.stop = ClampBound(upper, size, step, false);
  if (step > 0) {
    s.length = s.start < s.stop ? (s.stop - s.start + step - 1) / step : 0;
  } else {
    s.length = s.start > s.stop ? (s.start - s.stop - step - 1) / (-step) : 0;
  }
  return s;
}

void ExpectArgs(std::string_view name, std::span<const Value> args, std::size_t lo,
                std::size_t hi) {
  if (args.size() >= lo && args.size() <= hi) return;
  std::string n(name);
  if (lo == hi) {
    if (lo == 0) TypeError(n + "() takes no arguments (" + std::to_string(args.size()) + " given)");
    if (lo == 1) {
      TypeError(n + "() takes exactly one argument (" + std::to_string(args.size()) + " given)");
    }
    TypeError(n + "() takes exactly " + std::to_string(lo) + " arguments (" +
              std::to_string(args.size()) + " given)");
  }
  if (args.size() < lo) {
    TypeError(n + " expected at least " + std::to_string(lo) + " argument" + (lo == 1 ? "" : "s") +
              ", got " + std::to_string(args.size()));
  }
  TypeError(n + " expected at most " + std::to_string(hi) + " argument" + (hi == 1 ? "" : "s") +
            ", got " + std::to_string(args.size()));
}

const std::u32string& ExpectStr(const Value& v, std::string_view context) {
  if (!v.is(Kind::kStr)) {
    TypeError(std::string(context) + " must be str, not " + TypeName(v));
  }
  return v.as_str();
}

bool IsSpace(char32_t c) {
  return c == U' ' || (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x1F) || c == 0x85 ||
         c == 0xA0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x1680;
}

bool IsUpper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool IsLower(char32_t c) { return c >= U'a' && c <= U'z'; }

std::int64_t Len(const Value& v) {
  switch (v.kind()) {
    case Kind::kStr:
      return static_cast<std::int64_t>(v.as_str().size());
    case Kind::kList:
      return static_cast<std::int64_t>(v.as_list()->items.size());
    case Kind::kTuple:
      return static_cast<std::int64_t>(v.as_tuple()->size());
    case Kind::kDict:
      return static_cast<std::int64_t>(v.as_dict()->size());
    case Kind::kRange:
      return v.as_range().size();
    case Kind::kDictView:
      return static_cast<std::int64_t>(v.as_view().dict->size());
    default:
      TypeError("object of type '" + TypeName(v) + "' has no len()");
  }
}

Value SortedList(std::vector<Value> items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const Value& a, const Value& b) { return Order(CmpOp::kLt, a, b); });
  return Value::MakeList(std::move(items));
}

Value MinMax(std::string_view name, std::span<const Value> args, bool is_max) {
  if (args.empty()) {
    TypeError(std::string(name) + " expected at least 1 argument, got 0");
  }
  std::vector<Value> items =
      args.size() == 1 ? Materialize(args[0]) : std::vector<Value>(args.begin(), args.end());
  if (items.empty()) ValueError(std::string(name) + "() arg is an empty sequence");
  Value best = items[0];
  for (std::size_t i = 1; i < items.size(); ++i) {
    bool better = is_max ? Order(CmpOp::kGt, items[i], best) : Order(CmpOp::kLt, items[i], best);
    if (better) best = items[i];
  }
  return best;
}

Value ParseIntText(const std::u32string& text) {
  std::size_t b = 0, e = text.size();
  while (b < e && IsSpace(text[b])) ++b;
  while (e > b && IsSpace(text[e - 1])) --e;
  std::string digits;
  bool ok = b < e;
  std::size_t i = b;
  bool neg = false;
  if (ok && (text[i] == U'+' || text[i] == U'-')) {
    neg = text[i] == U'-';
    ++i;
  }
  bool last_digit = false;
  if (i >= e) ok = false;
  for (; ok && i < e; ++i) {
    char32_t c = text[i];
    if (c >= U'0' && c <= U'9') {
      digits.push_back(static_cast<char>(c));
      last_digit = true;
    } else if (c == U'_' && last_digit && i + 1 < e) {
      last_digit = false;
    } else {
      ok = false;
    }
  }
  if (!ok || digits.empty() || !last_digit) {
    ValueError("invalid literal for int() with base 10: " + ReprString(text));
  }
  if (digits.size() > 4300) {
    ValueError("Exceeds the limit (4300 digits) for integer string conversion");
  }
  BigInt v(digits);
  if (neg) v = -v;
  return Value(v);
}

Value ToInt(std::span<const Value> args) {
  ExpectArgs("int", args, 0, 1);
  if (args.empty()) return Value(0);
  const Value& v = args[0];
  if (v.is_integral()) return Value(v.integral());
  if (v.is(Kind::kFloat)) {
    double d = v.as_float();
    if (std::isnan(d)) ValueError("cannot convert float NaN to integer");
    if (std::isinf(d)) throw ExecError("OverflowError", "cannot convert float infinity to integer");
    return Value(BigInt(std::trunc(d)));
  }
  if (v.is(Kind::kStr)) return ParseIntText(v.as_str());
  TypeError("int() argument must be a string, a bytes-like object or a real number, not '" +
            TypeName(v) + "'");
}

Value MakeRange(std::span<const Value> args) {
  if (args.empty()) TypeError("range expected at least 1 argument, got 0");
  ExpectArgs("range", args, 1, 3);
  std::array<std::int64_t, 3> vals{};
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].is_integral()) {
      TypeError("'" + TypeName(args[i]) + "' object cannot be interpreted as an integer");
    }
    vals[i] = ToInt64(args[i].integral(), "ssize_t");
  }
  Range r;
  if (args.size() == 1) {
    r.stop = vals[0];
  } else {
    r.start = vals[0];
    r.stop = vals[1];
    if (args.size() == 3) {
      if (vals[2] == 0) ValueError("range() arg 3 must not be zero");
      r.step = vals[2];
    }
  }
  return Value(r);
}

std::u32string Strip(const std::u32string& s, std::span<const Value> args, bool left,
                     bool right) {
  std::u32string chars;
  bool whitespace = true;
  if (!args.empty() && !args[0].is_none()) {
    chars = ExpectStr(args[0], "strip arg");
    whitespace = false;
  }
  auto strip_char = [&](char32_t c) {
    return whitespace ? IsSpace(c) : chars.find(c) != std::u32string::npos;
  };
  std::size_t b = 0, e = s.size();
  if (left) {
    while (b < e && strip_char(s[b])) ++b;
  }
  if (right) {
    while (e > b && strip_char(s[e - 1])) --e;
  }
  return s.substr(b, e - b);
}

Value Split(const std::u32string& s, std::span<const Value> args) {
  std::int64_t maxsplit = -1;
  if (args.size() >= 2) {
    if (!args[1].is_integral()) {
      TypeError("'" + TypeName(args[1]) + "' object cannot be interpreted as an integer");
    }
    maxsplit = ToInt64(args[1].integral(), "ssize_t");
  }
  std::vector<Value> parts;
  if (args.empty() || args[0].is_none()) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (true) {
      while (i < n && IsSpace(s[i])) ++i;
      if (i >= n) break;
      if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) >= maxsplit) {
        std::size_t e = n;
        while (e > i && IsSpace(s[e - 1])) --e;
        parts.push_back(Value::FromU32(s.substr(i, e - i)));
        break;
      }
      std::size_t j = i;
      while (j < n && !IsSpace(s[j])) ++j;
      parts.push_back(Value::FromU32(s.substr(i, j - i)));
      i = j;
    }
    return Value::MakeList(std::move(parts));
  }
  const std::u32string& sep = ExpectStr(args[0], "must be str or None, not");
  if (sep.empty()) ValueError("empty separator");
  std::size_t start = 0;
  while (true) {
    if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) >= maxsplit) break;
    std::size_t found = s.find(sep, start);
    if (found == std::u32string::npos) break;
    parts.push_back(Value::FromU32(s.substr(start, found - start)));
    start = found + sep.size();
  }
  parts.push_back(Value::FromU32(s.substr(start)));
  return Value::MakeList(std::move(parts));
}

Value Replace(const std::u32string& s, std::span<const Value> args) {
  const std::u32string& old_s = ExpectStr(args[0], "replace() argument 1");
  const std::u32string& new_s = ExpectStr(args[1], "replace() argument 2");
  std::int64_t count = -1;
  if (args.size() == 3) {
    if (!args[2].is_integral()) {
      TypeError("'" + TypeName(args[2]) + "' object cannot be interpreted as an integer");
    }
    count = ToInt64(args[2].integral(), "ssize_t");
  }
  std::u32string out;
  std::int64_t done = 0;
  if (old_s.empty()) {
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (count < 0 || done < count) {
        out += new_s;
        ++done;
      }
      if (i < s.size()) out.push_back(s[i]);
    }
    CheckSize(out.size());
    return Value::FromU32(std::move(out));
  }
  std::size_t start = 0;
  while (count < 0 || done < count) {
    std::size_t found = s.find(old_s, start);
    if (found == std::u32string::npos) break;
    out.append(s, start, found - start);
    out += new_s;
    start = found + old_s.size();
    ++done;
    CheckSize(out.size());
  }
  out.append(s, start, std::u32string::npos);
  return Value::FromU32(std::move(out));
}

bool AffixMatch(const std::u32string& s, const Value& affix, bool prefix) {
  auto check = [&](const Value& v) {
    const std::u32string& a = ExpectStr(v, prefix ? "startswith first arg" : "endswith first arg");
    if (a.size() > s.size()) return false;
    return prefix ? s.compare(0, a.size(), a) == 0
                  : s.compare(s.size() - a.size(), a.size(), a) == 0;
  };
  if (affix.is(Kind::kTuple)) {
    for (const auto& v : *affix.as_tuple()) {
      if (check(v)) return true;
    }
    return false;
  }
  return check(affix);
}

std::int64_t CountSub(const std::u32string& s, const std::u32string& sub) {
  if (sub.empty()) return static_cast<std::int64_t>(s.size()) + 1;
  std::int64_t n = 0;
  std::size_t start = 0;
  while (true) {
    std::size_t found = s.find(sub, start);
    if (found == std::u32string::npos) break;
    ++n;
    start = found + sub.size();
  }
  return n;
}

Value StrMethod(const Value& self, std::string_view name, std::span<const Value> args) {
  const std::u32string& s = self.as_str();
  if (name == "upper" || name == "lower") {
    ExpectArgs(name, args, 0, 0);
    std::u32string out = s;
    for (auto& c : out) {
      if (name == "upper" && IsLower(c)) c = c - U'a' + U'A';
      if (name == "lower" && IsUpper(c)) c = c - U'A' + U'a';
    }
    return Value::FromU32(std::move(out));
  }
  if (name == "strip") {
    ExpectArgs(name, args, 0, 1);
    return Value::FromU32(Strip(s, args, true, true));
  }
  if (name == "split") {
    ExpectArgs(name, args, 0, 2);
    return Split(s, args);
  }
  if (name == "join") {
    ExpectArgs(name, args, 1, 1);
    std::u32string out;
    std::vector<Value> items = Materialize(args[0]);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!items[i].is(Kind::kStr)) {
        TypeError("sequence item " + std::to_string(i) + ": expected str instance, " +
                  TypeName(items[i]) + " found");
      }
      if (i > 0) out += s;
      out += items[i].as_str();
      CheckSize(out.size());
    }
    return Value::FromU32(std::move(out));
  }
  if (name == "replace") {
    ExpectArgs(name, args, 2, 3);
    return Replace(s, args);
  }
  if (name == "startswith" || name == "endswith") {
    ExpectArgs(name, args, 1, 1);
    return Value(AffixMatch(s, args[0], name == "startswith"));
  }
  if (name == "isdigit") {
    ExpectArgs(name, args, 0, 0);
    bool ok = !s.empty() &&
              std::all_of(s.begin(), s.end(), [](char32_t c) { return c >= U'0' && c <= U'9'; });
    return Value(ok);
  }
  if (name == "istitle") {
    ExpectArgs(name, args, 0, 0);
    bool cased = false;
    bool prev_cased = false;
    for (char32_t c : s) {
      if (IsUpper(c)) {
        if (prev_cased) return Value(false);
        prev_cased = true;
        cased = true;
      } else if (IsLower(c)) {
        if (!prev_cased) return Value(false);
        prev_cased = true;
        cased = true;
      } else {
        prev_cased = false;
      }
    }
    return Value(cased);
  }
  if (name == "count") {
    ExpectArgs(name, args, 1, 1);
    return Value(static_cast<long>(CountSub(s, ExpectStr(args[0], "count() argument"))));
  }
  if (name == "find") {
    ExpectArgs(name, args, 1, 1);
    std::size_t pos = s.find(ExpectStr(args[0], "find() argument"));
    return Value(pos == std::u32string::npos ? -1L : static_cast<long>(pos));
  }
  throw ExecError("AttributeError", "'str' object has no attribute '" + std::string(name) + "'");
}

Value ListMethod(const Value& self, std::string_view name, std::span<const Value> args) {
  auto& items = self.as_list()->items;
  if (name == "append") {
    ExpectArgs("list.append", args, 1, 1);
    CheckSize(items.size() + 1);
    items.push_back(args[0]);
    return Value();
  }
  if (name == "pop") {
    ExpectArgs("pop", args, 0, 1);
    if (items.empty()) throw ExecError("IndexError", "pop from empty list");
    std::int64_t size = static_cast<std::int64_t>(items.size());
    std::int64_t idx = size - 1;
    if (!args.empty()) {
      if (!args[0].is_integral()) {
        TypeError("'" + TypeName(args[0]) + "' object cannot be interpreted as an integer");
      }
      BigInt i = args[0].integral();
      if (i < 0) i += size;
      if (i < 0 || i >= size) throw ExecError("IndexError", "pop index out of range");
      idx = i.get_si();
    }
    Value out = items[static_cast<std::size_t>(idx)];
    items.erase(items.begin() + idx);
    return out;
  }
  if (name == "insert") {
    ExpectArgs("insert", args, 2, 2);
    if (!args[0].is_integral()) {
      TypeError("'" + TypeName(args[0]) + "' object cannot be interpreted as an integer");
    }
    std::int64_t size = static_cast<std::int64_t>(items.size());
    BigInt i = args[0].integral();
    if (i < 0) i += size;
    std::int64_t idx = i < 0 ? 0 : (i > size ? size : i.get_si());
    CheckSize(items.size() + 1);
    items.insert(items.begin() + idx, args[1]);
    return Value();
  }
  if (name == "remove" || name == "index") {
    ExpectArgs(std::string("list.") + std::string(name), args, 1, 1);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (Equal(items[i], args[0])) {
        if (name == "index") return Value(static_cast<long>(i));
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(i));
        return Value();
      }
    }
    if (name == "remove") ValueError("list.remove(x): x not in list");
    ValueError(Repr(args[0]) + " is not in list");
  }
  if (name == "count") {
    ExpectArgs("list.count", args, 1, 1);
    long n = 0;
    for (const auto& item : items) n += Equal(item, args[0]) ? 1 : 0;
    return Value(n);
  }
  if (name == "reverse") {
    ExpectArgs("reverse", args, 0, 0);
    std::reverse(items.begin(), items.end());
    return Value();
  }
  if (name == "sort") {
    ExpectArgs("sort", args, 0, 0);
    std::vector<Value> copy = items;
    items = SortedList(std::move(copy)).as_list()->items;
    return Value();
  }
  throw ExecError("AttributeError", "'list' object has no attribute '" + std::string(name) + "'");
}

Value DictMethod(const Value& self, std::string_view name, std::span<const Value> args) {
  const Dict& d = self.as_dict();
  if (name == "keys" || name == "values" || name == "items") {
    ExpectArgs(name, args, 0, 0);
    ViewKind kind = name == "keys" ? ViewKind::kKeys
                    : name == "values" ? ViewKind::kValues
                                       : ViewKind::kItems;
    return Value(DictView{kind, d});
  }
  if (name == "get") {
    ExpectArgs("get", args, 1, 2);
    const Value* found = d->find(args[0]);
    if (found != nullptr) return *found;
    return args.size() == 2 ? args[1] : Value();
  }
  throw ExecError("AttributeError", "'dict' object has no attribute '" + std::string(name) + "'");
}

constexpr std::array<std::string_view, 12> kBuiltins = {
    "len", "range", "abs", "min", "max", "sum", "sorted", "str", "int", "bool", "enumerate", "zip"};

}  // namespace

std::string_view Symbol(BinOp op) {
  switch (op) {
    case BinOp::kAdd:
      return "+";
    case BinOp::kSub:
      return "-";
    case BinOp::kMul:
      return "*";
    case BinOp::kDiv:
      return "/";
    case BinOp::kFloorDiv:
      return "//";
    case BinOp::kMod:
      return "%";
    case BinOp::kPow:
      return "**";
  }
  return "?";
}

std::string_view Symbol(UnaryOp op) { return op == UnaryOp::kNeg ? "-" : "not"; }

std::string_view Symbol(CmpOp op) {
  switch (op) {
    case CmpOp::kEq:
      return "==";
    case CmpOp::kNe:
      return "!=";
    case CmpOp::kLt:
      return "<";
    case CmpOp::kLe:
      return "<=";
    case CmpOp::kGt:
      return ">";
    case CmpOp::kGe:
      return ">=";
    case CmpOp::kIn:
      return "in";
    case CmpOp::kNotIn:
      return "not in";
  }
  return "?";
}

Value BinaryOperation(BinOp op, const Value& a, const Value& b, bool inplace) {
  return Arith(op, a, b, inplace);
}

Value UnaryOperation(UnaryOp op, const Value& v) {
  if (op == UnaryOp::kNot) return Value(!Truthy(v));
  if (v.is_integral()) return Value(BigInt(-v.integral()));
  if (v.is(Kind::kFloat)) return Value(-v.as_float());
  TypeError("bad operand type for unary -: '" + TypeName(v) + "'");
}

bool Compare(CmpOp op, const Value& a, const Value& b) {
  switch (op) {
    case CmpOp::kEq:
      return Equal(a, b);
    case CmpOp::kNe:
      return !Equal(a, b);
    case CmpOp::kIn:
      return Contains(b, a);
    case CmpOp::kNotIn:
      return !Contains(b, a);
    default:
      return Order(op, a, b);
  }
}

Value Index(const Value& container, const Value& index) {
  switch (container.kind()) {
    case Kind::kList: {
      const auto& items = container.as_list()->items;
      return items[static_cast<std::size_t>(
          NormalizeIndex(index, static_cast<std::int64_t>(items.size()), "list"))];
    }
    case Kind::kTuple: {
      const auto& items = *container.as_tuple();
      return items[static_cast<std::size_t>(
          NormalizeIndex(index, static_cast<std::int64_t>(items.size()), "tuple"))];
    }
    case Kind::kStr: {
      const auto& s = container.as_str();
      std::int64_t i = NormalizeIndex(index, static_cast<std::int64_t>(s.size()), "string");
      return Value::FromU32(std::u32string(1, s[static_cast<std::size_t>(i)]));
    }
    case Kind::kRange: {
      const Range& r = container.as_range();
      std::int64_t i = NormalizeIndex(index, r.size(), "range object");
      return Value(static_cast<long>(r.at(i)));
    }
    case Kind::kDict: {
      const Value* found = container.as_dict()->find(index);
      if (found == nullptr) throw ExecError("KeyError", Repr(index));
      return *found;
    }
    default:
      TypeError("'" + TypeName(container) + "' object is not subscriptable");
  }
}

void StoreIndex(const Value& container, const Value& index, Value value) {
  if (container.is(Kind::kList)) {
    auto& items = container.as_list()->items;
    if (!index.is_integral()) {
      TypeError("list indices must be integers or slices, not " + TypeName(index));
    }
    BigInt i = index.integral();
    std::int64_t size = static_cast<std::int64_t>(items.size());
    if (i < 0) i += size;
    if (i < 0 || i >= size) throw ExecError("IndexError", "list assignment index out of range");
    items[i.get_si()] = std::move(value);
    return;
  }
  if (container.is(Kind::kDict)) {
    container.as_dict()->set(index, std::move(value));
    return;
  }
  TypeError("'" + TypeName(container) + "' object does not support item assignment");
}

Value Slice(const Value& container, const Value& lower, const Value& upper, const Value& step) {
  auto take = [&](auto size, auto&& get) {
    SliceSpec s = ResolveSlice(lower, upper, step, static_cast<std::int64_t>(size));
    std::vector<Value> out;
    out.reserve(static_cast<std::size_t>(s.length));
    for (std::int64_t i = 0; i < s.length; ++i) out.push_back(get(s.start + i * s.step));
    return out;
  };
  switch (container.kind()) {
    case Kind::kList: {
      const auto& items = container.as_list()->items;
      return Value::MakeList(
          take(items.size(), [&](std::int64_t i) { return items[static_cast<std::size_t>(i)]; }));
    }
    case Kind::kTuple: {
      const auto& items = *container.as_tuple();
      return Value::MakeTuple(
          take(items.size(), [&](std::int64_t i) { return items[static_cast<std::size_t>(i)]; }));
    }
    case Kind::kStr: {
      const auto& str = container.as_str();
      SliceSpec s = ResolveSlice(lower, upper, step, static_cast<std::int64_t>(str.size()));
      std::u32string out;
      for (std::int64_t i = 0; i < s.length; ++i) {
        out.push_back(str[static_cast<std::size_t>(s.start + i * s.step)]);
      }
      return Value::FromU32(std::move(out));
    }
    case Kind::kRange: {
      const Range& r = container.as_range();
      SliceSpec s = ResolveSlice(lower, upper, step, r.size());
      Range out;
      out.step = r.step * s.step;
      out.start = r.start + s.start * r.step;
      out.stop = out.start + s.length * out.step;
      return Value(out);
    }
    default:
      TypeError("'" + TypeName(container) + "' object is not subscriptable");
  }
}

Iter GetIter(const Value& v, bool for_loop) {
  auto it = std::make_shared<IterObject>();
  it->for_loop = for_loop;
  switch (v.kind()) {
    case Kind::kRange:
      it->kind = IterKind::kRange;
      break;
    case Kind::kList:
      it->kind = IterKind::kList;
      break;
    case Kind::kTuple:
      it->kind = IterKind::kTuple;
      break;
    case Kind::kStr:
      it->kind = IterKind::kStr;
      break;
    case Kind::kDict:
      it->kind = IterKind::kDictKeys;
      it->expected_size = v.as_dict()->size();
      it->source = v;
      return it;
    case Kind::kDictView:
      it->kind = v.as_view().kind == ViewKind::kKeys     ? IterKind::kDictKeys
                 : v.as_view().kind == ViewKind::kValues ? IterKind::kDictValues
                                                         : IterKind::kDictItems;
      it->expected_size = v.as_view().dict->size();
      it->source = Value(v.as_view().dict);
      return it;
    case Kind::kIter:
      if (!for_loop) return v.as_iter();
      it->kind = IterKind::kForward;
      it->inner.push_back(v.as_iter());
      return it;
    default:
      TypeError("'" + TypeName(v) + "' object is not iterable");
  }
  it->source = v;
  return it;
}

std::optional<Value> IterNext(IterObject& it) {
  if (it.exhausted) return std::nullopt;
  std::optional<Value> out;
  switch (it.kind) {
    case IterKind::kRange: {
      const Range& r = it.source.as_range();
      if (it.pos < r.size()) out = Value(static_cast<long>(r.at(it.pos++)));
      break;
    }
    case IterKind::kList: {
      const auto& items = it.source.as_list()->items;
      if (it.pos < static_cast<std::int64_t>(items.size())) out = items[it.pos++];
      break;
    }
    case IterKind::kTuple: {
      const auto& items = *it.source.as_tuple();
      if (it.pos < static_cast<std::int64_t>(items.size())) out = items[it.pos++];
      break;
    }
    case IterKind::kStr: {
      const auto& s = it.source.as_str();
      if (it.pos < static_cast<std::int64_t>(s.size())) {
        out = Value::FromU32(std::u32string(1, s[it.pos++]));
      }
      break;
    }
    case IterKind::kDictKeys:
    case IterKind::kDictValues:
    case IterKind::kDictItems: {
      const auto& d = *it.source.as_dict();
      if (d.size() != it.expected_size) {
        it.exhausted = true;
        throw ExecError("RuntimeError", "dictionary changed size during iteration");
      }
      if (it.pos < static_cast<std::int64_t>(d.size())) {
        const auto& [k, v] = d.items[it.pos++];
        if (it.kind == IterKind::kDictKeys) {
          out = k;
        } else if (it.kind == IterKind::kDictValues) {
          out = v;
        } else {
          out = Value::MakeTuple({k, v});
        }
      }
      break;
    }
    case IterKind::kEnumerate: {
      auto inner = IterNext(*it.inner[0]);
      if (inner) {
        out = Value::MakeTuple({Value(it.counter), *inner});
        it.counter += 1;
      }
      break;
    }
    case IterKind::kZip: {
      if (it.inner.empty()) break;
      std::vector<Value> row;
      for (auto& inner : it.inner) {
        auto v = IterNext(*inner);
        if (!v) {
          row.clear();
          break;
        }
        row.push_back(*v);
      }
      if (!row.empty()) out = Value::MakeTuple(std::move(row));
      break;
    }
    case IterKind::kForward:
      out = IterNext(*it.inner[0]);
      break;
  }
  if (out) {
    ++it.yielded;
  } else {
    it.exhausted = true;
  }
  return out;
}

std::vector<Value> Materialize(const Value& iterable) {
  switch (iterable.kind()) {
    case Kind::kList:
      return iterable.as_list()->items;
    case Kind::kTuple:
      return *iterable.as_tuple();
    default:
      break;
  }
  Iter it = GetIter(iterable, false);
  std::vector<Value> out;
  while (auto v = IterNext(*it)) {
    out.push_back(std::move(*v));
    CheckSize(out.size());
  }
  return out;
}

bool IsBuiltin(std::string_view name) {
  return std::find(kBuiltins.begin(), kBuiltins.end(), name) != kBuiltins.end() ||
         name == kIterableHelper || name == kLengthHelper;
}

Value CallBuiltin(std::string_view name, std::span<const Value> args) {
  if (name == "len" || name == kLengthHelper) {
    ExpectArgs("len", args, 1, 1);
    return Value(static_cast<long>(Len(args[0])));
  }
  if (name == "range") return MakeRange(args);
  if (name == "abs") {
    ExpectArgs("abs", args, 1, 1);
    if (args[0].is_integral()) return Value(BigInt(abs(args[0].integral())));
    if (args[0].is(Kind::kFloat)) return Value(std::fabs(args[0].as_float()));
    TypeError("bad operand type for abs(): '" + TypeName(args[0]) + "'");
  }
  if (name == "min") return MinMax("min", args, false);
  if (name == "max") return MinMax("max", args, true);
  if (name == "sum") {
    ExpectArgs("sum", args, 1, 2);
    Value acc = args.size() == 2 ? args[1] : Value(0);
    if (acc.is(Kind::kStr)) TypeError("sum() can't sum strings [use ''.join(seq) instead]");
    for (const auto& item : Materialize(args[0])) acc = BinaryOperation(BinOp::kAdd, acc, item);
    return acc;
  }
  if (name == "sorted") {
    ExpectArgs("sorted", args, 1, 1);
    return SortedList(Materialize(args[0]));
  }
  if (name == "str") {
    ExpectArgs("str", args, 0, 1);
    if (args.empty()) return Value::FromU32(U"");
    return Value::FromUtf8(ToDisplayString(args[0]));
  }
  if (name == "int") return ToInt(args);
  if (name == "bool") {
    ExpectArgs("bool", args, 0, 1);
    return Value(!args.empty() && Truthy(args[0]));
  }
  if (name == "enumerate") {
    ExpectArgs("enumerate", args, 1, 2);
    auto it = std::make_shared<IterObject>();
    it->kind = IterKind::kEnumerate;
    it->inner.push_back(GetIter(args[0], false));
    if (args.size() == 2) {
      if (!args[1].is_integral()) {
        TypeError("'" + TypeName(args[1]) + "' object cannot be interpreted as an integer");
      }
      it->counter = args[1].integral();
    }
    return Value(it);
  }
  if (name == "zip") {
    auto it = std::make_shared<IterObject>();
    it->kind = IterKind::kZip;
    for (const auto& arg : args) it->inner.push_back(GetIter(arg, false));
    return Value(it);
  }
  if (name == kIterableHelper) {
    ExpectArgs(name, args, 1, 1);
    switch (args[0].kind()) {
      case Kind::kList:
      case Kind::kTuple:
      case Kind::kStr:
      case Kind::kRange:
        return args[0];
      default:
        return Value::MakeList(Materialize(args[0]));
    }
  }
  throw ExecError("NameError", "name '" + std::string(name) + "' is not defined");
}

Value CallMethod(const Value& self, std::string_view name, std::span<const Value> args) {
  switch (self.kind()) {
    case Kind::kStr:
      return StrMethod(self, name, args);
    case Kind::kList:
      return ListMethod(self, name, args);
    case Kind::kDict:
      return DictMethod(self, name, args);
    default:
      throw ExecError("AttributeError", "'" + TypeName(self) + "' object has no attribute '" +
                                            std::string(name) + "'");
  }
}

}  // namespace exectrace
