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

// Runtime value model for MiniLang.
//
// Lists and dicts are reference objects shared between variables, exactly as
// in the reference language; tuples and strings are immutable and shared
// freely. Snapshots taken by the tracer go through DeepCopy() so that later
// mutation never reaches an earlier event.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace exectrace {

using BigInt = mpz_class;

// Raised by any runtime operation; captured into a Trace outcome by the tracer.
class ExecError : public std::runtime_error {
 public:
  ExecError(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct NoneValue {
  friend bool operator==(NoneValue, NoneValue) { return true; }
};

struct Range {
  std::int64_t start = 0;
  std::int64_t stop = 0;
  std::int64_t step = 1;

  std::int64_t size() const;
  std::int64_t at(std::int64_t index) const { return start + index * step; }
};

struct FuncRef {
  std::string name;
  bool builtin = false;
};

class Value;
struct ListObject;
struct DictObject;
struct IterObject;

using Str = std::shared_ptr<const std::u32string>;
using List = std::shared_ptr<ListObject>;
using Tuple = std::shared_ptr<const std::vector<Value>>;
using Dict = std::shared_ptr<DictObject>;
using Iter = std::shared_ptr<IterObject>;

enum class ViewKind { kKeys, kValues, kItems };

struct DictView {
  ViewKind kind = ViewKind::kKeys;
  Dict dict;
};

enum class Kind {
  kNone,
  kBool,
  kInt,
  kFloat,
  kStr,
  kList,
  kTuple,
  kDict,
  kRange,
  kFunc,
  kIter,
  kDictView,
};

class Value {
 public:
  Value() = default;
  Value(NoneValue) {}
  Value(bool b) : data_(b) {}
  Value(const char*) = delete;
  Value(BigInt i) : data_(std::move(i)) {}
  Value(int i) : data_(BigInt(i)) {}
  Value(long i) : data_(BigInt(i)) {}
  Value(long long i) : data_(BigInt(std::to_string(i))) {}
  Value(double d) : data_(d) {}
  Value(Str s) : data_(std::move(s)) {}
  Value(List l) : data_(std::move(l)) {}
  Value(Tuple t) : data_(std::move(t)) {}
  Value(Dict d) : data_(std::move(d)) {}
  Value(Range r) : data_(r) {}
  Value(FuncRef f) : data_(std::move(f)) {}
  Value(Iter it) : data_(std::move(it)) {}
  Value(DictView v) : data_(std::move(v)) {}

  static Value FromUtf8(std::string_view utf8);
  static Value FromU32(std::u32string s);
  static Value MakeList(std::vector<Value> items = {});
  static Value MakeTuple(std::vector<Value> items = {});
  static Value MakeDict();

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool is(Kind k) const { return kind() == k; }
  bool is_none() const { return is(Kind::kNone); }
  // Int or Bool: both participate in integer arithmetic.
  bool is_integral() const { return is(Kind::kInt) || is(Kind::kBool); }
  bool is_numeric() const { return is_integral() || is(Kind::kFloat); }

  bool as_bool() const { return std::get<bool>(data_); }
  const BigInt& as_int() const { return std::get<BigInt>(data_); }
  double as_float() const { return std::get<double>(data_); }
  const std::u32string& as_str() const { return *std::get<Str>(data_); }
  const Str& str_ptr() const { return std::get<Str>(data_); }
  const List& as_list() const { return std::get<List>(data_); }
  const Tuple& as_tuple() const { return std::get<Tuple>(data_); }
  const Dict& as_dict() const { return std::get<Dict>(data_); }
  const Range& as_range() const { return std::get<Range>(data_); }
  const FuncRef& as_func() const { return std::get<FuncRef>(data_); }
  const Iter& as_iter() const { return std::get<Iter>(data_); }
  const DictView& as_view() const { return std::get<DictView>(data_); }

  // Int value of an Int or Bool.
  BigInt integral() const;
  // Numeric value as a double; raises OverflowError for huge ints.
  double to_double() const;

 private:
  std::variant<NoneValue, bool, BigInt, double, Str, List, Tuple, Dict, Range,
               FuncRef, Iter, DictView>
      data_;
};

struct ListObject {
  std::vector<Value> items;
};

// Insertion-ordered mapping. Entries are never removed (MiniLang has no
// deletion), so the index only grows.
struct DictObject {
  std::vector<std::pair<Value, Value>> items;
  std::unordered_map<std::string, std::size_t> index;

  const Value* find(const Value& key) const;
  void set(const Value& key, Value value);
  std::size_t size() const { return items.size(); }
};

enum class IterKind {
  kRange,
  kList,
  kTuple,
  kStr,
  kDictKeys,
  kDictValues,
  kDictItems,
  kEnumerate,
  kZip,
  kForward,
};

struct IterObject {
  IterKind kind = IterKind::kRange;
  Value source;
  std::int64_t pos = 0;
  std::size_t expected_size = 0;  // dict iterators detect resizing
  BigInt counter;                 // enumerate
  std::vector<Iter> inner;        // enumerate/zip/forward
  // Set on iterators created by a for-loop header; these are the ones
  // reported as __for_iterator_k__ entries.
  bool for_loop = false;
  std::int64_t yielded = 0;
  bool exhausted = false;
};

// Canonical text rendering; byte-exact contract used by every serializer.
std::string Repr(const Value& v);
// str(): identical to Repr except for strings, which render raw.
std::string ToDisplayString(const Value& v);
std::string FormatFloat(double d);
std::string ReprString(const std::u32string& s);

std::string TypeName(const Value& v);
bool Truthy(const Value& v);
bool Equal(const Value& a, const Value& b);
// a < b under reference ordering rules; raises TypeError across types.
bool Less(const Value& a, const Value& b);
// Canonical key text; raises TypeError for unhashable values.
std::string HashKey(const Value& v);
Value DeepCopy(const Value& v);

std::string ToUtf8(const std::u32string& s);
std::u32string FromUtf8(std::string_view s);

}  // namespace exectrace
