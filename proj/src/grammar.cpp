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

#include "exectrace/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace exectrace {

namespace {

using Json = nlohmann::ordered_json;

const Json& Field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw GrammarError(std::string("missing field '") + name + "'");
  return *it;
}

std::int64_t IntField(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  if (!v.is_number_integer()) throw GrammarError(std::string("'") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

double RealField(const Json& j, const char* name) {
  const Json& v = Field(j, name);
  if (!v.is_number()) throw GrammarError(std::string("'") + name + "' must be a number");
  return v.get<double>();
}

std::int64_t MaxLen(const Json& j) {
  std::int64_t n = IntField(j, "max_len");
  if (n < 0) throw GrammarError("max_len must be >= 0");
  return n;
}

bool Hashable(const ValueGrammar& g) {
  switch (g.type) {
    case ValueGrammar::Type::kInt:
    case ValueGrammar::Type::kBool:
    case ValueGrammar::Type::kStr:
      return true;
    case ValueGrammar::Type::kTuple:
    case ValueGrammar::Type::kUnion:
      return std::all_of(g.children.begin(), g.children.end(), Hashable);
    default:
      return false;
  }
}

ValueGrammar FromJson(const Json& j) {
  if (!j.is_object()) throw GrammarError("grammar spec must be an object");
  const Json& type = Field(j, "type");
  if (!type.is_string()) throw GrammarError("'type' must be a string");
  const std::string t = type.get<std::string>();
  ValueGrammar g;
  if (t == "int") {
    g.type = ValueGrammar::Type::kInt;
    g.int_min = IntField(j, "min");
    g.int_max = IntField(j, "max");
    if (g.int_min > g.int_max) throw GrammarError("int min > max");
  } else if (t == "float") {
    g.type = ValueGrammar::Type::kFloat;
    g.float_min = RealField(j, "min");
    g.float_max = RealField(j, "max");
    if (!(g.float_min <= g.float_max)) throw GrammarError("float min > max");
  } else if (t == "bool") {
    g.type = ValueGrammar::Type::kBool;
  } else if (t == "str") {
    g.type = ValueGrammar::Type::kStr;
    const Json& a = Field(j, "alphabet");
    if (!a.is_string()) throw GrammarError("'alphabet' must be a string");
    g.alphabet = FromUtf8(a.get<std::string>());
    if (g.alphabet.empty()) throw GrammarError("alphabet must be nonempty");
    g.max_len = MaxLen(j);
  } else if (t == "list") {
    g.type = ValueGrammar::Type::kList;
    g.children.push_back(FromJson(Field(j, "element")));
    g.max_len = MaxLen(j);
  } else if (t == "tuple") {
    g.type = ValueGrammar::Type::kTuple;
    const Json& e = Field(j, "elements");
    if (!e.is_array()) throw GrammarError("'elements' must be an array");
    for (const auto& c : e) g.children.push_back(FromJson(c));
  } else if (t == "dict") {
    g.type = ValueGrammar::Type::kDict;
    g.children.push_back(FromJson(Field(j, "key")));
    g.children.push_back(FromJson(Field(j, "value")));
    if (!Hashable(g.children[0])) throw GrammarError("dict keys must be int, bool, str or tuples");
    g.max_len = MaxLen(j);
  } else if (t == "union") {
    g.type = ValueGrammar::Type::kUnion;
    const Json& o = Field(j, "options");
    if (!o.is_array() || o.empty()) throw GrammarError("'options' must be a nonempty array");
    for (const auto& c : o) g.children.push_back(FromJson(c));
  } else {
    throw GrammarError("unknown grammar type '" + t + "'");
  }
  return g;
}

Json ParseJson(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw GrammarError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

ValueGrammar ParseValueGrammar(std::string_view json_text) { return FromJson(ParseJson(json_text)); }

std::map<std::string, UnitGrammar> ParseGrammarFile(std::string_view json_text) {
  Json doc = ParseJson(json_text);
  if (!doc.is_object()) throw GrammarError("grammar file must be an object");
  std::map<std::string, UnitGrammar> out;
  for (const auto& [unit, params] : doc.items()) {
    if (!params.is_object()) throw GrammarError("unit '" + unit + "' must map parameters to specs");
    UnitGrammar g;
    for (const auto& [name, spec] : params.items()) {
      try {
        g.emplace_back(name, FromJson(spec));
      } catch (const GrammarError& e) {
        throw GrammarError(unit + "." + name + ": " + e.what());
      }
    }
    out.emplace(unit, std::move(g));
  }
  return out;
}

UnitGrammar BindGrammar(const UnitGrammar& grammar, const std::vector<std::string>& params) {
  UnitGrammar out;
  for (const auto& p : params) {
    auto it = std::find_if(grammar.begin(), grammar.end(),
                           [&](const auto& kv) { return kv.first == p; });
    if (it == grammar.end()) throw GrammarError("no grammar for parameter '" + p + "'");
    out.push_back(*it);
  }
  if (grammar.size() != params.size()) throw GrammarError("grammar names unknown parameters");
  return out;
}

Value Sample(const ValueGrammar& g, Rng& rng) {
  switch (g.type) {
    case ValueGrammar::Type::kInt:
      return Value(static_cast<long long>(rng.Uniform(g.int_min, g.int_max)));
    case ValueGrammar::Type::kFloat: {
      // Three decimals keep reprs short.
      double x = g.float_min + (g.float_max - g.float_min) * rng.Real();
      return Value(std::clamp(std::round(x * 1000.0) / 1000.0, g.float_min, g.float_max));
    }
    case ValueGrammar::Type::kBool:
      return Value(rng.Uniform(0, 1) == 1);
    case ValueGrammar::Type::kStr: {
      std::int64_t n = rng.Uniform(0, g.max_len);
      std::u32string s;
      for (std::int64_t i = 0; i < n; ++i) s += g.alphabet[rng.Index(g.alphabet.size())];
      return Value::FromU32(std::move(s));
    }
    case ValueGrammar::Type::kList: {
      std::int64_t n = rng.Uniform(0, g.max_len);
      std::vector<Value> items;
      for (std::int64_t i = 0; i < n; ++i) items.push_back(Sample(g.children[0], rng));
      return Value::MakeList(std::move(items));
    }
    case ValueGrammar::Type::kTuple: {
      std::vector<Value> items;
      for (const auto& c : g.children) items.push_back(Sample(c, rng));
      return Value::MakeTuple(std::move(items));
    }
    case ValueGrammar::Type::kDict: {
      std::int64_t n = rng.Uniform(0, g.max_len);
      Value d = Value::MakeDict();
      for (std::int64_t i = 0; i < n; ++i) {
        Value k = Sample(g.children[0], rng);
        Value v = Sample(g.children[1], rng);
        d.as_dict()->set(k, std::move(v));
      }
      return d;
    }
    case ValueGrammar::Type::kUnion:
      return Sample(g.children[rng.Index(g.children.size())], rng);
  }
  return Value();
}

std::vector<Value> SampleArgs(const UnitGrammar& grammar, Rng& rng) {
  std::vector<Value> args;
  for (const auto& [name, g] : grammar) args.push_back(Sample(g, rng));
  return args;
}

}  // namespace exectrace
