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

// Generators for fuzzed arguments.
//
// A grammar file maps unit ids to per-parameter specs:
//
//   {"collatz": {"n": {"type": "int", "min": 1, "max": 4000}},
//    "g": {"xs": {"type": "list", "element": {"type": "int", "min": 0, "max": 9},
//                 "max_len": 5}}}
//
// Types: int{min,max}, float{min,max}, bool, str{alphabet,max_len},
// list{element,max_len}, tuple{elements}, dict{key,value,max_len},
// union{options}.
#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exectrace/random.hpp"
#include "exectrace/value.hpp"

namespace exectrace {

class GrammarError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ValueGrammar {
  enum class Type { kInt, kFloat, kBool, kStr, kList, kTuple, kDict, kUnion };

  Type type = Type::kInt;
  std::int64_t int_min = 0;
  std::int64_t int_max = 0;
  double float_min = 0;
  double float_max = 0;
  std::u32string alphabet;
  std::int64_t max_len = 0;
  // list: {element}; dict: {key, value}; tuple: elements; union: options.
  std::vector<ValueGrammar> children;
};

// Parameter name -> spec, in the function's parameter order.
using UnitGrammar = std::vector<std::pair<std::string, ValueGrammar>>;

ValueGrammar ParseValueGrammar(std::string_view json_text);
// Unit id -> (parameter -> spec). Parameter order follows the file.
std::map<std::string, UnitGrammar> ParseGrammarFile(std::string_view json_text);
// Reorders `grammar` to match `params`; throws GrammarError on a mismatch.
UnitGrammar BindGrammar(const UnitGrammar& grammar, const std::vector<std::string>& params);

Value Sample(const ValueGrammar& grammar, Rng& rng);
std::vector<Value> SampleArgs(const UnitGrammar& grammar, Rng& rng);

}  // namespace exectrace
