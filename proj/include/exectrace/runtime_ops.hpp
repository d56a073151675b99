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

// Operator, builtin and method semantics shared by the bytecode VM and the
// tree-walking reference evaluator. Every failure is an ExecError carrying
// the reference language's exception name.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exectrace/value.hpp"

namespace exectrace {

enum class BinOp { kAdd, kSub, kMul, kDiv, kFloorDiv, kMod, kPow };
enum class UnaryOp { kNeg, kNot };
enum class CmpOp { kEq, kNe, kLt, kLe, kGt, kGe, kIn, kNotIn };

std::string_view Symbol(BinOp op);
std::string_view Symbol(UnaryOp op);
std::string_view Symbol(CmpOp op);

// `inplace` selects augmented-assignment semantics (list += extends in place).
Value BinaryOperation(BinOp op, const Value& a, const Value& b, bool inplace = false);
Value UnaryOperation(UnaryOp op, const Value& v);
bool Compare(CmpOp op, const Value& a, const Value& b);

Value Index(const Value& container, const Value& index);
void StoreIndex(const Value& container, const Value& index, Value value);
// Missing bounds are passed as None.
Value Slice(const Value& container, const Value& lower, const Value& upper,
            const Value& step);

// for_loop = true always yields a fresh iterator object whose yield count is
// tracked as a loop slot, even when `v` already is an iterator.
Iter GetIter(const Value& v, bool for_loop);
std::optional<Value> IterNext(IterObject& it);
std::vector<Value> Materialize(const Value& iterable);

bool IsBuiltin(std::string_view name);
// Names reserved for compiler rewrites; not callable from user source.
inline constexpr std::string_view kReservedPrefix = "__idx_";
inline constexpr std::string_view kIterableHelper = "__idx_iterable__";
inline constexpr std::string_view kLengthHelper = "__idx_len__";

Value CallBuiltin(std::string_view name, std::span<const Value> args);
Value CallMethod(const Value& self, std::string_view name, std::span<const Value> args);

}  // namespace exectrace
