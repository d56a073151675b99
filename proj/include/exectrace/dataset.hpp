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

// Input generation and the trace dataset pipeline:
// fuzz -> drop failures -> coverage cover -> similarity filter -> cap.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "exectrace/grammar.hpp"
#include "exectrace/tracer.hpp"

namespace exectrace {

struct InputCandidate {
  std::vector<Value> args;
  std::string args_repr;
  int index = 0;         // generation order
  bool from_file = false;
  Outcome outcome;
  std::vector<int> coverage;
  std::int64_t line_events = 0;
  bool discarded = false;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// `budget` sampled candidates, preceded by any `extra` inputs, each executed
// at line granularity with `fuel`. Error and fuel outcomes are marked
// discarded.
std::vector<InputCandidate> FuzzInputs(const SourceUnit& unit, const UnitGrammar& grammar,
                                       int budget, std::uint64_t seed, std::int64_t fuel,
                                       const std::vector<std::vector<Value>>& extra = {});

// Greedy set cover over line coverage. Ties prefer fewer line events, then
// the smaller args repr. Throws EmptyInput when nothing is retained.
std::vector<InputCandidate> SelectByCoverage(const std::vector<InputCandidate>& candidates);

// 1 - Levenshtein(a, b) / max(|a|, |b|), over code points; 1 for two empty
// strings.
double NormalizedSimilarity(std::string_view a, std::string_view b);

// Walks candidates in generation order and drops exact duplicates and those
// more similar than `threshold` to an already kept one.
std::vector<InputCandidate> SimilarityFilter(const std::vector<InputCandidate>& candidates,
                                             double threshold);

// Representation names accepted by DatasetConfig.
const std::vector<std::string>& RepresentationNames();

struct DatasetConfig {
  std::uint64_t seed = kDefaultSeed;
  int budget = 32;
  int max_inputs_per_function = 6;
  double similarity_threshold = 0.9;
  int n_max = 10;
  std::int64_t fuel = 100'000;
  bool anonymize = false;
  std::vector<std::string> representations = {"scratchpad", "compact", "line_dynamic"};
};

struct ManifestEntry {
  std::string unit_id;
  int generated = 0;
  int discarded_error = 0;
  int kept_after_coverage = 0;
  int kept_after_similarity = 0;
  int kept = 0;
  std::int64_t emitted_pairs = 0;
  std::uint64_t seed = 0;
  std::string error;  // set when the unit was skipped
};

struct DatasetInput {
  SourceUnit unit;
  UnitGrammar grammar;
  std::vector<std::vector<Value>> extra_inputs;
};

// The full selection (fuzz, coverage cover, similarity filter, cap) for one
// unit, already anonymized when the config asks for it. `stats` receives the
// manifest counts.
std::vector<InputCandidate> SelectInputs(const SourceUnit& unit, const DatasetInput& input,
                                         const DatasetConfig& config,
                                         ManifestEntry* stats = nullptr);

// Writes `<rep>.jsonl` shards and manifest.json into `out_dir`, units in
// sorted id order. Per-unit failures are recorded in the manifest.
std::vector<ManifestEntry> EmitDataset(std::vector<DatasetInput> inputs,
                                       const DatasetConfig& config,
                                       const std::filesystem::path& out_dir);

// Loads `*.ml` units from `corpus_dir` with grammars from `grammar_file` and
// optional `<unit>.inputs` files (one argument tuple per line).
std::vector<DatasetInput> LoadCorpus(const std::filesystem::path& corpus_dir,
                                     const std::filesystem::path& grammar_file);

std::uint64_t UnitSeed(std::uint64_t seed, const std::string& unit_id);

// Parses `(1, 'a')` or a single value into an argument list.
std::vector<Value> ParseArgs(std::string_view text);

}  // namespace exectrace
