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

#include "exectrace/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "exectrace/pairs.hpp"
#include "exectrace/parser.hpp"

namespace exectrace {

namespace {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

InputCandidate RunCandidate(const Module& module, const SourceUnit& unit, std::vector<Value> args,
                            int index, bool from_file, std::int64_t fuel) {
  InputCandidate c;
  c.args = std::move(args);
  c.args_repr = Repr(Value::MakeTuple(c.args));
  c.index = index;
  c.from_file = from_file;
  ExecOptions opts;
  opts.fuel = fuel;
  Trace t = Execute(module, unit.unit_id, c.args, opts);
  c.outcome = t.outcome;
  c.coverage = LineCoverage(t);
  c.line_events = LineStepCount(t);
  c.discarded = t.outcome.kind != OutcomeKind::kReturn;
  return c;
}

bool CoverageBetter(const InputCandidate& a, std::size_t gain_a, const InputCandidate& b,
                    std::size_t gain_b) {
  if (gain_a != gain_b) return gain_a > gain_b;
  if (a.line_events != b.line_events) return a.line_events < b.line_events;
  return a.args_repr < b.args_repr;
}

void Append(std::ofstream& out, const std::vector<PredictionPair>& pairs, std::int64_t* count) {
  for (const auto& p : pairs) out << PairToJson(p) << '\n';
  *count += static_cast<std::int64_t>(pairs.size());
}

}  // namespace

std::uint64_t UnitSeed(std::uint64_t seed, const std::string& unit_id) {
  return seed + Fnv1a(unit_id);
}

std::vector<Value> ParseArgs(std::string_view text) {
  Value v = ParseLiteral(text);
  if (v.is(Kind::kTuple)) return *v.as_tuple();
  return {v};
}

std::vector<InputCandidate> FuzzInputs(const SourceUnit& unit, const UnitGrammar& grammar,
                                       int budget, std::uint64_t seed, std::int64_t fuel,
                                       const std::vector<std::vector<Value>>& extra) {
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  Module module = CompileUnit(unit);
  UnitGrammar bound = BindGrammar(grammar, module.main_code().params);
  std::vector<InputCandidate> out;
  int index = 0;
  for (const auto& args : extra) {
    out.push_back(RunCandidate(module, unit, args, index++, true, fuel));
  }
  Rng rng(seed);
  for (int i = 0; i < budget; ++i) {
    out.push_back(RunCandidate(module, unit, SampleArgs(bound, rng), index++, false, fuel));
  }
  return out;
}

std::vector<InputCandidate> SelectByCoverage(const std::vector<InputCandidate>& candidates) {
  std::vector<const InputCandidate*> pool;
  for (const auto& c : candidates) {
    if (!c.discarded) pool.push_back(&c);
  }
  if (pool.empty()) throw EmptyInput("no retained candidates");
  std::set<int> covered;
  std::vector<InputCandidate> out;
  while (true) {
    const InputCandidate* best = nullptr;
    std::size_t best_gain = 0;
    for (const auto* c : pool) {
      std::size_t gain = 0;
      for (int line : c->coverage) gain += covered.count(line) == 0;
      if (gain == 0) continue;
      if (!best || CoverageBetter(*c, gain, *best, best_gain)) {
        best = c;
        best_gain = gain;
      }
    }
    if (!best) break;
    covered.insert(best->coverage.begin(), best->coverage.end());
    out.push_back(*best);
  }
  return out;
}

double NormalizedSimilarity(std::string_view a, std::string_view b) {
  std::u32string x = FromUtf8(a);
  std::u32string y = FromUtf8(b);
  if (x.empty() && y.empty()) return 1.0;
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return 1.0 - static_cast<double>(row[y.size()]) /
                   static_cast<double>(std::max(x.size(), y.size()));
}

std::vector<InputCandidate> SimilarityFilter(const std::vector<InputCandidate>& candidates,
                                             double threshold) {
  std::vector<InputCandidate> ordered = candidates;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.index < b.index; });
  std::vector<InputCandidate> kept;
  for (auto& c : ordered) {
    bool drop = std::any_of(kept.begin(), kept.end(), [&](const InputCandidate& k) {
      return k.args_repr == c.args_repr ||
             NormalizedSimilarity(k.args_repr, c.args_repr) > threshold;
    });
    if (!drop) kept.push_back(std::move(c));
  }
  return kept;
}

const std::vector<std::string>& RepresentationNames() {
  static const std::vector<std::string> names = {
      "scratchpad",          "compact",      "compact_stepin", "line_dynamic",
      "instruction_dynamic", "line_reverse", "direct"};
  return names;
}

std::vector<InputCandidate> SelectInputs(const SourceUnit& unit, const DatasetInput& input,
                                         const DatasetConfig& config, ManifestEntry* stats) {
  ManifestEntry local;
  ManifestEntry& e = stats ? *stats : local;
  std::vector<InputCandidate> all =
      FuzzInputs(unit, input.grammar, config.budget, UnitSeed(config.seed, input.unit.unit_id),
                 config.fuel, input.extra_inputs);
  e.generated = static_cast<int>(all.size());
  e.discarded_error = static_cast<int>(
      std::count_if(all.begin(), all.end(), [](const auto& c) { return c.discarded; }));
  std::vector<InputCandidate> covered = SelectByCoverage(all);
  e.kept_after_coverage = static_cast<int>(covered.size());
  std::vector<InputCandidate> kept = SimilarityFilter(covered, config.similarity_threshold);
  e.kept_after_similarity = static_cast<int>(kept.size());
  if (static_cast<int>(kept.size()) > config.max_inputs_per_function) {
    kept.resize(static_cast<std::size_t>(config.max_inputs_per_function));
  }
  e.kept = static_cast<int>(kept.size());
  return kept;
}

std::vector<ManifestEntry> EmitDataset(std::vector<DatasetInput> inputs,
                                       const DatasetConfig& config,
                                       const std::filesystem::path& out_dir) {
  for (const auto& r : config.representations) {
    const auto& names = RepresentationNames();
    if (std::find(names.begin(), names.end(), r) == names.end()) {
      throw std::invalid_argument("unknown representation '" + r + "'");
    }
  }
  std::sort(inputs.begin(), inputs.end(),
            [](const auto& a, const auto& b) { return a.unit.unit_id < b.unit.unit_id; });
  std::filesystem::create_directories(out_dir);
  std::map<std::string, std::ofstream> shards;
  for (const auto& r : config.representations) {
    auto& f = shards[r];
    f.open(out_dir / (r + ".jsonl"), std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / (r + ".jsonl")).string());
  }

  std::vector<ManifestEntry> manifest;
  for (const auto& input : inputs) {
    ManifestEntry e;
    e.unit_id = input.unit.unit_id;
    e.seed = UnitSeed(config.seed, e.unit_id);
    try {
      SourceUnit unit = config.anonymize ? Anonymize(input.unit) : input.unit;
      std::vector<InputCandidate> kept = SelectInputs(unit, input, config, &e);

      Module module = CompileUnit(unit);
      const std::string source = unit.FullSource();
      const std::string listing = MainDisassembly(module);
      for (const auto& c : kept) {
        ExecOptions line_opts;
        line_opts.fuel = config.fuel;
        Trace line = Execute(module, unit.unit_id, c.args, line_opts);
        for (const auto& r : config.representations) {
          auto& out = shards[r];
          if (r == "scratchpad") {
            Append(out, {WholeTracePair(line, RenderScratchpad(line, source))}, &e.emitted_pairs);
          } else if (r == "compact") {
            Append(out, {WholeTracePair(line, RenderCompact(line, source, false))},
                   &e.emitted_pairs);
          } else if (r == "compact_stepin") {
            Append(out, {WholeTracePair(line, RenderCompact(line, source, true))},
                   &e.emitted_pairs);
          } else if (r == "line_dynamic") {
            Append(out, EmitDynamicPairs(line, source, config.n_max), &e.emitted_pairs);
          } else if (r == "line_reverse") {
            Append(out, EmitReversePairs(line, source), &e.emitted_pairs);
          } else if (r == "direct") {
            Append(out, {WholeTracePair(line, RenderDirect(line, source))}, &e.emitted_pairs);
          } else if (r == "instruction_dynamic") {
            ExecOptions ins_opts;
            ins_opts.fuel = config.fuel;
            ins_opts.granularity = Granularity::kInstruction;
            Trace ins = Execute(module, unit.unit_id, c.args, ins_opts);
            Append(out, EmitDynamicPairs(ins, source, config.n_max, listing), &e.emitted_pairs);
          }
        }
      }
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    manifest.push_back(e);
  }

  nlohmann::ordered_json doc;
  doc["config"] = {{"seed", config.seed},
                   {"budget", config.budget},
                   {"max_inputs_per_function", config.max_inputs_per_function},
                   {"similarity_threshold", config.similarity_threshold},
                   {"n_max", config.n_max},
                   {"fuel", config.fuel},
                   {"anonymize", config.anonymize},
                   {"representations", config.representations}};
  doc["units"] = nlohmann::ordered_json::array();
  for (const auto& e : manifest) {
    nlohmann::ordered_json u;
    u["unit_id"] = e.unit_id;
    u["generated"] = e.generated;
    u["discarded_error"] = e.discarded_error;
    u["kept_after_coverage"] = e.kept_after_coverage;
    u["kept_after_similarity"] = e.kept_after_similarity;
    u["kept"] = e.kept;
    u["emitted_pairs"] = e.emitted_pairs;
    u["seed"] = e.seed;
    if (!e.error.empty()) u["error"] = e.error;
    doc["units"].push_back(u);
  }
  std::ofstream m(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!m) throw std::runtime_error("cannot write manifest.json");
  m << doc.dump(2) << '\n';
  return manifest;
}

std::vector<DatasetInput> LoadCorpus(const std::filesystem::path& corpus_dir,
                                     const std::filesystem::path& grammar_file) {
  std::map<std::string, UnitGrammar> grammars = ParseGrammarFile(ReadFile(grammar_file));
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<DatasetInput> out;
  for (const auto& path : files) {
    DatasetInput in;
    in.unit = LoadUnit(path);
    auto g = grammars.find(in.unit.unit_id);
    if (g == grammars.end()) throw GrammarError("no grammar for unit '" + in.unit.unit_id + "'");
    in.grammar = g->second;
    std::filesystem::path extra = path;
    extra.replace_extension(".inputs");
    if (std::filesystem::exists(extra)) {
      std::istringstream lines(ReadFile(extra));
      std::string line;
      while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        in.extra_inputs.push_back(ParseArgs(line));
      }
    }
    out.push_back(std::move(in));
  }
  return out;
}

}  // namespace exectrace
