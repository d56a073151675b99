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


// exectrace: trace MiniLang functions, build datasets and evaluate predictors.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 runtime error (including an
// Error outcome of a traced run), 3 fuel exhausted, 4 predictor channel
// failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exectrace/bench.hpp"
#include "exectrace/evaluation.hpp"
#include "exectrace/pairs.hpp"
#include "exectrace/parser.hpp"
#include "exectrace/scratchpad.hpp"

namespace exectrace {
namespace {

enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2, kFuel = 3, kChannel = 4 };

// Usage-level failures: bad flags, unreadable or invalid inputs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("cannot write " + out);
  f << text;
}

struct TraceFlags {
  std::string file;
  std::string args = "()";
  std::string granularity = "line";
  std::int64_t fuel = 1'000'000;
  bool step_into = false;
  bool anonymize = false;
  std::string format = "json";
  int n_max = 10;
  std::string out;
};

int RunTrace(const TraceFlags& f) {
  SourceUnit unit = LoadUnit(f.file);
  if (f.anonymize) unit = Anonymize(unit);
  ExecOptions o;
  o.fuel = f.fuel;
  o.granularity = ParseGranularity(f.granularity);
  o.step_into = f.step_into;
  Module module = CompileUnit(unit);
  Trace t = Execute(module, unit.unit_id, ParseArgs(f.args), o);
  const std::string source = unit.FullSource();

  const int code = t.outcome.kind == OutcomeKind::kReturn  ? kOk
                   : t.outcome.kind == OutcomeKind::kError ? kRuntime
                                                           : kFuel;
  if (f.format == "json") {
    Emit(TraceToJsonl(t), f.out);
  } else if (code != kOk) {
    // Text representations only describe returning runs.
    std::cerr << "exectrace: " << Describe(t.outcome) << "\n";
  } else if (f.format == "scratchpad") {
    Emit(RenderScratchpad(t, source).target, f.out);
  } else if (f.format == "compact") {
    Emit(RenderCompact(t, source, f.step_into).target, f.out);
  } else if (f.format == "dynamic") {
    std::string listing =
        o.granularity == Granularity::kInstruction ? MainDisassembly(module) : std::string();
    std::string text;
    for (const auto& p : EmitDynamicPairs(t, source, f.n_max, listing)) text += PairToJson(p) + "\n";
    Emit(text, f.out);
  }
  if (code == kFuel) std::cerr << "exectrace: " << Describe(t.outcome) << "\n";
  return code;
}

struct DatasetFlags {
  std::string corpus;
  std::string grammar;
  std::string out;
  DatasetConfig config;
};

int RunDataset(const DatasetFlags& f) {
  std::vector<ManifestEntry> manifest = EmitDataset(LoadCorpus(f.corpus, f.grammar), f.config, f.out);
  int failed = 0;
  for (const auto& e : manifest) {
    if (!e.error.empty()) {
      ++failed;
      std::cerr << "exectrace: skipped " << e.unit_id << ": " << e.error << "\n";
    }
  }
  std::cerr << "wrote " << (std::filesystem::path(f.out) / "manifest.json").string() << " ("
            << manifest.size() << " units, " << failed << " skipped)\n";
  return kOk;
}

struct EvalFlags {
  std::string corpus = "bench";
  std::string grammar;
  std::string out;
  std::string strategy = "greedy";
  std::string granularity = "line";
  std::string nll_model = "calibrated";
  double p_all = -1;
  bool anonymize = true;
  int budget = DatasetConfig{}.budget;
  EvalConfig config;
};

EvalConfig Resolve(EvalFlags f) {
  EvalConfig c = f.config;
  c.strategy = ParseStrategy(f.strategy);
  c.granularity = ParseGranularity(f.granularity);
  c.noise.model = ParseNllModel(f.nll_model);
  if (f.p_all >= 0) {
    c.noise.p_control_flow = c.noise.p_vars = c.noise.p_iterator = c.noise.p_stack = f.p_all;
  }
  for (double p : {c.noise.p_control_flow, c.noise.p_vars, c.noise.p_iterator, c.noise.p_stack}) {
    if (p < 0 || p > 1) throw UsageError("error probabilities must lie in [0, 1]");
  }
  if (c.episode.n_max < 1) throw UsageError("--nmax must be at least 1");
  return c;
}

std::vector<EvalItem> Items(const EvalFlags& f) {
  if (f.corpus == "bench") return BenchItems();
  if (f.corpus.rfind("bench:", 0) == 0) return BenchItems(f.corpus.substr(6));
  if (!std::filesystem::is_directory(f.corpus)) {
    throw UsageError("corpus must be 'bench', 'bench:<name>' or a directory");
  }
  if (f.grammar.empty()) throw UsageError("--grammar is required for a corpus directory");
  DatasetConfig d;
  d.seed = f.config.noise.seed;
  d.budget = f.budget;
  d.fuel = f.config.fuel;
  d.anonymize = f.anonymize;
  return CorpusItems(LoadCorpus(f.corpus, f.grammar), d);
}

int RunEval(const EvalFlags& f) {
  EvalConfig c = Resolve(f);
  EvalRun run = Evaluate(Items(f), c);
  Emit(EvalReportJson(run, c), f.out);
  if (run.channel_failure) {
    std::cerr << "exectrace: predictor channel failed; see the episode reasons\n";
    return kChannel;
  }
  return kOk;
}

int RunBench(const EvalFlags& f) {
  EvalConfig c = Resolve(f);
  bool channel_failure = false;
  std::string table;
  std::string notes;
  for (const auto& b : BenchPrograms()) {
    std::vector<EvalItem> items = BenchItems(b.name);
    std::int64_t correct = 0;
    std::optional<double> avg;
    try {
      EvalRun run = Evaluate(items, c);
      correct = run.report.outcome_correct;
      avg = run.report.avg_steps;
      channel_failure = channel_failure || run.channel_failure;
      for (const auto& e : run.episodes) {
        if (!e.outcome_correct) {
          notes += "  " + b.name + e.args_repr + ": " +
                   (e.reason.empty() ? "wrong return " + e.predicted_return.value_or("?")
                                     : e.reason) +
                   "\n";
        }
      }
      for (const auto& s : run.skipped) notes += "  " + s.reason + "\n";
    } catch (const EmptySuite&) {
      notes += "  " + b.name + ": no input returns within the fuel\n";
    }
    MetricsReport row;
    row.outcome_correct = correct;
    row.episodes = static_cast<std::int64_t>(items.size());
    row.avg_steps = avg;
    char line[128];
    std::snprintf(line, sizeof line, "%-16s%s\n", b.name.c_str(), SummaryCell(row).c_str());
    table += line;
  }
  Emit(table, f.out);
  if (!notes.empty()) std::cerr << notes;
  return channel_failure ? kChannel : kOk;
}

void AddEvalOptions(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--predictor", f.config.predictor,
                  "oracle, noisy or external:<exec:command|tcp://host:port>");
  cmd->add_option("--strategy", f.strategy, "greedy, argmin, dijkstra or reverse")
      ->check(CLI::IsMember({"greedy", "argmin", "dijkstra", "reverse"}));
  cmd->add_option("--nmax", f.config.episode.n_max, "Largest step size queried");
  cmd->add_option("--seed", f.config.noise.seed, "Seed for the noisy predictor and input fuzzing");
  cmd->add_option("--granularity", f.granularity, "line or instruction")
      ->check(CLI::IsMember({"line", "instruction"}));
  cmd->add_option("--fuel", f.config.fuel, "Event budget of the ground-truth run");
  cmd->add_option("--max-predictions", f.config.episode.max_predictions,
                  "Prediction budget per episode");
  cmd->add_option("--jobs", f.config.jobs, "Worker threads");
  cmd->add_option("--timeout", f.config.timeout_seconds, "Seconds to wait for an external reply");
  cmd->add_option("--p", f.p_all, "Error probability for every facet (noisy)");
  cmd->add_option("--p-control-flow", f.config.noise.p_control_flow);
  cmd->add_option("--p-vars", f.config.noise.p_vars);
  cmd->add_option("--p-iterator", f.config.noise.p_iterator);
  cmd->add_option("--p-stack", f.config.noise.p_stack);
  cmd->add_option("--nll-model", f.nll_model, "calibrated, anticalibrated or flat")
      ->check(CLI::IsMember({"calibrated", "anticalibrated", "flat"}));
  cmd->add_option("--exact-up-to", f.config.noise.exact_up_to,
                  "Noisy answers are exact for n up to this value");
  cmd->add_option("--beam", f.config.noise.beam_width, "Candidates requested per query");
  cmd->add_option("--out", f.out, "Write to a file instead of stdout");
}

int Main(int argc, char** argv) {
  CLI::App app{"Trace MiniLang functions, build datasets and evaluate predictors"};
  app.set_config("--config", "", "TOML file whose keys mirror the flags");
  app.require_subcommand(1);

  TraceFlags tf;
  auto* trace = app.add_subcommand("trace", "Run a function and print its trace");
  trace->add_option("file", tf.file, "Source file; the last definition is traced")
      ->required()
      ->check(CLI::ExistingFile);
  trace->add_option("--args", tf.args, "Argument tuple, e.g. \"(4)\" or \"([1, 2], 'a')\"");
  trace->add_option("--granularity", tf.granularity)->check(CLI::IsMember({"line", "instruction"}));
  trace->add_option("--fuel", tf.fuel, "Event budget");
  trace->add_flag("--step-into", tf.step_into, "Trace helper frames too");
  trace->add_flag("--anonymize", tf.anonymize, "Rename the traced function to f");
  trace->add_option("--format", tf.format)
      ->check(CLI::IsMember({"json", "scratchpad", "compact", "dynamic"}));
  trace->add_option("--nmax", tf.n_max, "Largest step size for --format dynamic");
  trace->add_option("--out", tf.out, "Write to a file instead of stdout");

  DatasetFlags df;
  auto* dataset = app.add_subcommand("dataset", "Build prediction datasets from a corpus");
  dataset->add_option("corpus", df.corpus, "Directory of .ml units")
      ->required()
      ->check(CLI::ExistingDirectory);
  dataset->add_option("grammar", df.grammar, "Argument grammar file")
      ->required()
      ->check(CLI::ExistingFile);
  dataset->add_option("--seed", df.config.seed);
  dataset->add_option("--budget", df.config.budget, "Fuzzed inputs per unit");
  dataset->add_option("--max-inputs", df.config.max_inputs_per_function);
  dataset->add_option("--similarity", df.config.similarity_threshold,
                      "Drop inputs more similar than this to a kept one");
  dataset->add_option("--nmax", df.config.n_max);
  dataset->add_option("--fuel", df.config.fuel);
  dataset->add_flag("--anonymize", df.config.anonymize);
  dataset->add_option("--representations", df.config.representations)
      ->check(CLI::IsMember(RepresentationNames()))
      ->delimiter(',');
  dataset->add_option("--out", df.out, "Output directory")->required();

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Score a predictor on a corpus and print a JSON report");
  eval->add_option("corpus", ef.corpus, "bench, bench:<name> or a directory of .ml units");
  eval->add_option("--grammar", ef.grammar, "Argument grammar for a corpus directory");
  eval->add_option("--budget", ef.budget, "Fuzzed inputs per unit without an .inputs file");
  AddEvalOptions(eval, ef);

  EvalFlags bf;
  auto* bench = app.add_subcommand("bench", "Summarize the bundled benchmarks");
  AddEvalOptions(bench, bf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*trace) return RunTrace(tf);
    if (*dataset) return RunDataset(df);
    if (*eval) return RunEval(ef);
    return RunBench(bf);
  } catch (const ChannelError& e) {
    std::cerr << "exectrace: channel failure: " << e.what() << "\n";
    return kChannel;
  } catch (const SyntaxError& e) {
    std::cerr << "exectrace: syntax error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "exectrace: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    // Grammar, arity, argument and name errors.
    std::cerr << "exectrace: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "exectrace: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace
}  // namespace exectrace

int main(int argc, char** argv) { return exectrace::Main(argc, argv); }
