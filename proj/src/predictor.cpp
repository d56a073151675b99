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

#include "exectrace/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "exectrace/channel.hpp"

namespace exectrace {

std::optional<std::size_t> EpisodeContext::Find(const SelfContainedState& state) const {
  auto it = index.find(RenderState(state));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

EpisodeContext MakeContext(const SourceUnit& unit, const std::vector<Value>& args,
                           Granularity granularity, std::int64_t fuel) {
  EpisodeContext ctx;
  ctx.unit_id = unit.unit_id;
  ctx.args = args;
  ctx.args_repr = Repr(Value::MakeTuple(args));
  ctx.granularity = granularity;
  ctx.module = CompileUnit(unit);
  ctx.source = unit.FullSource();
  ctx.exec.fuel = fuel;
  ctx.exec.granularity = granularity;
  // Dynamic states describe the outermost frame only.
  ctx.exec.step_into = false;
  ctx.trace = Execute(ctx.module, unit.unit_id, args, ctx.exec);
  if (ctx.trace.outcome.kind != OutcomeKind::kReturn) {
    throw UnsupportedOutcome(unit.unit_id + ctx.args_repr + " ended in " +
                             Describe(ctx.trace.outcome));
  }
  if (granularity == Granularity::kInstruction) ctx.disassembly = MainDisassembly(ctx.module);
  ctx.states = StateSequence(ctx.trace, ctx.source);
  for (std::size_t i = 0; i < ctx.states.size(); ++i) {
    ctx.rendered.push_back(RenderState(ctx.states[i]));
    ctx.index.emplace(ctx.rendered.back(), i);
  }
  std::set<int> locs;
  for (const auto& ins : ctx.module.main_code().code) {
    if (granularity == Granularity::kInstruction) {
      locs.insert(ins.offset);
    } else if (ins.is_line_start) {
      locs.insert(ins.line);
    }
  }
  ctx.locations.assign(locs.begin(), locs.end());
  return ctx;
}

SelfContainedState OraclePredictor::Successor(const EpisodeContext& ctx,
                                              const SelfContainedState& s, int n) {
  if (auto at = ctx.Find(s)) return ctx.states[std::min(*at + static_cast<std::size_t>(n), ctx.L())];
  SelfContainedState end = s;
  end.stack.clear();
  try {
    ResumeResult r = Resume(ctx.module, s, n, ctx.exec);
    if (r.states.size() > static_cast<std::size_t>(n)) return r.states[static_cast<std::size_t>(n)];
    if (r.outcome.kind == OutcomeKind::kReturn && !r.states.empty() && r.states.back().terminal()) {
      return r.states.back();
    }
    if (!r.states.empty()) end = r.states.back();
    end.return_repr = r.outcome.kind == OutcomeKind::kError
                          ? "<error " + r.outcome.error_kind + ">"
                          : std::string("<error FuelExhausted>");
  } catch (const std::exception&) {
    end.return_repr = "<error ResumeError>";
  }
  end.stack.clear();
  end.iterators.clear();
  end.source = s.source;
  return end;
}

std::vector<Candidate> OraclePredictor::Propose(const EpisodeContext& ctx,
                                                const PredictorQuery& q) {
  Candidate c;
  if (q.direction == Direction::kReverse) {
    auto at = ctx.Find(q.state);
    if (!at) throw NoPredecessor("state is not on the recorded trajectory");
    if (*at == 0) throw NoPredecessor("the initial state has no predecessor");
    c.state = ctx.states[*at - 1];
  } else {
    if (q.n < 1) throw std::invalid_argument("forward queries need n >= 1");
    c.state = Successor(ctx, q.state, q.n);
  }
  return {c};
}

std::string_view NllModelName(NllModel m) {
  switch (m) {
    case NllModel::kCalibrated:
      return "calibrated";
    case NllModel::kAnticalibrated:
      return "anticalibrated";
    case NllModel::kFlat:
      return "flat";
  }
  return "";
}

NllModel ParseNllModel(std::string_view name) {
  for (NllModel m : {NllModel::kCalibrated, NllModel::kAnticalibrated, NllModel::kFlat}) {
    if (NllModelName(m) == name) return m;
  }
  throw std::invalid_argument("unknown nll model '" + std::string(name) + "'");
}

NoiseConfig NoiseConfig::Uniform(double p, NllModel model, std::uint64_t seed) {
  NoiseConfig c;
  c.p_control_flow = c.p_vars = c.p_iterator = c.p_stack = p;
  c.model = model;
  c.seed = seed;
  return c;
}

namespace {

bool IsIntLiteral(const std::string& s) {
  std::size_t i = s.size() > 1 && s[0] == '-' ? 1 : 0;
  return i < s.size() && std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
}

// A repr guaranteed to differ from `repr`.
std::string PerturbRepr(const std::string& repr, Rng& rng) {
  if (IsIntLiteral(repr)) {
    static constexpr int kDeltas[] = {-2, -1, 1, 2};
    mpz_class v(repr);
    v += kDeltas[rng.Index(4)];
    return v.get_str();
  }
  if (repr == "True") return "False";
  if (repr == "False") return "True";
  return repr == "0" ? "1" : "0";
}

}  // namespace

Candidate NoisyPredictor::Corrupt(const EpisodeContext& ctx, const SelfContainedState& truth,
                                  int n, Rng& rng) const {
  Candidate c;
  c.state = truth;
  SelfContainedState& s = c.state;
  // Draws happen in a fixed order whatever gets corrupted.
  const bool cf = rng.Bernoulli(config_.p_control_flow);
  const bool vars = rng.Bernoulli(config_.p_vars);
  const bool iter = rng.Bernoulli(config_.p_iterator);
  const bool stack =
      rng.Bernoulli(config_.p_stack) && truth.granularity == Granularity::kInstruction;
  const bool exact = n <= config_.exact_up_to;
  if (cf && !exact) {
    std::vector<int> others;
    for (int loc : ctx.locations) {
      if (loc != s.location) others.push_back(loc);
    }
    s.location = others.empty() ? s.location + 1 : others[rng.Index(others.size())];
    ++c.corrupted;
  }
  if (vars && !exact) {
    if (s.locals.empty()) {
      s.locals.emplace_back("tmp", "0");
    } else {
      auto& kv = s.locals[rng.Index(s.locals.size())];
      kv.second = PerturbRepr(kv.second, rng);
    }
    ++c.corrupted;
  }
  if (iter && !exact) {
    if (s.iterators.empty()) {
      s.iterators.emplace_back(1, 0);
    } else {
      auto& it = s.iterators[rng.Index(s.iterators.size())];
      it.second += it.second == 0 || rng.Uniform(0, 1) ? 1 : -1;
    }
    ++c.corrupted;
  }
  if (stack && !exact) {
    if (s.stack.empty()) {
      s.stack.push_back("0");
    } else {
      auto& e = s.stack[rng.Index(s.stack.size())];
      e = PerturbRepr(e, rng);
    }
    ++c.corrupted;
  }
  const int facets = truth.granularity == Granularity::kInstruction ? 4 : 3;
  double base = config_.base_nll.empty()
                    ? config_.slope * n
                    : config_.base_nll[std::min(static_cast<std::size_t>(n),
                                                config_.base_nll.size()) - 1];
  double nll = base + config_.noise * rng.Real();
  switch (config_.model) {
    case NllModel::kCalibrated:
      nll += config_.penalty * c.corrupted;
      break;
    case NllModel::kAnticalibrated:
      nll += config_.penalty * (facets - c.corrupted);
      break;
    case NllModel::kFlat:
      break;
  }
  c.nll = std::max(0.0, nll);
  return c;
}

std::vector<Candidate> NoisyPredictor::Propose(const EpisodeContext& ctx, const PredictorQuery& q) {
  SelfContainedState truth = oracle_.Propose(ctx, q).front().state;
  std::string key = RenderState(q.state) + "\x1f" + std::to_string(q.n) + "\x1f" +
                    std::string(DirectionName(q.direction)) + "\x1f" + ctx.unit_id + ctx.args_repr;
  Rng rng(config_.seed ^ Fnv1a(key));
  int n = q.direction == Direction::kReverse ? 1 : q.n;
  std::vector<Candidate> out;
  for (int b = 0; b < std::max(1, config_.beam_width); ++b) out.push_back(Corrupt(ctx, truth, n, rng));
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.nll < b.nll; });
  return out;
}

ExternalPredictor::ExternalPredictor(std::unique_ptr<Channel> channel, int beam_width)
    : channel_(std::move(channel)), beam_width_(beam_width) {}

ExternalPredictor::~ExternalPredictor() = default;

std::vector<Candidate> ExternalPredictor::Propose(const EpisodeContext& ctx,
                                                  const PredictorQuery& q) {
  using nlohmann::ordered_json;
  const int n = q.direction == Direction::kReverse ? -1 : q.n;
  const std::int64_t id = next_id_++;
  ordered_json req;
  req["id"] = id;
  req["prompt"] = StatePrompt(q.state, n, ctx.disassembly);
  req["n"] = n;
  req["direction"] = std::string(DirectionName(q.direction));
  std::string reply = channel_->Exchange(req.dump());

  auto failed = [&](std::string why) {
    Candidate c;
    c.parse_failed = true;
    c.text = std::move(why);
    c.nll = 0;
    return std::vector<Candidate>{c};
  };
  ordered_json resp;
  try {
    resp = ordered_json::parse(reply);
  } catch (const ordered_json::parse_error&) {
    return failed("response is not JSON: " + reply.substr(0, 200));
  }
  if (!resp.is_object() || !resp.contains("candidates") || !resp["candidates"].is_array() ||
      resp["candidates"].empty()) {
    return failed("response has no candidates");
  }
  if (resp.contains("id") && resp["id"] != id) {
    throw ChannelError("response id " + resp["id"].dump() + " does not match request " +
                       std::to_string(id));
  }
  std::vector<Candidate> out;
  for (const auto& item : resp["candidates"]) {
    Candidate c;
    if (!item.is_object() || !item.contains("text") || !item["text"].is_string()) {
      c.parse_failed = true;
      c.text = item.dump();
    } else {
      c.text = item["text"].get<std::string>();
      if (item.contains("nll") && item["nll"].is_number()) {
        c.nll = std::max(0.0, item["nll"].get<double>());
      }
      try {
        c.state = ParseState(c.text);
        if (c.state.source.empty()) c.state.source = q.state.source;
      } catch (const StateParseError&) {
        c.parse_failed = true;
      }
    }
    out.push_back(std::move(c));
    if (static_cast<int>(out.size()) >= std::max(1, beam_width_)) break;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.nll < b.nll; });
  return out;
}

std::unique_ptr<Predictor> MakePredictor(const std::string& spec, const NoiseConfig& noise,
                                         double timeout_seconds) {
  if (spec == "oracle") return std::make_unique<OraclePredictor>();
  if (spec == "noisy") return std::make_unique<NoisyPredictor>(noise);
  constexpr std::string_view kExternal = "external:";
  if (spec.rfind(kExternal, 0) == 0) {
    return std::make_unique<ExternalPredictor>(
        OpenChannel(spec.substr(kExternal.size()), timeout_seconds), noise.beam_width);
  }
  throw std::invalid_argument("unknown predictor '" + spec + "'");
}

}  // namespace exectrace
