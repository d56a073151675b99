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

#include "exectrace/scratchpad.hpp"

#include <algorithm>
#include <map>

#include "exectrace/parser.hpp"

namespace exectrace {

namespace {

using Bindings = std::vector<std::pair<std::string, std::string>>;

void RequireReturn(const Trace& trace) {
  if (trace.outcome.kind != OutcomeKind::kReturn) {
    throw UnsupportedOutcome("trace ended in " + Describe(trace.outcome));
  }
}

std::string StrippedLine(const std::vector<std::string>& lines, int line) {
  if (line < 1 || line > static_cast<int>(lines.size())) return "";
  std::string_view s = lines[static_cast<std::size_t>(line - 1)];
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

Bindings Reprs(const TraceEvent& ev) {
  Bindings out;
  for (const auto& [name, v] : ev.locals) out.emplace_back(name, Repr(v));
  return out;
}

Bindings Diff(const Bindings& before, const Bindings& after) {
  Bindings out;
  for (const auto& kv : after) {
    auto it = std::find_if(before.begin(), before.end(),
                           [&](const auto& b) { return b.first == kv.first; });
    if (it == before.end() || it->second != kv.second) out.push_back(kv);
  }
  return out;
}

class Writer {
 public:
  Writer(const Trace& trace, const std::string& source, bool compact, bool step_into)
      : events_(trace.events), lines_(SplitLines(source)), compact_(compact),
        step_into_(step_into) {}

  // Renders the frame whose call event is at `i`; returns the index of its
  // return event.
  std::size_t Frame(std::size_t i, std::string* out) {
    const int depth = events_[i].depth;
    const std::string indent(static_cast<std::size_t>(2 * depth), ' ');
    Bindings shown;
    bool pending = false;
    for (++i; i < events_.size(); ++i) {
      const TraceEvent& ev = events_[i];
      if (ev.depth == depth && (ev.kind == EventKind::kLine || ev.kind == EventKind::kReturn)) {
        if (pending) {
          Bindings now = Reprs(ev);
          *out += indent + "state: " + RenderLocals(compact_ ? Diff(shown, now) : now) + "\n";
          shown = std::move(now);
        }
        if (ev.kind == EventKind::kReturn) return i;
        *out += indent + "line " + std::to_string(ev.line) + ": " + StrippedLine(lines_, ev.line) +
                "\n";
        pending = true;
      } else if (ev.kind == EventKind::kCall && ev.depth == depth + 1) {
        if (!step_into_) {
          i = SkipFrame(i);
          continue;
        }
        const std::string inner(static_cast<std::size_t>(2 * ev.depth), ' ');
        std::string args;
        for (std::size_t k = 0; k < ev.locals.size(); ++k) {
          if (k) args += ", ";
          args += Repr(ev.locals[k].second);
        }
        *out += inner + "call " + ev.func + "(" + args + ")\n";
        i = Frame(i, out);
        *out += inner + "-> " + Repr(*events_[i].retval) + "\n";
      }
    }
    throw UnsupportedOutcome("frame has no return event");
  }

 private:
  std::size_t SkipFrame(std::size_t i) {
    const int depth = events_[i].depth;
    for (++i; i < events_.size(); ++i) {
      if (events_[i].kind == EventKind::kReturn && events_[i].depth == depth) return i;
    }
    throw UnsupportedOutcome("frame has no return event");
  }

  const std::vector<TraceEvent>& events_;
  std::vector<std::string> lines_;
  bool compact_;
  bool step_into_;
};

TextPair Render(const Trace& trace, const std::string& source, bool compact, bool step_into) {
  RequireReturn(trace);
  if (trace.events.empty() || trace.events[0].kind != EventKind::kCall) {
    throw UnsupportedOutcome("trace does not start with a call event");
  }
  TextPair p;
  p.prompt = CallPrompt(trace, source);
  Writer w(trace, source, compact, step_into);
  std::size_t ret = w.Frame(0, &p.target);
  p.target += "return: " + Repr(*trace.events[ret].retval) + "\n";
  return p;
}

}  // namespace

std::string CallPrompt(const Trace& trace, const std::string& source) {
  std::string out = source;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += std::string(kCallMarker) + "\n" + trace.func + "(";
  for (std::size_t i = 0; i < trace.args.size(); ++i) {
    if (i) out += ", ";
    out += Repr(trace.args[i]);
  }
  return out + ")\n";
}

TextPair RenderScratchpad(const Trace& trace, const std::string& source) {
  return Render(trace, source, false, false);
}

TextPair RenderCompact(const Trace& trace, const std::string& source, bool step_into) {
  return Render(trace, source, true, step_into);
}

TextPair RenderDirect(const Trace& trace, const std::string& source) {
  RequireReturn(trace);
  return {CallPrompt(trace, source), "return: " + Repr(trace.outcome.value) + "\n"};
}

std::string CompactToFull(const std::string& prompt, const std::string& compact_target) {
  std::size_t marker = prompt.rfind(std::string(kCallMarker) + "\n");
  if (marker == std::string::npos) throw StateParseError(0, "prompt has no call marker");
  Program program = Parse(std::string_view(prompt).substr(0, marker));
  if (program.functions.empty()) throw StateParseError(0, "prompt has no function");
  std::vector<std::string> order = LocalNames(program.functions.back());
  auto rank = [&](const std::string& name) {
    return std::find(order.begin(), order.end(), name) - order.begin();
  };

  std::string out;
  Bindings current;
  std::size_t pos = 0;
  while (pos < compact_target.size()) {
    std::size_t eol = compact_target.find('\n', pos);
    if (eol == std::string::npos) eol = compact_target.size();
    std::string_view line = std::string_view(compact_target).substr(pos, eol - pos);
    std::size_t line_pos = pos;
    pos = eol + 1;
    constexpr std::string_view kState = "state: ";
    if (line.substr(0, kState.size()) != kState) {
      out += std::string(line) + "\n";
      continue;
    }
    std::string_view dict = line.substr(kState.size());
    if (dict.size() < 2 || dict.front() != '{' || dict.back() != '}') {
      throw StateParseError(line_pos, "malformed state diff");
    }
    for (const auto& item : SplitTopLevel(dict.substr(1, dict.size() - 2), line_pos)) {
      std::size_t c = item.find(": ");
      if (c == std::string::npos) throw StateParseError(line_pos, "binding without ':'");
      std::string name = item.substr(0, c);
      std::string repr = item.substr(c + 2);
      auto it = std::find_if(current.begin(), current.end(),
                             [&](const auto& b) { return b.first == name; });
      if (it != current.end()) {
        it->second = repr;
      } else {
        current.emplace_back(name, repr);
      }
    }
    std::stable_sort(current.begin(), current.end(),
                     [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });
    out += "state: " + RenderLocals(current) + "\n";
  }
  return out;
}

}  // namespace exectrace
