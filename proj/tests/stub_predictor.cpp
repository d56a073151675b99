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


// Line-protocol model stand-in for channel tests.
//   echo       answers with the prompt's own state block
//   oracle     answers by resuming the program from the prompt
//   malformed  answers with text that is not a state
//   badid      answers with the wrong request id
//   hang       reads requests and never answers
//   exit       exits after the first request
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "exectrace/bytecode.hpp"
#include "exectrace/parser.hpp"
#include "exectrace/state.hpp"
#include "exectrace/tracer.hpp"

namespace {

using exectrace::SelfContainedState;

std::string Oracle(const std::string& prompt, int n) {
  SelfContainedState s = exectrace::ParseState(prompt);
  exectrace::Program program = exectrace::Parse(s.source);
  exectrace::Module module =
      exectrace::CompileProgram(program, s.source, program.functions.back().name);
  if (s.terminal()) return exectrace::RenderState(s);
  exectrace::ResumeResult r = exectrace::Resume(module, s, n);
  if (r.states.empty()) return exectrace::RenderState(s);
  const SelfContainedState& out =
      r.states.size() > static_cast<std::size_t>(n) ? r.states[static_cast<std::size_t>(n)]
                                                    : r.states.back();
  return exectrace::RenderState(out);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "exit") return 0;
    if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::hours(1));
      continue;
    }
    auto req = nlohmann::json::parse(line);
    const std::string prompt = req["prompt"].get<std::string>();
    std::string text;
    if (mode == "oracle") {
      try {
        text = Oracle(prompt, req["n"].get<int>());
      } catch (const std::exception& e) {
        text = std::string("error: ") + e.what();
      }
    } else if (mode == "malformed") {
      text = "line: ??";
    } else {
      text = exectrace::RenderState(exectrace::ParseState(prompt));
    }
    nlohmann::json resp;
    resp["id"] = mode == "badid" ? req["id"].get<long>() + 1000 : req["id"].get<long>();
    resp["candidates"] = nlohmann::json::array({{{"text", text}, {"nll", 0.25}}});
    std::cout << resp.dump() << std::endl;
  }
  return 0;
}
