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


#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "exectrace/channel.hpp"
#include "exectrace/strategies.hpp"
#include "support.hpp"

namespace exectrace {
namespace {

std::string StubCommand(const std::string& mode) {
  return std::string(EXECTRACE_STUB) + " " + mode;
}

EpisodeContext Collatz(int n) {
  return MakeContext(testing::Bench("collatz"), {Value(n)}, Granularity::kLine);
}

TEST_CASE("subprocess oracle stub matches the in-process oracle") {
  OraclePredictor o;
  for (Granularity g : {Granularity::kLine, Granularity::kInstruction}) {
    EpisodeContext ctx = MakeContext(testing::Bench("fibonacci"), {Value(8)}, g);
    ExternalPredictor p(std::make_unique<SubprocessChannel>(StubCommand("oracle"), 10));
    for (Strategy s : {Strategy::kGreedy, Strategy::kArgmin, Strategy::kDijkstra}) {
      EpisodeResult a = RunEpisode(s, p, ctx, {});
      EpisodeResult b = RunEpisode(s, o, ctx, {});
      CHECK(a.outcome_correct);
      CHECK(a.process_correct == b.process_correct);
      CHECK(a.steps_used == b.steps_used);
    }
  }
}

TEST_CASE("subprocess echo stub scores control flow wrong") {
  EpisodeContext ctx = Collatz(5);
  ExternalPredictor p(OpenChannel("exec:" + StubCommand("echo"), 10));
  EpisodeConfig cfg;
  cfg.max_predictions = 5;
  EpisodeResult e = RunGreedy(p, ctx, cfg);
  CHECK(e.steps_used == 5);
  for (const auto& s : e.steps) {
    CHECK(!s.parse_failed);
    CHECK(!s.facets.control_flow);
  }
  CHECK(!e.infrastructure_failure);
}

TEST_CASE("malformed stub output is not an infrastructure failure") {
  ExternalPredictor p(std::make_unique<SubprocessChannel>(StubCommand("malformed"), 10));
  EpisodeResult e = RunGreedy(p, Collatz(4), {});
  CHECK(!e.outcome_correct);
  CHECK(!e.infrastructure_failure);
  CHECK(e.steps.at(0).parse_failed);
}

TEST_CASE("channel failures") {
  SubprocessChannel hang(StubCommand("hang"), 0.3);
  auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(hang.Exchange(R"({"id": 0, "prompt": "", "n": 1})"), ChannelError);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));

  SubprocessChannel gone(StubCommand("exit"), 5);
  CHECK_THROWS_AS(gone.Exchange(R"({"id": 0, "prompt": "", "n": 1})"), ChannelError);

  ExternalPredictor bad_id(std::make_unique<SubprocessChannel>(StubCommand("badid"), 10));
  EpisodeResult e = RunGreedy(bad_id, Collatz(4), {});
  CHECK(e.infrastructure_failure);
  CHECK(e.reason.find("does not match") != std::string::npos);

  CHECK_THROWS_AS(OpenChannel("udp://x", 1), ChannelError);
  CHECK_THROWS_AS(OpenChannel("tcp://localhost", 1), ChannelError);
  CHECK_THROWS_AS(OpenChannel("tcp://localhost:notaport", 1), ChannelError);
}

// Accepts one connection and echoes every line back in upper case.
class EchoServer {
 public:
  EchoServer() {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    ::listen(fd_, 1);
    thread_ = std::thread([this] {
      int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) return;
      std::string buf;
      char ch;
      while (::read(c, &ch, 1) == 1) {
        if (ch != '\n') {
          buf += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
          continue;
        }
        buf += '\n';
        if (::write(c, buf.data(), buf.size()) < 0) break;
        buf.clear();
      }
      ::close(c);
    });
  }
  ~EchoServer() {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    thread_.join();
  }
  int port() const { return port_; }

 private:
  int fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

TEST_CASE("tcp channel") {
  EchoServer server;
  {
    auto ch = OpenChannel("tcp://127.0.0.1:" + std::to_string(server.port()), 5);
    CHECK(ch->Exchange("hello") == "HELLO");
    CHECK(ch->Exchange("again") == "AGAIN");
  }
  CHECK_THROWS_AS(TcpChannel("127.0.0.1", 1, 1), ChannelError);
}

}  // namespace
}  // namespace exectrace
