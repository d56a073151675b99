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

#include "exectrace/channel.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace exectrace {

namespace {

void WriteAll(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ChannelError(std::string("write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::string ReadLine(int fd, std::string& buffer, double timeout_seconds) {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_seconds);
  while (true) {
    std::size_t nl = buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) throw ChannelError("timed out waiting for a response");
    pollfd p{fd, POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ChannelError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (r == 0) throw ChannelError("timed out waiting for a response");
    char chunk[4096];
    ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ChannelError(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ChannelError("peer closed the stream");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

SubprocessChannel::SubprocessChannel(const std::string& command, double timeout_seconds)
    : timeout_(timeout_seconds) {
  // A dead child must surface as a write error, not kill the harness.
  ::signal(SIGPIPE, SIG_IGN);
  int in[2], out[2];
  if (::pipe(in) != 0 || ::pipe(out) != 0) throw ChannelError("pipe failed");
  pid_t pid = ::fork();
  if (pid < 0) throw ChannelError("fork failed");
  if (pid == 0) {
    // Own process group, so teardown also reaches anything the shell spawned.
    ::setpgid(0, 0);
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::close(in[0]);
    ::close(in[1]);
    ::close(out[0]);
    ::close(out[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  to_child_ = in[1];
  from_child_ = out[0];
  pid_ = pid;
}

SubprocessChannel::~SubprocessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Give the child a moment to exit on EOF before killing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        ::kill(-pid_, SIGKILL);
        return;
      }
      ::usleep(2000);
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::string SubprocessChannel::Exchange(const std::string& line) {
  WriteAll(to_child_, line + "\n");
  return ReadLine(from_child_, buffer_, timeout_);
}

TcpChannel::TcpChannel(const std::string& host, int port, double timeout_seconds)
    : timeout_(timeout_seconds) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw ChannelError("cannot resolve " + host);
  }
  for (addrinfo* a = res; a; a = a->ai_next) {
    int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw ChannelError("cannot connect to " + host + ":" + std::to_string(port));
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

std::string TcpChannel::Exchange(const std::string& line) {
  WriteAll(fd_, line + "\n");
  return ReadLine(fd_, buffer_, timeout_);
}

std::unique_ptr<Channel> OpenChannel(const std::string& address, double timeout_seconds) {
  constexpr std::string_view kExec = "exec:";
  constexpr std::string_view kTcp = "tcp://";
  if (address.rfind(kExec, 0) == 0) {
    return std::make_unique<SubprocessChannel>(address.substr(kExec.size()), timeout_seconds);
  }
  if (address.rfind(kTcp, 0) == 0) {
    std::string rest = address.substr(kTcp.size());
    std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos) throw ChannelError("tcp address needs host:port");
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ChannelError("bad port in '" + address + "'");
    }
    return std::make_unique<TcpChannel>(rest.substr(0, colon), port, timeout_seconds);
  }
  throw ChannelError("unknown channel address '" + address + "'");
}

}  // namespace exectrace
