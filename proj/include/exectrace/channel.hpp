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

// Newline-delimited request/response byte streams.
#pragma once

#include <functional>
#include <memory>
#include <string>

#include "exectrace/predictor.hpp"

namespace exectrace {

class Channel {
 public:
  virtual ~Channel() = default;
  // Sends one line (newline appended) and returns the next line received,
  // without its newline. Throws ChannelError on EOF, I/O failure or timeout.
  virtual std::string Exchange(const std::string& line) = 0;
};

// Talks to `/bin/sh -c command` over its stdin/stdout.
class SubprocessChannel : public Channel {
 public:
  SubprocessChannel(const std::string& command, double timeout_seconds);
  ~SubprocessChannel() override;
  std::string Exchange(const std::string& line) override;

 private:
  int to_child_ = -1;
  int from_child_ = -1;
  int pid_ = -1;
  double timeout_;
  std::string buffer_;
};

class TcpChannel : public Channel {
 public:
  TcpChannel(const std::string& host, int port, double timeout_seconds);
  ~TcpChannel() override;
  std::string Exchange(const std::string& line) override;

 private:
  int fd_ = -1;
  double timeout_;
  std::string buffer_;
};

// In-process responder, for tests and embedding.
class FunctionChannel : public Channel {
 public:
  explicit FunctionChannel(std::function<std::string(const std::string&)> fn)
      : fn_(std::move(fn)) {}
  std::string Exchange(const std::string& line) override { return fn_(line); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

// `exec:<command>` or `tcp://host:port`.
std::unique_ptr<Channel> OpenChannel(const std::string& address, double timeout_seconds);

}  // namespace exectrace
