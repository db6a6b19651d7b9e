// Copyright 2026 The ESRN Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "esrn/external_evaluator.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>
#include <regex>
#include <thread>

#include <spdlog/spdlog.h>

namespace esrn {

namespace {

using Clock = std::chrono::steady_clock;

void SetNonBlocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

EvalResponse Failure(const std::string& id, const std::string& message) {
  EvalResponse r;
  r.id = id;
  r.status = EvalStatus::kError;
  r.message = message;
  return r;
}

int MillisUntil(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(std::min<int64_t>(
                                    left.count(), 1 << 30));
}

}  // namespace

EvalResponse ParseResponseLine(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) {
    static const std::regex kNonFinite(R"((:|,|\[)\s*-?(NaN|Infinity)\b)");
    const std::string patched = std::regex_replace(line, kNonFinite, "$1null");
    j = nlohmann::json::parse(patched, nullptr, false);
  }
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError("malformed response line");
  }
  return ResponseFromJson(j);
}

ExternalEvaluator::ExternalEvaluator(ExternalEvaluatorOptions options)
    : options_(std::move(options)) {
  signal(SIGPIPE, SIG_IGN);
  Start();
}

ExternalEvaluator::~ExternalEvaluator() { Stop(); }

void ExternalEvaluator::Start() {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw EvaluatorSpawnError(std::string("pipe: ") + std::strerror(errno));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw EvaluatorSpawnError(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw EvaluatorSpawnError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", options_.command.c_str(),
          static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
  SetNonBlocking(to_child_);
  SetNonBlocking(from_child_);

  bool eof = false;
  const auto line = ReadLine(Clock::now() + options_.timeout, &eof);
  if (!line) {
    Stop();
    throw EvaluatorSpawnError("evaluator '" + options_.command +
                              "' sent no handshake");
  }
  const auto hello = nlohmann::json::parse(*line, nullptr, false);
  if (hello.is_discarded() || !hello.is_object() ||
      hello.value("protocol", "") != kProtocolName ||
      hello.value("version", -1) != kProtocolVersion) {
    Stop();
    throw EvaluatorSpawnError("evaluator handshake mismatch: " + *line);
  }
}

void ExternalEvaluator::Stop() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closed stdin asks the child to exit; give it a moment, then kill.
    const auto deadline = Clock::now() + std::chrono::milliseconds(500);
    int status = 0;
    while (waitpid(pid_, &status, WNOHANG) == 0) {
      if (Clock::now() > deadline) {
        kill(-pid_, SIGKILL);
        kill(pid_, SIGKILL);
        waitpid(pid_, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  pid_ = -1;
}

std::optional<std::string> ExternalEvaluator::ReadLine(
    Clock::time_point deadline, bool* eof) {
  *eof = false;
  while (true) {
    const size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (from_child_ < 0) {
      *eof = true;
      return std::nullopt;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, MillisUntil(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n > 0) {
      buffer_.append(chunk, static_cast<size_t>(n));
    } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
      *eof = true;
      return std::nullopt;
    }
  }
}

std::vector<EvalResponse> ExternalEvaluator::EvaluateBatch(
    std::span<const EvalRequest> requests) {
  const size_t n = requests.size();
  std::vector<std::optional<EvalResponse>> results(n);
  std::map<std::string, size_t> pending;
  std::vector<int> attempts(n, 0);
  std::string outgoing;
  int batch_restarts = 0;

  auto fail_pending = [&](const std::string& why) {
    for (const auto& [id, i] : pending) results[i] = Failure(id, why);
    pending.clear();
  };
  auto restart = [&]() -> bool {
    Stop();
    if (batch_restarts >= options_.max_restarts) return false;
    ++batch_restarts;
    ++restarts_;
    spdlog::warn("evaluator exited; restarting ({} of {})", batch_restarts,
                 options_.max_restarts);
    try {
      Start();
    } catch (const EvaluatorSpawnError& e) {
      spdlog::error("evaluator restart failed: {}", e.what());
      return false;
    }
    outgoing.clear();
    for (const auto& [id, i] : pending) {
      outgoing += ToJson(requests[i]).dump() + "\n";
    }
    return true;
  };

  for (size_t i = 0; i < n; ++i) {
    if (!pending.emplace(requests[i].id, i).second) {
      results[i] = Failure(requests[i].id, "duplicate request id in batch");
      continue;
    }
    outgoing += ToJson(requests[i]).dump() + "\n";
    attempts[i] = 1;
  }
  if (pid_ < 0 && !pending.empty() && !restart()) {
    fail_pending("evaluator not running");
  }

  auto last_progress = Clock::now();
  while (!pending.empty()) {
    const auto deadline = last_progress + options_.timeout;
    pollfd fds[2] = {{from_child_, POLLIN, 0},
                     {to_child_, static_cast<short>(outgoing.empty() ? 0 : POLLOUT), 0}};
    const int rc = poll(fds, 2, MillisUntil(deadline));
    if (rc < 0 && errno == EINTR) continue;

    bool died = false;
    if (rc == 0) {
      for (auto it = pending.begin(); it != pending.end();) {
        const size_t i = it->second;
        if (attempts[i] <= options_.max_retries) {
          spdlog::warn("evaluator timeout on '{}', retrying", it->first);
          ++attempts[i];
          outgoing += ToJson(requests[i]).dump() + "\n";
          ++it;
        } else {
          spdlog::warn("evaluator timeout on '{}', giving up", it->first);
          results[i] = Failure(it->first, "timeout");
          it = pending.erase(it);
        }
      }
      last_progress = Clock::now();
      continue;
    }

    if (fds[1].revents & (POLLOUT | POLLERR | POLLHUP)) {
      const ssize_t w = write(to_child_, outgoing.data(), outgoing.size());
      if (w > 0) {
        outgoing.erase(0, static_cast<size_t>(w));
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        died = true;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char chunk[65536];
      const ssize_t r = read(from_child_, chunk, sizeof(chunk));
      if (r > 0) {
        buffer_.append(chunk, static_cast<size_t>(r));
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        died = true;
      }
    }

    size_t nl;
    while ((nl = buffer_.find('\n')) != std::string::npos) {
      const std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      EvalResponse response;
      try {
        response = ParseResponseLine(line);
      } catch (const ProtocolError& e) {
        spdlog::error("evaluator protocol error ({}): {}", e.what(), line);
        malformed_lines_.push_back(line);
        continue;
      }
      auto it = pending.find(response.id);
      if (it == pending.end()) continue;  // late duplicate or unknown id
      const size_t i = it->second;
      if (auto violation = CheckResponseContract(
              response, requests[i].genome.ActiveCount())) {
        response = Failure(response.id, *violation);
      }
      results[i] = std::move(response);
      pending.erase(it);
      last_progress = Clock::now();
    }

    if (died && !pending.empty()) {
      if (restart()) {
        last_progress = Clock::now();
      } else {
        fail_pending("evaluator exited");
      }
    } else if (died) {
      Stop();
    }
  }

  std::vector<EvalResponse> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace esrn
