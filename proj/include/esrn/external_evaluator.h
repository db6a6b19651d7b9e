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

// Client for an evaluator running as a child process.
//
// Wire format: one JSON object per line on the child's stdin/stdout. The
// child announces itself with {"protocol": "esrn-eval", "version": 1}, then
// answers request lines with response lines in any order; responses are
// matched to requests by id. All requests of a batch are in flight at once.

#ifndef ESRN_EXTERNAL_EVALUATOR_H_
#define ESRN_EXTERNAL_EVALUATOR_H_

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "esrn/evaluator.h"

namespace esrn {

inline constexpr char kProtocolName[] = "esrn-eval";
inline constexpr int kProtocolVersion = 1;

class EvaluatorSpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExternalEvaluatorOptions {
  // Run through /bin/sh -c.
  std::string command;
  // A request times out after this long without any response arriving.
  std::chrono::milliseconds timeout{std::chrono::minutes(30)};
  int max_retries = 1;
  int max_restarts = 1;
};

// Parses one response line. NaN / Infinity literals (which some emitters
// write despite JSON forbidding them) are read as non-finite values.
// Throws ProtocolError on anything else that is not a response object.
EvalResponse ParseResponseLine(const std::string& line);

class ExternalEvaluator : public Evaluator {
 public:
  // Spawns the child and checks the handshake; throws EvaluatorSpawnError.
  explicit ExternalEvaluator(ExternalEvaluatorOptions options);
  ~ExternalEvaluator() override;

  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  // Failed requests (timeouts after retry, a child that keeps dying, error
  // statuses, contract violations) come back as error responses.
  std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) override;

  int restarts() const { return restarts_; }
  // Raw lines that could not be parsed, for diagnostics.
  const std::vector<std::string>& malformed_lines() const {
    return malformed_lines_;
  }

 private:
  void Start();
  void Stop();
  // Next complete line from the child, or nullopt on EOF / deadline.
  std::optional<std::string> ReadLine(
      std::chrono::steady_clock::time_point deadline, bool* eof);

  ExternalEvaluatorOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  int restarts_ = 0;
  std::vector<std::string> malformed_lines_;
};

}  // namespace esrn

#endif  // ESRN_EXTERNAL_EVALUATOR_H_
