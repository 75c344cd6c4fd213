// Copyright 2026 The cotrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cotrobust/corpus.hpp"
#include "json.hpp"

namespace cotrobust {

enum class OutcomeStatus { kPass, kFail, kError, kTimeout, kParseFailure };

std::string_view to_string(OutcomeStatus s);
OutcomeStatus parse_outcome_status(std::string_view s);

struct OutcomeRecord {
  std::string task_id;
  ExperimentCondition condition;
  OutcomeStatus status = OutcomeStatus::kError;
  long long duration_ms = 0;
  std::string detail;

  std::string key() const { return trace_key(task_id, condition); }
  bool operator==(const OutcomeRecord&) const = default;
};

nlohmann::json to_json(const OutcomeRecord& r);
OutcomeRecord outcome_from_json(const nlohmann::json& j);

struct SandboxConfig {
  // Runner command line; the request goes to its stdin.
  std::vector<std::string> runner_argv{"python3", "-m", "pyrunner"};
  int default_timeout_s = 10;
  // Extra wall-clock allowance before the child is killed from outside.
  int grace_s = 1;
  std::size_t max_detail_bytes = 2000;
};

// Runs generated code against task tests through the runner protocol: one
// JSON request line on stdin ({source, test, entry_point, timeout_s}), one
// JSON reply line on stdout ({status, duration_ms, detail}). Each call gets
// its own child process (own process group) and scratch directory.
class Sandbox {
 public:
  explicit Sandbox(SandboxConfig config = {});

  // Test failures, crashes and protocol violations come back as data. Throws
  // Error(kEnvironment) only when the runner cannot be started.
  OutcomeRecord evaluate(std::string_view code_text, const Task& task, int timeout_s) const;
  OutcomeRecord evaluate(std::string_view code_text, const Task& task) const {
    return evaluate(code_text, task, config_.default_timeout_s);
  }

  const SandboxConfig& config() const { return config_; }

 private:
  SandboxConfig config_;
};

// Classifies one runner reply (stdout text plus exit code).
OutcomeRecord interpret_reply(std::string_view stdout_text, int exit_code, long long wall_ms,
                              std::size_t max_detail_bytes);

struct CellCount {
  int n = 0;
  int c = 0;
  bool operator==(const CellCount&) const = default;
};

// Key of a matrix cell: the trace key without the sample index.
std::string cell_key(std::string_view task_id, const ExperimentCondition& c);

// n samples and c passes of one cell. Throws Error(kGrouping) when records
// from different cells are mixed.
CellCount aggregate(const std::vector<OutcomeRecord>& records);

// Counts per cell, keyed by cell_key.
std::map<std::string, CellCount> aggregate_by_cell(const std::vector<OutcomeRecord>& records);

}  // namespace cotrobust
