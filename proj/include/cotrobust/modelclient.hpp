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

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotrobust/corpus.hpp"
#include "cotrobust/prompting.hpp"
#include "json.hpp"

namespace cotrobust {

inline constexpr int kTraceSchemaVersion = 1;

struct TokenStep {
  int index = 0;
  std::string token;
  double logprob = 0.0;  // natural log
  // Sorted by descending logprob; contains the chosen token.
  std::vector<std::pair<std::string, double>> top_alternatives;
  std::size_t char_offset = 0;

  bool operator==(const TokenStep&) const = default;
};

struct GenerationTrace {
  std::string task_id;
  ExperimentCondition condition;
  std::vector<TokenStep> steps;
  std::string decoded_text;
  std::string finish_reason;

  std::size_t length() const { return steps.size(); }
  std::string key() const { return trace_key(task_id, condition); }

  bool operator==(const GenerationTrace&) const = default;
};

// Builds a trace from raw (token, logprob, alternatives) triples: sorts the
// alternatives, appends the chosen token when the endpoint omitted it, drops
// zero-length tokens, and fills indices, offsets and decoded_text.
struct RawStep {
  std::string token;
  double logprob;
  std::vector<std::pair<std::string, double>> alternatives;
};
GenerationTrace assemble_trace(std::string task_id, ExperimentCondition condition,
                               std::vector<RawStep> raw, std::string finish_reason);

// Throws Error(kParse) describing the first violated structural invariant.
void validate_trace(const GenerationTrace& trace);

nlohmann::json to_json(const GenerationTrace& trace);
GenerationTrace trace_from_json(const nlohmann::json& j);

void save_trace(const GenerationTrace& trace, const std::filesystem::path& path);
GenerationTrace load_trace(const std::filesystem::path& path);

// All traces in a line-delimited file. With tolerate_torn_tail, an
// unparseable final line (interrupted append) is ignored.
std::vector<GenerationTrace> load_traces(const std::filesystem::path& path,
                                         bool tolerate_torn_tail = false);
void save_traces(const std::vector<GenerationTrace>& traces, const std::filesystem::path& path);

// Append-only trace log; appends from concurrent workers are serialized.
class TraceLog {
 public:
  explicit TraceLog(const std::filesystem::path& path);
  void append(const GenerationTrace& trace);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

enum class ApiFlavor { kCompletions, kChat };

struct ClientConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1
  ApiFlavor api = ApiFlavor::kCompletions;
  std::string model;
  std::string api_key;  // sent as a Bearer token when non-empty
  int timeout_s = 120;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  int max_in_flight = 4;
};

struct GenerationParams {
  double temperature = 0.5;
  int max_tokens = 1024;
  int top_logprobs = 20;
};

// Request body for the configured API flavor.
nlohmann::json build_request(const ClientConfig& config, const PromptBundle& prompt,
                             const GenerationParams& params);

// Extracts (token, logprob, alternatives) from a response body. Throws
// Error(kCapability) when the response carries no log-probabilities.
std::vector<RawStep> parse_logprobs(const nlohmann::json& response, ApiFlavor api,
                                    std::string* finish_reason);

// OpenAI-compatible endpoint driver. Shareable across threads; concurrent
// requests beyond max_in_flight wait.
class ModelClient {
 public:
  explicit ModelClient(ClientConfig config);

  // One sampled completion. The returned trace carries task_id, mode and
  // aware from the prompt, the temperature and the client model; callers set
  // input_condition and sample_index.
  GenerationTrace generate(const PromptBundle& prompt, const GenerationParams& params);

  const ClientConfig& config() const { return config_; }

 private:
  nlohmann::json post_with_retry(const std::string& path, const nlohmann::json& body);

  ClientConfig config_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace cotrobust
