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

#include "cotrobust/modelclient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "cotrobust/error.hpp"
#include "httplib.h"

namespace cotrobust {

using nlohmann::json;

GenerationTrace assemble_trace(std::string task_id, ExperimentCondition condition,
                               std::vector<RawStep> raw, std::string finish_reason) {
  GenerationTrace trace;
  trace.task_id = std::move(task_id);
  trace.condition = std::move(condition);
  trace.finish_reason = std::move(finish_reason);
  std::size_t offset = 0;
  for (auto& r : raw) {
    if (r.token.empty()) continue;
    TokenStep step;
    step.index = static_cast<int>(trace.steps.size());
    step.token = std::move(r.token);
    step.logprob = r.logprob;
    step.top_alternatives = std::move(r.alternatives);
    bool present = std::any_of(step.top_alternatives.begin(), step.top_alternatives.end(),
                               [&](const auto& a) { return a.first == step.token; });
    if (!present) step.top_alternatives.emplace_back(step.token, step.logprob);
    std::stable_sort(step.top_alternatives.begin(), step.top_alternatives.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    step.char_offset = offset;
    offset += step.token.size();
    trace.decoded_text += step.token;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

void validate_trace(const GenerationTrace& trace) {
  std::size_t offset = 0;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const auto& s = trace.steps[t];
    auto fail = [&](const std::string& what) {
      throw Error(ErrorKind::kParse, "trace " + trace.key() + " step " + std::to_string(t) + ": " + what);
    };
    if (s.index != static_cast<int>(t)) fail("index out of sequence");
    if (s.token.empty()) fail("empty token");
    if (s.char_offset != offset) fail("char_offset does not match token lengths");
    if (!(s.logprob <= 1e-9)) fail("logprob above zero");
    for (std::size_t k = 1; k < s.top_alternatives.size(); ++k) {
      if (s.top_alternatives[k].second > s.top_alternatives[k - 1].second) fail("alternatives not sorted");
    }
    offset += s.token.size();
  }
  if (offset != trace.decoded_text.size()) {
    throw Error(ErrorKind::kParse, "trace " + trace.key() + ": decoded_text length mismatch");
  }
}

json to_json(const GenerationTrace& trace) {
  json cond = to_json(trace.condition);
  cond["task_id"] = trace.task_id;
  json steps = json::array();
  for (const auto& s : trace.steps) {
    json top = json::array();
    for (const auto& [tok, lp] : s.top_alternatives) top.push_back(json::array({tok, lp}));
    steps.push_back(json{{"t", s.index},
                         {"token", s.token},
                         {"logprob", s.logprob},
                         {"top", std::move(top)},
                         {"char_offset", s.char_offset}});
  }
  return json{{"schema_version", kTraceSchemaVersion},
              {"condition", std::move(cond)},
              {"finish_reason", trace.finish_reason},
              {"steps", std::move(steps)}};
}

GenerationTrace trace_from_json(const json& j) {
  int version = j.at("schema_version").get<int>();
  if (version != kTraceSchemaVersion) {
    throw Error(ErrorKind::kVersion, "trace schema_version " + std::to_string(version) +
                                         " is not supported (expected " +
                                         std::to_string(kTraceSchemaVersion) + ")");
  }
  GenerationTrace trace;
  const json& cond = j.at("condition");
  trace.condition = condition_from_json(cond);
  trace.task_id = cond.at("task_id").get<std::string>();
  trace.finish_reason = j.at("finish_reason").get<std::string>();
  for (const auto& s : j.at("steps")) {
    TokenStep step;
    step.index = s.at("t").get<int>();
    step.token = s.at("token").get<std::string>();
    step.logprob = s.at("logprob").get<double>();
    for (const auto& alt : s.at("top")) {
      step.top_alternatives.emplace_back(alt.at(0).get<std::string>(), alt.at(1).get<double>());
    }
    step.char_offset = s.at("char_offset").get<std::size_t>();
    trace.decoded_text += step.token;
    trace.steps.push_back(std::move(step));
  }
  validate_trace(trace);
  return trace;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kLoad, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GenerationTrace parse_trace_line(std::string_view line, std::size_t line_offset,
                                 const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    std::size_t pos = line_offset + (e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(pos, path.string() + ": malformed trace at byte " + std::to_string(pos) + ": " +
                              e.what());
  }
  try {
    return trace_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(line_offset, path.string() + ": invalid trace record at byte " +
                                      std::to_string(line_offset) + ": " + e.what());
  }
}

}  // namespace

void save_trace(const GenerationTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kEnvironment, "cannot write " + path.string());
  out << to_json(trace).dump() << '\n';
}

GenerationTrace load_trace(const std::filesystem::path& path) {
  std::string text = slurp(path);
  std::size_t end = text.find('\n');
  if (end == std::string::npos) end = text.size();
  return parse_trace_line(std::string_view(text).substr(0, end), 0, path);
}

std::vector<GenerationTrace> load_traces(const std::filesystem::path& path, bool tolerate_torn_tail) {
  std::string text = slurp(path);
  std::vector<GenerationTrace> traces;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    bool last = end == std::string::npos;
    if (last) end = text.size();
    std::string_view line(text.data() + start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        traces.push_back(parse_trace_line(line, start, path));
      } catch (const ParseError&) {
        if (!(tolerate_torn_tail && last)) throw;
      }
    }
    start = end + 1;
  }
  return traces;
}

void save_traces(const std::vector<GenerationTrace>& traces, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kEnvironment, "cannot write " + tmp.string());
    for (const auto& t : traces) out << to_json(t).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

TraceLog::TraceLog(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw Error(ErrorKind::kEnvironment, "cannot open trace log " + path.string());
}

void TraceLog::append(const GenerationTrace& trace) {
  std::string line = to_json(trace).dump();
  line.push_back('\n');
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
}

// ---------------------------------------------------------------------------

json build_request(const ClientConfig& config, const PromptBundle& prompt,
                   const GenerationParams& params) {
  if (params.top_logprobs < 2) {
    throw Error(ErrorKind::kUsage, "top_logprobs must be at least 2");
  }
  if (config.api == ApiFlavor::kChat) {
    return json{{"model", config.model},
                {"messages", json::array({json{{"role", "user"}, {"content", prompt.text}}})},
                {"temperature", params.temperature},
                {"max_tokens", params.max_tokens},
                {"logprobs", true},
                {"top_logprobs", params.top_logprobs},
                {"n", 1}};
  }
  return json{{"model", config.model},       {"prompt", prompt.text},
              {"temperature", params.temperature}, {"max_tokens", params.max_tokens},
              {"logprobs", params.top_logprobs},   {"n", 1}};
}

std::vector<RawStep> parse_logprobs(const json& response, ApiFlavor api, std::string* finish_reason) {
  const json* choice = nullptr;
  if (auto it = response.find("choices"); it != response.end() && it->is_array() && !it->empty()) {
    choice = &(*it)[0];
  }
  if (!choice) throw Error(ErrorKind::kParse, "response has no choices");
  if (finish_reason) {
    auto fr = choice->find("finish_reason");
    *finish_reason = fr != choice->end() && fr->is_string() ? fr->get<std::string>() : "";
  }
  auto lp = choice->find("logprobs");
  if (lp == choice->end() || lp->is_null()) {
    throw Error(ErrorKind::kCapability, "endpoint returned no token log-probabilities");
  }
  std::vector<RawStep> steps;
  if (api == ApiFlavor::kChat) {
    auto content = lp->find("content");
    if (content == lp->end() || !content->is_array()) {
      throw Error(ErrorKind::kCapability, "endpoint returned no token log-probabilities");
    }
    for (const auto& item : *content) {
      RawStep s{item.at("token").get<std::string>(), item.at("logprob").get<double>(), {}};
      if (auto top = item.find("top_logprobs"); top != item.end() && top->is_array()) {
        for (const auto& alt : *top) {
          s.alternatives.emplace_back(alt.at("token").get<std::string>(), alt.at("logprob").get<double>());
        }
      }
      steps.push_back(std::move(s));
    }
    return steps;
  }
  const json& tokens = lp->at("tokens");
  const json& token_lps = lp->at("token_logprobs");
  const json* tops = lp->contains("top_logprobs") ? &lp->at("top_logprobs") : nullptr;
  if (!tops || tops->is_null()) {
    throw Error(ErrorKind::kCapability, "endpoint returned no top log-probabilities");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    RawStep s{tokens[i].get<std::string>(),
              token_lps[i].is_null() ? 0.0 : token_lps[i].get<double>(), {}};
    if (i < tops->size() && (*tops)[i].is_object()) {
      for (const auto& [tok, v] : (*tops)[i].items()) s.alternatives.emplace_back(tok, v.get<double>());
    }
    steps.push_back(std::move(s));
  }
  return steps;
}

ModelClient::ModelClient(ClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorKind::kConfig, "model endpoint not configured");
  while (!config_.endpoint.empty() && config_.endpoint.back() == '/') config_.endpoint.pop_back();
  config_.max_attempts = std::max(1, config_.max_attempts);
  config_.max_in_flight = std::max(1, config_.max_in_flight);
}

json ModelClient::post_with_retry(const std::string& path, const json& body) {
  std::size_t scheme = config_.endpoint.find("://");
  std::size_t path_at = config_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string origin = path_at == std::string::npos ? config_.endpoint : config_.endpoint.substr(0, path_at);
  std::string prefix = path_at == std::string::npos ? "" : config_.endpoint.substr(path_at);

  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    ModelClient* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->in_flight_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_s);
    client.set_read_timeout(config_.timeout_s);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(prefix + path, headers, body.dump(), "application/json");
    if (res && res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::kParse, std::string("malformed endpoint response: ") + e.what());
      }
    }
    bool retryable = !res || res->status == 429 || res->status >= 500;
    last_error = res ? "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200)
                     : httplib::to_string(res.error());
    if (!retryable) throw TransportError(attempt, "request rejected: " + last_error);
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError(config_.max_attempts, "request failed after " +
                                                  std::to_string(config_.max_attempts) +
                                                  " attempts: " + last_error);
}

GenerationTrace ModelClient::generate(const PromptBundle& prompt, const GenerationParams& params) {
  json body = build_request(config_, prompt, params);
  json response = post_with_retry(
      config_.api == ApiFlavor::kChat ? "/chat/completions" : "/completions", body);
  std::string finish;
  auto raw = parse_logprobs(response, config_.api, &finish);
  ExperimentCondition cond;
  cond.mode = prompt.mode;
  cond.aware = prompt.aware;
  cond.temperature = params.temperature;
  cond.model_id = config_.model;
  GenerationTrace trace = assemble_trace(prompt.task_id, cond, std::move(raw), std::move(finish));
  if (trace.steps.empty()) throw Error(ErrorKind::kEmptyGeneration, "endpoint returned zero tokens");
  return trace;
}

}  // namespace cotrobust
