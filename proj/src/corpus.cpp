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

#include "cotrobust/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "cotrobust/csv.hpp"
#include "cotrobust/error.hpp"

namespace cotrobust {

using nlohmann::json;

std::string_view to_string(Benchmark b) {
  return b == Benchmark::kMHPP ? "MHPP" : "BCB";
}

std::string_view to_string(InputCondition c) {
  switch (c) {
    case InputCondition::kClean: return "Clean";
    case InputCondition::kC1: return "C1";
    case InputCondition::kC2: return "C2";
    case InputCondition::kC3: return "C3";
    case InputCondition::kW1: return "W1";
    case InputCondition::kW2: return "W2";
    case InputCondition::kW3: return "W3";
    case InputCondition::kS1: return "S1";
  }
  return "?";
}

std::string_view to_string(Mode m) { return m == Mode::kCoT ? "CoT" : "NoCoT"; }

Benchmark parse_benchmark(std::string_view s) {
  if (s == "MHPP" || s == "mhpp") return Benchmark::kMHPP;
  if (s == "BCB" || s == "bcb" || s == "BigCodeBench") return Benchmark::kBCB;
  throw Error(ErrorKind::kUsage, "unknown benchmark '" + std::string(s) + "'");
}

const std::vector<InputCondition>& all_input_conditions() {
  static const std::vector<InputCondition> kAll = {
      InputCondition::kClean, InputCondition::kC1, InputCondition::kC2,
      InputCondition::kC3,    InputCondition::kW1, InputCondition::kW2,
      InputCondition::kW3,    InputCondition::kS1};
  return kAll;
}

InputCondition parse_input_condition(std::string_view s) {
  for (auto c : all_input_conditions()) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorKind::kUsage, "unknown input condition '" + std::string(s) + "'");
}

Mode parse_mode(std::string_view s) {
  if (s == "CoT" || s == "cot") return Mode::kCoT;
  if (s == "NoCoT" || s == "nocot") return Mode::kNoCoT;
  throw Error(ErrorKind::kUsage, "unknown mode '" + std::string(s) + "'");
}

std::optional<std::string> Task::canonical_program() const {
  if (!canonical_solution) return std::nullopt;
  if (canonical_solution->find("def " + entry_point) != std::string::npos) {
    return canonical_solution;
  }
  return prompt() + *canonical_solution;
}

namespace {

bool is_ident_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
}

// Position just past the colon closing the header whose '(' is at `open`.
std::size_t header_colon(std::string_view text, std::size_t open) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = open; i < text.size(); ++i) {
    char ch = text[i];
    if (quote) {
      if (ch == '\\') {
        ++i;
      } else if (ch == quote) {
        quote = 0;
      }
      continue;
    }
    switch (ch) {
      case '\'':
      case '"':
        quote = ch;
        break;
      case '(':
      case '[':
      case '{':
        ++depth;
        break;
      case ')':
      case ']':
      case '}':
        --depth;
        break;
      case ':':
        if (depth == 0) return i + 1;
        break;
      default:
        break;
    }
  }
  return std::string_view::npos;
}

}  // namespace

PromptSplit split_prompt(std::string_view prompt, std::string_view entry_point) {
  std::size_t line_start = 0;
  while (line_start <= prompt.size()) {
    std::size_t line_end = prompt.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = prompt.size();
    std::string_view line = prompt.substr(line_start, line_end - line_start);
    std::size_t p = line.find_first_not_of(" \t");
    if (p != std::string_view::npos) {
      std::string_view rest = line.substr(p);
      if (rest.starts_with("async ")) rest.remove_prefix(6);
      if (rest.starts_with("def ")) {
        rest.remove_prefix(4);
        std::size_t q = rest.find_first_not_of(" \t");
        if (q != std::string_view::npos && rest.substr(q).starts_with(entry_point)) {
          std::string_view after = rest.substr(q + entry_point.size());
          std::size_t r = after.find_first_not_of(" \t");
          if (r != std::string_view::npos && after[r] == '(' &&
              (after.empty() || !is_ident_char(after[0]))) {
            std::size_t open = static_cast<std::size_t>(after.data() + r - prompt.data());
            std::size_t colon = header_colon(prompt, open);
            if (colon != std::string_view::npos) {
              std::size_t nl = prompt.find('\n', colon);
              std::size_t end = nl == std::string_view::npos ? prompt.size() : nl + 1;
              return {std::string(prompt.substr(0, end)), std::string(prompt.substr(end))};
            }
          }
        }
      }
    }
    if (line_end == prompt.size()) break;
    line_start = line_end + 1;
  }
  throw Error(ErrorKind::kRecord,
              "no function header for '" + std::string(entry_point) + "' in prompt");
}

std::vector<json> read_json_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kLoad, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::size_t first = text.find_first_not_of(" \t\r\n");
  std::vector<json> records;
  if (first == std::string::npos) return records;
  try {
    if (text[first] == '[') {
      json arr = json::parse(text);
      for (auto& r : arr) records.push_back(std::move(r));
      return records;
    }
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
        records.push_back(json::parse(line));
      }
      start = end + 1;
    }
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kLoad, path.string() + ": malformed JSON: " + e.what());
  }
  return records;
}

namespace {

const json& required(const json& record, std::size_t index, const char* field) {
  if (!record.is_object()) {
    throw RecordError(index, field, "record " + std::to_string(index) + " is not an object");
  }
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) {
    throw RecordError(index, field,
                      "record " + std::to_string(index) + " is missing field '" + field + "'");
  }
  return *it;
}

std::string required_string(const json& record, std::size_t index, const char* field) {
  const json& v = required(record, index, field);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw RecordError(index, field,
                    "record " + std::to_string(index) + " field '" + field + "' is not a string");
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Accepts a JSON string array or a Python list literal such as "['numpy', 're']".
std::vector<std::string> parse_libs(const json& v, std::size_t index) {
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(e.get<std::string>());
    return out;
  }
  if (!v.is_string()) throw RecordError(index, "libs", "libs must be a list or list literal");
  std::string s = trim(v.get<std::string>());
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trim(item);
    if (t.size() >= 2 && (t.front() == '\'' || t.front() == '"') && t.back() == t.front()) {
      t = t.substr(1, t.size() - 2);
    }
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

void check_invariants(const Task& t, std::size_t index) {
  if (t.signature.empty() || t.signature.find(t.entry_point) == std::string::npos) {
    throw RecordError(index, "signature", "signature does not contain entry point");
  }
  if (t.tests.empty()) throw RecordError(index, "test", "empty test field");
}

void check_unique(const std::vector<Task>& tasks) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!seen.insert(tasks[i].task_id).second) {
      throw RecordError(i, "task_id", "duplicate task_id '" + tasks[i].task_id + "'");
    }
  }
}

Task split_or_throw(Task t, const std::string& prompt, std::size_t index, const char* field) {
  try {
    auto split = split_prompt(prompt, t.entry_point);
    t.signature = std::move(split.signature);
    t.docstring = std::move(split.docstring);
  } catch (const Error& e) {
    throw RecordError(index, field, "record " + std::to_string(index) + ": " + e.what());
  }
  check_invariants(t, index);
  return t;
}

}  // namespace

Task task_from_mhpp(const json& record, std::size_t index) {
  Task t;
  t.task_id = required_string(record, index, "task_id");
  t.entry_point = required_string(record, index, "function_name");
  const json& params = required(record, index, "parameters");
  t.parameters = params.is_string() ? params.get<std::string>() : params.dump();
  std::string prompt = required_string(record, index, "prompt");
  t.tests = required_string(record, index, "test");
  if (auto it = record.find("canonical_solution"); it != record.end() && it->is_string()) {
    t.canonical_solution = it->get<std::string>();
  }
  t.source_benchmark = Benchmark::kMHPP;
  return split_or_throw(std::move(t), prompt, index, "prompt");
}

Task task_from_bcb(const json& record, std::size_t index) {
  Task t;
  t.task_id = required_string(record, index, "task_id");
  std::string prompt = required_string(record, index, "complete_prompt");
  t.entry_point = required_string(record, index, "entry_point");
  t.tests = required_string(record, index, "test");
  if (auto it = record.find("canonical_solution"); it != record.end() && it->is_string()) {
    t.canonical_solution = it->get<std::string>();
  }
  if (auto it = record.find("libs"); it != record.end() && !it->is_null()) {
    t.libs = parse_libs(*it, index);
  }
  t.source_benchmark = Benchmark::kBCB;
  return split_or_throw(std::move(t), prompt, index, "complete_prompt");
}

std::vector<Task> load_mhpp(const std::filesystem::path& path) {
  auto records = read_json_records(path);
  std::vector<Task> tasks;
  tasks.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) tasks.push_back(task_from_mhpp(records[i], i));
  check_unique(tasks);
  return tasks;
}

std::vector<Task> load_bcb(const std::filesystem::path& path) {
  auto records = read_json_records(path);
  std::vector<Task> tasks;
  tasks.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) tasks.push_back(task_from_bcb(records[i], i));
  check_unique(tasks);
  return tasks;
}

std::vector<Task> load_tasks(const std::filesystem::path& path) {
  auto records = read_json_records(path);
  std::vector<Task> tasks;
  tasks.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    if (r.is_object() && r.contains("source_benchmark") && r.contains("signature")) {
      try {
        tasks.push_back(task_from_json(r));
      } catch (const json::exception& e) {
        throw RecordError(i, "", "record " + std::to_string(i) + ": " + e.what());
      }
      check_invariants(tasks.back(), i);
    } else if (r.is_object() && r.contains("complete_prompt")) {
      tasks.push_back(task_from_bcb(r, i));
    } else {
      tasks.push_back(task_from_mhpp(r, i));
    }
  }
  check_unique(tasks);
  return tasks;
}

json to_json(const Task& t) {
  json j;
  j["task_id"] = t.task_id;
  j["entry_point"] = t.entry_point;
  j["docstring"] = t.docstring;
  j["signature"] = t.signature;
  j["tests"] = t.tests;
  j["canonical_solution"] = t.canonical_solution ? json(*t.canonical_solution) : json(nullptr);
  j["libs"] = t.libs ? json(*t.libs) : json(nullptr);
  j["parameters"] = t.parameters ? json(*t.parameters) : json(nullptr);
  j["source_benchmark"] = to_string(t.source_benchmark);
  return j;
}

Task task_from_json(const json& j) {
  Task t;
  t.task_id = j.at("task_id").get<std::string>();
  t.entry_point = j.at("entry_point").get<std::string>();
  t.docstring = j.at("docstring").get<std::string>();
  t.signature = j.at("signature").get<std::string>();
  t.tests = j.at("tests").get<std::string>();
  if (j.contains("canonical_solution") && !j["canonical_solution"].is_null()) {
    t.canonical_solution = j["canonical_solution"].get<std::string>();
  }
  if (j.contains("libs") && !j["libs"].is_null()) {
    t.libs = j["libs"].get<std::vector<std::string>>();
  }
  if (j.contains("parameters") && !j["parameters"].is_null()) {
    t.parameters = j["parameters"].get<std::string>();
  }
  t.source_benchmark = parse_benchmark(j.at("source_benchmark").get<std::string>());
  return t;
}

void save_corpus(const std::vector<Task>& tasks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kEnvironment, "cannot write " + path.string());
  for (const auto& t : tasks) out << to_json(t).dump() << '\n';
}

std::vector<Task> load_corpus(const std::filesystem::path& path) {
  auto records = read_json_records(path);
  std::vector<Task> tasks;
  tasks.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      tasks.push_back(task_from_json(records[i]));
    } catch (const json::exception& e) {
      throw RecordError(i, "", "record " + std::to_string(i) + ": " + e.what());
    }
  }
  check_unique(tasks);
  return tasks;
}

json to_json(const ExperimentCondition& c) {
  return json{{"input_condition", to_string(c.input_condition)},
              {"mode", to_string(c.mode)},
              {"aware", c.aware},
              {"temperature", c.temperature},
              {"model_id", c.model_id},
              {"sample_index", c.sample_index}};
}

ExperimentCondition condition_from_json(const json& j) {
  ExperimentCondition c;
  c.input_condition = parse_input_condition(j.at("input_condition").get<std::string>());
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.aware = j.at("aware").get<bool>();
  c.temperature = j.at("temperature").get<double>();
  c.model_id = j.at("model_id").get<std::string>();
  c.sample_index = j.at("sample_index").get<int>();
  return c;
}

std::uint64_t matrix_size(std::size_t task_count, const MatrixConfig& config) {
  if (config.samples_per_cell < 0) return 0;
  return static_cast<std::uint64_t>(task_count) * config.input_conditions.size() *
         config.modes.size() * config.aware.size() * config.temperatures.size() *
         config.models.size() * static_cast<std::uint64_t>(config.samples_per_cell);
}

std::vector<MatrixRow> enumerate_matrix(const std::vector<Task>& tasks,
                                        const MatrixConfig& config) {
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tasks[a].task_id < tasks[b].task_id;
  });
  std::vector<MatrixRow> rows;
  rows.reserve(matrix_size(tasks.size(), config));
  for (std::size_t ti : order) {
    for (auto input : config.input_conditions) {
      for (auto mode : config.modes) {
        for (bool aware : config.aware) {
          for (double temp : config.temperatures) {
            for (const auto& model : config.models) {
              for (int s = 0; s < config.samples_per_cell; ++s) {
                rows.push_back({ti, ExperimentCondition{input, mode, aware, temp, model, s}});
              }
            }
          }
        }
      }
    }
  }
  return rows;
}

std::string trace_key(std::string_view task_id, const ExperimentCondition& c) {
  std::string key(task_id);
  key += '|';
  key += to_string(c.input_condition);
  key += '|';
  key += to_string(c.mode);
  key += c.aware ? "|aware|" : "|base|";
  key += format_number(c.temperature);
  key += '|';
  key += c.model_id;
  key += '|';
  key += std::to_string(c.sample_index);
  return key;
}

}  // namespace cotrobust
