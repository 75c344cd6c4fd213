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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cotrobust {

enum class Benchmark { kMHPP, kBCB };

// Clean plus the seven perturbation families, in reporting order.
enum class InputCondition { kClean, kC1, kC2, kC3, kW1, kW2, kW3, kS1 };

enum class Mode { kCoT, kNoCoT };

std::string_view to_string(Benchmark b);
std::string_view to_string(InputCondition c);
std::string_view to_string(Mode m);
Benchmark parse_benchmark(std::string_view s);
InputCondition parse_input_condition(std::string_view s);
Mode parse_mode(std::string_view s);

const std::vector<InputCondition>& all_input_conditions();

struct Task {
  std::string task_id;
  std::string entry_point;
  std::string docstring;
  // Function header plus any preamble (imports) before it, byte-preserved.
  std::string signature;
  std::string tests;
  std::optional<std::string> canonical_solution;
  std::optional<std::vector<std::string>> libs;
  // MHPP "parameters" metadata, carried as opaque JSON text.
  std::optional<std::string> parameters;
  Benchmark source_benchmark = Benchmark::kMHPP;

  // signature + docstring reproduces the benchmark prompt exactly.
  std::string prompt() const { return signature + docstring; }

  // Full program for the canonical solution, or nullopt when absent. BCB
  // solutions are function bodies and get the prompt prepended.
  std::optional<std::string> canonical_program() const;

  bool operator==(const Task&) const = default;
};

struct ExperimentCondition {
  InputCondition input_condition = InputCondition::kClean;
  Mode mode = Mode::kCoT;
  bool aware = false;
  double temperature = 0.5;
  std::string model_id;
  int sample_index = 0;

  bool operator==(const ExperimentCondition&) const = default;
};

struct PromptSplit {
  std::string signature;
  std::string docstring;
};

// Splits a prompt at the end of the line holding the colon that closes the
// `def <entry_point>(...)` header. Everything up to and including that line
// (and its newline) is the signature; the remainder is the docstring.
// Throws Error(kRecord) when no such header exists.
PromptSplit split_prompt(std::string_view prompt, std::string_view entry_point);

// Reads line-delimited or array-form JSON. Empty files yield no records.
std::vector<nlohmann::json> read_json_records(const std::filesystem::path& path);

std::vector<Task> load_mhpp(const std::filesystem::path& path);
std::vector<Task> load_bcb(const std::filesystem::path& path);

// Dispatches on the record shape: "complete_prompt" means BCB, otherwise MHPP.
// Also accepts normalized corpus files written by save_corpus.
std::vector<Task> load_tasks(const std::filesystem::path& path);

Task task_from_mhpp(const nlohmann::json& record, std::size_t index);
Task task_from_bcb(const nlohmann::json& record, std::size_t index);

nlohmann::json to_json(const Task& task);
Task task_from_json(const nlohmann::json& j);

// Normalized corpus: one Task object per line.
void save_corpus(const std::vector<Task>& tasks, const std::filesystem::path& path);
std::vector<Task> load_corpus(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentCondition& c);
ExperimentCondition condition_from_json(const nlohmann::json& j);

struct MatrixConfig {
  std::vector<InputCondition> input_conditions;
  std::vector<Mode> modes;
  std::vector<bool> aware{false};
  std::vector<double> temperatures{0.5, 1.0};
  std::vector<std::string> models;
  int samples_per_cell = 10;
};

struct MatrixRow {
  std::size_t task_index;  // into the task list given to enumerate_matrix
  ExperimentCondition condition;
};

// Cartesian product ordered by (task_id, condition, mode, aware, temperature,
// model, sample_index). Dimension values keep the order given in the config.
std::vector<MatrixRow> enumerate_matrix(const std::vector<Task>& tasks,
                                        const MatrixConfig& config);

// Product of dimension cardinalities, without materializing rows.
std::uint64_t matrix_size(std::size_t task_count, const MatrixConfig& config);

// Stable identifier of one matrix cell sample, used to key traces/outcomes.
std::string trace_key(std::string_view task_id, const ExperimentCondition& c);

}  // namespace cotrobust
