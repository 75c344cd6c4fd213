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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cotrobust/corpus.hpp"
#include "cotrobust/error.hpp"

using namespace cotrobust;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name, const std::string& content) {
  fs::path dir = fs::temp_directory_path() / "cotrobust_corpus_test";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

const char* kRankTask =
    R"({"task_id": "MHPP/79", "function_name": "rank_task", "parameters": {"tasks": "List[int]"},)"
    R"( "prompt": "def rank_task(tasks: list) -> list:\n    \"\"\"Order tasks by priority.\"\"\"\n",)"
    R"( "test": "assert rank_task([]) == []\n"})";

}  // namespace

TEST(LoadMhpp, RankTaskRecord) {
  auto tasks = load_mhpp(scratch("rank.jsonl", std::string(kRankTask) + "\n"));
  ASSERT_EQ(tasks.size(), 1u);
  const Task& t = tasks[0];
  EXPECT_EQ(t.task_id, "MHPP/79");
  EXPECT_EQ(t.entry_point, "rank_task");
  EXPECT_EQ(t.signature, "def rank_task(tasks: list) -> list:\n");
  EXPECT_EQ(t.docstring, "    \"\"\"Order tasks by priority.\"\"\"\n");
  EXPECT_EQ(t.source_benchmark, Benchmark::kMHPP);
  ASSERT_TRUE(t.parameters.has_value());
  EXPECT_NE(t.parameters->find("List[int]"), std::string::npos);
}

TEST(LoadMhpp, EmptyFileIsEmptyList) { EXPECT_TRUE(load_mhpp(scratch("empty.jsonl", "")).empty()); }

TEST(LoadMhpp, MissingTestNamesTheField) {
  std::string rec = R"({"task_id": "MHPP/1", "function_name": "f", "parameters": {}, "prompt": "def f():\n    pass\n"})";
  try {
    load_mhpp(scratch("missing.jsonl", rec + "\n"));
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.field(), "test");
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(LoadMhpp, MalformedFileIsALoadError) {
  EXPECT_THROW(load_mhpp(scratch("bad.jsonl", "{not json\n")), Error);
  EXPECT_THROW(load_mhpp("/nonexistent/file.jsonl"), Error);
}

TEST(LoadBcb, FieldsCopied) {
  std::string rec =
      R"({"task_id": "BigCodeBench/7", "complete_prompt": "import numpy as np\n\ndef task_func(a):\n    \"\"\"Sum.\"\"\"\n",)"
      R"( "entry_point": "task_func", "test": "pass\n", "canonical_solution": "    return np.sum(a)\n", "libs": ["numpy"]})";
  auto tasks = load_bcb(scratch("bcb.jsonl", rec + "\n"));
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].entry_point, "task_func");
  EXPECT_EQ(tasks[0].libs, (std::vector<std::string>{"numpy"}));
  EXPECT_EQ(tasks[0].signature, "import numpy as np\n\ndef task_func(a):\n");
  EXPECT_EQ(tasks[0].prompt(), "import numpy as np\n\ndef task_func(a):\n    \"\"\"Sum.\"\"\"\n");
  EXPECT_EQ(*tasks[0].canonical_program(), tasks[0].prompt() + "    return np.sum(a)\n");
}

TEST(LoadBcb, ManyRecords) {
  std::string body;
  for (int i = 0; i < 298; ++i) {
    body += R"({"task_id": "BigCodeBench/)" + std::to_string(i) +
            R"(", "complete_prompt": "def task_func():\n    \"\"\"Do it.\"\"\"\n", "entry_point": "task_func", "test": "pass\n"})" +
            "\n";
  }
  EXPECT_EQ(load_bcb(scratch("bcb298.jsonl", body)).size(), 298u);
}

TEST(LoadTasks, BundledSamplesAndCorpusRoundTrip) {
  auto mhpp = load_tasks(COTROBUST_TEST_DATA "/tasks/mhpp_sample.jsonl");
  auto bcb = load_tasks(COTROBUST_TEST_DATA "/tasks/bcb_sample.jsonl");
  EXPECT_EQ(mhpp.size(), 12u);
  EXPECT_EQ(bcb.size(), 10u);
  for (const auto& t : mhpp) {
    EXPECT_NE(t.signature.find(t.entry_point), std::string::npos);
    EXPECT_FALSE(t.tests.empty());
  }
  fs::path p = fs::temp_directory_path() / "cotrobust_corpus_test" / "corpus.jsonl";
  save_corpus(bcb, p);
  EXPECT_EQ(load_corpus(p), bcb);
  EXPECT_EQ(load_tasks(p), bcb);
}

TEST(SplitPrompt, RequiresHeader) {
  PromptSplit s = split_prompt("def g(\n    a,\n    b,\n):\n    \"\"\"Doc.\"\"\"\n", "g");
  EXPECT_EQ(s.signature, "def g(\n    a,\n    b,\n):\n");
  EXPECT_THROW(split_prompt("no header here", "g"), Error);
}

TEST(Matrix, Counts) {
  MatrixConfig full;
  full.input_conditions = all_input_conditions();
  full.modes = {Mode::kCoT, Mode::kNoCoT};
  full.temperatures = {0.5, 1.0};
  full.models = {"m1", "m2"};
  full.samples_per_cell = 10;
  EXPECT_EQ(matrix_size(508, full), 325120u);

  std::vector<Task> one(1);
  one[0].task_id = "A";
  MatrixConfig unit{{InputCondition::kClean}, {Mode::kCoT}, {false}, {0.5}, {"m"}, 1};
  EXPECT_EQ(enumerate_matrix(one, unit).size(), 1u);

  std::vector<Task> two(2);
  two[0].task_id = "B";
  two[1].task_id = "A";
  MatrixConfig c{all_input_conditions(), {Mode::kCoT, Mode::kNoCoT}, {false}, {0.5}, {"m"}, 1};
  auto rows = enumerate_matrix(two, c);
  EXPECT_EQ(rows.size(), 32u);
  EXPECT_EQ(matrix_size(2, c), 32u);
  // Ordered by task_id first.
  EXPECT_EQ(rows.front().task_index, 1u);
  EXPECT_EQ(rows[1].condition.mode, Mode::kNoCoT);
  EXPECT_EQ(rows[2].condition.input_condition, InputCondition::kC1);
  EXPECT_TRUE(enumerate_matrix({}, c).empty());
}

TEST(Matrix, TraceKeysAreUnique) {
  std::vector<Task> tasks(3);
  for (int i = 0; i < 3; ++i) tasks[i].task_id = "T/" + std::to_string(i);
  MatrixConfig c{all_input_conditions(), {Mode::kCoT, Mode::kNoCoT}, {false, true}, {0.5, 1.0}, {"a", "b"}, 3};
  std::set<std::string> keys;
  for (const auto& r : enumerate_matrix(tasks, c)) keys.insert(trace_key(tasks[r.task_index].task_id, r.condition));
  EXPECT_EQ(keys.size(), matrix_size(3, c));
}

TEST(Conditions, NamesRoundTrip) {
  for (InputCondition c : all_input_conditions()) EXPECT_EQ(parse_input_condition(to_string(c)), c);
  EXPECT_EQ(parse_mode("NoCoT"), Mode::kNoCoT);
  EXPECT_THROW(parse_mode("cot-ish"), Error);
  ExperimentCondition e{InputCondition::kW3, Mode::kNoCoT, true, 1.0, "m", 4};
  EXPECT_EQ(condition_from_json(to_json(e)), e);
}
