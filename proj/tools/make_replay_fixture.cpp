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

// Writes synthetic traces.jsonl and outcomes.jsonl for a task matrix, so the
// pipeline can be exercised in replay mode without a model endpoint.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "CLI11.hpp"
#include "cotrobust/corpus.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/synthetic.hpp"

int main(int argc, char** argv) {
  using namespace cotrobust;
  CLI::App app{"Synthetic replay fixture writer"};
  std::vector<std::string> datasets, families{"all"}, modes{"CoT", "NoCoT"}, models{"synthetic-model"};
  std::vector<double> temps{0.5};
  std::string out_dir;
  int samples = 1;
  std::uint64_t seed = 0;
  app.add_option("--dataset", datasets)->required();
  app.add_option("--out", out_dir)->required();
  app.add_option("--family", families);
  app.add_option("--mode", modes);
  app.add_option("--model", models);
  app.add_option("--temperature", temps);
  app.add_option("--samples", samples);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<Task> tasks;
    for (const auto& d : datasets) {
      for (auto& t : load_tasks(d)) tasks.push_back(std::move(t));
    }
    std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.task_id < b.task_id; });
    MatrixConfig m;
    if (families.size() == 1 && families[0] == "all") {
      m.input_conditions = all_input_conditions();
    } else {
      for (const auto& f : families) m.input_conditions.push_back(parse_input_condition(f));
    }
    for (const auto& s : modes) m.modes.push_back(parse_mode(s));
    m.temperatures = temps;
    m.models = models;
    m.samples_per_cell = samples;

    std::filesystem::create_directories(out_dir);
    std::ofstream traces(std::filesystem::path(out_dir) / "traces.jsonl", std::ios::binary);
    std::ofstream outcomes(std::filesystem::path(out_dir) / "outcomes.jsonl", std::ios::binary);
    std::size_t n = 0;
    for (const auto& row : enumerate_matrix(tasks, m)) {
      GenerationTrace t = synthesize_trace(tasks[row.task_index], row.condition, seed);
      traces << to_json(t).dump() << "\n";
      outcomes << to_json(synthesize_outcome(t, seed)).dump() << "\n";
      ++n;
    }
    std::cerr << "wrote " << n << " traces to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
