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

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/perturb.hpp"
#include "cotrobust/report.hpp"

namespace {

using cotrobust::RunConfig;

struct Flags {
  std::vector<std::string> datasets;
  std::string run_dir;
  std::vector<std::string> modes{"CoT", "NoCoT"};
  std::string aware = "base";
  std::vector<std::string> families{"all"};
  std::vector<double> temperatures{0.5, 1.0};
  int samples = 10;
  std::vector<int> ks{1, 5, 10};
  int stat_k = 1;
  std::uint64_t seed = 0;
  double word_rate = 0.15;
  std::string endpoint;
  std::string api = "completions";
  std::vector<std::string> models{"model"};
  std::string replay_dir;
  int workers = 4;
  int timeout_s = 10;
  int max_tokens = 1024;
  int top_logprobs = 20;
  std::string runner = "python3 -m pyrunner";
  std::string translate_endpoint;
  bool dry_run = false;
  std::string spike_mode = "adaptive";
  std::string spike_signal = "entropy";
  double tau = 2.0;
  double window = 0.35;
  int lambda = 2;
  double theta_l = 0.3;
  double theta_s = 0.3;
  int branch_b = 2;
  bool holm = false;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--dataset", f.datasets, "Benchmark file (MHPP or BigCodeBench JSON/JSONL); repeatable");
  app->add_option("--run-dir", f.run_dir, "Run directory")->required();
  app->add_option("--mode", f.modes, "Prompting modes")->check(CLI::IsMember({"CoT", "NoCoT"}));
  app->add_option("--aware", f.aware, "Perturbation-aware prompts: base, aware or both")
      ->check(CLI::IsMember({"base", "aware", "both"}));
  app->add_option("--family", f.families, "Input conditions (Clean, C1..S1) or 'all'");
  app->add_option("--temperature", f.temperatures, "Sampling temperatures");
  app->add_option("--samples", f.samples, "Samples per matrix cell")->check(CLI::PositiveNumber);
  app->add_option("--k", f.ks, "k values for pass@k");
  app->add_option("--stat-k", f.stat_k, "k used by the RD table and paired tests");
  app->add_option("--seed", f.seed, "Top-level seed");
  app->add_option("--word-rate", f.word_rate, "Fraction of eligible words perturbed");
  app->add_option("--endpoint", f.endpoint, "OpenAI-compatible base URL, e.g. http://localhost:8000/v1");
  app->add_option("--api", f.api, "completions or chat")->check(CLI::IsMember({"completions", "chat"}));
  app->add_option("--model", f.models, "Model identifiers; repeatable");
  app->add_option("--replay-dir", f.replay_dir, "Directory with stored traces.jsonl and outcomes.jsonl");
  app->add_option("--workers", f.workers, "Parallel generation/execution workers")->check(CLI::PositiveNumber);
  app->add_option("--timeout-s", f.timeout_s, "Per-task execution timeout")->check(CLI::PositiveNumber);
  app->add_option("--max-tokens", f.max_tokens, "Generation length limit");
  app->add_option("--top-logprobs", f.top_logprobs, "Alternatives requested per step");
  app->add_option("--runner", f.runner, "Test runner command line");
  app->add_option("--translate-endpoint", f.translate_endpoint, "Translation service for S1 back-translation");
  app->add_flag("--dry-run", f.dry_run, "Write corpus, matrix and manifest only");
  app->add_option("--spike-mode", f.spike_mode)->check(CLI::IsMember({"adaptive", "fixed"}));
  app->add_option("--spike-signal", f.spike_signal)->check(CLI::IsMember({"entropy", "prob_diff"}));
  app->add_option("--tau", f.tau, "Threshold in fixed spike mode");
  app->add_option("--window", f.window, "Early-window fraction")->check(CLI::Range(0.0, 1.0));
  app->add_option("--lambda", f.lambda, "Identifier reuse threshold for A2")->check(CLI::PositiveNumber);
  app->add_option("--theta-l", f.theta_l);
  app->add_option("--theta-s", f.theta_s);
  app->add_option("--branch-b", f.branch_b);
  app->add_flag("--holm", f.holm, "Holm-adjust the p-values in stats.csv");
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

RunConfig to_config(const Flags& f) {
  RunConfig c;
  for (const auto& d : f.datasets) c.datasets.emplace_back(d);
  c.run_dir = f.run_dir;
  if (f.families.size() == 1 && f.families[0] == "all") {
    c.matrix.input_conditions = cotrobust::all_input_conditions();
  } else {
    for (const auto& s : f.families) c.matrix.input_conditions.push_back(cotrobust::parse_input_condition(s));
  }
  for (const auto& s : f.modes) c.matrix.modes.push_back(cotrobust::parse_mode(s));
  if (f.aware == "base") c.matrix.aware = {false};
  else if (f.aware == "aware") c.matrix.aware = {true};
  else c.matrix.aware = {false, true};
  c.matrix.temperatures = f.temperatures;
  c.matrix.models = f.models;
  c.matrix.samples_per_cell = f.samples;
  c.ks = f.ks;
  c.stat_k = f.stat_k;
  c.seed = f.seed;
  c.word_rate = f.word_rate;
  if (!f.replay_dir.empty()) c.replay_dir = f.replay_dir;
  c.client.endpoint = f.endpoint;
  c.client.api = f.api == "chat" ? cotrobust::ApiFlavor::kChat : cotrobust::ApiFlavor::kCompletions;
  if (const char* key = std::getenv("COTROBUST_API_KEY")) c.client.api_key = key;
  c.generation.max_tokens = f.max_tokens;
  c.generation.top_logprobs = f.top_logprobs;
  c.translation_endpoint = f.translate_endpoint;
  c.workers = f.workers;
  c.timeout_s = f.timeout_s;
  c.sandbox.runner_argv = split_words(f.runner);
  c.sandbox.default_timeout_s = f.timeout_s;
  c.dry_run = f.dry_run;
  c.spike.mode = f.spike_mode == "fixed" ? cotrobust::SpikePolicy::Mode::kFixed
                                         : cotrobust::SpikePolicy::Mode::kAdaptive;
  c.spike.signal = f.spike_signal == "prob_diff" ? cotrobust::SpikeSignal::kProbDiff
                                                 : cotrobust::SpikeSignal::kEntropy;
  c.spike.tau_fixed = f.tau;
  c.window_fraction = f.window;
  c.anchors.lambda = f.lambda;
  c.deformation = {f.theta_l, f.theta_s, f.branch_b};
  c.holm = f.holm;
  return c;
}

void check_generation_source(const RunConfig& c) {
  if (!c.replay() && c.client.endpoint.empty()) {
    throw cotrobust::Error(cotrobust::ErrorKind::kUsage, "either --endpoint or --replay-dir is required");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness evaluation harness for code-generating language models"};
  app.require_subcommand(1);
  Flags flags;

  struct Sub {
    const char* name;
    const char* help;
    void (*fn)(const RunConfig&);
    bool needs_source;
  };
  const Sub subs[] = {
      {"perturb", "Normalize the corpus, apply perturbations, build prompts and the matrix",
       cotrobust::stage_perturb, false},
      {"generate", "Collect traces from the endpoint or a replay directory", cotrobust::stage_generate, true},
      {"execute", "Run generated code against the task tests", cotrobust::stage_execute, false},
      {"analyze", "Uncertainty, anchor, deformation and metric tables", cotrobust::stage_analyze, false},
      {"stats", "Hypothesis tests", cotrobust::stage_stats, false},
      {"report", "Write the run manifest", cotrobust::stage_report, false},
      {"run", "All stages", cotrobust::run_pipeline, true},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_flags(sub, flags);
    registered.emplace_back(sub, &s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig config = to_config(flags);
    for (const auto& [sub, s] : registered) {
      if (!sub->parsed()) continue;
      if ((s->fn == cotrobust::stage_perturb || s->fn == cotrobust::run_pipeline) && config.datasets.empty()) {
        throw cotrobust::Error(cotrobust::ErrorKind::kUsage, "--dataset is required");
      }
      if (s->needs_source && !config.dry_run) check_generation_source(config);
      s->fn(config);
    }
  } catch (const cotrobust::Error& e) {
    std::cerr << "error (" << cotrobust::to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == cotrobust::ErrorKind::kUsage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
