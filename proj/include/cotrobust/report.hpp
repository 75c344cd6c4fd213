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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cotrobust/anchors.hpp"
#include "cotrobust/corpus.hpp"
#include "cotrobust/deformation.hpp"
#include "cotrobust/modelclient.hpp"
#include "cotrobust/sandbox.hpp"
#include "cotrobust/stats.hpp"
#include "cotrobust/uncertainty.hpp"
#include "json.hpp"

namespace cotrobust {

struct RunConfig {
  std::vector<std::filesystem::path> datasets;
  std::filesystem::path run_dir;
  MatrixConfig matrix;
  std::vector<int> ks{1, 5, 10};
  // k used for the RD table and the paired hypothesis tests.
  int stat_k = 1;
  std::uint64_t seed = 0;
  double word_rate = 0.15;

  // Generation: live endpoint, or stored traces/outcomes when replay_dir is set.
  std::optional<std::filesystem::path> replay_dir;
  ClientConfig client;
  GenerationParams generation;
  std::string translation_endpoint;
  int workers = 4;
  int timeout_s = 10;
  SandboxConfig sandbox;
  bool dry_run = false;

  SpikePolicy spike;
  double window_fraction = 0.35;
  AnchorConfig anchors;
  DeformationThresholds deformation;
  double alpha = kAlpha;
  bool holm = false;

  bool replay() const { return replay_dir.has_value(); }
};

// Configuration snapshot for the manifest (no paths, no credentials).
nlohmann::json config_snapshot(const RunConfig& config);

// Run directory file names.
namespace files {
inline constexpr const char* kCorpus = "corpus.jsonl";
inline constexpr const char* kPerturbed = "perturbed.jsonl";
inline constexpr const char* kPrompts = "prompts.jsonl";
inline constexpr const char* kMatrix = "matrix.csv";
inline constexpr const char* kTraces = "traces.jsonl";
inline constexpr const char* kOutcomes = "outcomes.jsonl";
inline constexpr const char* kUncertainty = "uncertainty.csv";
inline constexpr const char* kAnchors = "anchors.csv";
inline constexpr const char* kDeformation = "deformation.csv";
inline constexpr const char* kAnchorDeformation = "anchor_deformation.csv";
inline constexpr const char* kMetrics = "metrics.csv";
inline constexpr const char* kRdTable = "rd_table.csv";
inline constexpr const char* kStats = "stats.csv";
inline constexpr const char* kRq3 = "rq3_auroc.csv";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace files

// Tables listed in the manifest, in emission order.
const std::vector<std::string>& table_files();

// Stage entry points. Each reads what earlier stages wrote under run_dir.
void stage_perturb(const RunConfig& config);   // corpus, perturbed, prompts, matrix
void stage_generate(const RunConfig& config);  // traces
void stage_execute(const RunConfig& config);   // outcomes
void stage_analyze(const RunConfig& config);   // uncertainty .. rd_table
void stage_stats(const RunConfig& config);     // stats, rq3_auroc
void stage_report(const RunConfig& config);    // manifest
// All stages in order; with dry_run only corpus, matrix and manifest.
void run_pipeline(const RunConfig& config);

// Per-trace analysis, shared by the analyze and stats stages.
struct TraceAnalysis {
  std::string trace_id;
  std::string task_id;
  ExperimentCondition condition;
  std::size_t length = 0;
  UncertaintySeries series;
  std::optional<SpikeEvent> spike;
  AnchorSet anchors;
  std::optional<SpikeAlignment> alignment;
  EarlyWindowFeatures early;
  TrajectoryFeatures trajectory;
  OutcomeStatus outcome = OutcomeStatus::kError;
};

struct DeformationPair {
  const TraceAnalysis* clean;
  const TraceAnalysis* perturbed;
  DeformationLabel label;
};

struct MetricRow {
  std::string model;
  std::string dataset;
  Mode mode;
  bool aware;
  double temperature;
  InputCondition family;
  int k;
  double pass_at_k;
  std::optional<double> rd;
};

struct AnalysisResult {
  std::vector<TraceAnalysis> traces;  // matrix order
  std::vector<DeformationPair> pairs;
  std::vector<MetricRow> metrics;
  std::vector<std::string> task_ids;  // sorted
  std::map<std::string, CellCount> cells;  // keyed by cell_key
  int alignment_excluded = 0;
  int deformation_excluded = 0;
};

AnalysisResult analyze_run(const RunConfig& config, const std::vector<Task>& tasks,
                           const std::vector<GenerationTrace>& traces,
                           const std::vector<OutcomeRecord>& outcomes);

struct RdRow {
  InputCondition family;
  Mode mode;
  double mean_abs_rd;
  int n;
  int rank;  // within mode, 1 = largest mean |RD|
};

// Mean |RD| per (family, mode) over metric rows with the given k.
std::vector<RdRow> rd_table(const std::vector<MetricRow>& metrics, int k);
void emit_rd_table(const std::vector<RdRow>& rows, const std::filesystem::path& path);

struct HypothesisRow {
  std::string hypothesis_id;
  TestMethod method = TestMethod::kWilcoxon;
  std::optional<StatTestResult> result;  // absent when the test was not possible
  std::string note;
};

std::vector<HypothesisRow> hypothesis_tests(const RunConfig& config, const AnalysisResult& analysis);

// Task-level pass@k of one cell, or nullopt when the cell is missing or has
// fewer than k samples.
std::optional<double> task_pass_at_k(const AnalysisResult& analysis, std::string_view task_id,
                                     const ExperimentCondition& cell, int k);

}  // namespace cotrobust
