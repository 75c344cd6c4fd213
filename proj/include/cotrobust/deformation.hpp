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

#include <string>
#include <string_view>
#include <vector>

#include "cotrobust/anchors.hpp"
#include "cotrobust/uncertainty.hpp"

namespace cotrobust {

struct TrajectoryFeatures {
  int reasoning_len = 0;  // tokens before A1; 0 without a fence
  int spike_count_reasoning = 0;
  int total_len = 0;

  bool operator==(const TrajectoryFeatures&) const = default;
};

TrajectoryFeatures trajectory_features(const UncertaintySeries& series, const AnchorSet& anchors,
                                       const SpikePolicy& policy = {});

enum class Deformation { kLengthening, kBranching, kSimplification, kStable };

std::string_view to_string(Deformation d);
Deformation parse_deformation(std::string_view s);
// Row order for contingency tables and reports.
const std::vector<Deformation>& all_deformations();

struct DeformationThresholds {
  double theta_l = 0.3;
  double theta_s = 0.3;
  int b = 2;
};

struct DeformationLabel {
  Deformation label = Deformation::kStable;
  double length_ratio = 1.0;
  int spike_excess = 0;
};

// Branching, then Lengthening, then Simplification; Stable otherwise.
// Throws Error(kBaselineUndefined) when the clean trace has no reasoning.
DeformationLabel classify(const TrajectoryFeatures& clean, const TrajectoryFeatures& perturbed,
                          const DeformationThresholds& thresholds = {});

struct ContingencyTable {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<double>> counts;

  bool empty() const { return counts.empty(); }
};

// Rows are the labels present (in enum order), columns the categories present
// (in `column_order`; categories missing from it follow in sorted order).
ContingencyTable contingency(const std::vector<Deformation>& labels,
                             const std::vector<std::string>& categories,
                             const std::vector<std::string>& column_order = {});

}  // namespace cotrobust
