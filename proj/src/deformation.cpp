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

#include "cotrobust/deformation.hpp"

#include <algorithm>
#include <set>

#include "cotrobust/error.hpp"

namespace cotrobust {

TrajectoryFeatures trajectory_features(const UncertaintySeries& series, const AnchorSet& anchors,
                                       const SpikePolicy& policy) {
  TrajectoryFeatures f;
  f.total_len = static_cast<int>(series.length());
  f.reasoning_len = anchors.a1 ? *anchors.a1 : 0;
  if (f.reasoning_len > 0) {
    f.spike_count_reasoning = count_spikes(spike_signal(series, policy.signal), 0,
                                           static_cast<std::size_t>(f.reasoning_len), policy);
  }
  return f;
}

std::string_view to_string(Deformation d) {
  switch (d) {
    case Deformation::kLengthening: return "Lengthening";
    case Deformation::kBranching: return "Branching";
    case Deformation::kSimplification: return "Simplification";
    case Deformation::kStable: return "Stable";
  }
  return "?";
}

const std::vector<Deformation>& all_deformations() {
  static const std::vector<Deformation> kAll{Deformation::kLengthening, Deformation::kBranching,
                                             Deformation::kSimplification, Deformation::kStable};
  return kAll;
}

Deformation parse_deformation(std::string_view s) {
  for (auto d : all_deformations()) {
    if (to_string(d) == s) return d;
  }
  throw Error(ErrorKind::kParse, "unknown deformation label '" + std::string(s) + "'");
}

DeformationLabel classify(const TrajectoryFeatures& clean, const TrajectoryFeatures& perturbed,
                          const DeformationThresholds& th) {
  if (clean.reasoning_len <= 0) {
    throw Error(ErrorKind::kBaselineUndefined, "clean trace has no reasoning segment");
  }
  DeformationLabel out;
  out.length_ratio = static_cast<double>(perturbed.reasoning_len) / clean.reasoning_len;
  out.spike_excess = perturbed.spike_count_reasoning - clean.spike_count_reasoning;
  // Small slack so ratios such as 130/100 land on the boundary they denote.
  constexpr double kEps = 1e-12;
  if (out.spike_excess >= th.b) {
    out.label = Deformation::kBranching;
  } else if (out.length_ratio >= 1.0 + th.theta_l - kEps) {
    out.label = Deformation::kLengthening;
  } else if (out.length_ratio <= 1.0 - th.theta_s + kEps) {
    out.label = Deformation::kSimplification;
  } else {
    out.label = Deformation::kStable;
  }
  return out;
}

ContingencyTable contingency(const std::vector<Deformation>& labels,
                             const std::vector<std::string>& categories,
                             const std::vector<std::string>& column_order) {
  if (labels.size() != categories.size()) {
    throw Error(ErrorKind::kArity, "labels and categories differ in length");
  }
  ContingencyTable t;
  if (labels.empty()) return t;
  std::set<Deformation> present_rows(labels.begin(), labels.end());
  for (auto d : all_deformations()) {
    if (present_rows.count(d)) t.rows.emplace_back(to_string(d));
  }
  std::set<std::string> present_cols(categories.begin(), categories.end());
  for (const auto& c : column_order) {
    if (present_cols.erase(c)) t.cols.push_back(c);
  }
  t.cols.insert(t.cols.end(), present_cols.begin(), present_cols.end());
  t.counts.assign(t.rows.size(), std::vector<double>(t.cols.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto r = std::find(t.rows.begin(), t.rows.end(), to_string(labels[i])) - t.rows.begin();
    auto c = std::find(t.cols.begin(), t.cols.end(), categories[i]) - t.cols.begin();
    t.counts[r][c] += 1.0;
  }
  return t;
}

}  // namespace cotrobust
