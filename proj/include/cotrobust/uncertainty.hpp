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

#include <optional>
#include <vector>

#include "cotrobust/modelclient.hpp"

namespace cotrobust {

struct UncertaintySeries {
  std::vector<double> entropy_bits;
  std::vector<double> prob_diff;

  std::size_t length() const { return entropy_bits.size(); }
};

// Entropy in bits over the top-K alternatives plus one residual bucket
// holding the mass the endpoint did not report. Throws Error(kDegenerate)
// when no alternative carries mass.
double entropy_at(const TokenStep& step);
double entropy_bits(const std::vector<double>& masses);

// p(1) - p(2) of the two most probable alternatives, before renormalization.
// Throws Error(kArity) with fewer than two alternatives.
double prob_diff_at(const TokenStep& step);

UncertaintySeries series_from(const GenerationTrace& trace);

enum class SpikeSignal { kEntropy, kProbDiff };

struct SpikePolicy {
  enum class Mode { kAdaptive, kFixed };
  Mode mode = Mode::kAdaptive;
  double tau_fixed = 2.0;
  double z = 2.0;
  double floor_bits = 1.0;
  double cap_bits = 6.0;
  // kProbDiff detects on 1 - prob_diff, so a spike is a small top-two gap.
  SpikeSignal signal = SpikeSignal::kEntropy;
};

struct SpikeEvent {
  int position = 0;
  double value = 0.0;
  double threshold = 0.0;

  bool operator==(const SpikeEvent&) const = default;
};

// Threshold the policy applies at step t. In adaptive mode the mean and
// (population) standard deviation exclude step t itself, so a lone outlier is
// judged against the rest of the series.
double spike_threshold(const std::vector<double>& signal, std::size_t t, const SpikePolicy& policy);

std::vector<double> spike_signal(const UncertaintySeries& series, SpikeSignal signal);

std::optional<SpikeEvent> first_spike(const UncertaintySeries& series, const SpikePolicy& policy = {});

// Number of steps in [begin, end) meeting their threshold. Thresholds are
// computed over the signal restricted to that range.
int count_spikes(const std::vector<double>& signal, std::size_t begin, std::size_t end,
                 const SpikePolicy& policy);

struct EarlyWindowFeatures {
  double window_fraction = 0.35;
  std::size_t window = 0;
  double mean_entropy = 0.0;
  double max_entropy = 0.0;
  double mean_prob_diff = 0.0;
  double min_prob_diff = 0.0;
  int spike_count = 0;

  std::vector<double> as_vector() const {
    return {mean_entropy, max_entropy, mean_prob_diff, min_prob_diff, static_cast<double>(spike_count)};
  }
};

std::size_t early_window_size(std::size_t length, double fraction);

EarlyWindowFeatures early_features(const UncertaintySeries& series, double fraction = 0.35,
                                   const SpikePolicy& policy = {});

}  // namespace cotrobust
