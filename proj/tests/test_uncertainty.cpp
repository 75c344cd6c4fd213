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

#include <cmath>
#include <random>

#include "cotrobust/error.hpp"
#include "cotrobust/uncertainty.hpp"
#include "trace_util.hpp"

using namespace cotrobust;
using testutil::trace_with_masses;

TEST(Entropy, DyadicClosedForms) {
  EXPECT_NEAR(entropy_bits({0.25, 0.25, 0.25, 0.25}), 2.0, 1e-12);
  EXPECT_NEAR(entropy_bits({1.0}), 0.0, 1e-12);
  EXPECT_NEAR(entropy_bits({0.5, 0.25, 0.25}), 1.5, 1e-12);
  EXPECT_NEAR(entropy_bits({0.5, 0.25, 0.125, 0.125}), 1.75, 1e-12);
  EXPECT_THROW(entropy_bits({0.0, 0.0}), Error);
}

TEST(Entropy, FromTraceStepsIncludesResidualMass) {
  GenerationTrace t = trace_with_masses({{0.25, 0.25, 0.25, 0.25}, {0.5, 0.25}, {0.5, 0.25, 0.25}});
  UncertaintySeries s = series_from(t);
  ASSERT_EQ(s.length(), 3u);
  EXPECT_NEAR(s.entropy_bits[0], 2.0, 1e-12);
  // 0.25 left over for the residual bucket.
  EXPECT_NEAR(s.entropy_bits[1], 1.5, 1e-12);
  EXPECT_NEAR(s.entropy_bits[2], 1.5, 1e-12);
}

TEST(ProbDiff, Examples) {
  GenerationTrace t = trace_with_masses({{0.9, 0.05}, {0.5, 0.5}, {0.6, 0.3, 0.1}, {0.3, 0.6}});
  UncertaintySeries s = series_from(t);
  EXPECT_NEAR(s.prob_diff[0], 0.85, 1e-12);
  EXPECT_NEAR(s.prob_diff[1], 0.0, 1e-12);
  EXPECT_NEAR(s.prob_diff[2], 0.3, 1e-12);
  // Chosen token need not be the most likely one.
  EXPECT_NEAR(s.prob_diff[3], 0.3, 1e-12);
}

TEST(ProbDiff, SingleAlternativeIsAnArityError) {
  GenerationTrace t = trace_with_masses({{1.0}});
  EXPECT_THROW(prob_diff_at(t.steps[0]), Error);
  EXPECT_NEAR(entropy_at(t.steps[0]), 0.0, 1e-12);
}

TEST(Series, HandBuiltFiveSteps) {
  std::vector<std::vector<double>> m{{0.5, 0.5}, {0.8, 0.1, 0.1}, {0.4, 0.3, 0.2}, {0.99, 0.005}, {0.25, 0.25}};
  UncertaintySeries s = series_from(trace_with_masses(m));
  for (std::size_t t = 0; t < m.size(); ++t) {
    double h = 0.0, sum = 0.0;
    for (double p : m[t]) {
      h -= p * std::log2(p);
      sum += p;
    }
    double rest = 1.0 - sum;
    if (rest > 1e-15) h -= rest * std::log2(rest);
    EXPECT_NEAR(s.entropy_bits[t], h, 1e-9) << t;
    std::vector<double> sorted = m[t];
    std::sort(sorted.rbegin(), sorted.rend());
    EXPECT_NEAR(s.prob_diff[t], sorted[0] - sorted[1], 1e-12) << t;
  }
}

UncertaintySeries entropy_series(std::vector<double> h) {
  UncertaintySeries s;
  s.entropy_bits = std::move(h);
  s.prob_diff.assign(s.entropy_bits.size(), 0.5);
  return s;
}

TEST(Spike, AdaptiveFindsIsolatedPeak) {
  auto s = first_spike(entropy_series({0.5, 0.5, 5.0, 0.5}));
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->position, 2);
  EXPECT_EQ(s->value, 5.0);
}

TEST(Spike, ConstantSeriesBelowFloorHasNoSpike) {
  EXPECT_FALSE(first_spike(entropy_series(std::vector<double>(20, 0.4))).has_value());
}

TEST(Spike, FixedThreshold) {
  SpikePolicy p;
  p.mode = SpikePolicy::Mode::kFixed;
  p.tau_fixed = 2.0;
  auto s = first_spike(entropy_series({1.9, 2.0, 3.0}), p);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->position, 1);
  EXPECT_EQ(s->threshold, 2.0);
}

TEST(Spike, AdaptiveThresholdMatchesLeaveOneOutMoments) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  SpikePolicy p;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(2 + rng() % 30);
    for (auto& x : v) x = u(rng);
    for (std::size_t t = 0; t < v.size(); ++t) {
      double sum = 0.0, sq = 0.0, n = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == t) continue;
        sum += v[i];
        n += 1.0;
      }
      double mean = sum / n;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i != t) sq += (v[i] - mean) * (v[i] - mean);
      }
      double want = std::clamp(mean + 2.0 * std::sqrt(sq / n), 1.0, 6.0);
      EXPECT_NEAR(spike_threshold(v, t, p), want, 1e-9);
    }
  }
}

TEST(Spike, ProbDiffSignalUsesComplement) {
  UncertaintySeries s;
  s.entropy_bits = {0.1, 0.1, 0.1};
  s.prob_diff = {0.9, 0.2, 0.8};
  std::vector<double> sig = spike_signal(s, SpikeSignal::kProbDiff);
  EXPECT_NEAR(sig[1], 0.8, 1e-15);
}

TEST(EarlyWindow, SizeIsCeilingOfFraction) {
  EXPECT_EQ(early_window_size(10, 0.35), 4u);
  EXPECT_EQ(early_window_size(10, 0.3), 3u);
  EXPECT_EQ(early_window_size(10, 1.0), 10u);
  EXPECT_EQ(early_window_size(3, 0.01), 1u);
}

TEST(EarlyWindow, HandArithmetic) {
  UncertaintySeries s;
  s.entropy_bits = {1.0, 3.0, 2.0, 0.5, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0};
  s.prob_diff = {0.5, 0.1, 0.3, 0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  EarlyWindowFeatures f = early_features(s, 0.35);
  EXPECT_EQ(f.window, 4u);
  EXPECT_NEAR(f.mean_entropy, 6.5 / 4.0, 1e-12);
  EXPECT_EQ(f.max_entropy, 3.0);
  EXPECT_NEAR(f.mean_prob_diff, 1.8 / 4.0, 1e-12);
  EXPECT_NEAR(f.min_prob_diff, 0.1, 1e-12);
  EarlyWindowFeatures all = early_features(s, 1.0);
  EXPECT_EQ(all.window, 10u);
  EXPECT_NEAR(all.mean_entropy, 60.5 / 10.0, 1e-12);
  EXPECT_EQ(all.as_vector().size(), 5u);
}
