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

#include "cotrobust/deformation.hpp"
#include "cotrobust/error.hpp"

using namespace cotrobust;

TrajectoryFeatures traj(int len, int spikes) { return {len, spikes, len + 50}; }

TEST(Classify, Examples) {
  EXPECT_EQ(classify(traj(100, 1), traj(150, 1)).label, Deformation::kLengthening);
  EXPECT_EQ(classify(traj(100, 1), traj(100, 4)).label, Deformation::kBranching);
  EXPECT_EQ(classify(traj(100, 1), traj(60, 1)).label, Deformation::kSimplification);
  EXPECT_EQ(classify(traj(100, 1), traj(110, 2)).label, Deformation::kStable);
}

TEST(Classify, BoundariesAndPriority) {
  EXPECT_EQ(classify(traj(100, 0), traj(130, 0)).label, Deformation::kLengthening);
  EXPECT_EQ(classify(traj(100, 0), traj(129, 0)).label, Deformation::kStable);
  EXPECT_EQ(classify(traj(100, 0), traj(70, 0)).label, Deformation::kSimplification);
  EXPECT_EQ(classify(traj(100, 0), traj(71, 0)).label, Deformation::kStable);
  // Branching wins even when the length also moved.
  EXPECT_EQ(classify(traj(100, 0), traj(40, 2)).label, Deformation::kBranching);
  DeformationLabel l = classify(traj(100, 3), traj(150, 1));
  EXPECT_EQ(l.spike_excess, -2);
  EXPECT_NEAR(l.length_ratio, 1.5, 1e-15);
}

TEST(Classify, CleanWithoutReasoningIsUndefined) {
  try {
    classify(traj(0, 0), traj(10, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBaselineUndefined);
  }
}

TEST(Trajectory, FeaturesFromAnchors) {
  UncertaintySeries s;
  s.entropy_bits = {0.2, 4.0, 0.2, 0.2, 0.2, 4.0, 0.2};
  s.prob_diff.assign(7, 0.5);
  AnchorSet a;
  a.a1 = 4;
  TrajectoryFeatures f = trajectory_features(s, a);
  EXPECT_EQ(f.reasoning_len, 4);
  EXPECT_EQ(f.total_len, 7);
  EXPECT_EQ(f.spike_count_reasoning, 1);
  EXPECT_EQ(trajectory_features(s, AnchorSet{}).reasoning_len, 0);
}

TEST(Contingency, CountsInCanonicalOrder) {
  ContingencyTable t = contingency(
      {Deformation::kLengthening, Deformation::kLengthening, Deformation::kLengthening, Deformation::kStable},
      {"Fail", "Fail", "Fail", "Pass"}, {"Fail", "Pass"});
  EXPECT_EQ(t.rows, (std::vector<std::string>{"Lengthening", "Stable"}));
  EXPECT_EQ(t.cols, (std::vector<std::string>{"Fail", "Pass"}));
  EXPECT_EQ(t.counts, (std::vector<std::vector<double>>{{3, 0}, {0, 1}}));
  EXPECT_TRUE(contingency({}, {}).empty());
}

TEST(Contingency, ExtraCategoriesFollowTheGivenOrder) {
  ContingencyTable t = contingency({Deformation::kBranching, Deformation::kStable, Deformation::kBranching},
                                   {"W2", "C1", "Z9"}, {"C1", "W2"});
  EXPECT_EQ(t.cols, (std::vector<std::string>{"C1", "W2", "Z9"}));
  EXPECT_EQ(t.counts, (std::vector<std::vector<double>>{{0, 1, 1}, {1, 0, 0}}));
}

TEST(Deformation, NamesRoundTrip) {
  for (Deformation d : all_deformations()) EXPECT_EQ(parse_deformation(to_string(d)), d);
  EXPECT_THROW(parse_deformation("Twisting"), Error);
}
