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

#include "cotrobust/anchors.hpp"
#include "cotrobust/corpus.hpp"
#include "cotrobust/synthetic.hpp"

using namespace cotrobust;

TEST(SplitTokens, ConcatenationRestoresText) {
  for (std::string s : {"", "a", "Pseudocode:\n1. x\n```python\ndef f(a, b):\n    return a+b\n```", "  \n\n  x"}) {
    std::string joined;
    for (const auto& t : split_tokens(s)) {
      EXPECT_FALSE(t.empty());
      joined += t;
    }
    EXPECT_EQ(joined, s);
  }
  EXPECT_EQ(split_tokens("x\n```"), (std::vector<std::string>{"x", "\n", "```"}));
}

TEST(Synthetic, TracesAreDeterministicAndAnchored) {
  auto tasks = load_tasks(COTROBUST_TEST_DATA "/tasks/mhpp_sample.jsonl");
  ExperimentCondition c{InputCondition::kC2, Mode::kCoT, false, 0.5, "m", 0};
  for (const auto& t : tasks) {
    GenerationTrace a = synthesize_trace(t, c, 1), b = synthesize_trace(t, c, 1);
    EXPECT_EQ(a, b);
    EXPECT_NO_THROW(validate_trace(a));
    AnchorSet s = detect_anchors(a);
    EXPECT_TRUE(s.a1 && s.a2 && s.a3) << t.task_id;
    EXPECT_EQ(synthesize_outcome(a, 1), synthesize_outcome(b, 1));
  }
}
