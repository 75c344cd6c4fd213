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

#include <random>
#include <regex>

#include "anchor_fixtures.hpp"
#include "cotrobust/anchors.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/synthetic.hpp"
#include "trace_util.hpp"

using namespace cotrobust;

class AnchorFixture : public ::testing::TestWithParam<fixtures::AnchorCase> {};

TEST_P(AnchorFixture, ExpectedTriple) {
  const auto& c = GetParam();
  AnchorConfig cfg;
  cfg.lambda = c.lambda;
  AnchorSet a = detect_anchors(testutil::make_trace(c.tokens), cfg);
  EXPECT_EQ(a.a1, c.a1);
  EXPECT_EQ(a.a2, c.a2);
  EXPECT_EQ(a.a3, c.a3);
}

INSTANTIATE_TEST_SUITE_P(HandBuilt, AnchorFixture, ::testing::ValuesIn(fixtures::anchor_cases()),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Anchors, CommittedIdentifiersReported) {
  AnchorSet a = detect_anchors(testutil::make_trace(fixtures::anchor_cases()[8].tokens), {.lambda = 1});
  EXPECT_EQ(a.committed_identifiers, (std::vector<std::string>{"acc", "total"}));
}

TEST(Anchors, TokenAtMapsCharacters) {
  GenerationTrace t = testutil::make_trace({"ab", " cd", "\n"});
  EXPECT_EQ(token_at(t, 0), 0);
  EXPECT_EQ(token_at(t, 1), 0);
  EXPECT_EQ(token_at(t, 2), 1);
  EXPECT_EQ(token_at(t, 5), 2);
  EXPECT_EQ(token_at(t, 6), std::nullopt);
}

TEST(Anchors, LambdaMustBePositive) {
  GenerationTrace t = testutil::make_trace(fixtures::anchor_cases()[0].tokens);
  EXPECT_THROW(detect_a2(t, 10, 0), Error);
}

// Whole-word keyword scan over the code body with std::regex, independent of
// the library's scanner.
std::optional<int> regex_a3(const GenerationTrace& t, int a1) {
  const std::string& text = t.decoded_text;
  std::size_t fence = text.find("```");
  std::size_t begin = text.find('\n', fence);
  if (begin == std::string::npos) return std::nullopt;
  ++begin;
  std::size_t end = text.find("\n```", begin - 1);
  if (end == std::string::npos) end = text.size();
  std::string body = text.substr(begin, end - begin);
  static const std::regex kw(
      R"((^|[^A-Za-z0-9_])(def|for|while|if|elif|else|return|try|except|with|class|lambda)(?![A-Za-z0-9_]))");
  std::optional<int> best;
  for (auto it = std::sregex_iterator(body.begin(), body.end(), kw); it != std::sregex_iterator(); ++it) {
    std::size_t pos = begin + static_cast<std::size_t>(it->position(2));
    for (std::size_t p = pos; p < pos + it->length(2); ++p) {
      auto tok = token_at(t, p);
      if (tok && *tok > a1) {
        if (!best || *tok < *best) best = tok;
        break;
      }
    }
  }
  return best;
}

TEST(Anchors, A3MatchesRegexScanOnRandomCode) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> words{"for", "form", "if", "iffy", "x_for", "while", "info", "return", "data",
                                       "lambda", "with", "without", "(", ")", ":", " ", "\n", "    ", "."};
  for (int rep = 0; rep < 500; ++rep) {
    std::string code;
    int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) code += words[rng() % words.size()] + (rng() % 2 ? " " : "");
    GenerationTrace t = testutil::make_trace(split_tokens("Plan it\n```python\n" + code + "\n```"));
    auto a1 = detect_a1(t);
    ASSERT_TRUE(a1.has_value());
    EXPECT_EQ(detect_a3(t, a1), regex_a3(t, *a1)) << code;
  }
}

TEST(Anchors, OrderingInvariantOnSyntheticTraces) {
  std::mt19937_64 rng(23);
  const std::vector<std::string> ids{"acc", "total", "items", "node", "pq", "count", "buf"};
  int with_all = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    std::string a = ids[rng() % ids.size()], b = ids[rng() % ids.size()];
    std::string text = "Pseudocode:\n1. Track " + a + " while reading.\n2. Update " + b + ".\n```python\n";
    text += a + " = 0\nfor v in " + b + ":\n    " + a + " += v\nreturn " + a + "\n```";
    AnchorSet s = detect_anchors(testutil::make_trace(split_tokens(text)));
    if (s.a1 && s.a2 && s.a3) {
      ++with_all;
      EXPECT_LT(*s.a2, *s.a1);
      EXPECT_LT(*s.a1, *s.a3);
    }
  }
  EXPECT_EQ(with_all, 2000);
}

TEST(Alignment, NormalizedDistance) {
  EXPECT_NEAR(normalized_distance(50, 40, 100), 0.1, 1e-15);
  EXPECT_EQ(normalized_distance(7, 7, 30), 0.0);
  EXPECT_EQ(normalized_distance(0, 100, 100), -1.0);
  EXPECT_THROW(normalized_distance(0, 0, 0), Error);
}

TEST(Alignment, DeltasOnlyForPresentAnchors) {
  AnchorSet a;
  a.a1 = 40;
  a.a3 = 45;
  SpikeAlignment al = align_spike({50, 3.0, 1.0}, a, 100);
  EXPECT_NEAR(*al.deltas[0], 0.1, 1e-15);
  EXPECT_FALSE(al.deltas[1].has_value());
  EXPECT_NEAR(*al.deltas[2], 0.05, 1e-15);
  EXPECT_THROW(align_spike({50, 3.0, 1.0}, AnchorSet{}, 100), Error);
}
