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

#include "cotrobust/error.hpp"
#include "cotrobust/stats.hpp"
#include "oracles.hpp"

using namespace cotrobust;

TEST(Wilcoxon, Examples) {
  StatTestResult r = wilcoxon_signed_rank({1, 2, 3});
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p_value, 0.25, 1e-15);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(wilcoxon_signed_rank({1, -1}).p_value, 1.0, 1e-15);
  EXPECT_THROW(wilcoxon_signed_rank({0, 0, 0}), Error);
}

TEST(Wilcoxon, EffectSizeAndLabels) {
  EXPECT_NEAR(effect_size_r(2.5, 25), 0.5, 1e-15);
  EXPECT_EQ(effect_label(0.5), EffectLabel::kLarge);
  EXPECT_EQ(effect_label(0.3), EffectLabel::kMedium);
  EXPECT_EQ(effect_label(0.1), EffectLabel::kSmall);
  EXPECT_EQ(effect_label(0.0999), EffectLabel::kNegligible);
  EXPECT_EQ(to_string(EffectLabel::kLarge), "L");
}

TEST(Wilcoxon, ExactPathMatchesSignEnumeration) {
  // Every vector of length <= 6 over an alphabet with tied magnitudes and a zero.
  const std::vector<double> alphabet{-2, -1, 0, 1, 3};
  for (int len = 1; len <= 6; ++len) {
    std::vector<int> idx(len, 0);
    while (true) {
      std::vector<double> d;
      for (int i : idx) d.push_back(alphabet[i]);
      oracle::SignedRank want = oracle::signed_rank(d);
      if (want.degenerate) {
        EXPECT_THROW(wilcoxon_signed_rank(d), Error);
      } else {
        StatTestResult got = wilcoxon_signed_rank(d);
        EXPECT_NEAR(got.p_value, want.p_exact, 1e-12);
        EXPECT_EQ(got.statistic, want.statistic);
        EXPECT_EQ(got.n, want.n);
      }
      int pos = 0;
      while (pos < len && ++idx[pos] == static_cast<int>(alphabet.size())) idx[pos++] = 0;
      if (pos == len) break;
    }
  }
}

TEST(Wilcoxon, NormalApproximationAboveTwelve) {
  std::vector<double> d;
  for (int i = 1; i <= 20; ++i) d.push_back(i % 4 == 0 ? -i : i);
  StatTestResult r = wilcoxon_signed_rank(d);
  EXPECT_FALSE(r.exact);
  ASSERT_TRUE(r.z.has_value());
  // W+ = 210 - (4+8+12+16+20) = 150, mean 105, var 20*21*41/24 = 717.5.
  EXPECT_NEAR(*r.z, (150 - 105 - 0.5) / std::sqrt(717.5), 1e-12);
  EXPECT_NEAR(r.p_value, std::erfc(std::abs(*r.z) / std::sqrt(2.0)), 1e-12);
}

TEST(Wilcoxon, SignedRankCountsSumToPowerOfTwo) {
  std::vector<std::uint64_t> counts = signed_rank_counts({1, 2, 3, 4, 5});
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  EXPECT_EQ(total, 32u);
  EXPECT_EQ(counts.front(), 1u);
  EXPECT_EQ(counts.back(), 1u);
}

TEST(KolmogorovSmirnov, Examples) {
  EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(ks_statistic({1, 2}, {3, 4}), 1.0);
  EXPECT_EQ(ks_statistic({1, 3}, {2, 4}), 0.5);
  EXPECT_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}).p_value, 1.0);
  EXPECT_THROW(ks_statistic({}, {1}), Error);
}

TEST(KolmogorovSmirnov, MatchesBruteForceEcdf) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 12), val(0, 9);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& v : a) v = val(rng);
    for (auto& v : b) v = val(rng);
    EXPECT_NEAR(ks_statistic(a, b), oracle::ks_d(a, b), 1e-12);
  }
}

TEST(KolmogorovSmirnov, SurvivalFunctionReferenceValues) {
  // Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2); reference values
  // from direct summation of 200 terms.
  for (double lam : {0.3, 0.5, 0.8, 1.0, 1.36, 2.0}) {
    double q = 0.0;
    for (int k = 1; k <= 200; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    EXPECT_NEAR(kolmogorov_survival(lam), std::clamp(q, 0.0, 1.0), 1e-9) << lam;
  }
  EXPECT_NEAR(kolmogorov_survival(1.358), 0.05, 1e-3);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(ChiSquare, Examples) {
  StatTestResult r = chi_square_independence({{5, 5}, {5, 5}});
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  EXPECT_NEAR(r.effect_size, 0.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  r = chi_square_independence({{10, 0}, {0, 10}});
  EXPECT_NEAR(r.statistic, 20.0, 1e-12);
  EXPECT_NEAR(r.effect_size, 1.0, 1e-12);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(20.0 / 2.0)), 1e-12);
}

TEST(ChiSquare, DegenerateMarginsRaise) {
  EXPECT_THROW(chi_square_independence({{0, 0}, {3, 4}}), Error);
  EXPECT_THROW(chi_square_independence({{1, 2}}), Error);
  EXPECT_THROW(chi_square_independence({}), Error);
}

TEST(ChiSquare, SmallButReliableAssociation) {
  // 3x2 table of 2,900 pairs with V near 0.094: significant, small effect.
  std::vector<std::vector<double>> t{{560, 440}, {500, 500}, {400, 500}};
  StatTestResult r = chi_square_independence(t);
  auto [chi, v] = oracle::chi_square(t);
  EXPECT_NEAR(r.statistic, chi, 1e-9);
  EXPECT_NEAR(r.effect_size, v, 1e-12);
  EXPECT_GT(r.effect_size, 0.08);
  EXPECT_LT(r.effect_size, 0.11);
  EXPECT_TRUE(rejects(r.p_value));
}

TEST(ChiSquare, MatchesOracleOnRandomTables) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(2, 5), cnt(1, 30);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::vector<double>> t(dim(rng), std::vector<double>(dim(rng)));
    for (auto& row : t) {
      for (auto& x : row) x = cnt(rng);
    }
    auto [chi, v] = oracle::chi_square(t);
    StatTestResult r = chi_square_independence(t);
    EXPECT_NEAR(r.statistic, chi, 1e-9 * std::max(1.0, chi));
    EXPECT_NEAR(r.effect_size, v, 1e-12);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
  }
}

TEST(Logistic, SeparableDataScoresOne) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({static_cast<double>(i)});
    y.push_back(i >= 20);
  }
  LogisticAggregate agg = logistic_aggregate(x, y, {.seed = 1});
  EXPECT_EQ(agg.auroc_cv, 1.0);
  EXPECT_EQ(agg.folds_scored, 5);
  EXPECT_GT(agg.model.predict({39.0}), 0.5);
  EXPECT_LT(agg.model.predict({0.0}), 0.5);
}

TEST(Logistic, PermutedLabelsNearChance) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({g(rng), g(rng), g(rng)});
    y.push_back(i % 2);
  }
  double sum = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::shuffle(y.begin(), y.end(), rng);
    sum += logistic_aggregate(x, y, {.seed = static_cast<std::uint64_t>(rep)}).auroc_cv;
  }
  EXPECT_NEAR(sum / 100.0, 0.5, 0.1);
}

TEST(Logistic, PreconditionsRaiseFitErrors) {
  std::vector<std::vector<double>> x(25, std::vector<double>{1.0});
  std::vector<int> y(25, 1);
  EXPECT_THROW(logistic_aggregate(x, y), Error);
  std::vector<std::vector<double>> few(10, std::vector<double>{1.0});
  std::vector<int> mixed{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  EXPECT_THROW(logistic_aggregate(few, mixed), Error);
}

TEST(Holm, StepDownAdjustment) {
  std::vector<double> adj = holm_adjust({0.01, 0.04, 0.03, 0.5});
  EXPECT_NEAR(adj[0], 0.04, 1e-15);
  EXPECT_NEAR(adj[2], 0.09, 1e-15);
  EXPECT_NEAR(adj[1], 0.09, 1e-15);
  EXPECT_NEAR(adj[3], 0.5, 1e-15);
}
