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
#include "cotrobust/metrics.hpp"
#include "oracles.hpp"

using namespace cotrobust;

TEST(PassAtK, Examples) {
  EXPECT_EQ(pass_at_k(10, 0, 1), 0.0);
  EXPECT_EQ(pass_at_k(10, 0, 10), 0.0);
  EXPECT_EQ(pass_at_k(10, 10, 1), 1.0);
  EXPECT_NEAR(pass_at_k(4, 2, 2), 5.0 / 6.0, 1e-15);
  auto [num, den] = pass_at_k_exact(4, 2, 2);
  EXPECT_EQ(num * 6, den * 5);
}

TEST(PassAtK, MatchesSubsetEnumeration) {
  for (int n = 1; n <= 8; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        auto [hit, all] = oracle::pass_at_k(n, c, k);
        auto [num, den] = pass_at_k_exact(n, c, k);
        EXPECT_EQ(num * all, hit * den) << n << " " << c << " " << k;
        EXPECT_NEAR(pass_at_k(n, c, k), static_cast<double>(hit) / static_cast<double>(all), 1e-12);
      }
    }
  }
}

TEST(PassAtK, MonotoneInKAndC) {
  for (int n = 1; n <= 20; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        if (k < n) {
          EXPECT_LE(pass_at_k(n, c, k), pass_at_k(n, c, k + 1) + 1e-15);
        }
        if (c < n) {
          EXPECT_LE(pass_at_k(n, c, k), pass_at_k(n, c + 1, k) + 1e-15);
        }
      }
    }
  }
}

TEST(PassAtK, RejectsBadArguments) {
  EXPECT_THROW(pass_at_k(5, 6, 1), Error);
  EXPECT_THROW(pass_at_k(5, 2, 6), Error);
  EXPECT_THROW(pass_at_k(5, 2, 0), Error);
}

TEST(PassAtK, ScoreCellSkipsLargeK) {
  CellScore s = score_cell(5, 2, {1, 5, 10});
  EXPECT_EQ(s.pass_at.size(), 2u);
  EXPECT_NEAR(s.pass_at.at(1), 0.4, 1e-15);
  EXPECT_EQ(s.pass_at.at(5), 1.0);
}

TEST(Binomial, SmallValuesAndLargeN) {
  EXPECT_EQ(binomial(5, 2), 10u);
  EXPECT_EQ(binomial(10, 0), 1u);
  EXPECT_EQ(binomial(3, 4), 0u);
  EXPECT_EQ(binomial(60, 30), 118264581564861424ULL);
}

TEST(RelativeDegradation, PiecewiseDefinition) {
  EXPECT_EQ(relative_degradation(0.0, 0.3), 0.0);
  EXPECT_EQ(relative_degradation(0.252, 0.252), 0.0);
  EXPECT_NEAR(relative_degradation(0.4, 0.3), 0.25, 1e-15);
  EXPECT_NEAR(relative_degradation(0.4, 0.6), -0.5, 1e-15);
  for (double p = 0.0; p <= 1.0; p += 0.05) EXPECT_EQ(relative_degradation(p, p), 0.0);
}

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc({0.9, 0.8}, {0.1, 0.2}), 1.0);
  EXPECT_EQ(auroc({0.3, 0.3}, {0.3, 0.3, 0.3}), 0.5);
  EXPECT_EQ(auroc({0.7, 0.5}, {0.6, 0.4}), 0.75);
  EXPECT_THROW(auroc({}, {0.1}), Error);
}

TEST(Auroc, MatchesPairCountingAndComplements) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 300; ++rep) {
    std::uniform_int_distribution<int> size(1, 15), val(0, 6);
    std::vector<double> f(size(rng)), p(size(rng));
    for (auto& v : f) v = val(rng);
    for (auto& v : p) v = val(rng);
    EXPECT_NEAR(auroc(f, p), oracle::auroc(f, p), 1e-12);
    EXPECT_NEAR(auroc(f, p) + auroc(p, f), 1.0, 1e-12);
    AurocReport both = auroc_both(f, p);
    EXPECT_NEAR(both.as_given + both.negated, 1.0, 1e-12);
    EXPECT_EQ(both.best, std::max(both.as_given, both.negated));
  }
}

TEST(Midranks, TiesShareMeanRank) {
  std::vector<double> r = midranks({10, 20, 10, 30});
  EXPECT_EQ(r, (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Spearman, Examples) {
  EXPECT_NEAR(spearman_rho({1, 2, 3}, {10, 20, 30}).rho, 1.0, 1e-12);
  EXPECT_NEAR(spearman_rho({1, 2, 3}, {30, 20, 10}).rho, -1.0, 1e-12);
  EXPECT_NEAR(spearman_rho({1, 2, 3, 4}, {1, 3, 2, 4}).rho, 0.8, 1e-12);
  EXPECT_NEAR(oracle::spearman_no_ties({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
}

TEST(Spearman, ExactPValueSmallSample) {
  // rho = 1 with n = 4: only the identity permutation (and its reverse for
  // |rho|) reaches it, so p = 2/24.
  Correlation c = spearman_rho({1, 2, 3, 4}, {2, 4, 6, 8});
  EXPECT_TRUE(c.exact);
  EXPECT_NEAR(c.p_value, 2.0 / 24.0, 1e-12);
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(30), y(30), tx, ty;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
      tx.push_back(std::exp(x[i]));
      ty.push_back(y[i] * y[i] * y[i] + 2.0);
    }
    Correlation a = spearman_rho(x, y), b = spearman_rho(tx, ty);
    EXPECT_NEAR(a.rho, b.rho, 1e-12);
    EXPECT_NEAR(a.rho, oracle::spearman_no_ties(x, y), 1e-12);
    EXPECT_FALSE(a.exact);
  }
}
