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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotrobust/deformation.hpp"
#include "cotrobust/uncertainty.hpp"

namespace cotrobust {

inline constexpr double kAlpha = 0.05;

enum class TestMethod { kWilcoxon, kKS, kChiSquare, kSpearmanAssoc };
enum class EffectLabel { kNegligible, kSmall, kMedium, kLarge };

std::string_view to_string(TestMethod m);
std::string_view to_string(EffectLabel l);  // "N", "S", "M", "L"

struct StatTestResult {
  TestMethod method = TestMethod::kWilcoxon;
  double statistic = 0.0;
  std::optional<double> z;
  double p_value = 1.0;
  double effect_size = 0.0;
  std::optional<EffectLabel> effect_label;
  int n = 0;
  bool exact = false;
};

// Reject at p < alpha; p == alpha does not reject.
inline bool rejects(double p_value, double alpha = kAlpha) { return p_value < alpha; }

// r = |z| / sqrt(n) and its band (0.1 / 0.3 / 0.5 cut points).
double effect_size_r(double z, int n);
EffectLabel effect_label(double r);

// Zeros dropped, midranks on |d|, statistic = min(W+, W-). Exact two-sided p
// for N <= 12, else the normal approximation with tie and continuity
// corrections. Throws Error(kDegenerate) when every difference is zero.
StatTestResult wilcoxon_signed_rank(const std::vector<double>& diffs);

// Exact distribution of W+ under the null for the given (positive) ranks:
// counts[s] = number of sign patterns with 2 * W+ == s.
std::vector<std::uint64_t> signed_rank_counts(const std::vector<double>& ranks);

// D = sup |F_a - F_b|; p from the asymptotic Kolmogorov distribution.
StatTestResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);
double ks_statistic(const std::vector<double>& a, const std::vector<double>& b);
// P(K > lambda) for the Kolmogorov limiting distribution.
double kolmogorov_survival(double lambda);

// Pearson chi-square with effect size Cramér's V. Throws Error(kDegenerate)
// for an empty table, a zero margin, or a table with one row or column.
StatTestResult chi_square_independence(const std::vector<std::vector<double>>& table);

struct LogisticOptions {
  double l2 = 1.0;
  int folds = 5;
  std::uint64_t seed = 0;
  int max_iter = 20000;
  double tol = 1e-9;
};

struct LogisticFit {
  std::vector<double> weights;  // on standardized features; last entry is the bias
  std::vector<double> means;
  std::vector<double> scales;
  double predict(const std::vector<double>& x) const;  // P(label = 1)
};

LogisticFit fit_logistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         double l2, int max_iter = 20000, double tol = 1e-9);

struct LogisticAggregate {
  LogisticFit model;  // fit on all samples
  double auroc_cv = 0.5;  // mean AUROC over held-out folds with both classes
  int folds_scored = 0;
};

// Requires >= 20 samples and both classes; Error(kFit) otherwise.
LogisticAggregate logistic_aggregate(const std::vector<std::vector<double>>& features,
                                     const std::vector<int>& labels, const LogisticOptions& options = {});
LogisticAggregate logistic_aggregate(const std::vector<EarlyWindowFeatures>& features,
                                     const std::vector<int>& labels, const LogisticOptions& options = {});

// Holm step-down adjusted p-values, in input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

}  // namespace cotrobust
