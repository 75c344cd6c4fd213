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
#include <map>
#include <utility>
#include <vector>

namespace cotrobust {

// Unbiased pass@k estimator 1 - C(n-c, k) / C(n, k). Throws Error(kArity)
// unless 0 <= c <= n and 1 <= k <= n.
double pass_at_k(int n, int c, int k);

// The same estimator as an exact fraction {numerator, denominator} (not
// reduced). Valid while C(n, k) fits in 64 bits.
std::pair<std::uint64_t, std::uint64_t> pass_at_k_exact(int n, int c, int k);

std::uint64_t binomial(int n, int k);

struct CellScore {
  int n = 0;
  int c = 0;
  std::map<int, double> pass_at;  // k -> pass@k, for the requested k <= n
};

CellScore score_cell(int n, int c, const std::vector<int>& ks);

// (P_o - P_p) / P_o, and 0 when P_o = 0.
double relative_degradation(double p_original, double p_perturbed);

// Midranks (1-based) of `v`; tied values share the mean of their ranks.
std::vector<double> midranks(const std::vector<double>& v);

// Probability that a random failure scores above a random pass, ties at half
// weight. Throws Error(kUndefined) when either class is empty.
double auroc(const std::vector<double>& scores_fail, const std::vector<double>& scores_pass);

struct AurocReport {
  double as_given = 0.5;
  double negated = 0.5;  // scores multiplied by -1
  double best = 0.5;
};
AurocReport auroc_both(const std::vector<double>& scores_fail, const std::vector<double>& scores_pass);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

// Pearson correlation of midranks. The p-value is exact (all permutations of
// y) for n <= 10 and uses the t approximation with n - 2 degrees of freedom
// otherwise. Throws Error(kArity) for unequal or too short inputs and
// Error(kUndefined) when either rank vector is constant.
Correlation spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cotrobust
