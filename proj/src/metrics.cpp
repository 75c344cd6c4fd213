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

#include "cotrobust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "cotrobust/error.hpp"

namespace cotrobust {

namespace {

void check_pass_args(int n, int c, int k) {
  if (n < 1 || c < 0 || c > n) {
    throw Error(ErrorKind::kArity, "pass@k needs 0 <= c <= n and n >= 1 (n=" + std::to_string(n) +
                                       ", c=" + std::to_string(c) + ")");
  }
  if (k < 1 || k > n) {
    throw Error(ErrorKind::kArity,
                "pass@k needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i at every step.
    r = r / static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) +
        r % static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) /
            static_cast<std::uint64_t>(i);
  }
  return r;
}

double pass_at_k(int n, int c, int k) {
  check_pass_args(n, c, k);
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k / i)
  double prod = 1.0;
  for (int i = n - c + 1; i <= n; ++i) prod *= 1.0 - static_cast<double>(k) / i;
  return 1.0 - prod;
}

std::pair<std::uint64_t, std::uint64_t> pass_at_k_exact(int n, int c, int k) {
  check_pass_args(n, c, k);
  std::uint64_t total = binomial(n, k);
  return {total - binomial(n - c, k), total};
}

CellScore score_cell(int n, int c, const std::vector<int>& ks) {
  CellScore s{n, c, {}};
  for (int k : ks) {
    if (k <= n) s.pass_at[k] = pass_at_k(n, c, k);
  }
  return s;
}

double relative_degradation(double p_original, double p_perturbed) {
  if (p_original == 0.0) return 0.0;
  return (p_original - p_perturbed) / p_original;
}

std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

double auroc(const std::vector<double>& scores_fail, const std::vector<double>& scores_pass) {
  if (scores_fail.empty() || scores_pass.empty()) {
    throw Error(ErrorKind::kUndefined, "AUROC needs both failures and passes");
  }
  // Mann-Whitney: U = rank sum of failures - n_f (n_f + 1) / 2.
  std::vector<double> pooled(scores_fail);
  pooled.insert(pooled.end(), scores_pass.begin(), scores_pass.end());
  std::vector<double> r = midranks(pooled);
  double nf = static_cast<double>(scores_fail.size());
  double np = static_cast<double>(scores_pass.size());
  double rank_sum = std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(scores_fail.size()), 0.0);
  return (rank_sum - nf * (nf + 1.0) / 2.0) / (nf * np);
}

AurocReport auroc_both(const std::vector<double>& scores_fail, const std::vector<double>& scores_pass) {
  AurocReport r;
  r.as_given = auroc(scores_fail, scores_pass);
  r.negated = 1.0 - r.as_given;
  r.best = std::max(r.as_given, r.negated);
  return r;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double n = static_cast<double>(a.size());
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error(ErrorKind::kUndefined, "constant ranks; correlation undefined");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

Correlation spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kArity, "spearman inputs differ in length");
  if (x.size() < 3) throw Error(ErrorKind::kArity, "spearman needs at least 3 pairs");
  std::vector<double> rx = midranks(x);
  std::vector<double> ry = midranks(y);
  Correlation out;
  out.rho = pearson(rx, ry);
  const std::size_t n = x.size();
  if (n <= 10) {
    out.exact = true;
    std::vector<double> perm = ry;
    std::sort(perm.begin(), perm.end());
    const double obs = std::abs(out.rho) - 1e-12;
    long long hits = 0, total = 0;
    do {
      ++total;
      if (std::abs(pearson(rx, perm)) >= obs) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(hits) / static_cast<double>(total);
  } else {
    double df = static_cast<double>(n) - 2.0;
    double denom = 1.0 - out.rho * out.rho;
    if (denom <= 0.0) {
      out.p_value = 0.0;
    } else {
      double t = out.rho * std::sqrt(df / denom);
      boost::math::students_t dist(df);
      out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
    }
  }
  return out;
}

}  // namespace cotrobust
