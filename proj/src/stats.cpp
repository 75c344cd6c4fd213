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

#include "cotrobust/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "cotrobust/error.hpp"
#include "cotrobust/metrics.hpp"
#include "cotrobust/rng.hpp"

namespace cotrobust {

std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::kWilcoxon: return "Wilcoxon";
    case TestMethod::kKS: return "KS";
    case TestMethod::kChiSquare: return "ChiSquare";
    case TestMethod::kSpearmanAssoc: return "SpearmanAssoc";
  }
  return "?";
}

std::string_view to_string(EffectLabel l) {
  switch (l) {
    case EffectLabel::kNegligible: return "N";
    case EffectLabel::kSmall: return "S";
    case EffectLabel::kMedium: return "M";
    case EffectLabel::kLarge: return "L";
  }
  return "?";
}

double effect_size_r(double z, int n) {
  if (n < 1) throw Error(ErrorKind::kUsage, "effect size needs n >= 1");
  return std::abs(z) / std::sqrt(static_cast<double>(n));
}

EffectLabel effect_label(double r) {
  if (r < 0.1) return EffectLabel::kNegligible;
  if (r < 0.3) return EffectLabel::kSmall;
  if (r < 0.5) return EffectLabel::kMedium;
  return EffectLabel::kLarge;
}

std::vector<std::uint64_t> signed_rank_counts(const std::vector<double>& ranks) {
  std::vector<int> doubled;
  int total = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<int>(std::lround(2.0 * r)));
    total += doubled.back();
  }
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
  counts[0] = 1;
  int reach = 0;
  for (int d : doubled) {
    for (int s = reach; s >= 0; --s) {
      if (counts[static_cast<std::size_t>(s)]) counts[static_cast<std::size_t>(s + d)] += counts[static_cast<std::size_t>(s)];
    }
    reach += d;
  }
  return counts;
}

StatTestResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  std::vector<double> nz;
  for (double d : diffs) {
    if (d != 0.0) nz.push_back(d);
  }
  if (nz.empty()) throw Error(ErrorKind::kDegenerate, "all paired differences are zero");
  const int n = static_cast<int>(nz.size());
  std::vector<double> mag(nz.size());
  std::transform(nz.begin(), nz.end(), mag.begin(), [](double d) { return std::abs(d); });
  std::vector<double> ranks = midranks(mag);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < nz.size(); ++i) {
    if (nz[i] > 0) w_plus += ranks[i];
  }
  const double nn = n;
  const double total = nn * (nn + 1.0) / 2.0;
  const double w_minus = total - w_plus;

  StatTestResult res;
  res.method = TestMethod::kWilcoxon;
  res.statistic = std::min(w_plus, w_minus);
  res.n = n;

  // Tie correction: sum over tie groups of (t^3 - t) / 48.
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    double t = static_cast<double>(j - i);
    tie_term += (t * t * t - t) / 48.0;
    i = j;
  }
  const double mean = total / 2.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term;
  double d = w_plus - mean;
  if (d > 0) d = std::max(0.0, d - 0.5);
  else if (d < 0) d = std::min(0.0, d + 0.5);
  const double z = var > 0.0 ? d / std::sqrt(var) : 0.0;
  res.z = z;

  if (n <= 12) {
    res.exact = true;
    std::vector<std::uint64_t> counts = signed_rank_counts(ranks);
    const auto obs = static_cast<std::size_t>(std::lround(2.0 * w_plus));
    double all = std::ldexp(1.0, n);
    double upper = 0.0, lower = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (s >= obs) upper += static_cast<double>(counts[s]);
      if (s <= obs) lower += static_cast<double>(counts[s]);
    }
    res.p_value = std::min(1.0, 2.0 * std::min(upper, lower) / all);
  } else {
    boost::math::normal norm;
    res.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(norm, std::abs(z))));
  }
  res.effect_size = effect_size_r(z, n);
  res.effect_label = effect_label(res.effect_size);
  return res;
}

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::kArity, "KS needs two non-empty samples");
  std::vector<double> x(a), y(b);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int j = 1; j <= 50; ++j) {
      double k = 2.0 * j - 1.0;
      s += std::exp(-k * k * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

StatTestResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  StatTestResult r;
  r.method = TestMethod::kKS;
  r.statistic = ks_statistic(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double en = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_survival(en * r.statistic);
  r.effect_size = r.statistic;
  r.n = static_cast<int>(a.size() + b.size());
  return r;
}

StatTestResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  if (table.empty() || table.front().empty()) throw Error(ErrorKind::kDegenerate, "empty contingency table");
  const std::size_t rows = table.size();
  const std::size_t cols = table.front().size();
  std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (table[i].size() != cols) throw Error(ErrorKind::kArity, "ragged contingency table");
    for (std::size_t j = 0; j < cols; ++j) {
      if (table[i][j] < 0.0) throw Error(ErrorKind::kDegenerate, "negative count in contingency table");
      rs[i] += table[i][j];
      cs[j] += table[i][j];
      n += table[i][j];
    }
  }
  if (rows < 2 || cols < 2) {
    throw Error(ErrorKind::kDegenerate, "chi-square needs at least two rows and two columns");
  }
  for (double s : rs) {
    if (s <= 0.0) throw Error(ErrorKind::kDegenerate, "contingency table has an empty row");
  }
  for (double s : cs) {
    if (s <= 0.0) throw Error(ErrorKind::kDegenerate, "contingency table has an empty column");
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double e = rs[i] * cs[j] / n;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  StatTestResult r;
  r.method = TestMethod::kChiSquare;
  r.statistic = chi2;
  const double df = static_cast<double>((rows - 1) * (cols - 1));
  boost::math::chi_squared dist(df);
  r.p_value = chi2 <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, chi2));
  const double k = static_cast<double>(std::min(rows, cols)) - 1.0;
  r.effect_size = std::clamp(std::sqrt(chi2 / (n * k)), 0.0, 1.0);
  r.n = static_cast<int>(std::lround(n));
  return r;
}

double LogisticFit::predict(const std::vector<double>& x) const {
  double s = weights.back();
  for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * (x[j] - means[j]) / scales[j];
  return 1.0 / (1.0 + std::exp(-s));
}

LogisticFit fit_logistic(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double l2,
                         int max_iter, double tol) {
  if (x.empty() || x.size() != y.size()) throw Error(ErrorKind::kFit, "feature and label counts differ");
  const std::size_t n = x.size();
  const std::size_t p = x.front().size();
  LogisticFit fit;
  fit.means.assign(p, 0.0);
  fit.scales.assign(p, 0.0);
  for (const auto& row : x) {
    if (row.size() != p) throw Error(ErrorKind::kFit, "ragged feature matrix");
    for (std::size_t j = 0; j < p; ++j) fit.means[j] += row[j];
  }
  for (auto& m : fit.means) m /= static_cast<double>(n);
  for (const auto& row : x) {
    for (std::size_t j = 0; j < p; ++j) fit.scales[j] += (row[j] - fit.means[j]) * (row[j] - fit.means[j]);
  }
  for (auto& s : fit.scales) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s == 0.0) s = 1.0;  // constant feature: centered to zero
  }
  std::vector<std::vector<double>> z(n, std::vector<double>(p + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z[i][j] = (x[i][j] - fit.means[j]) / fit.scales[j];
  }
  // Averaged objective: mean log-likelihood - l2 / (2n) * |w|^2 (bias unpenalized).
  // Standardized columns bound its curvature by (p + 1) / 4 + l2 / n.
  const double step = 1.0 / ((static_cast<double>(p) + 1.0) / 4.0 + l2 / static_cast<double>(n));
  fit.weights.assign(p + 1, 0.0);
  std::vector<double> grad(p + 1);
  for (int it = 0; it < max_iter; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = std::inner_product(z[i].begin(), z[i].end(), fit.weights.begin(), 0.0);
      double err = static_cast<double>(y[i]) - 1.0 / (1.0 + std::exp(-s));
      for (std::size_t j = 0; j <= p; ++j) grad[j] += err * z[i][j];
    }
    double gmax = 0.0;
    for (std::size_t j = 0; j <= p; ++j) {
      grad[j] /= static_cast<double>(n);
      if (j < p) grad[j] -= l2 / static_cast<double>(n) * fit.weights[j];
      gmax = std::max(gmax, std::abs(grad[j]));
      fit.weights[j] += step * grad[j];
    }
    if (gmax < tol) break;
  }
  return fit;
}

LogisticAggregate logistic_aggregate(const std::vector<std::vector<double>>& features,
                                     const std::vector<int>& labels, const LogisticOptions& options) {
  if (features.size() != labels.size()) throw Error(ErrorKind::kFit, "feature and label counts differ");
  if (features.size() < 20) {
    throw Error(ErrorKind::kFit, "logistic aggregation needs at least 20 samples, got " +
                                     std::to_string(features.size()));
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorKind::kFit, "labels must be 0 or 1");
    (labels[i] ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) throw Error(ErrorKind::kFit, "logistic aggregation needs both classes");
  if (options.folds < 2) throw Error(ErrorKind::kUsage, "at least two folds are required");

  // Stratified folds: shuffle each class, then deal round-robin.
  Engine rng(options.seed);
  std::vector<int> fold(labels.size());
  int next = 0;
  for (auto* cls : {&pos, &neg}) {
    for (std::size_t i = cls->size(); i > 1; --i) std::swap((*cls)[i - 1], (*cls)[draw_index(rng, i)]);
    for (std::size_t idx : *cls) fold[idx] = next++ % options.folds;
  }

  LogisticAggregate out;
  double auc_sum = 0.0;
  for (int f = 0; f < options.folds; ++f) {
    std::vector<std::vector<double>> tx;
    std::vector<int> ty;
    std::vector<double> fail_scores, pass_scores;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold[i] != f) {
        tx.push_back(features[i]);
        ty.push_back(labels[i]);
      }
    }
    if (std::count(ty.begin(), ty.end(), 1) == 0 || std::count(ty.begin(), ty.end(), 0) == 0) continue;
    LogisticFit m = fit_logistic(tx, ty, options.l2, options.max_iter, options.tol);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold[i] == f) (labels[i] ? fail_scores : pass_scores).push_back(m.predict(features[i]));
    }
    if (fail_scores.empty() || pass_scores.empty()) continue;
    auc_sum += auroc(fail_scores, pass_scores);
    ++out.folds_scored;
  }
  if (out.folds_scored == 0) throw Error(ErrorKind::kFit, "no fold holds both classes");
  out.auroc_cv = auc_sum / out.folds_scored;
  out.model = fit_logistic(features, labels, options.l2, options.max_iter, options.tol);
  return out;
}

LogisticAggregate logistic_aggregate(const std::vector<EarlyWindowFeatures>& features,
                                     const std::vector<int>& labels, const LogisticOptions& options) {
  std::vector<std::vector<double>> x;
  x.reserve(features.size());
  for (const auto& f : features) x.push_back(f.as_vector());
  return logistic_aggregate(x, labels, options);
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(p.size());
  double running = 0.0;
  const double m = static_cast<double>(p.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    running = std::max(running, std::min(1.0, (m - static_cast<double>(r)) * p[order[r]]));
    adj[order[r]] = running;
  }
  return adj;
}

}  // namespace cotrobust
