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

#include "cotrobust/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cotrobust/error.hpp"

namespace cotrobust {

double entropy_bits(const std::vector<double>& masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  if (!(total > 0.0)) throw Error(ErrorKind::kDegenerate, "distribution has no mass");
  double h = 0.0;
  for (double m : masses) {
    if (m <= 0.0) continue;
    double p = m / total;
    h -= p * std::log2(p);
  }
  return h <= 0.0 ? 0.0 : h;
}

double entropy_at(const TokenStep& step) {
  std::vector<double> masses;
  masses.reserve(step.top_alternatives.size() + 1);
  double sum = 0.0;
  for (const auto& [tok, lp] : step.top_alternatives) {
    double m = std::isfinite(lp) ? std::exp(lp) : 0.0;
    masses.push_back(m);
    sum += m;
  }
  if (masses.empty()) throw Error(ErrorKind::kDegenerate, "step has no alternatives");
  masses.push_back(std::max(0.0, 1.0 - sum));
  return entropy_bits(masses);
}

double prob_diff_at(const TokenStep& step) {
  if (step.top_alternatives.size() < 2) {
    throw Error(ErrorKind::kArity, "prob_diff needs at least two alternatives, got " +
                                       std::to_string(step.top_alternatives.size()));
  }
  double p1 = 0.0;
  double p2 = 0.0;
  for (const auto& [tok, lp] : step.top_alternatives) {
    double m = std::isfinite(lp) ? std::exp(lp) : 0.0;
    if (m > p1) {
      p2 = p1;
      p1 = m;
    } else if (m > p2) {
      p2 = m;
    }
  }
  return std::clamp(p1 - p2, 0.0, 1.0);
}

UncertaintySeries series_from(const GenerationTrace& trace) {
  UncertaintySeries s;
  s.entropy_bits.reserve(trace.steps.size());
  s.prob_diff.reserve(trace.steps.size());
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    try {
      s.entropy_bits.push_back(entropy_at(trace.steps[t]));
      s.prob_diff.push_back(prob_diff_at(trace.steps[t]));
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(t) + ": " + e.what());
    }
  }
  return s;
}

std::vector<double> spike_signal(const UncertaintySeries& series, SpikeSignal signal) {
  if (signal == SpikeSignal::kEntropy) return series.entropy_bits;
  std::vector<double> out(series.prob_diff.size());
  std::transform(series.prob_diff.begin(), series.prob_diff.end(), out.begin(),
                 [](double d) { return 1.0 - d; });
  return out;
}

namespace {

struct RangeMoments {
  double mean = 0.0;
  double ss = 0.0;  // sum of squared deviations from mean
  std::size_t n = 0;
};

RangeMoments range_moments(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  RangeMoments m;
  m.n = end - begin;
  if (m.n == 0) return m;
  for (std::size_t i = begin; i < end; ++i) m.mean += v[i];
  m.mean /= static_cast<double>(m.n);
  for (std::size_t i = begin; i < end; ++i) m.ss += (v[i] - m.mean) * (v[i] - m.mean);
  return m;
}

// Leave-one-out mean + z*sd, derived from the full-range moments.
double loo_threshold(const RangeMoments& m, double x, const SpikePolicy& policy) {
  if (policy.mode == SpikePolicy::Mode::kFixed) return policy.tau_fixed;
  double mean = 0.0;
  double sd = 0.0;
  if (m.n > 1) {
    double k = static_cast<double>(m.n - 1);
    double dev = x - m.mean;
    mean = m.mean - dev / k;
    double ss = m.ss - dev * dev * static_cast<double>(m.n) / k;
    // Downdating leaves rounding noise where the remaining values are equal.
    if (m.n == 2 || ss <= 1e-12 * m.ss) ss = 0.0;
    sd = std::sqrt(ss / k);
  }
  return std::clamp(mean + policy.z * sd, policy.floor_bits, policy.cap_bits);
}

}  // namespace

double spike_threshold(const std::vector<double>& signal, std::size_t t, const SpikePolicy& policy) {
  return loo_threshold(range_moments(signal, 0, signal.size()), signal.at(t), policy);
}

std::optional<SpikeEvent> first_spike(const UncertaintySeries& series, const SpikePolicy& policy) {
  std::vector<double> sig = spike_signal(series, policy.signal);
  RangeMoments m = range_moments(sig, 0, sig.size());
  for (std::size_t t = 0; t < sig.size(); ++t) {
    double tau = loo_threshold(m, sig[t], policy);
    if (sig[t] >= tau) return SpikeEvent{static_cast<int>(t), sig[t], tau};
  }
  return std::nullopt;
}

int count_spikes(const std::vector<double>& signal, std::size_t begin, std::size_t end,
                 const SpikePolicy& policy) {
  end = std::min(end, signal.size());
  if (begin >= end) return 0;
  RangeMoments m = range_moments(signal, begin, end);
  int count = 0;
  for (std::size_t t = begin; t < end; ++t) {
    if (signal[t] >= loo_threshold(m, signal[t], policy)) ++count;
  }
  return count;
}

std::size_t early_window_size(std::size_t length, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kUsage, "window fraction must lie in (0, 1]");
  }
  // The epsilon keeps products such as 10 * 0.3 from rounding up past 3.
  auto w = static_cast<std::size_t>(std::ceil(static_cast<double>(length) * fraction - 1e-9));
  return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(length, 1));
}

EarlyWindowFeatures early_features(const UncertaintySeries& series, double fraction,
                                   const SpikePolicy& policy) {
  if (series.length() == 0) throw Error(ErrorKind::kUsage, "empty uncertainty series");
  EarlyWindowFeatures f;
  f.window_fraction = fraction;
  f.window = early_window_size(series.length(), fraction);
  const auto& h = series.entropy_bits;
  const auto& d = series.prob_diff;
  auto w = static_cast<std::ptrdiff_t>(f.window);
  f.mean_entropy = std::accumulate(h.begin(), h.begin() + w, 0.0) / static_cast<double>(f.window);
  f.max_entropy = *std::max_element(h.begin(), h.begin() + w);
  f.mean_prob_diff = std::accumulate(d.begin(), d.begin() + w, 0.0) / static_cast<double>(f.window);
  f.min_prob_diff = *std::min_element(d.begin(), d.begin() + w);
  f.spike_count = count_spikes(spike_signal(series, policy.signal), 0, f.window, policy);
  return f;
}

}  // namespace cotrobust
