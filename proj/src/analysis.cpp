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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "cotrobust/csv.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/metrics.hpp"
#include "cotrobust/perturb.hpp"
#include "cotrobust/report.hpp"
#include "cotrobust/rng.hpp"

namespace cotrobust {

namespace {

// Key of the clean counterpart of a trace.
std::string clean_key(const TraceAnalysis& t) {
  ExperimentCondition c = t.condition;
  c.input_condition = InputCondition::kClean;
  return trace_key(t.task_id, c);
}

bool failed(OutcomeStatus s) { return s != OutcomeStatus::kPass; }

}  // namespace

std::optional<double> task_pass_at_k(const AnalysisResult& analysis, std::string_view task_id,
                                     const ExperimentCondition& cell, int k) {
  auto it = analysis.cells.find(cell_key(task_id, cell));
  if (it == analysis.cells.end() || it->second.n < k || k < 1) return std::nullopt;
  return pass_at_k(it->second.n, it->second.c, k);
}

AnalysisResult analyze_run(const RunConfig& config, const std::vector<Task>& tasks,
                           const std::vector<GenerationTrace>& traces,
                           const std::vector<OutcomeRecord>& outcomes) {
  AnalysisResult out;
  std::unordered_map<std::string, const OutcomeRecord*> by_key;
  for (const auto& o : outcomes) by_key.emplace(o.key(), &o);

  out.traces.reserve(traces.size());
  for (const auto& trace : traces) {
    TraceAnalysis ta;
    ta.trace_id = trace.key();
    ta.task_id = trace.task_id;
    ta.condition = trace.condition;
    ta.length = trace.length();
    ta.series = series_from(trace);
    ta.spike = first_spike(ta.series, config.spike);
    ta.anchors = detect_anchors(trace, config.anchors);
    if (ta.spike) {
      if (ta.anchors.any()) {
        ta.alignment = align_spike(*ta.spike, ta.anchors, ta.length);
      } else {
        ++out.alignment_excluded;
      }
    }
    ta.early = early_features(ta.series, config.window_fraction, config.spike);
    ta.trajectory = trajectory_features(ta.series, ta.anchors, config.spike);
    auto it = by_key.find(ta.trace_id);
    if (it == by_key.end()) throw Error(ErrorKind::kLoad, "no outcome recorded for trace " + ta.trace_id);
    ta.outcome = it->second->status;
    out.traces.push_back(std::move(ta));
  }

  std::unordered_map<std::string, const TraceAnalysis*> clean;
  for (const auto& t : out.traces) {
    if (t.condition.input_condition == InputCondition::kClean) clean.emplace(t.trace_id, &t);
  }
  for (const auto& t : out.traces) {
    if (t.condition.mode != Mode::kCoT || t.condition.input_condition == InputCondition::kClean) continue;
    auto it = clean.find(clean_key(t));
    if (it == clean.end() || it->second->trajectory.reasoning_len <= 0) {
      ++out.deformation_excluded;
      continue;
    }
    out.pairs.push_back({it->second, &t, classify(it->second->trajectory, t.trajectory, config.deformation)});
  }

  out.cells = aggregate_by_cell(outcomes);
  std::set<std::string> ids;
  std::map<std::string, Benchmark> bench;
  for (const auto& task : tasks) bench.emplace(task.task_id, task.source_benchmark);
  for (const auto& o : outcomes) ids.insert(o.task_id);
  out.task_ids.assign(ids.begin(), ids.end());

  std::vector<int> ks = config.ks;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const auto& conds = config.matrix.input_conditions;
  const bool has_clean = std::find(conds.begin(), conds.end(), InputCondition::kClean) != conds.end();

  for (const auto& model : config.matrix.models) {
    for (Benchmark b : {Benchmark::kMHPP, Benchmark::kBCB}) {
      std::vector<std::string> members;
      for (const auto& id : out.task_ids) {
        auto it = bench.find(id);
        if (it != bench.end() && it->second == b) members.push_back(id);
      }
      if (members.empty()) continue;
      for (Mode mode : config.matrix.modes) {
        for (bool aware : config.matrix.aware) {
          for (double temp : config.matrix.temperatures) {
            for (int k : ks) {
              auto dataset_pass = [&](InputCondition ic) -> std::optional<double> {
                ExperimentCondition cell{ic, mode, aware, temp, model, 0};
                double sum = 0.0;
                int n = 0;
                for (const auto& id : members) {
                  if (auto p = task_pass_at_k(out, id, cell, k)) {
                    sum += *p;
                    ++n;
                  }
                }
                if (n == 0) return std::nullopt;
                return sum / n;
              };
              std::optional<double> p_clean = has_clean ? dataset_pass(InputCondition::kClean) : std::nullopt;
              for (InputCondition ic : conds) {
                auto p = dataset_pass(ic);
                if (!p) continue;
                MetricRow row{model, std::string(to_string(b)), mode, aware, temp, ic, k, *p, std::nullopt};
                if (p_clean) row.rd = relative_degradation(*p_clean, *p);
                out.metrics.push_back(std::move(row));
              }
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<RdRow> rd_table(const std::vector<MetricRow>& metrics, int k) {
  std::map<std::pair<Mode, InputCondition>, std::pair<double, int>> acc;
  for (const auto& m : metrics) {
    if (m.k != k || !m.rd || m.family == InputCondition::kClean) continue;
    auto& a = acc[{m.mode, m.family}];
    a.first += std::abs(*m.rd);
    a.second += 1;
  }
  std::vector<RdRow> rows;
  for (const auto& [key, a] : acc) {
    rows.push_back({key.second, key.first, a.first / a.second, a.second, 0});
  }
  // Competition ranking within each mode: equal means share a rank.
  for (Mode mode : {Mode::kCoT, Mode::kNoCoT}) {
    std::vector<RdRow*> group;
    for (auto& r : rows) {
      if (r.mode == mode) group.push_back(&r);
    }
    for (auto* r : group) {
      r->rank = 1;
      for (auto* other : group) {
        if (other->mean_abs_rd > r->mean_abs_rd) ++r->rank;
      }
    }
  }
  return rows;
}

void emit_rd_table(const std::vector<RdRow>& rows, const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"family", "mode", "mean_abs_rd", "n", "rank"});
  for (const auto& r : rows) {
    w.row({std::string(to_string(r.family)), std::string(to_string(r.mode)), format_number(r.mean_abs_rd),
           std::to_string(r.n), std::to_string(r.rank)});
  }
}

namespace {

HypothesisRow run_test(std::string id, TestMethod method, const std::function<StatTestResult()>& fn) {
  HypothesisRow row{std::move(id), method, std::nullopt, ""};
  try {
    row.result = fn();
  } catch (const Error& e) {
    row.note = e.what();
  }
  return row;
}

}  // namespace

std::vector<HypothesisRow> hypothesis_tests(const RunConfig& config, const AnalysisResult& analysis) {
  std::vector<HypothesisRow> rows;
  const int k = config.stat_k;
  const auto& m = config.matrix;

  // H1: clean pass@k, CoT minus No-CoT, paired by task and setting.
  std::vector<double> h1;
  // H2: per-task RD, CoT minus No-CoT, paired by task, setting and family.
  std::vector<double> h2;
  for (const auto& id : analysis.task_ids) {
    for (const auto& model : m.models) {
      for (bool aware : m.aware) {
        for (double temp : m.temperatures) {
          auto pass = [&](InputCondition ic, Mode mode) {
            return task_pass_at_k(analysis, id, ExperimentCondition{ic, mode, aware, temp, model, 0}, k);
          };
          auto cot = pass(InputCondition::kClean, Mode::kCoT);
          auto nocot = pass(InputCondition::kClean, Mode::kNoCoT);
          if (cot && nocot) h1.push_back(*cot - *nocot);
          for (InputCondition ic : m.input_conditions) {
            if (ic == InputCondition::kClean) continue;
            auto pc = pass(ic, Mode::kCoT);
            auto pn = pass(ic, Mode::kNoCoT);
            if (cot && nocot && pc && pn) {
              h2.push_back(relative_degradation(*cot, *pc) - relative_degradation(*nocot, *pn));
            }
          }
        }
      }
    }
  }
  rows.push_back(run_test("H1", TestMethod::kWilcoxon, [&] { return wilcoxon_signed_rank(h1); }));
  rows.push_back(run_test("H2", TestMethod::kWilcoxon, [&] { return wilcoxon_signed_rank(h2); }));

  // H3: early mean entropy against failure.
  std::vector<double> x, y, fail_scores, pass_scores;
  for (const auto& t : analysis.traces) {
    x.push_back(t.early.mean_entropy);
    y.push_back(failed(t.outcome) ? 1.0 : 0.0);
    (failed(t.outcome) ? fail_scores : pass_scores).push_back(t.early.mean_entropy);
  }
  rows.push_back(run_test("H3", TestMethod::kSpearmanAssoc, [&] {
    Correlation c = spearman_rho(x, y);
    StatTestResult r;
    r.method = TestMethod::kSpearmanAssoc;
    r.statistic = c.rho;
    r.p_value = c.p_value;
    r.exact = c.exact;
    r.effect_size = auroc_both(fail_scores, pass_scores).best;
    r.n = static_cast<int>(x.size());
    return r;
  }));

  // H4a: anchor-aligned spike distance, perturbed minus clean.
  std::unordered_map<std::string, const TraceAnalysis*> clean;
  for (const auto& t : analysis.traces) {
    if (t.condition.input_condition == InputCondition::kClean) clean.emplace(t.trace_id, &t);
  }
  for (int a = 0; a < 3; ++a) {
    std::vector<double> diffs, clean_d, pert_d;
    for (const auto& t : analysis.traces) {
      if (!t.alignment || !t.alignment->deltas[a]) continue;
      double d = *t.alignment->deltas[a];
      if (t.condition.input_condition == InputCondition::kClean) {
        clean_d.push_back(d);
        continue;
      }
      pert_d.push_back(d);
      ExperimentCondition c = t.condition;
      c.input_condition = InputCondition::kClean;
      auto it = clean.find(trace_key(t.task_id, c));
      if (it != clean.end() && it->second->alignment && it->second->alignment->deltas[a]) {
        diffs.push_back(d - *it->second->alignment->deltas[a]);
      }
    }
    std::string id = "H4a-A" + std::to_string(a + 1);
    rows.push_back(run_test(id, TestMethod::kWilcoxon, [&] { return wilcoxon_signed_rank(diffs); }));
    rows.push_back(run_test(id + "-KS", TestMethod::kKS, [&] { return ks_two_sample(clean_d, pert_d); }));
  }

  // H4b: deformation label against family and against outcome.
  std::vector<Deformation> labels;
  std::vector<std::string> fams, outs;
  for (const auto& p : analysis.pairs) {
    labels.push_back(p.label.label);
    fams.emplace_back(to_string(p.perturbed->condition.input_condition));
    outs.emplace_back(failed(p.perturbed->outcome) ? "Fail" : "Pass");
  }
  std::vector<std::string> fam_order;
  for (auto ic : all_input_conditions()) fam_order.emplace_back(to_string(ic));
  rows.push_back(run_test("H4b-family", TestMethod::kChiSquare, [&] {
    return chi_square_independence(contingency(labels, fams, fam_order).counts);
  }));
  rows.push_back(run_test("H4b-outcome", TestMethod::kChiSquare, [&] {
    return chi_square_independence(contingency(labels, outs, {"Fail", "Pass"}).counts);
  }));

  if (config.holm) {
    std::vector<double> ps;
    for (const auto& r : rows) {
      if (r.result) ps.push_back(r.result->p_value);
    }
    std::vector<double> adj = holm_adjust(ps);
    std::size_t i = 0;
    for (auto& r : rows) {
      if (r.result) {
        r.result->p_value = adj[i++];
        r.note = "holm-adjusted";
      }
    }
  }
  return rows;
}

}  // namespace cotrobust
