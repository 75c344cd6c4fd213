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

#include "cotrobust/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "bundled_data.hpp"
#include "cotrobust/csv.hpp"
#include "cotrobust/digest.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/metrics.hpp"
#include "cotrobust/perturb.hpp"
#include "cotrobust/prompting.hpp"
#include "cotrobust/rng.hpp"

namespace cotrobust {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& table_files() {
  static const std::vector<std::string> kTables{
      files::kUncertainty, files::kAnchors, files::kDeformation, files::kAnchorDeformation,
      files::kMetrics,     files::kRdTable, files::kStats,       files::kRq3};
  return kTables;
}

json config_snapshot(const RunConfig& c) {
  json conds = json::array(), modes = json::array();
  for (auto ic : c.matrix.input_conditions) conds.push_back(to_string(ic));
  for (auto m : c.matrix.modes) modes.push_back(to_string(m));
  json aware = json::array();
  for (bool a : c.matrix.aware) aware.push_back(a);
  return json{
      {"matrix",
       {{"input_conditions", conds},
        {"modes", modes},
        {"aware", aware},
        {"temperatures", c.matrix.temperatures},
        {"models", c.matrix.models},
        {"samples_per_cell", c.matrix.samples_per_cell}}},
      {"ks", c.ks},
      {"stat_k", c.stat_k},
      {"seed", c.seed},
      {"word_rate", c.word_rate},
      {"source", c.replay() ? "replay" : "live"},
      {"generation",
       {{"api", c.client.api == ApiFlavor::kChat ? "chat" : "completions"},
        {"max_tokens", c.generation.max_tokens},
        {"top_logprobs", c.generation.top_logprobs}}},
      {"s1_backend", c.translation_endpoint.empty() ? "offline" : "http"},
      {"timeout_s", c.timeout_s},
      {"spike",
       {{"mode", c.spike.mode == SpikePolicy::Mode::kAdaptive ? "adaptive" : "fixed"},
        {"signal", c.spike.signal == SpikeSignal::kEntropy ? "entropy" : "prob_diff"},
        {"tau_fixed", c.spike.tau_fixed},
        {"z", c.spike.z},
        {"floor_bits", c.spike.floor_bits},
        {"cap_bits", c.spike.cap_bits}}},
      {"window_fraction", c.window_fraction},
      {"anchors", {{"lambda", c.anchors.lambda}, {"control_keywords", c.anchors.control_keywords}}},
      {"deformation",
       {{"theta_l", c.deformation.theta_l}, {"theta_s", c.deformation.theta_s}, {"b", c.deformation.b}}},
      {"alpha", c.alpha},
      {"holm", c.holm}};
}

namespace {

void log_line(const std::string& stage, const std::string& msg) {
  std::cerr << "[" << stage << "] " << msg << "\n";
}

fs::path in_run(const RunConfig& c, const char* name) { return c.run_dir / name; }

void require_file(const fs::path& p, const char* stage_hint) {
  if (!fs::exists(p)) {
    throw Error(ErrorKind::kLoad, p.string() + " is missing; run the " + stage_hint + " stage first");
  }
}

// Append-only JSON-lines file shared by worker threads.
class JsonlLog {
 public:
  explicit JsonlLog(const fs::path& p) : out_(p, std::ios::binary | std::ios::app) {
    if (!out_) throw Error(ErrorKind::kEnvironment, "cannot append to " + p.string());
  }
  void append(const json& j) {
    std::string line = j.dump();
    line.push_back('\n');
    std::lock_guard<std::mutex> lock(mu_);
    out_ << line;
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

void write_jsonl(const fs::path& p, const std::vector<json>& rows) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kEnvironment, "cannot write " + tmp.string());
    for (const auto& r : rows) out << r.dump() << '\n';
  }
  fs::rename(tmp, p);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Returns the
// exceptions raised, indexed by job.
std::vector<std::pair<std::size_t, std::exception_ptr>> parallel_for(
    std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::pair<std::size_t, std::exception_ptr>> errors;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        errors.emplace_back(i, std::current_exception());
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::sort(errors.begin(), errors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return errors;
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

std::vector<Task> load_dataset_tasks(const RunConfig& c) {
  if (c.datasets.empty()) throw Error(ErrorKind::kUsage, "no dataset given");
  std::vector<Task> tasks;
  std::unordered_set<std::string> seen;
  for (const auto& p : c.datasets) {
    for (auto& t : load_tasks(p)) {
      if (!seen.insert(t.task_id).second) {
        throw Error(ErrorKind::kRecord, "task_id '" + t.task_id + "' appears in more than one dataset");
      }
      tasks.push_back(std::move(t));
    }
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.task_id < b.task_id; });
  return tasks;
}

std::vector<PerturbedTask> load_perturbed(const RunConfig& c) {
  std::vector<PerturbedTask> out;
  fs::path p = in_run(c, files::kPerturbed);
  if (!fs::exists(p)) return out;
  for (const auto& j : read_json_records(p)) out.push_back(perturbed_task_from_json(j));
  return out;
}

// Task as seen under each input condition, keyed "task_id|condition".
std::unordered_map<std::string, Task> condition_tasks(const std::vector<Task>& tasks,
                                                      const std::vector<PerturbedTask>& perturbed) {
  std::unordered_map<std::string, Task> out;
  for (const auto& t : tasks) out.emplace(t.task_id + "|Clean", t);
  for (const auto& p : perturbed) {
    out.emplace(p.base.task_id + "|" + std::string(to_string(to_input_condition(p.spec.family))), p.as_task());
  }
  return out;
}

const Task& lookup_task(const std::unordered_map<std::string, Task>& m, const std::string& task_id,
                        InputCondition ic) {
  auto it = m.find(task_id + "|" + std::string(to_string(ic)));
  if (it == m.end()) {
    throw Error(ErrorKind::kUsage, "no " + std::string(to_string(ic)) + " variant of task " + task_id +
                                       "; rerun the perturb stage with this condition");
  }
  return it->second;
}

std::unordered_map<std::string, std::size_t> matrix_index(const std::vector<Task>& tasks,
                                                          const std::vector<MatrixRow>& rows) {
  std::unordered_map<std::string, std::size_t> idx;
  idx.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    idx.emplace(trace_key(tasks[rows[i].task_index].task_id, rows[i].condition), i);
  }
  return idx;
}

std::vector<OutcomeRecord> load_outcomes(const fs::path& p, bool tolerate_torn_tail) {
  std::vector<OutcomeRecord> out;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::kLoad, "cannot read " + p.string());
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t here = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(outcome_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (tolerate_torn_tail && in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError(here, "malformed outcome record in " + p.string() + ": " + e.what());
    }
  }
  return out;
}

// Keeps the first record per matrix slot, drops records outside the matrix,
// and orders by matrix position.
template <class Record>
std::vector<Record> compact(std::vector<Record> records,
                            const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<std::pair<std::size_t, Record>> keyed;
  std::unordered_set<std::string> seen;
  for (auto& r : records) {
    std::string key = r.key();
    auto it = index.find(key);
    if (it == index.end() || !seen.insert(key).second) continue;
    keyed.emplace_back(it->second, std::move(r));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Record> out;
  out.reserve(keyed.size());
  for (auto& [i, r] : keyed) out.push_back(std::move(r));
  return out;
}

void save_outcomes(const std::vector<OutcomeRecord>& outcomes, const fs::path& p) {
  std::vector<json> rows;
  rows.reserve(outcomes.size());
  for (const auto& o : outcomes) rows.push_back(to_json(o));
  write_jsonl(p, rows);
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") ++n;
  }
  return n;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string aware_str(bool aware) { return aware ? "true" : "false"; }

}  // namespace

void stage_perturb(const RunConfig& c) {
  fs::create_directories(c.run_dir);
  std::vector<Task> tasks = load_dataset_tasks(c);
  save_corpus(tasks, in_run(c, files::kCorpus));
  log_line("perturb", std::to_string(tasks.size()) + " tasks");

  std::vector<MatrixRow> rows = enumerate_matrix(tasks, c.matrix);
  {
    CsvWriter w(in_run(c, files::kMatrix));
    w.row({"index", "trace_id", "task_id", "input_condition", "mode", "aware", "temperature", "model_id",
           "sample_index"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& cond = rows[i].condition;
      const std::string& id = tasks[rows[i].task_index].task_id;
      w.row({std::to_string(i), trace_key(id, cond), id, std::string(to_string(cond.input_condition)),
             std::string(to_string(cond.mode)), aware_str(cond.aware), format_number(cond.temperature),
             cond.model_id, std::to_string(cond.sample_index)});
    }
  }
  log_line("perturb", std::to_string(rows.size()) + " matrix slots");
  if (c.dry_run) return;

  std::unique_ptr<HttpTranslationBackend> backend;
  if (!c.translation_endpoint.empty()) backend = std::make_unique<HttpTranslationBackend>(c.translation_endpoint);

  std::vector<json> perturbed_rows;
  std::vector<PerturbedTask> perturbed;
  int offline = 0;
  for (const auto& task : tasks) {
    for (InputCondition ic : c.matrix.input_conditions) {
      auto fam = to_family(ic);
      if (!fam) continue;
      PerturbationSpec spec{*fam, perturbation_seed(c.seed, task.task_id, *fam), c.word_rate};
      perturbed.push_back(perturb_task(task, spec, Lexicon::bundled(), backend.get()));
      if (perturbed.back().offline_approximation) ++offline;
      perturbed_rows.push_back(to_json(perturbed.back()));
    }
  }
  write_jsonl(in_run(c, files::kPerturbed), perturbed_rows);
  if (offline > 0) log_line("perturb", std::to_string(offline) + " S1 variants use the offline paraphraser");

  auto by_cond = condition_tasks(tasks, perturbed);
  std::vector<json> prompt_rows;
  for (const auto& task : tasks) {
    for (InputCondition ic : c.matrix.input_conditions) {
      const Task& t = lookup_task(by_cond, task.task_id, ic);
      for (Mode mode : c.matrix.modes) {
        for (bool aware : c.matrix.aware) {
          PromptBundle b = build_prompt(t, mode, aware);
          prompt_rows.push_back(json{{"task_id", task.task_id},
                                     {"input_condition", to_string(ic)},
                                     {"mode", to_string(mode)},
                                     {"aware", aware},
                                     {"prompt", b.text}});
        }
      }
    }
  }
  write_jsonl(in_run(c, files::kPrompts), prompt_rows);
}

void stage_generate(const RunConfig& c) {
  require_file(in_run(c, files::kCorpus), "perturb");
  std::vector<Task> tasks = load_corpus(in_run(c, files::kCorpus));
  std::vector<MatrixRow> rows = enumerate_matrix(tasks, c.matrix);
  auto index = matrix_index(tasks, rows);
  const fs::path traces_path = in_run(c, files::kTraces);

  if (c.replay()) {
    fs::path src = *c.replay_dir / files::kTraces;
    std::vector<GenerationTrace> stored = compact(load_traces(src), index);
    if (stored.size() != rows.size()) {
      std::unordered_set<std::string> have;
      for (const auto& t : stored) have.insert(t.key());
      for (const auto& r : rows) {
        std::string key = trace_key(tasks[r.task_index].task_id, r.condition);
        if (!have.count(key)) {
          throw Error(ErrorKind::kLoad, std::to_string(rows.size() - stored.size()) +
                                            " matrix slots have no stored trace in " + src.string() +
                                            " (first: " + key + ")");
        }
      }
    }
    save_traces(stored, traces_path);
    log_line("generate", "replayed " + std::to_string(stored.size()) + " traces");
    return;
  }

  auto by_cond = condition_tasks(tasks, load_perturbed(c));
  std::vector<GenerationTrace> existing;
  if (fs::exists(traces_path)) existing = compact(load_traces(traces_path, true), index);
  // Rewriting first drops any torn final line before new appends.
  save_traces(existing, traces_path);
  std::unordered_set<std::string> done;
  for (const auto& t : existing) done.insert(t.key());
  std::vector<const MatrixRow*> todo;
  for (const auto& r : rows) {
    if (!done.count(trace_key(tasks[r.task_index].task_id, r.condition))) todo.push_back(&r);
  }
  log_line("generate", std::to_string(existing.size()) + " traces present, " + std::to_string(todo.size()) +
                           " to generate");

  std::map<std::string, std::unique_ptr<ModelClient>> clients;
  for (const auto& model : c.matrix.models) {
    ClientConfig cc = c.client;
    cc.model = model;
    cc.max_in_flight = std::max(1, c.workers);
    clients.emplace(model, std::make_unique<ModelClient>(cc));
  }
  TraceLog log(traces_path);
  auto errors = parallel_for(todo.size(), c.workers, [&](std::size_t i) {
    const MatrixRow& r = *todo[i];
    const std::string& id = tasks[r.task_index].task_id;
    PromptBundle prompt = build_prompt(lookup_task(by_cond, id, r.condition.input_condition), r.condition.mode,
                                       r.condition.aware);
    GenerationParams params = c.generation;
    params.temperature = r.condition.temperature;
    GenerationTrace trace = clients.at(r.condition.model_id)->generate(prompt, params);
    trace.task_id = id;
    trace.condition = r.condition;
    log.append(trace);
  });
  save_traces(compact(load_traces(traces_path, true), index), traces_path);
  if (!errors.empty()) {
    throw Error(ErrorKind::kTransport, std::to_string(errors.size()) +
                                           " generations failed; rerun to resume. First: " +
                                           describe(errors.front().second));
  }
}

void stage_execute(const RunConfig& c) {
  require_file(in_run(c, files::kTraces), "generate");
  std::vector<Task> tasks = load_corpus(in_run(c, files::kCorpus));
  std::vector<MatrixRow> rows = enumerate_matrix(tasks, c.matrix);
  auto index = matrix_index(tasks, rows);
  std::vector<GenerationTrace> traces = load_traces(in_run(c, files::kTraces));
  const fs::path out_path = in_run(c, files::kOutcomes);

  if (c.replay()) {
    fs::path src = *c.replay_dir / files::kOutcomes;
    std::vector<OutcomeRecord> stored = compact(load_outcomes(src, false), index);
    std::unordered_set<std::string> have;
    for (const auto& o : stored) have.insert(o.key());
    std::unordered_set<std::string> wanted;
    for (const auto& t : traces) {
      if (!have.count(t.key())) {
        throw Error(ErrorKind::kLoad, "no stored outcome for trace " + t.key() + " in " + src.string());
      }
      wanted.insert(t.key());
    }
    std::erase_if(stored, [&](const OutcomeRecord& o) { return !wanted.count(o.key()); });
    save_outcomes(stored, out_path);
    log_line("execute", "replayed " + std::to_string(stored.size()) + " outcomes");
    return;
  }

  auto by_cond = condition_tasks(tasks, load_perturbed(c));
  std::vector<OutcomeRecord> existing;
  if (fs::exists(out_path)) existing = compact(load_outcomes(out_path, true), index);
  save_outcomes(existing, out_path);
  std::unordered_set<std::string> done;
  for (const auto& o : existing) done.insert(o.key());
  std::vector<const GenerationTrace*> todo;
  for (const auto& t : traces) {
    if (!done.count(t.key())) todo.push_back(&t);
  }
  log_line("execute", std::to_string(todo.size()) + " traces to execute");

  Sandbox sandbox(c.sandbox);
  JsonlLog log(out_path);
  auto errors = parallel_for(todo.size(), c.workers, [&](std::size_t i) {
    const GenerationTrace& t = *todo[i];
    const Task& task = lookup_task(by_cond, t.task_id, t.condition.input_condition);
    OutcomeRecord rec;
    try {
      ParsedOutput parsed = parse_output(t.decoded_text, t.condition.mode);
      rec = sandbox.evaluate(parsed.code_text, task, c.timeout_s);
    } catch (const ParseFailure& e) {
      rec.status = OutcomeStatus::kParseFailure;
      rec.detail = e.what();
    }
    rec.task_id = t.task_id;
    rec.condition = t.condition;
    log.append(to_json(rec));
  });
  save_outcomes(compact(load_outcomes(out_path, true), index), out_path);
  if (!errors.empty()) {
    throw Error(ErrorKind::kEnvironment, std::to_string(errors.size()) +
                                             " executions failed; rerun to resume. First: " +
                                             describe(errors.front().second));
  }
}

namespace {

struct RunInputs {
  std::vector<Task> tasks;
  std::vector<GenerationTrace> traces;
  std::vector<OutcomeRecord> outcomes;
};

RunInputs load_inputs(const RunConfig& c) {
  require_file(in_run(c, files::kOutcomes), "execute");
  RunInputs in;
  in.tasks = load_corpus(in_run(c, files::kCorpus));
  in.traces = load_traces(in_run(c, files::kTraces));
  in.outcomes = load_outcomes(in_run(c, files::kOutcomes), false);
  return in;
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace

void stage_analyze(const RunConfig& c) {
  RunInputs in = load_inputs(c);
  AnalysisResult a = analyze_run(c, in.tasks, in.traces, in.outcomes);
  if (a.alignment_excluded > 0) {
    log_line("analyze", std::to_string(a.alignment_excluded) + " traces with a spike but no anchors excluded from alignment");
  }
  if (a.deformation_excluded > 0) {
    log_line("analyze", std::to_string(a.deformation_excluded) +
                            " perturbed CoT traces lack a clean baseline with reasoning; excluded from deformation");
  }

  {
    CsvWriter w(in_run(c, files::kUncertainty));
    w.row({"trace_id", "t", "entropy_bits", "prob_diff"});
    for (const auto& t : a.traces) {
      for (std::size_t i = 0; i < t.length; ++i) {
        w.row({t.trace_id, std::to_string(i), format_number(t.series.entropy_bits[i]),
               format_number(t.series.prob_diff[i])});
      }
    }
  }
  {
    CsvWriter w(in_run(c, files::kAnchors));
    w.row({"trace_id", "a1", "a2", "a3", "S", "tau", "delta1", "delta2", "delta3", "T"});
    for (const auto& t : a.traces) {
      std::optional<double> d[3];
      if (t.alignment) {
        for (int k = 0; k < 3; ++k) d[k] = t.alignment->deltas[k];
      }
      w.row({t.trace_id, opt_int(t.anchors.a1), opt_int(t.anchors.a2), opt_int(t.anchors.a3),
             t.spike ? std::to_string(t.spike->position) : "", t.spike ? format_number(t.spike->threshold) : "",
             format_optional(d[0]), format_optional(d[1]), format_optional(d[2]), std::to_string(t.length)});
    }
  }
  {
    CsvWriter w(in_run(c, files::kDeformation));
    w.row({"trace_id", "task_id", "family", "mode", "label", "length_ratio", "spike_excess", "theta_l", "theta_s",
           "b"});
    for (const auto& p : a.pairs) {
      w.row({p.perturbed->trace_id, p.perturbed->task_id,
             std::string(to_string(p.perturbed->condition.input_condition)),
             std::string(to_string(p.perturbed->condition.mode)), std::string(to_string(p.label.label)),
             format_number(p.label.length_ratio), std::to_string(p.label.spike_excess),
             format_number(c.deformation.theta_l), format_number(c.deformation.theta_s),
             std::to_string(c.deformation.b)});
    }
  }
  {
    // Mean first-spike magnitude and mean distance per (anchor, pattern).
    struct Acc {
      double spike = 0.0;
      double delta = 0.0;
      int n = 0;
    };
    std::map<std::pair<int, Deformation>, Acc> acc;
    for (const auto& p : a.pairs) {
      const auto& al = p.perturbed->alignment;
      if (!al) continue;
      for (int k = 0; k < 3; ++k) {
        if (!al->deltas[k]) continue;
        auto& x = acc[{k, p.label.label}];
        x.spike += al->spike.value;
        x.delta += *al->deltas[k];
        ++x.n;
      }
    }
    CsvWriter w(in_run(c, files::kAnchorDeformation));
    w.row({"anchor", "label", "n", "mean_spike_value", "mean_delta"});
    for (int k = 0; k < 3; ++k) {
      for (Deformation d : all_deformations()) {
        auto it = acc.find({k, d});
        if (it == acc.end()) continue;
        w.row({"A" + std::to_string(k + 1), std::string(to_string(d)), std::to_string(it->second.n),
               format_number(it->second.spike / it->second.n), format_number(it->second.delta / it->second.n)});
      }
    }
  }
  {
    CsvWriter w(in_run(c, files::kMetrics));
    w.row({"model", "dataset", "mode", "aware", "temperature", "family", "k", "pass_at_k", "rd"});
    for (const auto& m : a.metrics) {
      w.row({m.model, m.dataset, std::string(to_string(m.mode)), aware_str(m.aware), format_number(m.temperature),
             std::string(to_string(m.family)), std::to_string(m.k), format_number(m.pass_at_k),
             format_optional(m.rd)});
    }
  }
  emit_rd_table(rd_table(a.metrics, c.stat_k), in_run(c, files::kRdTable));
  log_line("analyze", std::to_string(a.traces.size()) + " traces, " + std::to_string(a.pairs.size()) +
                          " deformation pairs, " + std::to_string(a.metrics.size()) + " metric rows");
}

void stage_stats(const RunConfig& c) {
  RunInputs in = load_inputs(c);
  AnalysisResult a = analyze_run(c, in.tasks, in.traces, in.outcomes);
  {
    CsvWriter w(in_run(c, files::kStats));
    w.row({"hypothesis_id", "method", "statistic", "p", "effect", "label", "n", "decision"});
    for (const auto& h : hypothesis_tests(c, a)) {
      if (!h.result) {
        log_line("stats", h.hypothesis_id + " not testable: " + h.note);
        w.row({h.hypothesis_id, std::string(to_string(h.method)), "", "", "", "", "", "untestable"});
        continue;
      }
      const auto& r = *h.result;
      w.row({h.hypothesis_id, std::string(to_string(r.method)), format_number(r.statistic), format_number(r.p_value),
             format_number(r.effect_size), r.effect_label ? std::string(to_string(*r.effect_label)) : "",
             std::to_string(r.n), rejects(r.p_value, c.alpha) ? "reject" : "retain"});
    }
  }
  {
    CsvWriter w(in_run(c, files::kRq3));
    w.row({"feature", "n", "auroc", "auroc_negated", "auroc_best", "rho", "p"});
    static const char* kNames[] = {"mean_entropy", "max_entropy", "mean_prob_diff", "min_prob_diff", "spike_count"};
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const auto& t : a.traces) {
      x.push_back(t.early.as_vector());
      y.push_back(t.outcome == OutcomeStatus::kPass ? 0 : 1);
    }
    for (std::size_t f = 0; f < 5; ++f) {
      std::vector<double> col, fail, pass;
      std::vector<double> yy(y.begin(), y.end());
      for (std::size_t i = 0; i < x.size(); ++i) {
        col.push_back(x[i][f]);
        (y[i] ? fail : pass).push_back(x[i][f]);
      }
      std::vector<std::string> row{kNames[f], std::to_string(col.size())};
      try {
        AurocReport r = auroc_both(fail, pass);
        row.insert(row.end(), {format_number(r.as_given), format_number(r.negated), format_number(r.best)});
      } catch (const Error&) {
        row.insert(row.end(), {"", "", ""});
      }
      try {
        Correlation corr = spearman_rho(col, yy);
        row.insert(row.end(), {format_number(corr.rho), format_number(corr.p_value)});
      } catch (const Error&) {
        row.insert(row.end(), {"", ""});
      }
      w.row(row);
    }
    std::vector<std::string> row{"logistic_cv", std::to_string(x.size())};
    try {
      LogisticOptions opt;
      opt.seed = derive_seed(c.seed, "logistic");
      LogisticAggregate agg = logistic_aggregate(x, y, opt);
      row.insert(row.end(), {format_number(agg.auroc_cv), "", "", "", ""});
    } catch (const Error& e) {
      log_line("stats", std::string("logistic aggregation skipped: ") + e.what());
      row.insert(row.end(), {"", "", "", "", ""});
    }
    w.row(row);
  }
}

void stage_report(const RunConfig& c) {
  fs::create_directories(c.run_dir);
  json m;
  m["schema_version"] = 1;
  m["tool"] = {{"name", "cotrobust"}, {"version", "0.1.0"}};
  m["run_kind"] = c.dry_run ? "dry-run" : (c.replay() ? "replay" : "live");
  m["seed"] = c.seed;
  m["config"] = config_snapshot(c);

  json datasets = json::array();
  for (const auto& p : c.datasets) {
    datasets.push_back({{"name", p.filename().string()}, {"sha256", sha256_file(p)}});
  }
  m["datasets"] = datasets;
  m["templates"] = {{"nocot_base", sha256_hex(data::kNocotBase)},
                    {"nocot_aware", sha256_hex(data::kNocotAware)},
                    {"cot_base", sha256_hex(data::kCotBase)},
                    {"cot_aware", sha256_hex(data::kCotAware)}};
  m["lexicon"] = {{"keyboard", sha256_hex(data::kKeyboardTsv)},
                  {"thesaurus", sha256_hex(data::kThesaurusTsv)},
                  {"inflections", sha256_hex(data::kInflectionsTsv)},
                  {"paraphrase", sha256_hex(data::kParaphraseTsv)}};

  json artifacts = json::object();
  json counts = json::object();
  for (const char* name : {files::kCorpus, files::kPerturbed, files::kPrompts, files::kMatrix, files::kTraces,
                           files::kOutcomes}) {
    fs::path p = in_run(c, name);
    if (!fs::exists(p)) continue;
    artifacts[name] = sha256_file(p);
    std::size_t lines = count_lines(p);
    counts[name] = std::string(name) == files::kMatrix && lines > 0 ? lines - 1 : lines;
  }
  m["artifacts"] = artifacts;
  if (fs::exists(in_run(c, files::kCorpus))) {
    std::vector<Task> tasks = load_corpus(in_run(c, files::kCorpus));
    counts["tasks"] = tasks.size();
    counts["trace_slots"] = matrix_size(tasks.size(), c.matrix);
    if (fs::exists(in_run(c, files::kOutcomes)) && fs::exists(in_run(c, files::kTraces))) {
      RunInputs in = load_inputs(c);
      AnalysisResult a = analyze_run(c, in.tasks, in.traces, in.outcomes);
      counts["deformation_pairs"] = a.pairs.size();
      counts["deformation_excluded"] = a.deformation_excluded;
      counts["alignment_excluded"] = a.alignment_excluded;
    }
  }
  m["counts"] = counts;

  json tables = json::object();
  for (const auto& name : table_files()) {
    fs::path p = c.run_dir / name;
    if (fs::exists(p)) tables[name] = sha256_file(p);
  }
  m["tables"] = tables;
  m["generated_at"] = c.replay() ? json(nullptr) : json(utc_now());

  std::string text = m.dump(2);
  text.push_back('\n');
  fs::path tmp = in_run(c, files::kManifest);
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
  }
  fs::rename(tmp, in_run(c, files::kManifest));
}

void run_pipeline(const RunConfig& c) {
  stage_perturb(c);
  if (!c.dry_run) {
    stage_generate(c);
    stage_execute(c);
    stage_analyze(c);
    stage_stats(c);
  }
  stage_report(c);
}

}  // namespace cotrobust
