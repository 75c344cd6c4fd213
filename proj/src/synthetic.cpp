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

#include "cotrobust/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "cotrobust/anchors.hpp"

namespace cotrobust {

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto word = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; };
  while (i < text.size()) {
    std::size_t start = i;
    if (text[i] == '\n') {
      out.emplace_back("\n");
      ++i;
      continue;
    }
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i < text.size() && text[i] != '\n') {
      if (word(text[i])) {
        while (i < text.size() && word(text[i])) ++i;
      } else {
        char first = text[i];
        std::size_t run = 0;
        while (i < text.size() && text[i] == first && run < 3) {
          ++i;
          ++run;
        }
      }
    }
    out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::vector<RawStep> synthetic_steps(const std::vector<std::string>& tokens, const std::set<std::size_t>& spikes,
                                     Engine& rng) {
  static const char* kFillers[] = {" the", " a", "_", "(", " value", ".", ",", " x", " if", " in"};
  std::vector<RawStep> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    RawStep s;
    s.token = tokens[t];
    std::vector<double> alt;
    double chosen;
    if (spikes.count(t)) {
      chosen = 0.22 + 0.1 * draw_unit(rng);
      alt = {0.2, 0.15, 0.12, 0.08};
    } else {
      chosen = 0.9 + 0.09 * draw_unit(rng);
      double rest = (1.0 - chosen) * 0.8;
      alt = {rest * 0.5, rest * 0.25, rest * 0.15, rest * 0.1};
    }
    s.logprob = std::log(chosen);
    std::size_t f = draw_index(rng, std::size(kFillers));
    for (double m : alt) {
      while (kFillers[f] == s.token) f = (f + 1) % std::size(kFillers);
      s.alternatives.emplace_back(kFillers[f], std::log(m));
      f = (f + 1) % std::size(kFillers);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<std::string> reused_identifiers(const std::string& code) {
  std::map<std::string, int> counts;
  std::vector<std::string> order;
  for (const auto& occ : identifier_occurrences(code, 0, code.size(), AnchorConfig::default_stoplist())) {
    if (counts[occ.word]++ == 0) order.push_back(occ.word);
  }
  std::vector<std::string> out;
  for (const auto& w : order) {
    if (counts[w] >= 2) out.push_back(w);
  }
  return out;
}

}  // namespace

GenerationTrace synthesize_trace(const Task& task, const ExperimentCondition& c, std::uint64_t seed) {
  Engine rng(derive_seed(seed, trace_key(task.task_id, c)));
  std::string code = task.canonical_program().value_or(task.signature + "    pass\n");
  while (!code.empty() && code.back() == '\n') code.pop_back();

  const bool perturbed = c.input_condition != InputCondition::kClean;
  // Deformation planted per slot: 0 none, 1 longer, 2 shorter, 3 branching.
  int shape = 0;
  if (perturbed) {
    double u = draw_unit(rng);
    shape = u < 0.3 ? 1 : u < 0.45 ? 2 : u < 0.65 ? 3 : 0;
  }

  std::string text;
  if (c.mode == Mode::kCoT) {
    std::vector<std::string> ids = reused_identifiers(code);
    auto id = [&](std::size_t i) { return ids.empty() ? std::string("result") : ids[i % ids.size()]; };
    std::vector<std::string> steps{
        "Read the arguments and prepare " + id(0) + " for the computation.",
        "Walk through the input once and keep " + id(1) + " up to date.",
        "Treat the empty input separately so " + id(2) + " stays valid.",
        "Combine the partial results into the final answer.",
        "Return the answer built from " + id(0) + "."};
    if (shape == 1) {
      steps.insert(steps.begin() + 2, {"Double check the description, it may mean something slightly different.",
                                       "Consider again whether " + id(1) + " needs a second pass.",
                                       "Verify the ordering requirement once more before continuing."});
    } else if (shape == 2) {
      steps.erase(steps.begin() + 1, steps.begin() + 3);
    }
    text = "Pseudocode:\n";
    for (std::size_t i = 0; i < steps.size(); ++i) text += std::to_string(i + 1) + ". " + steps[i] + "\n";
    text += "\n";
  }
  text += "```python\n" + code + "\n```";

  std::vector<std::string> tokens = split_tokens(text);
  std::size_t fence = 0;
  while (fence < tokens.size() && tokens[fence].find("```") == std::string::npos) ++fence;

  std::set<std::size_t> spikes;
  // One spike near the start of the code block, placed relative to the fence.
  std::size_t near = fence + 2 + draw_index(rng, 6);
  if (perturbed && draw_unit(rng) < 0.5 && fence > 4) near = fence - 1 - draw_index(rng, 4);
  if (near < tokens.size()) spikes.insert(near);
  if (shape == 3 && fence > 8) {
    for (int k = 0; k < 3; ++k) spikes.insert(3 + draw_index(rng, fence - 6));
  }
  return assemble_trace(task.task_id, c, synthetic_steps(tokens, spikes, rng), "stop");
}

OutcomeRecord synthesize_outcome(const GenerationTrace& trace, std::uint64_t seed) {
  Engine rng(derive_seed(seed, "outcome|" + trace.key()));
  double p_pass = trace.condition.input_condition == InputCondition::kClean ? 0.75 : 0.5;
  if (trace.condition.mode == Mode::kNoCoT) p_pass -= 0.05;
  OutcomeRecord r;
  r.task_id = trace.task_id;
  r.condition = trace.condition;
  r.status = draw_unit(rng) < p_pass ? OutcomeStatus::kPass : OutcomeStatus::kFail;
  r.duration_ms = 20 + static_cast<long long>(draw_index(rng, 200));
  r.detail = r.status == OutcomeStatus::kPass ? "" : "AssertionError";
  return r;
}

}  // namespace cotrobust
