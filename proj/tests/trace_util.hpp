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

#include <cmath>
#include <string>
#include <vector>

#include "cotrobust/modelclient.hpp"

namespace testutil {

// Trace over the given tokens. Each step's distribution is {chosen: p, "<alt>": rest}.
inline cotrobust::GenerationTrace make_trace(const std::vector<std::string>& tokens, double p = 0.9,
                                             std::string task_id = "T/1") {
  std::vector<cotrobust::RawStep> raw;
  for (const auto& t : tokens) raw.push_back({t, std::log(p), {{"<alt>", std::log(1.0 - p)}}});
  return cotrobust::assemble_trace(std::move(task_id), {}, std::move(raw), "stop");
}

// Trace whose step t has exactly the given probability masses (first = chosen).
inline cotrobust::GenerationTrace trace_with_masses(const std::vector<std::vector<double>>& masses) {
  std::vector<cotrobust::RawStep> raw;
  for (std::size_t t = 0; t < masses.size(); ++t) {
    cotrobust::RawStep s{"w" + std::to_string(t), std::log(masses[t][0]), {}};
    for (std::size_t i = 1; i < masses[t].size(); ++i) {
      s.alternatives.emplace_back("a" + std::to_string(i), std::log(masses[t][i]));
    }
    raw.push_back(std::move(s));
  }
  return cotrobust::assemble_trace("T/1", {}, std::move(raw), "stop");
}

}  // namespace testutil
