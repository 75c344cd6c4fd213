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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cotrobust/corpus.hpp"
#include "cotrobust/modelclient.hpp"
#include "cotrobust/rng.hpp"
#include "cotrobust/sandbox.hpp"

namespace cotrobust {

// Deterministic stand-ins for model output, used to build replay fixtures
// and randomized test inputs. Nothing here talks to a model.

// Splits text into GPT-like pieces: a word or punctuation run with its
// leading spaces, or a single newline. Concatenation restores the text.
std::vector<std::string> split_tokens(std::string_view text);

// Steps for the given tokens. Positions in `spikes` get a flat distribution
// (high entropy); the rest are confident.
std::vector<RawStep> synthetic_steps(const std::vector<std::string>& tokens, const std::set<std::size_t>& spikes,
                                     Engine& rng);

// Trace for one matrix slot. CoT traces carry a "Pseudocode:" section that
// names identifiers reused in the code; perturbed conditions are sometimes
// longer, shorter or more spiky than the clean one.
GenerationTrace synthesize_trace(const Task& task, const ExperimentCondition& condition, std::uint64_t seed);

// Pass/fail record for a synthetic trace; failure is more likely under
// perturbation.
OutcomeRecord synthesize_outcome(const GenerationTrace& trace, std::uint64_t seed);

}  // namespace cotrobust
