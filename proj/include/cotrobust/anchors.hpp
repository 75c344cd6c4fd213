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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotrobust/modelclient.hpp"
#include "cotrobust/uncertainty.hpp"

namespace cotrobust {

struct AnchorConfig {
  int lambda = 2;
  std::vector<std::string> control_keywords{"def", "for",    "while", "if",   "elif",  "else",
                                            "return", "try", "except", "with", "class", "lambda"};
  // Language keywords plus common English words; never treated as identifiers.
  std::vector<std::string> stoplist = default_stoplist();

  static std::vector<std::string> default_stoplist();
};

struct AnchorSet {
  std::optional<int> a1;
  std::optional<int> a2;
  std::optional<int> a3;
  int lambda = 2;
  std::vector<std::string> committed_identifiers;  // sorted
  std::vector<std::string> control_keywords;

  bool any() const { return a1 || a2 || a3; }
};

// Index of the token whose character span contains pos, or nullopt when pos
// lies past the decoded text.
std::optional<int> token_at(const GenerationTrace& trace, std::size_t pos);

// Character ranges of the reasoning segment and the code region (body of the
// first fence, excluding the opener line and the closing fence).
struct TextRegions {
  std::size_t fence = std::string::npos;
  std::size_t code_begin = 0;
  std::size_t code_end = 0;
};
TextRegions split_regions(std::string_view text);

std::optional<int> detect_a1(const GenerationTrace& trace);
// Also reports the committed identifier set through `committed` when given.
std::optional<int> detect_a2(const GenerationTrace& trace, std::optional<int> a1, int lambda,
                             const std::vector<std::string>& stoplist = AnchorConfig::default_stoplist(),
                             std::vector<std::string>* committed = nullptr);
std::optional<int> detect_a3(const GenerationTrace& trace, std::optional<int> a1,
                             const std::vector<std::string>& keywords = AnchorConfig{}.control_keywords);

AnchorSet detect_anchors(const GenerationTrace& trace, const AnchorConfig& config = {});

// Identifier occurrences: maximal [A-Za-z0-9_] runs that start with a letter or
// underscore, have length >= 2 and are not on the stoplist.
struct WordOccurrence {
  std::string word;
  std::size_t pos;
};
std::vector<WordOccurrence> identifier_occurrences(std::string_view text, std::size_t begin,
                                                   std::size_t end,
                                                   const std::vector<std::string>& stoplist);

struct SpikeAlignment {
  SpikeEvent spike;
  // Index 0..2 for A1..A3; absent where the anchor is absent.
  std::array<std::optional<double>, 3> deltas;
};

double normalized_distance(int spike, int anchor, std::size_t length);

// Throws Error(kAlignment) when no anchor is present.
SpikeAlignment align_spike(const SpikeEvent& spike, const AnchorSet& anchors, std::size_t length);

}  // namespace cotrobust
