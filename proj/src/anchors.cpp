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

#include "cotrobust/anchors.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cotrobust/error.hpp"

namespace cotrobust {

std::vector<std::string> AnchorConfig::default_stoplist() {
  return {
      // Python keywords and soft keywords
      "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
      "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
      "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
      "with", "yield", "match", "case",
      // Common English words
      "the", "to", "of", "an", "it", "be", "that", "this", "on", "by", "at", "we", "each", "then",
      "all", "are", "can", "but", "has", "have", "will", "use", "into", "there", "these", "which",
      "when", "where", "what", "was", "were", "should", "would", "first", "next", "one", "two",
      "new", "only", "how", "must", "may", "you", "your", "step", "end", "do", "no", "so", "they"};
}

namespace {

bool ident_char(char ch) {
  auto u = static_cast<unsigned char>(ch);
  return std::isalnum(u) || ch == '_';
}

bool ident_start(char ch) {
  auto u = static_cast<unsigned char>(ch);
  return std::isalpha(u) || ch == '_';
}

// Whole-word occurrences of any member of `words` in text[begin, end).
std::vector<WordOccurrence> word_occurrences(std::string_view text, std::size_t begin, std::size_t end,
                                             const std::set<std::string, std::less<>>& words) {
  std::vector<WordOccurrence> out;
  std::size_t i = begin;
  while (i < end) {
    if (!ident_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < end && ident_char(text[j])) ++j;
    // A run cut by the region end still continues in the full text.
    bool cut = j == end && j < text.size() && ident_char(text[j]);
    bool cut_front = i == begin && i > 0 && ident_char(text[i - 1]);
    std::string_view w = text.substr(i, j - i);
    if (!cut && !cut_front && words.count(w)) out.push_back({std::string(w), i});
    i = j;
  }
  return out;
}

}  // namespace

std::vector<WordOccurrence> identifier_occurrences(std::string_view text, std::size_t begin,
                                                   std::size_t end,
                                                   const std::vector<std::string>& stoplist) {
  std::set<std::string, std::less<>> stop(stoplist.begin(), stoplist.end());
  std::vector<WordOccurrence> out;
  end = std::min(end, text.size());
  std::size_t i = begin;
  while (i < end) {
    if (!ident_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < end && ident_char(text[j])) ++j;
    std::string_view w = text.substr(i, j - i);
    if (ident_start(w.front()) && w.size() >= 2 && !stop.count(w)) out.push_back({std::string(w), i});
    i = j;
  }
  return out;
}

std::optional<int> token_at(const GenerationTrace& trace, std::size_t pos) {
  if (pos >= trace.decoded_text.size() || trace.steps.empty()) return std::nullopt;
  auto it = std::upper_bound(trace.steps.begin(), trace.steps.end(), pos,
                             [](std::size_t p, const TokenStep& s) { return p < s.char_offset; });
  if (it == trace.steps.begin()) return std::nullopt;
  return static_cast<int>(std::prev(it) - trace.steps.begin());
}

TextRegions split_regions(std::string_view text) {
  TextRegions r;
  r.fence = text.find("```");
  if (r.fence == std::string_view::npos) return r;
  std::size_t nl = text.find('\n', r.fence);
  r.code_begin = nl == std::string_view::npos ? text.size() : nl + 1;
  std::size_t close = text.find("\n```", r.code_begin > 0 ? r.code_begin - 1 : 0);
  r.code_end = close == std::string_view::npos ? text.size() : close;
  if (r.code_end < r.code_begin) r.code_end = r.code_begin;
  return r;
}

std::optional<int> detect_a1(const GenerationTrace& trace) {
  TextRegions r = split_regions(trace.decoded_text);
  if (r.fence == std::string::npos) return std::nullopt;
  return token_at(trace, r.fence);
}

std::optional<int> detect_a2(const GenerationTrace& trace, std::optional<int> a1, int lambda,
                             const std::vector<std::string>& stoplist,
                             std::vector<std::string>* committed) {
  if (committed) committed->clear();
  if (!a1) return std::nullopt;
  if (lambda < 1) throw Error(ErrorKind::kUsage, "lambda must be at least 1");
  const std::string& text = trace.decoded_text;
  TextRegions r = split_regions(text);
  if (r.fence == std::string::npos) return std::nullopt;

  std::map<std::string, int> counts;
  for (const auto& occ : identifier_occurrences(text, r.code_begin, r.code_end, stoplist)) {
    ++counts[occ.word];
  }
  std::set<std::string, std::less<>> reused;
  for (const auto& [w, n] : counts) {
    if (n >= lambda) reused.insert(w);
  }
  if (reused.empty()) return std::nullopt;

  std::optional<int> best;
  std::set<std::string> mentioned;
  for (const auto& occ : word_occurrences(text, 0, r.fence, reused)) {
    auto tok = token_at(trace, occ.pos);
    if (!tok || *tok >= *a1) continue;
    mentioned.insert(occ.word);
    if (!best || *tok < *best) best = tok;
  }
  if (committed) committed->assign(mentioned.begin(), mentioned.end());
  return best;
}

std::optional<int> detect_a3(const GenerationTrace& trace, std::optional<int> a1,
                             const std::vector<std::string>& keywords) {
  if (!a1) return std::nullopt;
  const std::string& text = trace.decoded_text;
  TextRegions r = split_regions(text);
  if (r.fence == std::string::npos) return std::nullopt;
  std::set<std::string, std::less<>> kw(keywords.begin(), keywords.end());
  for (const auto& occ : word_occurrences(text, r.code_begin, r.code_end, kw)) {
    // The keyword's span may start inside the fence token; any later token
    // it reaches counts.
    for (std::size_t p = occ.pos; p < occ.pos + occ.word.size(); ++p) {
      auto tok = token_at(trace, p);
      if (tok && *tok > *a1) return tok;
    }
  }
  return std::nullopt;
}

AnchorSet detect_anchors(const GenerationTrace& trace, const AnchorConfig& config) {
  AnchorSet a;
  a.lambda = config.lambda;
  a.control_keywords = config.control_keywords;
  a.a1 = detect_a1(trace);
  a.a2 = detect_a2(trace, a.a1, config.lambda, config.stoplist, &a.committed_identifiers);
  a.a3 = detect_a3(trace, a.a1, config.control_keywords);
  return a;
}

double normalized_distance(int spike, int anchor, std::size_t length) {
  if (length == 0) throw Error(ErrorKind::kUsage, "trace length must be at least 1");
  return static_cast<double>(spike - anchor) / static_cast<double>(length);
}

SpikeAlignment align_spike(const SpikeEvent& spike, const AnchorSet& anchors, std::size_t length) {
  if (!anchors.any()) throw Error(ErrorKind::kAlignment, "trace has no anchors");
  SpikeAlignment out;
  out.spike = spike;
  const std::optional<int>* which[3] = {&anchors.a1, &anchors.a2, &anchors.a3};
  for (int k = 0; k < 3; ++k) {
    if (*which[k]) out.deltas[k] = normalized_distance(spike.position, **which[k], length);
  }
  return out;
}

}  // namespace cotrobust
