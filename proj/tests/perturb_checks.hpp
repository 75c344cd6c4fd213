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

// Family-specific conservation laws, phrased directly on the text so they do
// not depend on how the operators pick words.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cotrobust/perturb.hpp"
#include "cotrobust/prompting.hpp"

namespace checks {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Letter/digit runs, ignoring punctuation that may sit next to a word.
inline std::vector<std::string> alnum_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool is_subsequence(const std::vector<std::string>& small, const std::vector<std::string>& big) {
  std::size_t i = 0;
  for (const auto& w : big) {
    if (i < small.size() && w == small[i]) ++i;
  }
  return i == small.size();
}

// Word -> lemma, read straight from the inflection table file.
inline std::map<std::string, std::string> lemma_table(const std::string& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    std::string base = line.substr(0, tab);
    out[base] = base;
    std::stringstream forms(line.substr(tab + 1));
    for (std::string f; std::getline(forms, f, ',');) out[f] = base;
  }
  return out;
}

// Empty when the output respects the family's conservation law.
inline std::string conservation_violation(cotrobust::Family f, const std::string& before, const std::string& after,
                                          const std::vector<cotrobust::WordDiff>& diff,
                                          const std::map<std::string, std::string>& lemmas) {
  using cotrobust::Family;
  auto wb = split_ws(before), wa = split_ws(after);
  switch (f) {
    case Family::kC1:
      if (lower(before) != lower(after)) return "C1 changed more than letter case";
      break;
    case Family::kC2:
      if (wb.size() != wa.size()) return "C2 changed the word count";
      for (std::size_t i = 0; i < wb.size(); ++i) {
        std::string x = wb[i], y = wa[i];
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        if (x != y) return "C2 changed the characters of '" + wb[i] + "'";
      }
      break;
    case Family::kC3:
      if (wb.size() != wa.size()) return "C3 changed the word count";
      for (std::size_t i = 0; i < wb.size(); ++i) {
        if (wb[i].size() != wa[i].size()) return "C3 changed the length of '" + wb[i] + "'";
      }
      break;
    case Family::kW1:
      if (!is_subsequence(alnum_words(before), alnum_words(after))) return "W1 output does not contain the input as a subsequence";
      break;
    case Family::kW2:
      if (wb.size() != wa.size()) return "W2 changed the word count";
      break;
    case Family::kW3:
      if (wb.size() != wa.size()) return "W3 changed the word count";
      for (const auto& [from, to] : diff) {
        auto a = lemmas.find(lower(from)), b = lemmas.find(lower(to));
        if (a == lemmas.end() || b == lemmas.end() || a->second != b->second) {
          return "W3 changed the stem of '" + from + "' -> '" + to + "'";
        }
      }
      break;
    case Family::kS1:
      break;
  }
  return "";
}

}  // namespace checks
