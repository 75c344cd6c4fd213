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

#include <optional>
#include <ostream>
#include <string>
#include <vector>

// Hand-built traces with their anchor positions worked out by counting tokens.
namespace fixtures {

struct AnchorCase {
  const char* name;
  std::vector<std::string> tokens;
  int lambda;
  std::optional<int> a1, a2, a3;
};

// Keeps parameterized test names readable.
inline void PrintTo(const AnchorCase& c, std::ostream* os) { *os << c.name; }

inline const std::vector<AnchorCase>& anchor_cases() {
  static const std::vector<AnchorCase> cases{
      {"cot_basic",
       {"Pseudocode", ":", "\n", "1", ".", " Use", " pq", " as", " heap", "\n", "```", "python", "\n", "def", " f",
        "(", "pq", "):", "\n", "   ", " pq", ".", "pop", "()", "\n", "```"},
       2, 10, 6, 13},
      {"pq_mentioned_at_seven",
       {"Pseudocode", ":", "\n", "1", ".", " Push", " to", " pq", " first", "\n", "```python", "\n", "pq", " =",
        " []", "\n", "pq", ".", "append", "(", "1", ")", "\n", "print", "(", "pq", ")", "\n", "```"},
       2, 10, 7, std::nullopt},
      {"nocot_code_only",
       {"```", "python", "\n", "def", " add", "(", "a", ",", " b", "):", "\n", "    ", "return", " a", " +", " b", "\n",
        "```"},
       2, 0, std::nullopt, 3},
      {"fenceless",
       {"def", " f", "():", "\n", "    ", "return", " 1"}, 2, std::nullopt, std::nullopt, std::nullopt},
      {"keyword_inside_identifier",
       {"```", "python", "\n", "information", " =", " 1", "\n", "format", "(", "information", ")", "\n", "```"},
       2, 0, std::nullopt, std::nullopt},
      {"keyword_joined_by_underscore",
       {"```", "\n", "for_each", "(", "x", ")", "\n", "```"}, 2, 0, std::nullopt, std::nullopt},
      {"keyword_after_lookalike",
       {"```", "\n", "iffy", " =", " 2", "\n", "if", " iffy", ":", "\n", "  ", "pass", "\n", "```"},
       2, 0, std::nullopt, 6},
      {"lambda_two",
       {"Pseudocode", ":", " keep", " total", " and", " acc", "\n", "```", "python", "\n", "acc", " =", " total",
        "\n", "return", " acc", "\n", "```"},
       2, 7, 5, 14},
      {"lambda_one",
       {"Pseudocode", ":", " keep", " total", " and", " acc", "\n", "```", "python", "\n", "acc", " =", " total",
        "\n", "return", " acc", "\n", "```"},
       1, 7, 3, 14},
      {"two_fences",
       {"```", "\n", "if", " ok", ":", " pass", "\n", "```", "\n", "```", "\n", "for", " i", " in", " r", ":",
        " pass", "\n", "```"},
       2, 0, std::nullopt, 2},
      {"keyword_in_reasoning_ignored",
       {"Pseudocode", ":", " for", " each", " item", "\n", "```", "\n", "items", " = []", "\n", "while", " items",
        ":", " items", ".", "pop", "()", "\n", "```"},
       2, 6, std::nullopt, 11},
      {"mention_split_across_tokens",
       {"Compute", " res", "ult", "\n", "```", "\n", "result", " = 0", "\n", "return", " result", "\n", "```"},
       2, 4, 1, 9},
      {"fence_token_with_newline",
       {"Plan", " data", "\n```", "python", "\n", "data", " = 1", "\n", "return", " data", "\n", "```"},
       2, 2, 1, 8},
      {"unclosed_fence",
       {"Sketch", " val", "\n", "```", "\n", "val", " = 2", "\n", "val", " += 1"}, 2, 3, 1, std::nullopt},
      {"stopword_not_committed",
       {"Take", " the", " list", "\n", "```", "\n", "the", " = 1", "\n", "the", " += 1", "\n", "```"},
       2, 4, std::nullopt, std::nullopt},
      {"python_keyword_not_committed",
       {"Pseudocode", ":", " return", " value", "\n", "```", "\n", "def", " g", "(", "value", "):", "\n", "    ",
        "return", " value", "\n", "```"},
       2, 5, 3, 7},
      {"keyword_glued_to_punctuation",
       {"```", "\n", "(lambda", " y", ":", " y", ")", "\n", "```"}, 2, 0, std::nullopt, 2},
      {"reasoning_without_fence",
       {"Pseudocode", ":", " def", " helper"}, 2, std::nullopt, std::nullopt, std::nullopt},
      {"identifier_with_digit",
       {"Let", " x1", " hold", " the", " sum", "\n", "```", "\n", "x1", " = 0", "\n", "for", " v", " in", " data",
        ":", " x1", " += v", "\n", "```"},
       2, 6, 1, 11},
      // Ten 3-char and two 4-char tokens put token 12 at chars 38-42, fence at 40.
      {"fence_at_char_forty",
       {"abc", "abc", "abc", "abc", "abc", "abc", "abc", "abc", "abc", "abc", "abcd", "abcd", "  ```", "python",
        "\n", "x", " = 1", "\n", "```"},
       2, 12, std::nullopt, std::nullopt},
  };
  return cases;
}

}  // namespace fixtures
