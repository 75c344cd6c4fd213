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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cotrobust/corpus.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/perturb.hpp"

namespace cotrobust {

// The four prompt templates, each with "{signature}" and "{docstring}"
// placeholders.
struct PromptTemplates {
  std::string nocot_base;
  std::string nocot_aware;
  std::string cot_base;
  std::string cot_aware;

  static const PromptTemplates& bundled();
  // Reads nocot_base.txt, nocot_aware.txt, cot_base.txt, cot_aware.txt.
  static PromptTemplates from_directory(const std::filesystem::path& dir);

  const std::string& select(Mode mode, bool aware) const;
};

struct PromptBundle {
  std::string text;
  Mode mode = Mode::kCoT;
  bool aware = false;
  std::string task_id;
};

PromptBundle build_prompt(const Task& task, Mode mode, bool aware,
                          const PromptTemplates& templates = PromptTemplates::bundled());
PromptBundle build_prompt(const PerturbedTask& task, Mode mode, bool aware,
                          const PromptTemplates& templates = PromptTemplates::bundled());

struct ParsedOutput {
  std::optional<std::string> reasoning_text;
  std::string code_text;
  bool fence_found = false;
  bool pseudocode_found = false;
  // Info string after the opening fence ("python"), empty when absent.
  std::string fence_info;
  // Byte offset of the opening fence (or fallback definition line).
  std::size_t code_offset = 0;
};

// Neither a fence nor a function-definition line was found. Recorded as an
// execution outcome downstream.
class ParseFailure : public Error {
 public:
  explicit ParseFailure(const std::string& message) : Error(ErrorKind::kParse, message) {}
};

// Splits a completion into reasoning and code. Code is the body of the first
// fenced block; without a fence, the region from the first `def` line to the
// end. Reasoning (CoT only) is everything before, right-trimmed.
ParsedOutput parse_output(std::string_view raw, Mode mode);

// Inverse of fence extraction: "```<info>\n<code>\n```".
std::string wrap_in_fence(std::string_view code, std::string_view info = "python");

}  // namespace cotrobust
