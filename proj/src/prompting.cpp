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

#include "cotrobust/prompting.hpp"

#include <fstream>
#include <sstream>

#include "bundled_data.hpp"

namespace cotrobust {

const PromptTemplates& PromptTemplates::bundled() {
  static const PromptTemplates kBundled{std::string(data::kNocotBase), std::string(data::kNocotAware),
                                        std::string(data::kCotBase), std::string(data::kCotAware)};
  return kBundled;
}

namespace {

std::string read_template(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "missing prompt template " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (text.find("{signature}") == std::string::npos || text.find("{docstring}") == std::string::npos) {
    throw Error(ErrorKind::kConfig, p.string() + " lacks {signature}/{docstring} placeholders");
  }
  return text;
}

// Single left-to-right pass; inserted text is never rescanned.
std::string instantiate(std::string_view tmpl, std::string_view signature, std::string_view docstring) {
  static constexpr std::string_view kSig = "{signature}";
  static constexpr std::string_view kDoc = "{docstring}";
  std::string out;
  out.reserve(tmpl.size() + signature.size() + docstring.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.substr(i).starts_with(kSig)) {
      out += signature;
      i += kSig.size();
    } else if (tmpl.substr(i).starts_with(kDoc)) {
      out += docstring;
      i += kDoc.size();
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::string rtrim(std::string_view s) {
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return e == std::string_view::npos ? std::string() : std::string(s.substr(0, e + 1));
}

bool has_pseudocode_line(std::string_view text) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    std::size_t p = line.find_first_not_of(" \t");
    if (p != std::string_view::npos && line.substr(p).starts_with("Pseudocode:")) return true;
    if (end == text.size()) break;
    start = end + 1;
  }
  return false;
}

std::size_t first_def_line(std::string_view text) {
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    std::size_t p = line.find_first_not_of(" \t");
    if (p != std::string_view::npos) {
      std::string_view rest = line.substr(p);
      if (rest.starts_with("async ")) rest = rest.substr(rest.find_first_not_of(' ', 6));
      if (rest.starts_with("def ")) return start;
    }
    start = end + 1;
  }
  return std::string_view::npos;
}

}  // namespace

PromptTemplates PromptTemplates::from_directory(const std::filesystem::path& dir) {
  return PromptTemplates{read_template(dir / "nocot_base.txt"), read_template(dir / "nocot_aware.txt"),
                         read_template(dir / "cot_base.txt"), read_template(dir / "cot_aware.txt")};
}

const std::string& PromptTemplates::select(Mode mode, bool aware) const {
  if (mode == Mode::kCoT) return aware ? cot_aware : cot_base;
  return aware ? nocot_aware : nocot_base;
}

PromptBundle build_prompt(const Task& task, Mode mode, bool aware, const PromptTemplates& templates) {
  return PromptBundle{instantiate(templates.select(mode, aware), task.signature, task.docstring), mode,
                      aware, task.task_id};
}

PromptBundle build_prompt(const PerturbedTask& task, Mode mode, bool aware,
                          const PromptTemplates& templates) {
  return PromptBundle{
      instantiate(templates.select(mode, aware), task.base.signature, task.docstring_perturbed), mode,
      aware, task.base.task_id};
}

ParsedOutput parse_output(std::string_view raw, Mode mode) {
  ParsedOutput out;
  std::size_t fence = raw.find("```");
  if (fence != std::string_view::npos) {
    std::size_t nl = raw.find('\n', fence);
    if (nl == std::string_view::npos) throw ParseFailure("code fence without a body");
    std::string_view info = raw.substr(fence + 3, nl - fence - 3);
    std::size_t info_end = info.find_last_not_of(" \t\r");
    out.fence_info = info_end == std::string_view::npos ? "" : std::string(info.substr(0, info_end + 1));
    std::size_t body = nl + 1;
    std::size_t close = raw.find("\n```", nl);
    std::string_view code;
    if (close == std::string_view::npos) {
      code = raw.substr(body);
      std::size_t e = code.find_last_not_of("\r\n");
      code = e == std::string_view::npos ? std::string_view() : code.substr(0, e + 1);
    } else {
      code = close >= body ? raw.substr(body, close - body) : std::string_view();
    }
    if (code.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      throw ParseFailure("empty code block");
    }
    out.code_text = std::string(code);
    out.fence_found = true;
    out.code_offset = fence;
  } else {
    std::size_t def = first_def_line(raw);
    if (def == std::string_view::npos) throw ParseFailure("no code fence and no function definition");
    out.code_text = std::string(raw.substr(def));
    out.code_offset = def;
  }
  std::string_view before = raw.substr(0, out.code_offset);
  out.pseudocode_found = has_pseudocode_line(before);
  if (mode == Mode::kCoT) {
    std::string reasoning = rtrim(before);
    if (!reasoning.empty()) out.reasoning_text = std::move(reasoning);
  }
  return out;
}

std::string wrap_in_fence(std::string_view code, std::string_view info) {
  std::string out = "```";
  out += info;
  out += '\n';
  out += code;
  out += "\n```";
  return out;
}

}  // namespace cotrobust
