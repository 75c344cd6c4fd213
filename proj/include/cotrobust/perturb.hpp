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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cotrobust/corpus.hpp"

namespace cotrobust {

enum class Family { kC1, kC2, kC3, kW1, kW2, kW3, kS1 };

std::string_view to_string(Family f);
Family parse_family(std::string_view s);
InputCondition to_input_condition(Family f);
std::optional<Family> to_family(InputCondition c);
const std::vector<Family>& all_families();

struct PerturbationSpec {
  Family family = Family::kC1;
  std::uint64_t seed = 0;
  // Fraction of eligible words touched; at least one word is always chosen.
  double word_rate = 0.15;
};

using WordDiff = std::pair<std::string, std::string>;

struct PerturbResult {
  std::string text;
  std::vector<WordDiff> diff;
  bool offline_approximation = false;
};

// Bundled lexical resources. Each table is "key<TAB>value[,value...]" text.
class Lexicon {
 public:
  // Compiled-in copies of data/*.tsv.
  static const Lexicon& bundled();

  // Reads keyboard.tsv, thesaurus.tsv, inflections.tsv and paraphrase.tsv.
  // A missing file leaves that table empty; operators needing it then raise
  // a configuration error.
  static Lexicon from_directory(const std::filesystem::path& dir);

  static Lexicon from_text(std::string_view keyboard, std::string_view thesaurus,
                           std::string_view inflections, std::string_view paraphrase);

  const std::vector<char>* keyboard_neighbors(char lower) const;
  const std::vector<std::string>* synonyms(std::string_view lower_word) const;

  // Inflection forms are stored as [base, third-person, past, gerund].
  struct FormRef {
    std::size_t lemma;
    int slot;
  };
  std::optional<FormRef> inflection_of(std::string_view lower_word) const;
  const std::vector<std::string>& forms(std::size_t lemma) const { return forms_[lemma]; }
  const std::string& lemma(std::size_t index) const { return forms_[index][0]; }

  // Paraphrase rules, longest phrase first.
  const std::vector<std::pair<std::string, std::string>>& paraphrase_rules() const {
    return paraphrase_;
  }

  bool has_keyboard() const { return !keyboard_.empty(); }
  bool has_thesaurus() const { return !thesaurus_.empty(); }
  bool has_inflections() const { return !forms_.empty(); }
  bool has_paraphrase() const { return !paraphrase_.empty(); }

 private:
  std::unordered_map<char, std::vector<char>> keyboard_;
  std::unordered_map<std::string, std::vector<std::string>> thesaurus_;
  std::vector<std::vector<std::string>> forms_;
  std::unordered_map<std::string, FormRef> form_index_;
  std::vector<std::pair<std::string, std::string>> paraphrase_;
};

// Pivot translation service used by S1 when configured.
class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual std::string translate(std::string_view text, std::string_view source,
                                std::string_view target) = 0;
};

// LibreTranslate-style endpoint: POST {base}/translate with
// {"q","source","target","format":"text"} returning {"translatedText"}.
// Any failure raises TransportError; there is no offline fallback.
class HttpTranslationBackend : public TranslationBackend {
 public:
  explicit HttpTranslationBackend(std::string base_url, int timeout_s = 30);
  std::string translate(std::string_view text, std::string_view source,
                        std::string_view target) override;

 private:
  std::string base_url_;
  int timeout_s_;
};

struct PerturbContext {
  const Lexicon* lexicon = &Lexicon::bundled();
  // Words never touched (identifiers taken from the function signature).
  std::unordered_set<std::string> protected_words;
  TranslationBackend* backend = nullptr;
  std::string pivot_language = "de";
};

// Word tokens as seen by the operators: maximal runs of [A-Za-z0-9_'] and
// bytes >= 0x80, with '.' kept when it joins two such characters.
struct WordSpan {
  std::size_t begin;
  std::size_t end;
  bool alphabetic;   // ASCII letters only
  bool in_doctest;   // on a ">>>" / "..." example line
};
std::vector<WordSpan> word_spans(std::string_view text);
std::vector<std::string> word_tokens(std::string_view text);

// Identifier-like tokens of a signature, used as protected words.
std::unordered_set<std::string> signature_words(std::string_view signature);

PerturbResult case_flip(std::string_view text, const PerturbationSpec& spec,
                        const PerturbContext& ctx = {});
PerturbResult adjacent_swap(std::string_view text, const PerturbationSpec& spec,
                            const PerturbContext& ctx = {});
PerturbResult letter_replace(std::string_view text, const PerturbationSpec& spec,
                             const PerturbContext& ctx = {});
PerturbResult synonym_insert(std::string_view text, const PerturbationSpec& spec,
                             const PerturbContext& ctx = {});
PerturbResult synonym_substitute(std::string_view text, const PerturbationSpec& spec,
                                 const PerturbContext& ctx = {});
PerturbResult inflection_vary(std::string_view text, const PerturbationSpec& spec,
                              const PerturbContext& ctx = {});
PerturbResult back_translate(std::string_view text, const PerturbationSpec& spec,
                             const PerturbContext& ctx = {});

PerturbResult apply_family(std::string_view text, const PerturbationSpec& spec,
                           const PerturbContext& ctx = {});

// Single-word transforms behind C1/C2, exposed for direct checks.
std::string alternate_case(std::string_view word);
std::string swap_at(std::string_view word, std::size_t i);

struct PerturbedTask {
  Task base;
  PerturbationSpec spec;
  std::string docstring_perturbed;
  std::vector<WordDiff> diff_summary;
  bool offline_approximation = false;

  // The task as the model sees it: same signature and tests, new docstring.
  Task as_task() const;
};

// Applies the family operator to the docstring only; the signature's
// identifiers are protected words.
PerturbedTask perturb_task(const Task& task, const PerturbationSpec& spec,
                           const Lexicon& lexicon = Lexicon::bundled(),
                           TranslationBackend* backend = nullptr);

nlohmann::json to_json(const PerturbedTask& p);
PerturbedTask perturbed_task_from_json(const nlohmann::json& j);

// Per-(task, family) seed derived from a run seed.
std::uint64_t perturbation_seed(std::uint64_t run_seed, std::string_view task_id, Family f);

}  // namespace cotrobust
