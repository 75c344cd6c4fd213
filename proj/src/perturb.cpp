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

#include "cotrobust/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bundled_data.hpp"
#include "cotrobust/error.hpp"
#include "cotrobust/rng.hpp"
#include "httplib.h"

namespace cotrobust {

using nlohmann::json;

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kC1: return "C1";
    case Family::kC2: return "C2";
    case Family::kC3: return "C3";
    case Family::kW1: return "W1";
    case Family::kW2: return "W2";
    case Family::kW3: return "W3";
    case Family::kS1: return "S1";
  }
  return "?";
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> kAll = {Family::kC1, Family::kC2, Family::kC3, Family::kW1,
                                           Family::kW2, Family::kW3, Family::kS1};
  return kAll;
}

Family parse_family(std::string_view s) {
  for (auto f : all_families()) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorKind::kUsage, "unknown perturbation family '" + std::string(s) + "'");
}

InputCondition to_input_condition(Family f) {
  return static_cast<InputCondition>(static_cast<int>(f) + 1);
}

std::optional<Family> to_family(InputCondition c) {
  if (c == InputCondition::kClean) return std::nullopt;
  return static_cast<Family>(static_cast<int>(c) - 1);
}

std::uint64_t perturbation_seed(std::uint64_t run_seed, std::string_view task_id, Family f) {
  std::string label(task_id);
  label += '#';
  label += to_string(f);
  return derive_seed(run_seed, label);
}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

bool is_upper(char ch) { return std::isupper(static_cast<unsigned char>(ch)) != 0; }
bool is_alpha(char ch) { return std::isalpha(static_cast<unsigned char>(ch)) != 0; }
bool is_alnum(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) != 0; }

bool is_word_char(char ch) {
  return is_alnum(ch) || ch == '_' || ch == '\'' || static_cast<unsigned char>(ch) >= 0x80;
}

struct TsvLine {
  std::string key;
  std::vector<std::string> values;
};

std::vector<TsvLine> parse_tsv(std::string_view text) {
  std::vector<TsvLine> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::kConfig, "lexicon line without tab: '" + std::string(line) + "'");
    }
    TsvLine entry{std::string(line.substr(0, tab)), {}};
    std::string_view rest = line.substr(tab + 1);
    std::size_t p = 0;
    while (p <= rest.size()) {
      std::size_t comma = rest.find(',', p);
      if (comma == std::string_view::npos) comma = rest.size();
      if (comma > p) entry.values.emplace_back(rest.substr(p, comma - p));
      p = comma + 1;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::string read_optional_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Lexicon Lexicon::from_text(std::string_view keyboard, std::string_view thesaurus,
                           std::string_view inflections, std::string_view paraphrase) {
  Lexicon lex;
  for (auto& e : parse_tsv(keyboard)) {
    if (e.key.size() != 1) throw Error(ErrorKind::kConfig, "keyboard key must be one letter");
    auto& dst = lex.keyboard_[static_cast<char>(std::tolower(e.key[0]))];
    for (auto& v : e.values) {
      if (v.size() != 1) throw Error(ErrorKind::kConfig, "keyboard value must be one letter");
      dst.push_back(static_cast<char>(std::tolower(v[0])));
    }
  }
  for (auto& e : parse_tsv(thesaurus)) {
    auto& dst = lex.thesaurus_[lower(e.key)];
    for (auto& v : e.values) dst.push_back(v);
  }
  for (auto& e : parse_tsv(inflections)) {
    if (e.values.size() != 3) {
      throw Error(ErrorKind::kConfig, "inflection entry '" + e.key + "' needs three forms");
    }
    std::vector<std::string> forms{lower(e.key)};
    for (auto& v : e.values) forms.push_back(lower(v));
    std::size_t id = lex.forms_.size();
    for (int slot = 0; slot < 4; ++slot) {
      lex.form_index_.try_emplace(forms[slot], FormRef{id, slot});
    }
    lex.forms_.push_back(std::move(forms));
  }
  for (auto& e : parse_tsv(paraphrase)) {
    if (e.values.empty()) continue;
    // Replacements may themselves contain commas only via the first value.
    lex.paraphrase_.emplace_back(lower(e.key), e.values.front());
  }
  std::stable_sort(lex.paraphrase_.begin(), lex.paraphrase_.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  return lex;
}

const Lexicon& Lexicon::bundled() {
  static const Lexicon kBundled =
      from_text(data::kKeyboardTsv, data::kThesaurusTsv, data::kInflectionsTsv,
                data::kParaphraseTsv);
  return kBundled;
}

Lexicon Lexicon::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kConfig, "lexicon directory not found: " + dir.string());
  }
  return from_text(read_optional_file(dir / "keyboard.tsv"),
                   read_optional_file(dir / "thesaurus.tsv"),
                   read_optional_file(dir / "inflections.tsv"),
                   read_optional_file(dir / "paraphrase.tsv"));
}

const std::vector<char>* Lexicon::keyboard_neighbors(char lower_ch) const {
  auto it = keyboard_.find(lower_ch);
  return it == keyboard_.end() || it->second.empty() ? nullptr : &it->second;
}

const std::vector<std::string>* Lexicon::synonyms(std::string_view lower_word) const {
  auto it = thesaurus_.find(std::string(lower_word));
  return it == thesaurus_.end() || it->second.empty() ? nullptr : &it->second;
}

std::optional<Lexicon::FormRef> Lexicon::inflection_of(std::string_view lower_word) const {
  auto it = form_index_.find(std::string(lower_word));
  if (it == form_index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Tokenization

std::vector<WordSpan> word_spans(std::string_view text) {
  std::vector<WordSpan> spans;
  std::size_t line_start = 0;
  bool doctest_line = false;
  auto classify_line = [&](std::size_t from) {
    std::size_t p = from;
    while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    std::string_view rest = text.substr(p);
    doctest_line = rest.starts_with(">>>") || rest.starts_with("...");
  };
  classify_line(0);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '\n') {
      line_start = i + 1;
      classify_line(line_start);
      ++i;
      continue;
    }
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < text.size()) {
      if (is_word_char(text[i])) {
        ++i;
      } else if (text[i] == '.' && i + 1 < text.size() && is_alnum(text[i + 1]) && i > b) {
        ++i;
      } else {
        break;
      }
    }
    bool alpha = std::all_of(text.begin() + b, text.begin() + i, is_alpha);
    spans.push_back({b, i, alpha, doctest_line});
  }
  return spans;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : word_spans(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

std::unordered_set<std::string> signature_words(std::string_view signature) {
  std::unordered_set<std::string> out;
  std::size_t i = 0;
  while (i < signature.size()) {
    if (is_alpha(signature[i]) || signature[i] == '_') {
      std::size_t b = i;
      while (i < signature.size() && (is_alnum(signature[i]) || signature[i] == '_')) ++i;
      out.emplace(signature.substr(b, i - b));
    } else {
      ++i;
    }
  }
  return out;
}

std::string alternate_case(std::string_view word) {
  auto render = [&](bool lower_first) {
    std::string out(word);
    bool want_lower = lower_first;
    for (auto& ch : out) {
      if (!is_alpha(ch)) continue;
      ch = static_cast<char>(want_lower ? std::tolower(static_cast<unsigned char>(ch))
                                        : std::toupper(static_cast<unsigned char>(ch)));
      want_lower = !want_lower;
    }
    return out;
  };
  std::string out = render(true);
  if (out == word) out = render(false);
  return out;
}

std::string swap_at(std::string_view word, std::size_t i) {
  std::string out(word);
  if (i + 1 < out.size()) std::swap(out[i], out[i + 1]);
  return out;
}

namespace {

std::string match_case(std::string_view source, std::string_view replacement) {
  bool has_alpha = false;
  bool all_upper = true;
  for (char ch : source) {
    if (!is_alpha(ch)) continue;
    has_alpha = true;
    if (!is_upper(ch)) all_upper = false;
  }
  if (has_alpha && all_upper && source.size() > 1) return upper(replacement);
  std::string out(replacement);
  if (!source.empty() && is_upper(source.front()) && !out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

// One rewrite of a word span; `replacement` may be longer (W1 insertion).
struct Edit {
  std::size_t begin;
  std::size_t end;
  std::string replacement;
};

std::string apply_edits(std::string_view text, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.begin < b.begin; });
  std::string out;
  out.reserve(text.size() + 16 * edits.size());
  std::size_t pos = 0;
  for (const auto& e : edits) {
    out.append(text.substr(pos, e.begin - pos));
    out.append(e.replacement);
    pos = e.end;
  }
  out.append(text.substr(pos));
  return out;
}

void check_family(const PerturbationSpec& spec, Family expected) {
  if (spec.family != expected) {
    throw Error(ErrorKind::kUsage, "operator for " + std::string(to_string(expected)) +
                                       " called with family " + std::string(to_string(spec.family)));
  }
  if (!(spec.word_rate > 0.0 && spec.word_rate <= 1.0)) {
    throw Error(ErrorKind::kUsage, "word_rate must lie in (0, 1]");
  }
}

// Seeded choice of max(1, round(rate * n)) distinct indices in [0, n), sorted.
std::vector<std::size_t> choose_words(std::size_t n, double rate, Engine& rng) {
  if (n == 0) return {};
  auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + draw_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Engine engine_for(const PerturbationSpec& spec) {
  return Engine(derive_seed(spec.seed, to_string(spec.family)));
}

bool base_eligible(std::string_view text, const WordSpan& s, const PerturbContext& ctx) {
  if (!s.alphabetic || s.in_doctest || s.end - s.begin < 3) return false;
  return !ctx.protected_words.contains(std::string(text.substr(s.begin, s.end - s.begin)));
}

// Shared skeleton for word-local operators: filter eligible spans, choose a
// seeded subset, rewrite each chosen word.
template <typename Eligible, typename Rewrite>
PerturbResult word_operator(std::string_view text, const PerturbationSpec& spec,
                            const PerturbContext& ctx, Eligible eligible, Rewrite rewrite) {
  std::vector<WordSpan> candidates;
  for (const auto& s : word_spans(text)) {
    if (base_eligible(text, s, ctx) && eligible(text.substr(s.begin, s.end - s.begin))) {
      candidates.push_back(s);
    }
  }
  Engine rng = engine_for(spec);
  PerturbResult result;
  std::vector<Edit> edits;
  for (std::size_t i : choose_words(candidates.size(), spec.word_rate, rng)) {
    const auto& s = candidates[i];
    std::string word(text.substr(s.begin, s.end - s.begin));
    std::string replaced = rewrite(word, rng);
    if (replaced == word) continue;
    result.diff.emplace_back(word, replaced);
    edits.push_back({s.begin, s.end, std::move(replaced)});
  }
  result.text = apply_edits(text, std::move(edits));
  return result;
}

std::vector<std::size_t> swap_positions(std::string_view word) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < word.size(); ++i) {
    if (word[i] != word[i + 1]) out.push_back(i);
  }
  return out;
}

// W3 shift: base -> s, s -> ed, ed -> ing, ing -> s; skips forms identical to
// the current one (irregular verbs such as read/read).
std::optional<int> inflection_target(const Lexicon& lex, std::string_view lower_word) {
  auto ref = lex.inflection_of(lower_word);
  if (!ref) return std::nullopt;
  static constexpr int kNext[4] = {1, 2, 3, 1};
  const auto& forms = lex.forms(ref->lemma);
  int slot = kNext[ref->slot];
  for (int tries = 0; tries < 4; ++tries) {
    if (forms[slot] != lower_word) return slot;
    slot = slot == 3 ? 0 : slot + 1;
  }
  return std::nullopt;
}

}  // namespace

PerturbResult case_flip(std::string_view text, const PerturbationSpec& spec,
                        const PerturbContext& ctx) {
  check_family(spec, Family::kC1);
  return word_operator(
      text, spec, ctx, [](std::string_view) { return true; },
      [](const std::string& w, Engine&) { return alternate_case(w); });
}

PerturbResult adjacent_swap(std::string_view text, const PerturbationSpec& spec,
                            const PerturbContext& ctx) {
  check_family(spec, Family::kC2);
  return word_operator(
      text, spec, ctx, [](std::string_view w) { return !swap_positions(w).empty(); },
      [](const std::string& w, Engine& rng) {
        auto pos = swap_positions(w);
        return swap_at(w, pos[draw_index(rng, pos.size())]);
      });
}

PerturbResult letter_replace(std::string_view text, const PerturbationSpec& spec,
                             const PerturbContext& ctx) {
  check_family(spec, Family::kC3);
  const Lexicon& lex = *ctx.lexicon;
  if (!lex.has_keyboard()) throw Error(ErrorKind::kConfig, "C3 requires a substitution table");
  auto mappable = [&lex](std::string_view w) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (lex.keyboard_neighbors(static_cast<char>(std::tolower(static_cast<unsigned char>(w[i]))))) {
        out.push_back(i);
      }
    }
    return out;
  };
  return word_operator(
      text, spec, ctx, [&](std::string_view w) { return !mappable(w).empty(); },
      [&](const std::string& w, Engine& rng) {
        auto pos = mappable(w);
        std::size_t i = pos[draw_index(rng, pos.size())];
        char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(w[i])));
        const auto& nb = *lex.keyboard_neighbors(lc);
        char repl = nb[draw_index(rng, nb.size())];
        std::string out = w;
        out[i] = is_upper(w[i]) ? static_cast<char>(std::toupper(static_cast<unsigned char>(repl))) : repl;
        return out;
      });
}

PerturbResult synonym_insert(std::string_view text, const PerturbationSpec& spec,
                             const PerturbContext& ctx) {
  check_family(spec, Family::kW1);
  const Lexicon& lex = *ctx.lexicon;
  if (!lex.has_thesaurus()) throw Error(ErrorKind::kConfig, "W1 requires a thesaurus");
  return word_operator(
      text, spec, ctx, [&](std::string_view w) { return lex.synonyms(lower(w)) != nullptr; },
      [&](const std::string& w, Engine& rng) {
        const auto& syns = *lex.synonyms(lower(w));
        std::string syn = syns[draw_index(rng, syns.size())];
        bool shout = w.size() > 1 && std::all_of(w.begin(), w.end(), is_upper);
        return w + (shout ? " AND " + upper(syn) : " and " + syn);
      });
}

PerturbResult synonym_substitute(std::string_view text, const PerturbationSpec& spec,
                                 const PerturbContext& ctx) {
  check_family(spec, Family::kW2);
  const Lexicon& lex = *ctx.lexicon;
  if (!lex.has_thesaurus()) throw Error(ErrorKind::kConfig, "W2 requires a thesaurus");
  return word_operator(
      text, spec, ctx, [&](std::string_view w) { return lex.synonyms(lower(w)) != nullptr; },
      [&](const std::string& w, Engine& rng) {
        const auto& syns = *lex.synonyms(lower(w));
        return match_case(w, syns[draw_index(rng, syns.size())]);
      });
}

PerturbResult inflection_vary(std::string_view text, const PerturbationSpec& spec,
                              const PerturbContext& ctx) {
  check_family(spec, Family::kW3);
  const Lexicon& lex = *ctx.lexicon;
  if (!lex.has_inflections()) throw Error(ErrorKind::kConfig, "W3 requires an inflection table");
  return word_operator(
      text, spec, ctx,
      [&](std::string_view w) { return inflection_target(lex, lower(w)).has_value(); },
      [&](const std::string& w, Engine&) {
        std::string lw = lower(w);
        auto ref = lex.inflection_of(lw);
        int slot = *inflection_target(lex, lw);
        return match_case(w, lex.forms(ref->lemma)[slot]);
      });
}

namespace {

bool boundary_before(std::string_view line, std::size_t pos) {
  return pos == 0 || !is_word_char(line[pos - 1]);
}

bool boundary_after(std::string_view line, std::size_t end) {
  return end >= line.size() || !is_word_char(line[end]);
}

bool iequals_at(std::string_view line, std::size_t pos, std::string_view lower_phrase) {
  if (pos + lower_phrase.size() > line.size()) return false;
  for (std::size_t k = 0; k < lower_phrase.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(line[pos + k])) != lower_phrase[k]) return false;
  }
  return true;
}

std::string paraphrase_line(std::string_view line, const PerturbContext& ctx,
                            std::vector<WordDiff>& diff) {
  const auto& rules = ctx.lexicon->paraphrase_rules();
  std::string out;
  std::size_t i = 0;
  while (i < line.size()) {
    bool applied = false;
    if (boundary_before(line, i) && is_word_char(line[i])) {
      for (const auto& [phrase, repl] : rules) {
        if (!iequals_at(line, i, phrase) || !boundary_after(line, i + phrase.size())) continue;
        std::string_view original = line.substr(i, phrase.size());
        if (ctx.protected_words.contains(std::string(original))) continue;
        std::string replaced = match_case(original, repl);
        diff.emplace_back(std::string(original), replaced);
        out += replaced;
        i += phrase.size();
        applied = true;
        break;
      }
    }
    if (!applied) {
      // Copy the rest of the current word unchanged.
      if (is_word_char(line[i])) {
        std::size_t j = i;
        while (j < line.size() && is_word_char(line[j])) ++j;
        out.append(line.substr(i, j - i));
        i = j;
      } else {
        out.push_back(line[i++]);
      }
    }
  }
  return out;
}

// "If <cond>, <main>." -> "<Main> if <cond>." for each qualifying sentence.
std::string reorder_clauses(std::string_view line, std::vector<WordDiff>& diff) {
  std::string out;
  std::size_t start = 0;
  while (start < line.size()) {
    std::size_t term = line.find_first_of(".!?", start);
    while (term != std::string_view::npos && term + 1 < line.size() && line[term + 1] != ' ') {
      term = line.find_first_of(".!?", term + 1);
    }
    std::size_t stop = term == std::string_view::npos ? line.size() : term + 1;
    std::string_view sentence = line.substr(start, stop - start);
    std::size_t lead = sentence.find_first_not_of(' ');
    std::string rewritten(sentence);
    if (lead != std::string_view::npos && term != std::string_view::npos) {
      std::string_view body = sentence.substr(lead, sentence.size() - lead - 1);
      if (body.starts_with("If ")) {
        std::size_t comma = body.find(", ");
        if (comma != std::string_view::npos && comma > 3) {
          std::string_view cond = body.substr(3, comma - 3);
          std::string_view main = body.substr(comma + 2);
          if (!main.empty() && main.find(',') == std::string_view::npos &&
              cond.find(',') == std::string_view::npos) {
            std::string m(main);
            m[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(m[0])));
            std::string r = std::string(sentence.substr(0, lead)) + m + " if " + std::string(cond) +
                            sentence.back();
            diff.emplace_back(std::string(sentence.substr(lead)), r.substr(lead));
            rewritten = std::move(r);
          }
        }
      }
    }
    out += rewritten;
    start = stop;
  }
  return out;
}

}  // namespace

PerturbResult back_translate(std::string_view text, const PerturbationSpec& spec,
                             const PerturbContext& ctx) {
  check_family(spec, Family::kS1);
  PerturbResult result;
  if (text.empty()) return result;
  if (ctx.backend) {
    std::string pivot = ctx.backend->translate(text, "en", ctx.pivot_language);
    result.text = ctx.backend->translate(pivot, ctx.pivot_language, "en");
    if (result.text != text) result.diff.emplace_back(std::string(text), result.text);
    return result;
  }
  if (!ctx.lexicon->has_paraphrase()) {
    throw Error(ErrorKind::kConfig, "S1 offline mode requires paraphrase rules");
  }
  result.offline_approximation = true;
  std::vector<WordDiff> diff;
  std::size_t start = 0;
  bool first_line = true;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    std::size_t p = line.find_first_not_of(" \t");
    bool doctest = p != std::string_view::npos &&
                   (line.substr(p).starts_with(">>>") || line.substr(p).starts_with("..."));
    if (!first_line) result.text.push_back('\n');
    first_line = false;
    if (doctest) {
      result.text.append(line);
    } else {
      result.text += reorder_clauses(paraphrase_line(line, ctx, diff), diff);
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!diff.empty()) {
    result.diff.emplace_back("[offline-paraphrase]", "[offline-paraphrase]");
    result.diff.insert(result.diff.end(), diff.begin(), diff.end());
  }
  return result;
}

PerturbResult apply_family(std::string_view text, const PerturbationSpec& spec,
                           const PerturbContext& ctx) {
  switch (spec.family) {
    case Family::kC1: return case_flip(text, spec, ctx);
    case Family::kC2: return adjacent_swap(text, spec, ctx);
    case Family::kC3: return letter_replace(text, spec, ctx);
    case Family::kW1: return synonym_insert(text, spec, ctx);
    case Family::kW2: return synonym_substitute(text, spec, ctx);
    case Family::kW3: return inflection_vary(text, spec, ctx);
    case Family::kS1: return back_translate(text, spec, ctx);
  }
  throw Error(ErrorKind::kUsage, "unknown perturbation family");
}

Task PerturbedTask::as_task() const {
  Task t = base;
  t.docstring = docstring_perturbed;
  return t;
}

PerturbedTask perturb_task(const Task& task, const PerturbationSpec& spec,
                           const Lexicon& lexicon, TranslationBackend* backend) {
  PerturbContext ctx;
  ctx.lexicon = &lexicon;
  ctx.protected_words = signature_words(task.signature);
  ctx.backend = backend;
  PerturbResult r = apply_family(task.docstring, spec, ctx);
  return PerturbedTask{task, spec, std::move(r.text), std::move(r.diff), r.offline_approximation};
}

json to_json(const PerturbedTask& p) {
  json diff = json::array();
  for (const auto& [a, b] : p.diff_summary) diff.push_back(json::array({a, b}));
  return json{{"task_id", p.base.task_id},
              {"family", to_string(p.spec.family)},
              {"seed", p.spec.seed},
              {"word_rate", p.spec.word_rate},
              {"original_docstring", p.base.docstring},
              {"docstring_perturbed", p.docstring_perturbed},
              {"diff_summary", diff},
              {"offline_approximation", p.offline_approximation},
              {"task", to_json(p.as_task())}};
}

PerturbedTask perturbed_task_from_json(const json& j) {
  PerturbedTask p;
  p.base = task_from_json(j.at("task"));
  p.base.docstring = j.at("original_docstring").get<std::string>();
  p.spec.family = parse_family(j.at("family").get<std::string>());
  p.spec.seed = j.at("seed").get<std::uint64_t>();
  p.spec.word_rate = j.at("word_rate").get<double>();
  p.docstring_perturbed = j.at("docstring_perturbed").get<std::string>();
  for (const auto& pair : j.at("diff_summary")) {
    p.diff_summary.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  }
  p.offline_approximation = j.at("offline_approximation").get<bool>();
  return p;
}

// ---------------------------------------------------------------------------
// HTTP translation backend

HttpTranslationBackend::HttpTranslationBackend(std::string base_url, int timeout_s)
    : base_url_(std::move(base_url)), timeout_s_(timeout_s) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string HttpTranslationBackend::translate(std::string_view text, std::string_view source,
                                              std::string_view target) {
  std::size_t scheme = base_url_.find("://");
  std::size_t path_at = base_url_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string origin = path_at == std::string::npos ? base_url_ : base_url_.substr(0, path_at);
  std::string prefix = path_at == std::string::npos ? "" : base_url_.substr(path_at);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_s_);
  client.set_read_timeout(timeout_s_);
  json body{{"q", text}, {"source", source}, {"target", target}, {"format", "text"}};
  auto res = client.Post(prefix + "/translate", body.dump(), "application/json");
  if (!res) {
    throw TransportError(1, "translation backend unreachable at " + base_url_ + ": " +
                                httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError(1, "translation backend returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body).at("translatedText").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(1, std::string("malformed translation reply: ") + e.what());
  }
}

}  // namespace cotrobust
