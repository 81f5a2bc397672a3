#include "ifpref/verify.hpp"

#include <algorithm>
#include <set>

#include "ifpref/error.hpp"
#include "ifpref/textkit.hpp"

namespace ifpref {
namespace {

using textkit::Span;

struct Check {
  bool ok;
  std::string detail;
};

std::string count_detail(std::size_t value, std::string_view what, Relation r, std::int64_t target) {
  return std::to_string(value) + " " + std::string(what) + ", need " + std::string(relation_name(r)) + " " +
         std::to_string(target);
}

std::vector<std::string_view> sentence_views(std::string_view text) {
  std::vector<std::string_view> out;
  for (const Span& s : textkit::split_sentences(text)) out.push_back(s.view(text));
  return out;
}

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool starts_with_quote(std::string_view s) { return s.starts_with('"') || s.starts_with("\xE2\x80\x9C"); }
bool ends_with_quote(std::string_view s) { return s.ends_with('"') || s.ends_with("\xE2\x80\x9D"); }

// Positions of case-insensitive whole-word occurrences of `needle`.
std::vector<std::size_t> whole_word_positions(const std::string& lowered_text, const std::string& lowered_needle) {
  std::vector<std::size_t> out;
  if (lowered_needle.empty()) return out;
  std::size_t pos = 0;
  while ((pos = lowered_text.find(lowered_needle, pos)) != std::string::npos) {
    const std::size_t end = pos + lowered_needle.size();
    const bool left_ok = pos == 0 || !textkit::is_ascii_alnum(lowered_text[pos - 1]);
    const bool right_ok = end == lowered_text.size() || !textkit::is_ascii_alnum(lowered_text[end]);
    if (left_ok && right_ok) out.push_back(pos);
    ++pos;
  }
  return out;
}

std::size_t count_non_overlapping(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

Check check_alliteration(std::string_view text, const ConstraintSpec& spec) {
  const auto need = spec.integer("num_alliteration_words");
  std::int64_t best = 0, run = 0;
  char prev = 0;
  for (const auto& w : textkit::split_words(text)) {
    const char c = textkit::is_ascii_letter(w.front()) ? static_cast<char>(w.front() | 0x20) : 0;
    if (c != 0 && c == prev)
      ++run;
    else
      run = c != 0 ? 1 : 0;
    prev = c;
    best = std::max(best, run);
  }
  return {best >= need, "longest same-letter run " + std::to_string(best) + ", need " + std::to_string(need)};
}

Check check_ascending(std::string_view text) {
  std::size_t prev = 0;
  bool first = true;
  std::size_t index = 0;
  for (auto s : sentence_views(text)) {
    ++index;
    const auto n = textkit::split_words(s).size();
    if (!first && n <= prev)
      return {false, "sentence " + std::to_string(index) + " has " + std::to_string(n) + " words after " +
                         std::to_string(prev)};
    first = false;
    prev = n;
  }
  return {true, "word counts strictly increase"};
}

Check check_edit_response(std::string_view text, const ConstraintSpec& spec) {
  const auto& sep = spec.text("separator");
  const auto n = count_non_overlapping(text, sep);
  if (n != 1) return {false, std::to_string(n) + " separators, need exactly 1"};
  const auto pos = text.find(sep);
  const bool ok = !textkit::trim(text.substr(0, pos)).empty() && !textkit::trim(text.substr(pos + sep.size())).empty();
  return {ok, ok ? "two non-empty parts" : "a part is empty"};
}

Check check_end_quotation(std::string_view text) {
  auto sentences = sentence_views(text);
  if (sentences.empty()) return {false, "no sentences"};
  const auto last = textkit::trim(sentences.back());
  const bool ok = last.size() >= 2 && starts_with_quote(last) && ends_with_quote(last);
  return {ok, ok ? "last sentence is quoted" : "last sentence is not wrapped in quotes"};
}

Check check_first_letter_capital(std::string_view text) {
  for (const auto& w : textkit::split_words(text))
    if (is_lower(w.front())) return {false, "word '" + w + "' starts lowercase"};
  return {true, "every word starts uppercase"};
}

Check check_frequency_long_words(std::string_view text, const ConstraintSpec& spec) {
  const auto len = static_cast<std::size_t>(spec.integer("word_length"));
  std::size_t n = 0;
  for (const auto& w : textkit::split_words(text)) n += textkit::word_length(w) >= len;
  const auto r = spec.relation();
  const auto target = spec.integer("num_words");
  return {relation_holds(r, static_cast<std::int64_t>(n), target),
          count_detail(n, "words of " + std::to_string(len) + "+ characters", r, target)};
}

Check check_keywords_ordered(std::string_view text, const ConstraintSpec& spec) {
  const auto lowered = textkit::to_lower_ascii(text);
  const auto& keywords = spec.strings("keywords");
  std::vector<std::vector<std::size_t>> positions;
  for (const auto& kw : keywords) {
    positions.push_back(whole_word_positions(lowered, textkit::to_lower_ascii(kw)));
    if (positions.back().empty()) return {false, "keyword '" + kw + "' missing"};
  }
  for (std::size_t i = 1; i < keywords.size(); ++i) {
    const auto first_prev = positions[i - 1].front();
    if (positions[i].front() <= first_prev)
      return {false, "'" + keywords[i] + "' occurs before '" + keywords[i - 1] + "'"};
    for (auto p : positions[i])
      if (p < first_prev) return {false, "'" + keywords[i] + "' occurs before '" + keywords[i - 1] + "'"};
  }
  return {true, "keywords in order"};
}

Check check_max_word_length(std::string_view text, const ConstraintSpec& spec) {
  const auto limit = static_cast<std::size_t>(spec.integer("max_word_length"));
  for (const auto& w : textkit::split_words(text))
    if (textkit::word_length(w) > limit)
      return {false, "word '" + w + "' has " + std::to_string(textkit::word_length(w)) + " characters"};
  return {true, "all words within " + std::to_string(limit) + " characters"};
}

Check check_no_period(std::string_view text) {
  const auto n = textkit::count_char(text, '.');
  return {n == 0, std::to_string(n) + " periods"};
}

Check check_nth_sentence_capital(std::string_view text, const ConstraintSpec& spec) {
  const auto nth = static_cast<std::size_t>(spec.integer("nth_sentence"));
  auto sentences = sentence_views(text);
  if (sentences.size() < nth) return {false, "only " + std::to_string(sentences.size()) + " sentences"};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto s = sentences[i];
    const bool has_lower = std::any_of(s.begin(), s.end(), is_lower);
    if (i + 1 == nth) {
      const bool has_upper = std::any_of(s.begin(), s.end(), is_upper);
      if (has_lower || !has_upper) return {false, "sentence " + std::to_string(nth) + " is not all capitals"};
    } else if (!has_lower) {
      return {false, "sentence " + std::to_string(i + 1) + " is also all capitals"};
    }
  }
  return {true, "only sentence " + std::to_string(nth) + " is capitalized"};
}

Check check_nth_sentence_first_word(std::string_view text, const ConstraintSpec& spec) {
  const auto nth = static_cast<std::size_t>(spec.integer("nth_sentence"));
  auto sentences = sentence_views(text);
  if (sentences.size() < nth) return {false, "only " + std::to_string(sentences.size()) + " sentences"};
  auto words = textkit::split_words(sentences[nth - 1]);
  const auto& want = spec.text("first_word");
  if (words.empty()) return {false, "sentence " + std::to_string(nth) + " has no words"};
  const bool ok = textkit::to_lower_ascii(words.front()) == textkit::to_lower_ascii(want);
  return {ok, "sentence " + std::to_string(nth) + " starts with '" + words.front() + "'"};
}

Check check_num_words_per_sentence(std::string_view text, const ConstraintSpec& spec) {
  const auto r = spec.relation();
  const auto target = spec.integer("num_words");
  auto sentences = sentence_views(text);
  if (sentences.empty()) return {false, "no sentences"};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto n = textkit::split_words(sentences[i]).size();
    if (!relation_holds(r, static_cast<std::int64_t>(n), target))
      return {false, "sentence " + std::to_string(i + 1) + ": " + count_detail(n, "words", r, target)};
  }
  return {true, "every sentence has " + std::string(relation_name(r)) + " " + std::to_string(target) + " words"};
}

Check check_markup_words(std::string_view text, std::string_view open, std::string_view close, std::int64_t target,
                         std::string_view what) {
  auto spans = textkit::find_markup_spans(text, open, close);
  for (const auto& s : spans) {
    const auto inner = std::string_view(s);
    const bool single = textkit::split_words(inner).size() == 1 &&
                        std::none_of(inner.begin(), inner.end(), textkit::is_space);
    if (!single) return {false, std::string(what) + " span '" + s + "' is not a single word"};
  }
  const auto n = static_cast<std::int64_t>(spans.size());
  return {n == target, count_detail(spans.size(), std::string(what) + " words", Relation::kExactly, target)};
}

Check check_exclamations(std::string_view text, const ConstraintSpec& spec) {
  const auto n = textkit::count_char(text, '!');
  const auto r = spec.relation();
  const auto target = spec.integer("num_exclamations");
  return {relation_holds(r, static_cast<std::int64_t>(n), target), count_detail(n, "exclamation marks", r, target)};
}

Check check_parentheses(std::string_view text, const ConstraintSpec& spec) {
  const auto n = textkit::count_any(text, "()");
  const auto target = spec.integer("num_parentheses");
  return {static_cast<std::int64_t>(n) == target, count_detail(n, "parentheses", Relation::kExactly, target)};
}

// Leading integer of `s`, or -1.
std::int64_t leading_number(std::string_view s, std::size_t* consumed) {
  std::size_t i = 0;
  std::int64_t v = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9' && i < 9) v = v * 10 + (s[i++] - '0');
  *consumed = i;
  return i == 0 ? -1 : v;
}

Check check_number_parts(std::string_view text, const ConstraintSpec& spec) {
  const std::string marker = spec.text("part_splitter") + " ";
  const auto want = spec.integer("num_parts");
  std::vector<std::int64_t> seen;
  for (auto line : textkit::split_lines(text)) {
    auto t = textkit::trim(line);
    if (!t.starts_with(marker)) continue;
    std::size_t used = 0;
    auto n = leading_number(t.substr(marker.size()), &used);
    if (n < 0) continue;
    if (marker.size() + used < t.size() && t[marker.size() + used] >= '0' && t[marker.size() + used] <= '9') continue;
    seen.push_back(n);
  }
  std::set<std::int64_t> distinct(seen.begin(), seen.end());
  std::set<std::int64_t> expected;
  for (std::int64_t i = 1; i <= want; ++i) expected.insert(i);
  const bool ok = static_cast<std::int64_t>(seen.size()) == want && distinct == expected;
  return {ok, std::to_string(seen.size()) + " part markers, need " + std::to_string(want)};
}

Check check_numbered_headers(std::string_view text, const ConstraintSpec& spec) {
  const auto want = spec.integer("num_headers");
  std::vector<std::int64_t> seen;
  for (auto line : textkit::split_lines(text)) {
    auto t = textkit::trim(line);
    std::size_t used = 0;
    auto n = leading_number(t, &used);
    if (n < 0 || used + 1 >= t.size() || t[used] != '.' || !textkit::is_space(t[used + 1])) continue;
    seen.push_back(n);
  }
  bool ok = static_cast<std::int64_t>(seen.size()) == want;
  for (std::size_t i = 0; ok && i < seen.size(); ++i) ok = seen[i] == static_cast<std::int64_t>(i + 1);
  return {ok, std::to_string(seen.size()) + " numbered headers, need " + std::to_string(want) + " in order"};
}

Check check_required_sentence(std::string_view text, const ConstraintSpec& spec) {
  const bool ok =
      textkit::collapse_whitespace(text).find(textkit::collapse_whitespace(spec.text("sentence"))) != std::string::npos;
  return {ok, ok ? "required sentence present" : "required sentence missing"};
}

Check check_start(std::string_view text, const ConstraintSpec& spec) {
  const bool ok =
      textkit::collapse_whitespace(text).starts_with(textkit::collapse_whitespace(spec.text("first_sentence")));
  return {ok, ok ? "starts with the given sentence" : "does not start with the given sentence"};
}

bool has_summary_text(std::string_view rest) {
  for (char c : rest)
    if (!textkit::is_space(c) && c != ':' && c != '-' && c != '*') return true;
  return false;
}

Check check_tldr(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : textkit::split_lines(text))
    if (!textkit::trim(line).empty()) lines.push_back(textkit::trim(line));
  if (lines.empty()) return {false, "empty response"};
  constexpr std::string_view tag = "TL;DR";
  const auto last = lines.back();
  if (auto pos = last.rfind(tag); pos != std::string_view::npos) {
    const bool ok = has_summary_text(last.substr(pos + tag.size()));
    return {ok, ok ? "final line has a TL;DR summary" : "TL;DR has no summary"};
  }
  if (lines.size() >= 2) {
    const auto prev = lines[lines.size() - 2];
    if (auto pos = prev.rfind(tag); pos != std::string_view::npos && !has_summary_text(prev.substr(pos + tag.size())))
      return {true, "TL;DR line followed by summary"};
  }
  return {false, "final line has no TL;DR"};
}

Check check_placeholders(std::string_view text, const ConstraintSpec& spec) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && text[j] != '}' && text[j] != '{') ++j;
    if (j < text.size() && text[j] == '}') {
      if (!textkit::trim(text.substr(i + 1, j - i - 1)).empty()) ++n;
      i = j;
    }
  }
  const auto r = spec.relation();
  const auto target = spec.integer("num_placeholders");
  return {relation_holds(r, static_cast<std::int64_t>(n), target), count_detail(n, "placeholders", r, target)};
}

Check check_vowels(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) n += (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u');
  return {n == 0, std::to_string(n) + " lowercase vowels"};
}

Check dispatch(std::string_view text, const ConstraintSpec& spec) {
  using K = ConstraintKind;
  switch (spec.kind) {
    case K::kAlliteration: return check_alliteration(text, spec);
    case K::kAscendingNumWords: return check_ascending(text);
    case K::kEditResponse: return check_edit_response(text, spec);
    case K::kEndQuotation: return check_end_quotation(text);
    case K::kFirstLetterCapital: return check_first_letter_capital(text);
    case K::kFrequencyLongWords: return check_frequency_long_words(text, spec);
    case K::kKeywordsOrdered: return check_keywords_ordered(text, spec);
    case K::kMaxWordLength: return check_max_word_length(text, spec);
    case K::kNoPeriod: return check_no_period(text);
    case K::kNthSentenceCapital: return check_nth_sentence_capital(text, spec);
    case K::kNthSentenceFirstWord: return check_nth_sentence_first_word(text, spec);
    case K::kNumWordsPerSentence: return check_num_words_per_sentence(text, spec);
    case K::kNumberBoldWords: return check_markup_words(text, "<b>", "</b>", spec.integer("num_words"), "bold");
    case K::kNumberExclamations: return check_exclamations(text, spec);
    case K::kNumberItalicWords: return check_markup_words(text, "_", "_", spec.integer("num_words"), "italic");
    case K::kNumberParentheses: return check_parentheses(text, spec);
    case K::kNumberParts: return check_number_parts(text, spec);
    case K::kNumberedHeaders: return check_numbered_headers(text, spec);
    case K::kRequiredSentence: return check_required_sentence(text, spec);
    case K::kStartChecker: return check_start(text, spec);
    case K::kTldrSummary: return check_tldr(text);
    case K::kVariablePlaceholderFormat: return check_placeholders(text, spec);
    case K::kVowelCapitalization: return check_vowels(text);
  }
  throw Error(ErrorCode::kUnknownConstraint, "unregistered constraint kind");
}

}  // namespace

Verdict verify_constraint(std::string_view response, const ConstraintSpec& spec) {
  if (static_cast<std::size_t>(spec.kind) >= kNumConstraintKinds)
    throw Error(ErrorCode::kUnknownConstraint, "unregistered constraint kind");
  auto [ok, detail] = dispatch(response, spec);
  return {spec, ok, std::move(detail)};
}

ScoredResponse aggregate_score(std::string_view response, std::span<const ConstraintSpec> specs) {
  if (specs.empty()) throw Error(ErrorCode::kEmptyConstraintSet, "cannot score against an empty constraint set");
  ScoredResponse out;
  out.text = std::string(response);
  out.verdicts.reserve(specs.size());
  for (const auto& spec : specs) {
    out.verdicts.push_back(verify_constraint(response, spec));
    out.correct_count += out.verdicts.back().satisfied;
  }
  out.score = Rational(out.correct_count, static_cast<std::int64_t>(specs.size()));
  return out;
}

HardSoft hard_soft_metrics(std::span<const Rational> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "hard/soft metrics need at least one response");
  std::int64_t perfect = 0;
  Rational sum;
  for (const auto& s : scores) {
    perfect += s == Rational(1, 1);
    sum = sum + s;
  }
  const auto n = static_cast<std::int64_t>(scores.size());
  return {Rational(perfect, n), sum / n};
}

HardSoft hard_soft_metrics(std::span<const ScoredResponse> scored) {
  std::vector<Rational> scores;
  scores.reserve(scored.size());
  for (const auto& s : scored) scores.push_back(s.score);
  return hard_soft_metrics(scores);
}

nlohmann::json to_json(const Verdict& v) {
  auto j = to_json(v.constraint);
  j["satisfied"] = v.satisfied;
  j["detail"] = v.detail;
  return j;
}

nlohmann::json to_json(const ScoredResponse& s) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : s.verdicts) verdicts.push_back(to_json(v));
  return {{"text", s.text},
          {"verdicts", verdicts},
          {"correct_count", s.correct_count},
          {"score", s.score.to_double()},
          {"score_exact", std::to_string(s.score.num()) + "/" + std::to_string(s.score.den())}};
}

}  // namespace ifpref
