#pragma once

// Text-analysis primitives shared by the constraint verifiers.
//
// A word is a whitespace-delimited run with leading and trailing
// non-alphanumeric characters stripped; runs that become empty are dropped.
// A sentence ends at '.', '!' or '?' followed by whitespace or end of text;
// trailing text without terminal punctuation forms a final sentence. There is
// no abbreviation handling, so "Dr. Smith" is two sentences.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ifpref::textkit {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const noexcept { return end - begin; }
  std::string_view view(std::string_view raw) const { return raw.substr(begin, end - begin); }
  friend bool operator==(const Span&, const Span&) = default;
};

struct TokenizedText {
  std::string raw;
  std::vector<std::string> words;
  std::vector<Span> sentences;
};

TokenizedText tokenize(std::string_view text);

std::vector<std::string> split_words(std::string_view text);
std::vector<Span> split_sentences(std::string_view text);

// Characters in a normalized token, counted as extended grapheme clusters
// (approximated: combining marks, variation selectors, emoji modifiers and
// ZWJ sequences attach to the preceding character).
std::size_t word_length(std::string_view token);

std::size_t count_char(std::string_view text, char ch);
// Occurrences of any byte in `chars`, e.g. "()" for the parenthesis class.
std::size_t count_any(std::string_view text, std::string_view chars);

// Non-overlapping, left-to-right, non-greedy inner contents between tags.
std::vector<std::string> find_markup_spans(std::string_view text, std::string_view open_tag,
                                           std::string_view close_tag);

// Helpers used by several verifiers.
std::vector<std::string_view> split_lines(std::string_view text);
std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool is_space(char c) noexcept;
bool is_ascii_letter(char c) noexcept;
bool is_ascii_alnum(char c) noexcept;

}  // namespace ifpref::textkit
