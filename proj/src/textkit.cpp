#include "ifpref/textkit.hpp"

#include <cstdint>

namespace ifpref::textkit {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

CodePoint decode_at(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> char32_t {
    if (i + k >= s.size()) return 0;
    return static_cast<unsigned char>(s[i + k]) & 0x3F;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 >> 5) == 0x6 && i + 1 < s.size()) return {((b0 & 0x1FU) << 6) | cont(1), 2};
  if ((b0 >> 4) == 0xE && i + 2 < s.size()) return {((b0 & 0x0FU) << 12) | (cont(1) << 6) | cont(2), 3};
  if ((b0 >> 3) == 0x1E && i + 3 < s.size())
    return {((b0 & 0x07U) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3), 4};
  return {0xFFFD, 1};
}

std::size_t previous_start(std::string_view s, std::size_t end) {
  std::size_t i = end - 1;
  while (i > 0 && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) --i;
  return i;
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    return is_ascii_alnum(c);
  }
  if (cp >= 0xA0 && cp <= 0xBF) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation, curly quotes
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp == 0xFFFD) return false;
  return true;
}

bool attaches_to_previous(char32_t cp) {
  return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
         (cp >= 0x1DC0 && cp <= 0x1DFF) || (cp >= 0x20D0 && cp <= 0x20FF) ||
         (cp >= 0xFE20 && cp <= 0xFE2F) || (cp >= 0xFE00 && cp <= 0xFE0F) ||
         (cp >= 0x1F3FB && cp <= 0x1F3FF) || (cp >= 0xE0020 && cp <= 0xE007F);
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}
bool is_ascii_letter(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_alnum(char c) noexcept { return is_ascii_letter(c) || (c >= '0' && c <= '9'); }

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (start == i) break;
    std::size_t b = start;
    std::size_t e = i;
    while (b < e) {
      const auto cp = decode_at(text, b);
      if (is_word_char(cp.value)) break;
      b += cp.length;
    }
    while (e > b) {
      const std::size_t p = previous_start(text, e);
      if (is_word_char(decode_at(text, p).value)) break;
      e = p;
    }
    if (b < e) words.emplace_back(text.substr(b, e - b));
  }
  return words;
}

std::vector<Span> split_sentences(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t start = i;
    std::size_t end = n;
    for (std::size_t j = i; j < n; ++j) {
      if (is_terminal(text[j]) && (j + 1 == n || is_space(text[j + 1]))) {
        end = j + 1;
        break;
      }
    }
    std::size_t trimmed = end;
    while (trimmed > start && is_space(text[trimmed - 1])) --trimmed;
    spans.push_back({start, trimmed});
    i = end;
  }
  return spans;
}

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  out.raw = std::string(text);
  out.words = split_words(text);
  out.sentences = split_sentences(text);
  return out;
}

std::size_t word_length(std::string_view token) {
  std::size_t count = 0;
  bool join_next = false;
  for (std::size_t i = 0; i < token.size();) {
    const auto cp = decode_at(token, i);
    i += cp.length;
    if (cp.value == 0x200D) {
      join_next = true;
      continue;
    }
    if (join_next || (count > 0 && attaches_to_previous(cp.value))) {
      join_next = false;
      continue;
    }
    ++count;
  }
  return count;
}

std::size_t count_char(std::string_view text, char ch) {
  std::size_t n = 0;
  for (char c : text) n += (c == ch);
  return n;
}

std::size_t count_any(std::string_view text, std::string_view chars) {
  std::size_t n = 0;
  for (char c : text) n += (chars.find(c) != std::string_view::npos);
  return n;
}

std::vector<std::string> find_markup_spans(std::string_view text, std::string_view open_tag,
                                           std::string_view close_tag) {
  std::vector<std::string> spans;
  if (open_tag.empty() || close_tag.empty()) return spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find(open_tag, pos);
    if (open == std::string_view::npos) break;
    const std::size_t inner = open + open_tag.size();
    const std::size_t close = text.find(close_tag, inner);
    if (close == std::string_view::npos) break;
    spans.emplace_back(text.substr(inner, close - inner));
    pos = close + close_tag.size();
  }
  return spans;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = i + 1;
    }
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending = true;
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

}  // namespace ifpref::textkit
