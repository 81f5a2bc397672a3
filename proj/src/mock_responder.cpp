#include "mock_responder.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"
#include "mock_vocab.hpp"

namespace ifpref::mock {
namespace {

using K = ConstraintKind;

// A response is a list of slots; each slot renders one sentence line plus
// optional marker lines. Every constraint is decided at exactly one slot, so
// a continuation only needs to know which slot comes next.
struct Slot {
  int words = 8;
  int header = 0;  // "n. " prefix
  int part = 0;    // "<splitter> n" line
  bool separator = false;
  bool start = false;
  bool required = false;
  bool tldr = false;
  bool quoted = false;
  bool nth_capital = false;
  bool nth_first = false;
  bool alliteration = false;
  bool keywords = false;
  bool max_violation = false;
  int long_words = 0;
  int bold = 0;
  int italic = 0;
  int placeholders = 0;
  int parens = 0;
  int exclamations = 0;
  std::vector<K> sites;

  int newlines() const { return 1 + (separator ? 1 : 0) + (part > 0 ? 1 : 0); }
  bool has_site(K k) const { return std::find(sites.begin(), sites.end(), k) != sites.end(); }
};

struct Plan {
  std::vector<Slot> slots;
  std::array<const ConstraintSpec*, kNumConstraintKinds> by_kind{};
  char letter = 's';
  int long_lo = 8;
  int long_hi = 11;

  const ConstraintSpec* get(K k) const { return by_kind[static_cast<std::size_t>(k)]; }
  bool has(K k) const { return get(k) != nullptr; }
};

struct Token {
  std::string pre;
  std::string core;
  std::string post;
  bool literal = false;
  bool filler = false;
  bool keyword = false;
};

template <typename T, std::size_t N>
std::string_view pick(Rng& rng, const T (&items)[N]) {
  return items[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(N) - 1))];
}

std::size_t word_count(std::string_view s) { return textkit::split_words(s).size(); }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c | 0x20) : c; }
char upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c & ~0x20) : c; }
bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

int count_delta(const ConstraintSpec& spec) {
  return spec.relation() == Relation::kAtLeast ? -1 : 1;
}

Plan build_plan(const MockConfig& cfg, std::string_view prompt, std::span<const ConstraintSpec> specs) {
  Plan p;
  std::uint64_t h = hash_bytes(prompt);
  for (const auto& s : specs) {
    auto& slot = p.by_kind[static_cast<std::size_t>(s.kind)];
    if (!slot) slot = &s;
    h = combine_seed(h, hash_bytes(to_json(s).dump()));
  }
  Rng rng(combine_seed(cfg.seed, h));

  int need_n = 0;
  int cap_n = 0, first_n = 0;
  if (auto* s = p.get(K::kNthSentenceCapital)) need_n = std::max(need_n, cap_n = static_cast<int>(s->integer("nth_sentence")));
  if (auto* s = p.get(K::kNthSentenceFirstWord))
    need_n = std::max(need_n, first_n = static_cast<int>(s->integer("nth_sentence")));
  const int headers = p.has(K::kNumberedHeaders) ? static_cast<int>(p.get(K::kNumberedHeaders)->integer("num_headers")) : 0;
  const int parts = p.has(K::kNumberParts) ? static_cast<int>(p.get(K::kNumberParts)->integer("num_parts")) : 0;
  const bool tail = p.has(K::kTldrSummary) || p.has(K::kEndQuotation);

  const int S = std::max({static_cast<int>(rng.uniform_int(24, 32)), need_n + headers + (tail ? 1 : 0) + 1,
                          parts + 2 + (tail ? 1 : 0), 4});
  p.slots.resize(static_cast<std::size_t>(S));
  auto& slots = p.slots;
  const int last = S - 1;
  std::vector<int> fixed(static_cast<std::size_t>(S), 0);
  std::vector<int> load(static_cast<std::size_t>(S), 0);

  if (p.has(K::kTldrSummary)) {
    slots[last].tldr = true;
    slots[last].sites.push_back(K::kTldrSummary);
    fixed[last] += 1;
  }
  if (p.has(K::kEndQuotation)) {
    slots[last].quoted = true;
    slots[last].sites.push_back(K::kEndQuotation);
  }
  if (auto* s = p.get(K::kStartChecker)) {
    slots[0].start = true;
    slots[0].sites.push_back(K::kStartChecker);
    fixed[0] += static_cast<int>(word_count(s->text("first_sentence")));
  }
  if (cap_n > 0) {
    slots[cap_n - 1].nth_capital = true;
    slots[cap_n - 1].sites.push_back(K::kNthSentenceCapital);
  }
  if (first_n > 0) {
    slots[first_n - 1].nth_first = true;
    slots[first_n - 1].sites.push_back(K::kNthSentenceFirstWord);
    fixed[first_n - 1] += 1;
  }
  for (int i = 0; i < headers; ++i) slots[S - (tail ? 1 : 0) - headers + i].header = i + 1;
  if (headers > 0) slots[S - (tail ? 1 : 0) - 1].sites.push_back(K::kNumberedHeaders);

  if (parts > 0) {
    std::vector<int> cand;
    for (int j = 0; j < S; ++j) {
      if (j == 0 && slots[0].start) continue;
      if (slots[j].nth_capital || slots[j].nth_first) continue;
      if (j == last && slots[last].quoted) continue;
      cand.push_back(j);
    }
    const int used = std::min(parts, static_cast<int>(cand.size()));
    int last_part = -1;
    for (int i = 0; i < used; ++i) {
      const int j = cand[static_cast<std::size_t>(i * static_cast<int>(cand.size()) / used)];
      slots[j].part = i + 1;
      if (slots[j].header == 0) fixed[j] += 2;
      last_part = j;
    }
    if (last_part >= 0) slots[last_part].sites.push_back(K::kNumberParts);
  }
  if (p.has(K::kEditResponse)) {
    const int mid = std::max(1, S / 2);
    slots[mid].separator = true;
    slots[mid].sites.push_back(K::kEditResponse);
  }

  auto eligible = [&](int j) { return !(tail && j == last); };
  auto choose = [&](auto&& ok) -> int {
    int best = -1;
    std::vector<int> ties;
    for (int j = 0; j < S; ++j) {
      if (!eligible(j) || !ok(j)) continue;
      const int l = load[j] + fixed[j];
      if (best < 0 || l < best) {
        best = l;
        ties.clear();
      }
      if (l == best) ties.push_back(j);
    }
    if (ties.empty()) return -1;
    return ties[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ties.size()) - 1))];
  };
  auto any = [](int) { return true; };

  if (auto* s = p.get(K::kRequiredSentence)) {
    int j = choose([&](int j) { return j != 0 && !slots[j].nth_capital; });
    if (j < 0) j = choose(any);
    if (j >= 0) {
      slots[j].required = true;
      slots[j].sites.push_back(K::kRequiredSentence);
      fixed[j] += static_cast<int>(word_count(s->text("sentence")));
    }
  }
  if (auto* s = p.get(K::kAlliteration)) {
    p.letter = kAlliterationLetters[static_cast<std::size_t>(rng.uniform_int(0, kAlliterationLetters.size() - 1))];
    const int j = choose(any);
    if (j >= 0) {
      slots[j].alliteration = true;
      slots[j].sites.push_back(K::kAlliteration);
      load[j] += static_cast<int>(s->integer("num_alliteration_words"));
    }
  }
  if (auto* s = p.get(K::kKeywordsOrdered)) {
    const int j = choose(any);
    if (j >= 0) {
      slots[j].keywords = true;
      slots[j].sites.push_back(K::kKeywordsOrdered);
      load[j] += static_cast<int>(s->strings("keywords").size()) + 1;
    }
  }

  // Count features are spread over a few slots in chunks; the decision is
  // made at the last chunk so earlier slots stay neutral.
  auto spread = [&](K kind, int total, int Slot::*field, auto&& ok, int words_per_unit) {
    std::vector<int> chosen;
    int remaining = total;
    while (remaining > 0 || chosen.empty()) {
      const int j = choose([&](int j) {
        return ok(j) && std::find(chosen.begin(), chosen.end(), j) == chosen.end();
      });
      if (j < 0) break;
      const int take = std::min(remaining, 3);
      slots[j].*field += take;
      load[j] += (take + 1) * words_per_unit;
      remaining -= take;
      chosen.push_back(j);
    }
    if (remaining > 0 && !chosen.empty()) slots[chosen.back()].*field += remaining;
    if (!chosen.empty()) {
      const int site = *std::max_element(chosen.begin(), chosen.end());
      slots[site].sites.push_back(kind);
    }
  };

  const int max_len = p.has(K::kMaxWordLength) ? static_cast<int>(p.get(K::kMaxWordLength)->integer("max_word_length")) : 18;
  if (auto* s = p.get(K::kFrequencyLongWords)) {
    const int y = static_cast<int>(s->integer("word_length"));
    p.long_lo = y;
    p.long_hi = std::min(max_len, y + 3);
    int total = static_cast<int>(s->integer("num_words"));
    if (p.long_hi < p.long_lo) {
      p.long_hi = p.long_lo + 3;
      total = 0;  // any long word breaks the length cap, so "at most" is met by none
    }
    spread(K::kFrequencyLongWords, total, &Slot::long_words, any, 1);
  }
  if (auto* s = p.get(K::kNumberBoldWords))
    spread(K::kNumberBoldWords, static_cast<int>(s->integer("num_words")), &Slot::bold,
           [&](int j) { return !slots[j].nth_capital; }, 1);
  if (auto* s = p.get(K::kNumberItalicWords))
    spread(K::kNumberItalicWords, static_cast<int>(s->integer("num_words")), &Slot::italic, any, 1);
  if (auto* s = p.get(K::kVariablePlaceholderFormat))
    spread(K::kVariablePlaceholderFormat, static_cast<int>(s->integer("num_placeholders")), &Slot::placeholders, any,
           1);
  if (auto* s = p.get(K::kNumberParentheses)) {
    // glyphs, two per wrapped word
    const int j = choose(any);
    if (j >= 0) {
      slots[j].parens = static_cast<int>(s->integer("num_parentheses"));
      slots[j].sites.push_back(K::kNumberParentheses);
      load[j] += 1;
    }
  }
  if (auto* s = p.get(K::kNumberExclamations)) {
    const int j = choose(any);
    if (j >= 0) {
      slots[j].exclamations = static_cast<int>(s->integer("num_exclamations"));
      slots[j].sites.push_back(K::kNumberExclamations);
    }
  }
  if (p.has(K::kMaxWordLength)) {
    const int j = choose(any);
    if (j >= 0) {
      slots[j].max_violation = true;
      slots[j].sites.push_back(K::kMaxWordLength);
      load[j] += 1;
    }
  }
  for (K k : {K::kNoPeriod, K::kVowelCapitalization, K::kFirstLetterCapital}) {
    if (!p.has(k)) continue;
    const int j = choose([&](int j) { return !slots[j].nth_capital; });
    if (j >= 0) slots[j].sites.push_back(k);
  }

  // Sentence lengths.
  int lo = 5, hi = 11;
  const auto* nwps = p.get(K::kNumWordsPerSentence);
  if (nwps) {
    const int x = static_cast<int>(nwps->integer("num_words"));
    switch (nwps->relation()) {
      case Relation::kAtLeast: lo = x; hi = x + 3; break;
      case Relation::kAtMost: lo = std::max(1, x - 4); hi = x; break;
      case Relation::kExactly: lo = hi = x; break;
    }
  }
  const bool ascending = p.has(K::kAscendingNumWords);
  if (ascending && !nwps) {
    lo = 3;
    hi = 5;
  }
  int prev = 0;
  for (int j = 0; j < S; ++j) {
    const int need = fixed[j] + load[j] + 2;
    int c = static_cast<int>(rng.uniform_int(lo, hi));
    if (ascending) c = j == 0 ? lo : prev + 1;
    c = std::max(c, need);
    if (ascending) c = std::max(c, prev + 1);
    slots[j].words = c;
    prev = c;
  }
  if (ascending) {
    int j = -1;
    std::vector<int> cand;
    for (int i = 1; i < S; ++i)
      if (eligible(i) && fixed[i] + load[i] + 2 <= slots[i - 1].words) cand.push_back(i);
    if (!cand.empty()) j = cand[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cand.size()) - 1))];
    else if (S > 1) j = 1;
    if (j >= 0) slots[j].sites.push_back(K::kAscendingNumWords);
  }
  if (nwps) {
    const int x = static_cast<int>(nwps->integer("num_words"));
    const bool shrink = nwps->relation() == Relation::kAtLeast;
    int j = choose([&](int j) { return !shrink || fixed[j] + load[j] + 2 <= x - 1; });
    if (j < 0) j = choose(any);
    if (j >= 0) slots[j].sites.push_back(K::kNumWordsPerSentence);
  }
  return p;
}

class SlotRenderer {
 public:
  SlotRenderer(const Plan& plan, const MockConfig& cfg, int index, std::uint64_t seed)
      : plan_(plan), slot_(plan.slots[static_cast<std::size_t>(index)]), index_(index), rng_(seed) {
    for (K k : slot_.sites) sat_[static_cast<std::size_t>(k)] = rng_.bernoulli(cfg.satisfaction_for(k));
  }

  std::string render() {
    const auto& s = slot_;
    std::vector<std::vector<Token>> front;
    std::vector<std::vector<Token>> units;

    if (s.start) {
      const auto& lit = plan_.get(K::kStartChecker)->text("first_sentence");
      auto words = split(lit);
      if (!ok(K::kStartChecker) && !words.empty()) words.front() = capitalized(other_filler(words.front()));
      front.push_back(literal_unit(words));
    }
    if (s.tldr) front.push_back({literal_token(ok(K::kTldrSummary) ? "TL;DR:" : "Summary:")});
    if (s.nth_first) {
      const auto& w = plan_.get(K::kNthSentenceFirstWord)->text("first_word");
      Token t;
      t.core = ok(K::kNthSentenceFirstWord) ? w : other_filler(w);
      front.push_back({t});
    }
    if (s.required) {
      auto words = split(plan_.get(K::kRequiredSentence)->text("sentence"));
      if (!ok(K::kRequiredSentence) && !words.empty()) words.back() = other_filler(words.back());
      units.push_back(literal_unit(words));
    }
    if (s.alliteration && ok(K::kAlliteration)) {
      const auto n = plan_.get(K::kAlliteration)->integer("num_alliteration_words");
      std::vector<Token> run;
      for (std::int64_t i = 0; i < n; ++i) run.push_back(plain(filler_with_initial(plan_.letter)));
      units.push_back(run);
    }
    if (s.keywords) {
      auto kws = plan_.get(K::kKeywordsOrdered)->strings("keywords");
      ranks_.clear();
      for (const auto& kw : kws) ranks_.push_back(kw);
      if (!ok(K::kKeywordsOrdered)) {
        if (kws.size() >= 2)
          std::swap(ranks_[0], ranks_[1]);
        else
          kws.clear();
      }
      for (const auto& kw : kws) {
        Token t = plain(kw);
        t.keyword = true;
        units.push_back({t});
      }
    }
    if (s.max_violation && !ok(K::kMaxWordLength)) {
      const int m = static_cast<int>(plan_.get(K::kMaxWordLength)->integer("max_word_length"));
      units.push_back({plain(long_word(m + 1, m + 4))});
    }
    int long_words = s.long_words;
    if (s.has_site(K::kFrequencyLongWords) && !ok(K::kFrequencyLongWords)) {
      const auto* spec = plan_.get(K::kFrequencyLongWords);
      if (s.long_words == 0 && spec->relation() != Relation::kAtLeast)
        long_words = static_cast<int>(spec->integer("num_words")) + 1;
      else
        long_words += count_delta(*spec);
    }
    for (int i = 0; i < long_words; ++i) units.push_back({plain(long_word(plan_.long_lo, plan_.long_hi))});

    int bold = s.bold + (s.has_site(K::kNumberBoldWords) && !ok(K::kNumberBoldWords) ? 1 : 0);
    for (int i = 0; i < bold; ++i) {
      Token t;
      t.pre = "<b>";
      t.core = std::string(pick(rng_, kBoldWords));
      t.post = "</b>";
      units.push_back({t});
    }
    int italic = s.italic + (s.has_site(K::kNumberItalicWords) && !ok(K::kNumberItalicWords) ? 1 : 0);
    for (int i = 0; i < italic; ++i) {
      Token t;
      t.pre = "_";
      t.core = filler();
      t.post = "_";
      units.push_back({t});
    }
    int placeholders = s.placeholders;
    if (s.has_site(K::kVariablePlaceholderFormat) && !ok(K::kVariablePlaceholderFormat))
      placeholders += count_delta(*plan_.get(K::kVariablePlaceholderFormat));
    for (int i = 0; i < placeholders; ++i) {
      Token t;
      t.pre = "{";
      t.core = std::string(pick(rng_, kPlaceholders));
      t.post = "}";
      units.push_back({t});
    }
    rng_.shuffle(std::span(units));

    // Sentence length target.
    int target = s.words;
    if (s.has_site(K::kAscendingNumWords) && !ok(K::kAscendingNumWords) && index_ > 0)
      target = plan_.slots[static_cast<std::size_t>(index_ - 1)].words;
    if (s.has_site(K::kNumWordsPerSentence) && !ok(K::kNumWordsPerSentence)) {
      const auto* spec = plan_.get(K::kNumWordsPerSentence);
      const int x = static_cast<int>(spec->integer("num_words"));
      target = spec->relation() == Relation::kAtLeast ? x - 1 : x + 1;
    }
    const bool print_part = s.part > 0 && !(s.has_site(K::kNumberParts) && !ok(K::kNumberParts));
    int fixed_words = (print_part && s.header == 0) ? 2 : 0;
    for (const auto& u : front) fixed_words += static_cast<int>(u.size());
    for (const auto& u : units) fixed_words += static_cast<int>(u.size());
    const int fill = std::max(s.parens > 0 || has_style_site() ? 2 : 0, target - fixed_words);

    // Distribute filler among the gaps between units.
    std::vector<int> gap(units.size() + 1, 0);
    for (int i = 0; i < fill; ++i) gap[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(units.size())))]++;
    std::vector<Token> tokens;
    for (const auto& u : front) tokens.insert(tokens.end(), u.begin(), u.end());
    for (std::size_t g = 0; g <= units.size(); ++g) {
      for (int i = 0; i < gap[g]; ++i) {
        Token t = plain(filler_avoiding(tokens.empty() ? '\0' : initial(tokens.back())));
        t.filler = true;
        tokens.push_back(t);
      }
      if (g < units.size()) tokens.insert(tokens.end(), units[g].begin(), units[g].end());
    }
    if (s.keywords) {
      // Shuffling scattered the keywords; restore the planned order.
      std::vector<std::string> order;
      for (const auto& t : tokens)
        if (t.keyword) order.push_back(t.core);
      std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        return keyword_rank(a) < keyword_rank(b);
      });
      std::size_t k = 0;
      for (auto& t : tokens)
        if (t.keyword) t.core = order[k++];
    }
    apply_parentheses(tokens);
    apply_style(tokens);

    std::string sentence;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) sentence += ' ';
      sentence += tokens[i].pre + tokens[i].core + tokens[i].post;
    }
    sentence += terminator();
    if (s.quoted && ok(K::kEndQuotation)) sentence = "\"" + sentence + "\"";

    std::string out;
    if (s.separator && ok(K::kEditResponse)) out += plan_.get(K::kEditResponse)->text("separator") + "\n";
    if (print_part) out += plan_.get(K::kNumberParts)->text("part_splitter") + " " + std::to_string(s.part) + "\n";
    if (s.header > 0) {
      int n = s.header;
      if (s.has_site(K::kNumberedHeaders) && !ok(K::kNumberedHeaders)) n += 1;
      out += std::to_string(n) + ". ";
    }
    out += sentence + "\n";
    return out;
  }

 private:
  bool ok(K k) const {
    const auto& v = sat_[static_cast<std::size_t>(k)];
    return v.value_or(true);
  }

  bool has_style_site() const {
    return slot_.has_site(K::kVowelCapitalization) || slot_.has_site(K::kFirstLetterCapital);
  }

  std::size_t keyword_rank(const std::string& w) const {
    return static_cast<std::size_t>(std::find(ranks_.begin(), ranks_.end(), w) - ranks_.begin());
  }

  static char initial(const Token& t) { return t.core.empty() ? '\0' : lower(t.core.front()); }

  static std::vector<std::string> split(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && textkit::is_space(text[i])) ++i;
      std::size_t j = i;
      while (j < text.size() && !textkit::is_space(text[j])) ++j;
      if (j > i) out.emplace_back(text.substr(i, j - i));
      i = j;
    }
    return out;
  }

  static Token plain(std::string_view w) {
    Token t;
    t.core = std::string(w);
    return t;
  }
  static Token literal_token(std::string_view w) {
    Token t = plain(w);
    t.literal = true;
    return t;
  }
  static std::vector<Token> literal_unit(const std::vector<std::string>& words) {
    std::vector<Token> out;
    for (const auto& w : words) out.push_back(literal_token(w));
    return out;
  }
  static std::string capitalized(std::string w) {
    if (!w.empty()) w.front() = upper(w.front());
    return w;
  }

  std::string filler() {
    const char avoid = plan_.has(K::kAlliteration) ? plan_.letter : '\0';
    for (int i = 0; i < 64; ++i) {
      auto w = pick(rng_, kFiller);
      if (w.front() != avoid) return std::string(w);
    }
    return "the";
  }
  std::string filler_avoiding(char prev) {
    for (int i = 0; i < 64; ++i) {
      auto w = filler();
      if (w.front() != prev) return w;
    }
    return filler();
  }
  std::string filler_with_initial(char c) {
    std::vector<std::string_view> pool;
    for (auto w : kFiller)
      if (w.front() == c) pool.push_back(w);
    return std::string(pool[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))]);
  }
  std::string other_filler(std::string_view not_this) {
    const auto avoid = textkit::to_lower_ascii(not_this);
    for (int i = 0; i < 64; ++i) {
      auto w = filler();
      if (w != avoid) return w;
    }
    return avoid == "the" ? "new" : "the";
  }
  std::string long_word(int lo, int hi) {
    std::vector<std::string_view> pool;
    for (auto w : kLongWords)
      if (static_cast<int>(w.size()) >= lo && static_cast<int>(w.size()) <= hi) pool.push_back(w);
    if (pool.empty()) {
      std::string w = "extraordinarily";
      while (static_cast<int>(w.size()) < lo) w += "ness";
      return w;
    }
    return std::string(pool[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))]);
  }

  void apply_parentheses(std::vector<Token>& tokens) {
    int glyphs = slot_.parens;
    if (glyphs == 0) return;
    if (!ok(K::kNumberParentheses)) ++glyphs;
    std::vector<std::size_t> fillers;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i].filler) fillers.push_back(i);
    std::size_t k = 0;
    while (glyphs >= 2 && k < fillers.size()) {
      tokens[fillers[k]].pre = "(" + tokens[fillers[k]].pre;
      tokens[fillers[k]].post += ")";
      glyphs -= 2;
      ++k;
    }
    if (glyphs > 0 && k < fillers.size()) {
      tokens[fillers[k]].pre = "(" + tokens[fillers[k]].pre;
      --glyphs;
    } else if (glyphs > 0 && !fillers.empty()) {
      tokens[fillers.back()].post += std::string(static_cast<std::size_t>(glyphs), ')');
    }
  }

  void apply_style(std::vector<Token>& tokens) {
    const bool vowels = plan_.has(K::kVowelCapitalization);
    const bool caps = plan_.has(K::kFirstLetterCapital);
    std::optional<std::size_t> skip_vowel, skip_cap;
    if (vowels && slot_.has_site(K::kVowelCapitalization) && !ok(K::kVowelCapitalization)) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].filler) continue;
        if (std::any_of(tokens[i].core.begin(), tokens[i].core.end(), is_vowel)) {
          skip_vowel = i;
          break;
        }
      }
    }
    if (caps && slot_.has_site(K::kFirstLetterCapital) && !ok(K::kFirstLetterCapital)) {
      for (std::size_t i = 1; i < tokens.size(); ++i)
        if (tokens[i].filler) {
          skip_cap = i;
          break;
        }
    }
    const bool shout = slot_.nth_capital && ok(K::kNthSentenceCapital);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto& t = tokens[i];
      if (t.literal) continue;
      if (shout) {
        for (char& c : t.core) c = upper(c);
        continue;
      }
      if (vowels && skip_vowel != i)
        for (char& c : t.core)
          if (is_vowel(c)) c = upper(c);
      if (!t.core.empty() && ((caps && skip_cap != i) || i == 0)) t.core.front() = upper(t.core.front());
    }
  }

  std::string terminator() {
    if (slot_.exclamations > 0) {
      int n = slot_.exclamations;
      const auto* spec = plan_.get(K::kNumberExclamations);
      if (!ok(K::kNumberExclamations)) n += count_delta(*spec);
      if (n > 0) return std::string(static_cast<std::size_t>(n), '!');
    }
    if (plan_.has(K::kNoPeriod)) return (slot_.has_site(K::kNoPeriod) && !ok(K::kNoPeriod)) ? "." : "?";
    return ".";
  }

  const Plan& plan_;
  const Slot& slot_;
  int index_;
  Rng rng_;
  std::array<std::optional<bool>, kNumConstraintKinds> sat_{};
  std::vector<std::string> ranks_;  // keyword emission order
};

}  // namespace

std::vector<std::string> chunk_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  if (i < text.size() && textkit::is_space(text[i])) {
    std::size_t j = i;
    while (j < text.size() && textkit::is_space(text[j])) ++j;
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size() && !textkit::is_space(text[j])) ++j;
    while (j < text.size() && textkit::is_space(text[j])) ++j;
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Continuation continue_response(const MockConfig& config, std::string_view prompt,
                               std::span<const ConstraintSpec> specs, std::string_view prefix, int max_tokens,
                               std::uint64_t seed) {
  const Plan plan = build_plan(config, prompt, specs);
  Continuation out;
  std::string context(prefix);
  std::size_t newlines = static_cast<std::size_t>(std::count(prefix.begin(), prefix.end(), '\n'));
  if (!prefix.empty() && prefix.back() != '\n') {
    out.text = "\n";
    out.tokens.push_back("\n");
    context += '\n';
    ++newlines;
  }
  std::size_t j = 0, seen = 0;
  while (j < plan.slots.size() && seen < newlines) seen += static_cast<std::size_t>(plan.slots[j++].newlines());

  const auto budget = static_cast<std::size_t>(std::max(1, max_tokens));
  bool emitted = false;
  for (; j < plan.slots.size(); ++j) {
    SlotRenderer r(plan, config, static_cast<int>(j), combine_seed(seed, combine_seed(hash_bytes(context), j)));
    const std::string text = r.render();
    auto chunks = chunk_tokens(text);
    if (out.tokens.size() + chunks.size() > budget) {
      if (!emitted) {
        const std::size_t room = budget > out.tokens.size() ? budget - out.tokens.size() : 1;
        for (std::size_t i = 0; i < std::min(room, chunks.size()); ++i) {
          out.text += chunks[i];
          out.tokens.push_back(chunks[i]);
        }
      }
      return out;
    }
    for (auto& c : chunks) {
      out.text += c;
      out.tokens.push_back(std::move(c));
    }
    context += text;
    emitted = true;
  }
  out.finished = true;
  return out;
}

}  // namespace ifpref::mock
