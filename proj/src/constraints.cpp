#include "ifpref/constraints.hpp"

#include <algorithm>
#include <unordered_map>

#include "ifpref/backend.hpp"
#include "ifpref/error.hpp"
#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"

namespace ifpref {
namespace {

KwargSchema integer_kwarg(std::string name, std::int64_t lo, std::int64_t hi) {
  return {std::move(name), ValueKind::kInteger, SamplingMode::kRandom, lo, hi, {}, {}};
}
KwargSchema relation_kwarg() {
  return {"relation", ValueKind::kRelation, SamplingMode::kRandom, 0, 0, {"at least", "at most"}, {}};
}
KwargSchema contextual_string(std::string name) {
  return {std::move(name), ValueKind::kString, SamplingMode::kContextual, 0, 0, {}, {}};
}

std::vector<KindInfo> build_registry() {
  using K = ConstraintKind;
  std::vector<KindInfo> r;
  r.push_back({K::kAlliteration, "alliteration", "a run of consecutive words starting with the same letter",
               {integer_kwarg("num_alliteration_words", 3, 6)}});
  r.push_back({K::kAscendingNumWords, "ascending_num_words",
               "sentences with a strictly increasing number of words", {}});
  r.push_back({K::kEditResponse, "edit_response",
               "two responses split by a separator line, the second improving the first",
               {{"separator", ValueKind::kString, SamplingMode::kFixed, 0, 0, {}, "------"}}});
  r.push_back({K::kEndQuotation, "end_quotation", "the last sentence wrapped in double quotes", {}});
  r.push_back({K::kFirstLetterCapital, "first_letter_capital", "every word starts with a capital letter", {}});
  r.push_back({K::kFrequencyLongWords, "frequency_long_words", "a bounded number of long words",
               {relation_kwarg(), integer_kwarg("num_words", 1, 10), integer_kwarg("word_length", 8, 14)}});
  r.push_back({K::kKeywordsOrdered, "keywords_ordered", "keywords appearing in a fixed order",
               {{"keywords", ValueKind::kStringList, SamplingMode::kContextual, 0, 0, {}, {}}}});
  r.push_back({K::kMaxWordLength, "max_word_length", "no word longer than a character limit",
               {integer_kwarg("max_word_length", 8, 15)}});
  r.push_back({K::kNoPeriod, "no_period", "no period characters", {}});
  r.push_back({K::kNthSentenceCapital, "nth_sentence_capital", "only the nth sentence in capital letters",
               {integer_kwarg("nth_sentence", 1, 5)}});
  r.push_back({K::kNthSentenceFirstWord, "nth_sentence_first_word", "the nth sentence starts with a given word",
               {contextual_string("first_word"), integer_kwarg("num_sentences", 2, 10),
                integer_kwarg("nth_sentence", 2, 6)}});
  r.push_back({K::kNumWordsPerSentence, "num_words_per_sentence", "a bound on the words in every sentence",
               {relation_kwarg(), integer_kwarg("num_words", 5, 30)}});
  r.push_back({K::kNumberBoldWords, "number_bold_words", "an exact number of <b>bold</b> words",
               {integer_kwarg("num_words", 1, 8)}});
  r.push_back({K::kNumberExclamations, "number_exclamations", "a bounded number of exclamation marks",
               {relation_kwarg(), integer_kwarg("num_exclamations", 1, 10)}});
  r.push_back({K::kNumberItalicWords, "number_italic_words", "an exact number of _italic_ words",
               {integer_kwarg("num_words", 1, 8)}});
  r.push_back({K::kNumberParentheses, "number_parentheses", "an exact number of parenthesis characters",
               {integer_kwarg("num_parentheses", 2, 10)}});
  r.push_back({K::kNumberParts, "number_parts", "a number of parts marked Part 1, Part 2, ...",
               {{"part_splitter", ValueKind::kEnum, SamplingMode::kRandom, 0, 0, {"Part", "PART"}, {}},
                integer_kwarg("num_parts", 1, 5)}});
  r.push_back({K::kNumberedHeaders, "numbered_headers", "enumerated headings 1. 2. 3. ...",
               {integer_kwarg("num_headers", 1, 6)}});
  r.push_back({K::kRequiredSentence, "required_sentence", "a given sentence appears verbatim",
               {contextual_string("sentence")}});
  r.push_back({K::kStartChecker, "start_checker", "the response begins with a given sentence",
               {contextual_string("first_sentence")}});
  r.push_back({K::kTldrSummary, "tldr_summary", "a final TL;DR line summarizing the response", {}});
  r.push_back({K::kVariablePlaceholderFormat, "variable_placeholder_format",
               "a bounded number of {placeholder} variables",
               {relation_kwarg(), integer_kwarg("num_placeholders", 1, 6)}});
  r.push_back({K::kVowelCapitalization, "vowel_capitalization", "every vowel capitalized", {}});
  return r;
}

const std::vector<KindInfo>& registry() {
  static const std::vector<KindInfo> r = build_registry();
  return r;
}

const KwargSchema* find_schema(const KindInfo& info, const std::string& name) {
  for (const auto& s : info.kwargs)
    if (s.name == name) return &s;
  return nullptr;
}

[[noreturn]] void invalid(const ConstraintSpec& spec, const std::string& why) {
  throw Error(ErrorCode::kInvalidSpec, std::string(kind_id(spec.kind)) + ": " + why);
}

constexpr std::string_view condition_name(ConflictCondition c) {
  switch (c) {
    case ConflictCondition::kAlways: return "always";
    case ConflictCondition::kStartSentenceHasPeriod: return "start_sentence_has_period";
    case ConflictCondition::kLongWordExceedsMax: return "long_word_exceeds_max";
    case ConflictCondition::kRelationAtMost: return "relation_at_most";
  }
  return "always";
}

ConflictCondition parse_condition(std::string_view s) {
  for (auto c : {ConflictCondition::kAlways, ConflictCondition::kStartSentenceHasPeriod,
                 ConflictCondition::kLongWordExceedsMax, ConflictCondition::kRelationAtMost})
    if (condition_name(c) == s) return c;
  throw Error(ErrorCode::kConfigError, "unknown conflict condition: " + std::string(s));
}

const ConstraintSpec* pick(const ConstraintSpec& a, const ConstraintSpec& b, ConstraintKind kind) {
  if (a.kind == kind) return &a;
  if (b.kind == kind) return &b;
  return nullptr;
}

bool condition_holds(ConflictCondition c, const ConstraintSpec& a, const ConstraintSpec& b) {
  switch (c) {
    case ConflictCondition::kAlways: return true;
    case ConflictCondition::kStartSentenceHasPeriod: {
      const auto* s = pick(a, b, ConstraintKind::kStartChecker);
      return s && s->text("first_sentence").find('.') != std::string::npos;
    }
    case ConflictCondition::kLongWordExceedsMax: {
      const auto* f = pick(a, b, ConstraintKind::kFrequencyLongWords);
      const auto* m = pick(a, b, ConstraintKind::kMaxWordLength);
      if (!f || !m) return false;
      // "at most" is met by zero long words, so only a demand for some conflicts.
      return f->relation() != Relation::kAtMost && f->integer("word_length") > m->integer("max_word_length");
    }
    case ConflictCondition::kRelationAtMost: {
      const auto* n = pick(a, b, ConstraintKind::kNumWordsPerSentence);
      return n && n->relation() == Relation::kAtMost;
    }
  }
  return false;
}

std::string trim_quotes(std::string_view s) {
  s = textkit::trim(s);
  auto strip = [&](std::string_view q) {
    if (s.size() >= 2 * q.size() && s.starts_with(q) && s.ends_with(q)) {
      s.remove_prefix(q.size());
      s.remove_suffix(q.size());
      return true;
    }
    return false;
  };
  while (strip("\"") || strip("'") || strip("`")) s = textkit::trim(s);
  if (s.size() >= 6 && s.starts_with("\xE2\x80\x9C") && s.ends_with("\xE2\x80\x9D")) {
    s.remove_prefix(3);
    s.remove_suffix(3);
  }
  return std::string(textkit::trim(s));
}

std::string first_line(std::string_view s) {
  for (auto line : textkit::split_lines(s)) {
    auto t = textkit::trim(line);
    if (!t.empty()) return std::string(t);
  }
  return {};
}

}  // namespace

const std::array<ConstraintKind, kNumConstraintKinds>& all_kinds() {
  static const auto kinds = [] {
    std::array<ConstraintKind, kNumConstraintKinds> a{};
    for (std::size_t i = 0; i < kNumConstraintKinds; ++i) a[i] = static_cast<ConstraintKind>(i);
    return a;
  }();
  return kinds;
}

const KindInfo& kind_info(ConstraintKind kind) { return registry().at(static_cast<std::size_t>(kind)); }

std::string_view kind_id(ConstraintKind kind) { return kind_info(kind).id; }

std::optional<ConstraintKind> kind_from_id(std::string_view id) {
  for (const auto& info : registry())
    if (info.id == id) return info.kind;
  return std::nullopt;
}

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::kAtLeast: return "at least";
    case Relation::kAtMost: return "at most";
    case Relation::kExactly: return "exactly";
  }
  return "exactly";
}

std::optional<Relation> parse_relation(std::string_view s) {
  if (s == "at least") return Relation::kAtLeast;
  if (s == "at most") return Relation::kAtMost;
  if (s == "exactly") return Relation::kExactly;
  return std::nullopt;
}

bool relation_holds(Relation r, std::int64_t value, std::int64_t target) {
  switch (r) {
    case Relation::kAtLeast: return value >= target;
    case Relation::kAtMost: return value <= target;
    case Relation::kExactly: return value == target;
  }
  return false;
}

std::int64_t ConstraintSpec::integer(const std::string& name) const {
  auto it = kwargs.find(name);
  if (it == kwargs.end() || !std::holds_alternative<std::int64_t>(it->second))
    invalid(*this, "missing integer kwarg " + name);
  return std::get<std::int64_t>(it->second);
}

const std::string& ConstraintSpec::text(const std::string& name) const {
  auto it = kwargs.find(name);
  if (it == kwargs.end() || !std::holds_alternative<std::string>(it->second))
    invalid(*this, "missing string kwarg " + name);
  return std::get<std::string>(it->second);
}

const std::vector<std::string>& ConstraintSpec::strings(const std::string& name) const {
  auto it = kwargs.find(name);
  if (it == kwargs.end() || !std::holds_alternative<std::vector<std::string>>(it->second))
    invalid(*this, "missing list kwarg " + name);
  return std::get<std::vector<std::string>>(it->second);
}

Relation ConstraintSpec::relation() const {
  auto r = parse_relation(text("relation"));
  if (!r) invalid(*this, "bad relation " + text("relation"));
  return *r;
}

void validate(const ConstraintSpec& spec) {
  const auto& info = kind_info(spec.kind);
  for (const auto& [name, value] : spec.kwargs)
    if (!find_schema(info, name)) invalid(spec, "unexpected kwarg " + name);
  for (const auto& schema : info.kwargs) {
    auto it = spec.kwargs.find(schema.name);
    if (it == spec.kwargs.end()) invalid(spec, "missing kwarg " + schema.name);
    const auto& v = it->second;
    switch (schema.kind) {
      case ValueKind::kInteger:
        if (!std::holds_alternative<std::int64_t>(v)) invalid(spec, schema.name + " must be an integer");
        if (std::get<std::int64_t>(v) <= 0) invalid(spec, schema.name + " must be positive");
        break;
      case ValueKind::kRelation:
        if (!std::holds_alternative<std::string>(v) || !parse_relation(std::get<std::string>(v)))
          invalid(spec, "relation must be one of at least/at most/exactly");
        break;
      case ValueKind::kEnum:
        if (!std::holds_alternative<std::string>(v) ||
            std::find(schema.choices.begin(), schema.choices.end(), std::get<std::string>(v)) ==
                schema.choices.end())
          invalid(spec, schema.name + " has an unsupported value");
        break;
      case ValueKind::kString:
        if (!std::holds_alternative<std::string>(v) || std::get<std::string>(v).empty())
          invalid(spec, schema.name + " must be a non-empty string");
        break;
      case ValueKind::kStringList: {
        if (!std::holds_alternative<std::vector<std::string>>(v)) invalid(spec, schema.name + " must be a list");
        const auto& list = std::get<std::vector<std::string>>(v);
        if (list.empty()) invalid(spec, schema.name + " must be non-empty");
        for (const auto& s : list)
          if (s.empty()) invalid(spec, schema.name + " contains an empty entry");
        break;
      }
    }
  }
  if (spec.kind == ConstraintKind::kNthSentenceFirstWord &&
      spec.integer("nth_sentence") > spec.integer("num_sentences"))
    invalid(spec, "nth_sentence exceeds num_sentences");
}

nlohmann::json to_json(const ConstraintSpec& spec) {
  nlohmann::json kwargs = nlohmann::json::object();
  for (const auto& [name, value] : spec.kwargs)
    std::visit([&](const auto& v) { kwargs[name] = v; }, value);
  return {{"instruction_id", std::string(kind_id(spec.kind))}, {"kwargs", kwargs}};
}

ConstraintSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("instruction_id"))
    throw Error(ErrorCode::kInvalidSpec, "constraint record needs instruction_id");
  const auto id = j.at("instruction_id").get<std::string>();
  auto kind = kind_from_id(id);
  if (!kind) throw Error(ErrorCode::kUnknownConstraint, "unknown constraint id: " + id);
  ConstraintSpec spec{*kind, {}};
  if (j.contains("kwargs") && !j.at("kwargs").is_null()) {
    for (const auto& [name, v] : j.at("kwargs").items()) {
      if (v.is_number_integer())
        spec.kwargs[name] = v.get<std::int64_t>();
      else if (v.is_string())
        spec.kwargs[name] = v.get<std::string>();
      else if (v.is_array())
        spec.kwargs[name] = v.get<std::vector<std::string>>();
      else
        throw Error(ErrorCode::kInvalidSpec, "unsupported kwarg value for " + name);
    }
  }
  validate(spec);
  return spec;
}

ConflictTable::ConflictTable(std::vector<ConflictRule> rules) {
  for (auto& r : rules) add(r);
}

void ConflictTable::add(ConflictRule rule) {
  if (rule.a == rule.b) throw Error(ErrorCode::kConfigError, "conflict rules must relate two different kinds");
  rules_.push_back(rule);
}

ConflictTable ConflictTable::defaults() {
  using K = ConstraintKind;
  using C = ConflictCondition;
  return ConflictTable({
      {K::kNoPeriod, K::kTldrSummary, C::kAlways},
      {K::kNoPeriod, K::kNumberedHeaders, C::kAlways},
      {K::kNoPeriod, K::kStartChecker, C::kStartSentenceHasPeriod},
      {K::kFirstLetterCapital, K::kVowelCapitalization, C::kAlways},
      {K::kMaxWordLength, K::kFrequencyLongWords, C::kLongWordExceedsMax},
      {K::kAscendingNumWords, K::kNumWordsPerSentence, C::kRelationAtMost},
      {K::kNthSentenceCapital, K::kFirstLetterCapital, C::kAlways},
  });
}

ConflictTable ConflictTable::from_json(const nlohmann::json& j) {
  ConflictTable table;
  for (const auto& r : j.at("rules")) {
    auto a = kind_from_id(r.at("a").get<std::string>());
    auto b = kind_from_id(r.at("b").get<std::string>());
    if (!a || !b) throw Error(ErrorCode::kUnknownConstraint, "conflict rule names an unknown constraint");
    table.add({*a, *b, parse_condition(r.value("when", std::string("always")))});
  }
  return table;
}

nlohmann::json ConflictTable::to_json() const {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : rules_)
    rules.push_back({{"a", std::string(kind_id(r.a))},
                     {"b", std::string(kind_id(r.b))},
                     {"when", std::string(condition_name(r.when))}});
  return {{"version", 1}, {"rules", rules}};
}

bool ConflictTable::kinds_conflict(ConstraintKind a, ConstraintKind b) const {
  for (const auto& r : rules_)
    if (r.when == ConflictCondition::kAlways && ((r.a == a && r.b == b) || (r.a == b && r.b == a))) return true;
  return false;
}

std::optional<std::string> ConflictTable::specs_conflict(const ConstraintSpec& a, const ConstraintSpec& b) const {
  if (a.kind == b.kind) return "duplicate constraint " + std::string(kind_id(a.kind));
  for (const auto& r : rules_) {
    if (!((r.a == a.kind && r.b == b.kind) || (r.a == b.kind && r.b == a.kind))) continue;
    if (condition_holds(r.when, a, b))
      return std::string(kind_id(r.a)) + " conflicts with " + std::string(kind_id(r.b)) + " (" +
             std::string(condition_name(r.when)) + ")";
  }
  return std::nullopt;
}

std::vector<ConflictPair> check_conflicts(std::span<const ConstraintSpec> specs, const ConflictTable& table) {
  std::vector<ConflictPair> out;
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t j = i + 1; j < specs.size(); ++j)
      if (auto reason = table.specs_conflict(specs[i], specs[j])) out.push_back({i, j, *reason});
  return out;
}

std::vector<ConstraintKind> sample_combination(std::uint64_t seed, std::size_t k, const ConflictTable& table,
                                               int max_attempts) {
  if (k < 1 || k > kNumConstraintKinds)
    throw Error(ErrorCode::kPrecondition, "k must be in [1, 23], got " + std::to_string(k));
  Rng rng(combine_seed(seed, 0x636f6d62ULL));
  auto pool = all_kinds();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    rng.shuffle(std::span<ConstraintKind>(pool));
    std::vector<ConstraintKind> pick(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i)
      for (std::size_t j = i + 1; j < k && ok; ++j) ok = !table.kinds_conflict(pick[i], pick[j]);
    if (ok) {
      std::sort(pick.begin(), pick.end());
      return pick;
    }
  }
  throw Error(ErrorCode::kNoValidCombination,
              "no conflict-free combination of " + std::to_string(k) + " constraints after " +
                  std::to_string(max_attempts) + " attempts");
}

std::string contextual_kwarg_prompt(ConstraintKind kind, std::string_view kwarg, std::string_view base_prompt) {
  std::string hint;
  if (kwarg == "keywords")
    hint = "three single lowercase words related to the instruction, separated by commas";
  else if (kwarg == "first_word")
    hint = "one lowercase word that could naturally start a sentence in the response";
  else if (kwarg == "sentence")
    hint = "one sentence, without a trailing period, that a good response would naturally contain";
  else
    hint = "the opening sentence of a good response, without a trailing period";
  std::string prompt = "Instruction: ";
  prompt += base_prompt;
  prompt += "\nConstraint: ";
  prompt += kind_id(kind);
  prompt += " (" + kind_info(kind).description + ")";
  prompt += "\nWrite the value of the keyword argument `";
  prompt += kwarg;
  prompt += "`: " + hint + ". Reply with the value only.";
  return prompt;
}

Kwargs sample_kwargs(ConstraintKind kind, std::uint64_t seed, std::string_view prompt_context, Backend* backend,
                     const SamplingRanges& ranges) {
  const auto& info = kind_info(kind);
  Rng rng(combine_seed(seed, hash_bytes(info.id)));
  Kwargs kwargs;
  for (const auto& schema : info.kwargs) {
    switch (schema.mode) {
      case SamplingMode::kFixed:
        kwargs[schema.name] = schema.fixed_value;
        break;
      case SamplingMode::kRandom: {
        if (schema.kind == ValueKind::kInteger) {
          auto [lo, hi] = std::pair{schema.lo, schema.hi};
          if (auto it = ranges.integer_ranges.find(info.id + "." + schema.name); it != ranges.integer_ranges.end())
            std::tie(lo, hi) = it->second;
          kwargs[schema.name] = rng.uniform_int(lo, hi);
        } else if (schema.kind == ValueKind::kRelation) {
          kwargs[schema.name] = rng.pick(ranges.relations.empty() ? schema.choices : ranges.relations);
        } else {
          kwargs[schema.name] = rng.pick(schema.choices);
        }
        break;
      }
      case SamplingMode::kContextual: {
        if (!backend) throw Error(ErrorCode::kConfigError, info.id + " needs a backend for " + schema.name);
        GenerationRequest req;
        req.messages = {{"system", "You write keyword arguments for verifiable writing constraints."},
                        {"user", contextual_kwarg_prompt(kind, schema.name, prompt_context)}};
        req.temperature = 0.7;
        req.max_tokens = 64;
        req.seed = combine_seed(seed, hash_bytes(schema.name));
        req.purpose = "kwarg:" + info.id + "." + schema.name;
        auto results = backend->generate(req);
        if (results.empty()) throw Error(ErrorCode::kBackendError, "backend returned no kwarg value");
        const std::string raw = first_line(results.front().text);
        if (schema.kind == ValueKind::kStringList) {
          std::vector<std::string> items;
          std::size_t start = 0;
          while (start <= raw.size()) {
            auto comma = raw.find(',', start);
            if (comma == std::string::npos) comma = raw.size();
            auto item = textkit::to_lower_ascii(trim_quotes(std::string_view(raw).substr(start, comma - start)));
            if (!item.empty()) items.push_back(item);
            start = comma + 1;
          }
          if (items.empty()) throw Error(ErrorCode::kBackendError, "backend produced no keywords");
          kwargs[schema.name] = items;
        } else if (schema.name == "first_word") {
          auto words = textkit::split_words(raw);
          if (words.empty()) throw Error(ErrorCode::kBackendError, "backend produced no first word");
          kwargs[schema.name] = textkit::to_lower_ascii(words.front());
        } else {
          auto value = trim_quotes(raw);
          if (value.empty()) throw Error(ErrorCode::kBackendError, "backend produced an empty " + schema.name);
          kwargs[schema.name] = value;
        }
        break;
      }
    }
  }
  if (kind == ConstraintKind::kNthSentenceFirstWord) {
    // num_sentences is drawn at or above nth_sentence.
    const auto nth = std::get<std::int64_t>(kwargs["nth_sentence"]);
    kwargs["num_sentences"] = nth + rng.uniform_int(0, 4);
  }
  return kwargs;
}

std::string ordinal_word(std::int64_t n) {
  static const char* words[] = {"zeroth", "first", "second", "third", "fourth", "fifth", "sixth",
                                "seventh", "eighth", "ninth", "tenth", "eleventh", "twelfth"};
  if (n >= 0 && n <= 12) return words[n];
  const auto mod100 = n % 100;
  const char* suffix = (mod100 >= 11 && mod100 <= 13) ? "th"
                       : n % 10 == 1                 ? "st"
                       : n % 10 == 2                 ? "nd"
                       : n % 10 == 3                 ? "rd"
                                                     : "th";
  return std::to_string(n) + suffix;
}

}  // namespace ifpref
