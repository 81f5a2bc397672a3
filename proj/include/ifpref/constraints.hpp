#pragma once

// Registry of the 23 verifiable constraint kinds, their keyword-argument
// schemas, conflict rules, and seeded sampling of constraint combinations.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ifpref {

class Backend;

enum class ConstraintKind : std::uint8_t {
  kAlliteration,
  kAscendingNumWords,
  kEditResponse,
  kEndQuotation,
  kFirstLetterCapital,
  kFrequencyLongWords,
  kKeywordsOrdered,
  kMaxWordLength,
  kNoPeriod,
  kNthSentenceCapital,
  kNthSentenceFirstWord,
  kNumWordsPerSentence,
  kNumberBoldWords,
  kNumberExclamations,
  kNumberItalicWords,
  kNumberParentheses,
  kNumberParts,
  kNumberedHeaders,
  kRequiredSentence,
  kStartChecker,
  kTldrSummary,
  kVariablePlaceholderFormat,
  kVowelCapitalization,
};

inline constexpr std::size_t kNumConstraintKinds = 23;

const std::array<ConstraintKind, kNumConstraintKinds>& all_kinds();
std::string_view kind_id(ConstraintKind kind);
std::optional<ConstraintKind> kind_from_id(std::string_view id);

enum class Relation { kAtLeast, kAtMost, kExactly };

std::string_view relation_name(Relation r);
std::optional<Relation> parse_relation(std::string_view s);
bool relation_holds(Relation r, std::int64_t value, std::int64_t target);

enum class ValueKind { kInteger, kRelation, kEnum, kString, kStringList };

enum class SamplingMode {
  kRandom,      // drawn uniformly from a configured range, prompt-independent
  kContextual,  // generated by the backend from the base prompt
  kFixed,       // configured default
};

struct KwargSchema {
  std::string name;
  ValueKind kind;
  SamplingMode mode;
  std::int64_t lo = 0;  // integer sampling range, inclusive
  std::int64_t hi = 0;
  std::vector<std::string> choices;  // enum / relation sampling domain
  std::string fixed_value;
};

struct KindInfo {
  ConstraintKind kind;
  std::string id;
  std::string description;
  std::vector<KwargSchema> kwargs;
};

const KindInfo& kind_info(ConstraintKind kind);

using KwargValue = std::variant<std::int64_t, std::string, std::vector<std::string>>;
using Kwargs = std::map<std::string, KwargValue>;

struct ConstraintSpec {
  ConstraintKind kind{};
  Kwargs kwargs;

  std::int64_t integer(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  const std::vector<std::string>& strings(const std::string& name) const;
  Relation relation() const;

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

// Throws ErrorCode::kInvalidSpec unless kwargs match the kind's schema
// exactly (no missing, no extra, positive integers, valid relation/enum).
void validate(const ConstraintSpec& spec);

// IFEval-compatible external form: {"instruction_id": ..., "kwargs": {...}}.
nlohmann::json to_json(const ConstraintSpec& spec);
ConstraintSpec spec_from_json(const nlohmann::json& j);

enum class ConflictCondition {
  kAlways,
  kStartSentenceHasPeriod,  // start_checker.first_sentence contains '.'
  kLongWordExceedsMax,      // frequency_long_words needs words longer than max_word_length allows
  kRelationAtMost,          // num_words_per_sentence uses "at most"
};

struct ConflictRule {
  ConstraintKind a;
  ConstraintKind b;
  ConflictCondition when = ConflictCondition::kAlways;
};

class ConflictTable {
 public:
  ConflictTable() = default;
  explicit ConflictTable(std::vector<ConflictRule> rules);

  static ConflictTable defaults();
  static ConflictTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  void add(ConflictRule rule);
  const std::vector<ConflictRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

  // Kind-level incompatibility (unconditional rules only).
  bool kinds_conflict(ConstraintKind a, ConstraintKind b) const;
  // Full check including kwarg-level predicates; returns the reason if any.
  std::optional<std::string> specs_conflict(const ConstraintSpec& a, const ConstraintSpec& b) const;

 private:
  std::vector<ConflictRule> rules_;
};

struct ConflictPair {
  std::size_t first;
  std::size_t second;
  std::string reason;
};

std::vector<ConflictPair> check_conflicts(std::span<const ConstraintSpec> specs, const ConflictTable& table);

// k distinct, pairwise kind-level conflict-free kinds; throws
// kNoValidCombination after `max_attempts` rejected draws.
std::vector<ConstraintKind> sample_combination(std::uint64_t seed, std::size_t k, const ConflictTable& table,
                                               int max_attempts = 2000);

// Per-kwarg range overrides keyed "kind_id.kwarg_name".
struct SamplingRanges {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> integer_ranges;
  std::vector<std::string> relations{"at least", "at most"};

  static SamplingRanges defaults() { return {}; }
};

Kwargs sample_kwargs(ConstraintKind kind, std::uint64_t seed, std::string_view prompt_context, Backend* backend,
                     const SamplingRanges& ranges = SamplingRanges::defaults());

// Builds the backend prompt used for one context-dependent kwarg.
std::string contextual_kwarg_prompt(ConstraintKind kind, std::string_view kwarg, std::string_view base_prompt);

std::string ordinal_word(std::int64_t n);

}  // namespace ifpref
