#pragma once

// Preference-pair curation by rejection sampling and pair extraction under
// correctness criteria. Tree search lives in mcts.hpp.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifpref/backend.hpp"
#include "ifpref/synthesis.hpp"
#include "ifpref/verify.hpp"

namespace ifpref {

struct CurationCriteria {
  std::vector<int> chosen;    // sorted, unique
  std::vector<int> rejected;  // sorted, unique

  // Throws kPrecondition unless both sets are non-empty, within [0, k] and
  // max(rejected) < min(chosen). A negative k skips the range check.
  void validate(int k = -1) const;
  bool chosen_ok(int correct) const;
  bool rejected_ok(int correct) const;

  // "c=4/5,r=0/1/2/3"
  std::string label() const;
  // Comma-separated lists, e.g. ("4", "1,2,3").
  static CurationCriteria parse(std::string_view chosen_list, std::string_view rejected_list);

  friend bool operator==(const CurationCriteria&, const CurationCriteria&) = default;
  friend auto operator<=>(const CurationCriteria&, const CurationCriteria&) = default;
};

nlohmann::json to_json(const CurationCriteria& c);
CurationCriteria criteria_from_json(const nlohmann::json& j);

enum class PairSource { kRs, kMcts };
std::string_view source_name(PairSource s);
PairSource parse_source(std::string_view s);

struct TreePath {
  std::vector<int> parent_path;  // node ids from the global root to the sibling set's parent
  int chosen_node = -1;
  int rejected_node = -1;

  friend bool operator==(const TreePath&, const TreePath&) = default;
};

struct PreferencePair {
  std::string prompt_id;
  PairSource source = PairSource::kRs;
  ScoredResponse chosen;
  ScoredResponse rejected;
  std::size_t shared_prefix_chars = 0;
  CurationCriteria criteria;
  std::optional<TreePath> tree_path;
};

std::size_t common_prefix_chars(std::string_view a, std::string_view b);

struct RsResult {
  std::vector<ScoredResponse> responses;  // generation order
  std::vector<bool> collision;            // text equals an earlier sample
};

// n independent samples for one prompt, scored against its specs.
RsResult rs_generate(const PromptRecord& prompt, int n, Backend& backend, double temperature = 1.0,
                     std::uint64_t seed = 0);

// Responses are deduplicated by text (first occurrence kept), split into
// chosen- and rejected-eligible, each sorted by correct_count descending then
// index ascending, and paired position by position.
std::vector<PreferencePair> extract_pairs_rs(const std::string& prompt_id, std::span<const ScoredResponse> scored,
                                             const CurationCriteria& criteria);

// Re-verifies both texts against `specs` and checks every pair invariant.
bool audit_pair(const PreferencePair& pair, std::span<const ConstraintSpec> specs, std::string* why = nullptr);

struct YieldCount {
  std::size_t unique_prompts = 0;
  std::size_t total_pairs = 0;
  friend bool operator==(const YieldCount&, const YieldCount&) = default;
};

// criteria label -> source -> counts
using YieldTable = std::map<std::string, std::map<std::string, YieldCount>>;
YieldTable yield_stats(std::span<const PreferencePair> pairs);

struct RsCuration {
  std::vector<RsResult> results;  // per prompt, input order
  std::vector<PreferencePair> pairs;
};

// Samples every prompt (in parallel) and extracts pairs for each criteria.
RsCuration curate_rs(std::span<const PromptRecord> prompts, int n, std::span<const CurationCriteria> criteria,
                     Backend& backend, double temperature, std::uint64_t seed);

}  // namespace ifpref
