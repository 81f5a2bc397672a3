#pragma once

// Prompt synthesis: strip constraints from seed prompts, propose new base
// prompts from few-shot examples, drop near-duplicates, attach sampled
// constraints and render the final instruction.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifpref/backend.hpp"
#include "ifpref/constraints.hpp"

namespace ifpref {

struct PromptRecord {
  std::string id;
  std::string base_prompt;
  std::string final_prompt;
  std::vector<ConstraintSpec> specs;
  int k = 0;
  nlohmann::json provenance = nlohmann::json::object();

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

nlohmann::json to_json(const PromptRecord& r);
PromptRecord prompt_record_from_json(const nlohmann::json& j);

struct SeedPrompt {
  std::string prompt;
  std::vector<ConstraintSpec> constraints;  // present for IFEval-layout seeds
};

// JSONL with {"prompt", "instruction_id_list", "kwargs"} (IFEval) or
// {"prompt"}; a line that is not a JSON object is taken as raw prompt text.
std::vector<SeedPrompt> read_seed_prompts(const std::filesystem::path& path);

struct StripResult {
  std::vector<std::string> base_prompts;  // in seed order, failures removed
  std::vector<std::string> dropped;       // one reason per removed seed
};

StripResult strip_constraints(std::span<const std::string> seed_prompts, Backend& backend, std::uint64_t seed);

inline constexpr int kProposalBatch = 20;

std::vector<std::string> propose_base_prompts(std::span<const std::string> base_pool, std::size_t count,
                                              Backend& backend, std::uint64_t seed, std::size_t fewshot_size = 8);

// Order-stable greedy filter; a candidate is dropped when its similarity to
// an existing text or an earlier kept candidate is >= threshold.
std::vector<std::string> dedup(std::span<const std::string> candidates, std::span<const std::string> existing,
                               double threshold, Backend& backend);

enum class RenderMode { kTemplate, kBackend };

std::string_view render_mode_name(RenderMode m);
RenderMode parse_render_mode(std::string_view s);

// Canned natural-language clause for one constraint.
std::string constraint_clause(const ConstraintSpec& spec);

std::string render_final_prompt(const std::string& base_prompt, std::span<const ConstraintSpec> specs,
                                Backend* backend, RenderMode mode = RenderMode::kTemplate,
                                std::size_t max_words = 512, std::uint64_t seed = 0);

struct SynthesisConfig {
  std::vector<int> k_values{4, 5, 6};
  std::size_t prompts_per_k = 100;
  double dedup_threshold = 0.85;
  std::size_t fewshot_size = 8;
  RenderMode render_mode = RenderMode::kTemplate;
  std::uint64_t seed = 0;
  std::size_t max_prompt_words = 512;
  int max_proposal_rounds = 50;
  ConflictTable conflicts = ConflictTable::defaults();
  SamplingRanges ranges = SamplingRanges::defaults();

  // Keys: k_values, prompts_per_k, dedup_threshold, fewshot_size,
  // render_mode, seeds, max_prompt_words, max_proposal_rounds, conflict_table.
  static SynthesisConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
};

struct SynthesisResult {
  std::vector<PromptRecord> records;
  std::vector<std::string> warnings;
};

// Specs for one prompt: a conflict-free combination of k kinds with
// sampled kwargs. Throws kNoValidCombination if none is found.
std::vector<ConstraintSpec> sample_constraint_set(std::size_t k, std::uint64_t seed, std::string_view base_prompt,
                                                  Backend& backend, const ConflictTable& table,
                                                  const SamplingRanges& ranges);

// Records already present in `checkpoint` are kept and not regenerated; new
// records are appended to it as they are finished.
SynthesisResult synthesize(const SynthesisConfig& config, std::span<const SeedPrompt> seeds, Backend& backend,
                           const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

}  // namespace ifpref
