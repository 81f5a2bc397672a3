#pragma once

// Deterministic offline backend. Policy responses are rendered from a
// per-prompt blueprint so that each constraint is satisfied with a
// configurable probability; partial responses can be continued, which makes
// tree search over response prefixes reproducible without any model.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifpref/backend.hpp"

namespace ifpref {

struct MockConfig {
  std::uint64_t seed = 0;
  double default_satisfaction = 0.6;
  std::map<ConstraintKind, double> satisfaction;  // per-kind override
  bool supports_logprobs = true;
  int embedding_dim = 4096;

  // Optional replacements for the built-in prompt-proposal word lists.
  struct Vocabulary {
    std::vector<std::string> topics;
    std::vector<std::string> forms;
    std::vector<std::string> qualifiers;
  } vocabulary;

  double satisfaction_for(ConstraintKind kind) const;

  // {"seed": 1, "satisfaction": {"default": 0.6, "tldr_summary": 0.9},
  //  "supports_logprobs": true, "embedding_dim": 4096,
  //  "vocabulary": {"topics": [...], "forms": [...], "qualifiers": [...]}}
  static MockConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockConfig config = {});

  std::vector<GenerationResult> generate(const GenerationRequest& request) override;
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  bool supports_logprobs() const override { return config_.supports_logprobs; }
  std::string identity() const override;

  const MockConfig& config() const { return config_; }

 private:
  MockConfig config_;
};

// Exposed for tests: the de-constraining rule the mock applies to seed prompts.
std::string mock_strip_constraints(std::string_view prompt);

}  // namespace ifpref
