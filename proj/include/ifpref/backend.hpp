#pragma once

// Text-generation backend abstraction: sampling with log-probabilities,
// self-evaluation and embeddings.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ifpref/constraints.hpp"

namespace ifpref {

struct Message {
  std::string role;  // system | user | assistant
  std::string content;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct GenerationRequest {
  std::vector<Message> messages;  // a trailing assistant message is continued
  double temperature = 1.0;
  int max_tokens = 1024;
  int n_samples = 1;
  bool want_logprobs = false;
  int top_logprobs = 0;
  std::vector<std::string> stop;
  std::uint64_t seed = 0;

  // Structured context ignored by HTTP backends; simulated backends use it
  // in place of reading the prose.
  std::string purpose;  // respond | self_eval | strip | propose | kwarg | render
  std::vector<ConstraintSpec> constraints;
};

enum class FinishReason { kStop, kLength };

struct GenerationResult {
  std::string text;
  std::optional<std::vector<TokenLogprob>> token_logprobs;
  // Alternatives at each position, when requested and supported.
  std::optional<std::vector<std::vector<TokenLogprob>>> top_logprobs;
  FinishReason finish_reason = FinishReason::kStop;
};

using Embedding = std::vector<double>;

void validate(const GenerationRequest& request);

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::vector<GenerationResult> generate(const GenerationRequest& request) = 0;
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
  virtual bool supports_logprobs() const = 0;
  virtual std::string identity() const = 0;
};

// exp[(1 / |a|^gamma) * sum(logprobs)]; throws kEmptyAction on empty input.
double policy_score(std::span<const double> action_logprobs, double gamma = 1.0);

struct SelfEvalConfig {
  std::string prompt_template;
  int samples = 1;  // L
  std::string yes_token = "yes";
  std::string no_token = "no";
  double temperature = 1.0;

  static SelfEvalConfig defaults();
};

// The self-evaluation prompt; {instruction} and {response} are substituted.
std::string_view default_self_eval_template();
std::string render_self_eval_prompt(const SelfEvalConfig& config, std::string_view instruction,
                                    std::string_view partial_response);

struct LabelProbabilities {
  double yes = 0.0;
  double no = 0.0;
};

// Reads P(yes), P(no) from the final generated position. Throws
// kMissingFinalToken when the "my overall evaluation is:" terminator is absent.
LabelProbabilities extract_label_probabilities(const GenerationResult& result, const SelfEvalConfig& config);

inline double self_eval_score(const LabelProbabilities& p) { return (1.0 + p.yes - p.no) / 2.0; }

double self_evaluate(Backend& backend, std::string_view instruction, std::string_view partial_response,
                     const SelfEvalConfig& config, std::uint64_t seed);

}  // namespace ifpref
