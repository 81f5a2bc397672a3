#include "ifpref/backend.hpp"

#include <algorithm>
#include <cmath>

#include "ifpref/error.hpp"
#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"

namespace ifpref {
namespace {

constexpr std::string_view kSelfEvalTemplate =
    R"(Evaluate whether the assistant's (partial) response to the given instruction follows the conditions specified in the instruction so far and does not violate any of the conditions. Complete the evaluation by using the words "yes" or "no", followed by an explanation for why the assistant's response follows or does not follow the given instruction so far.

Do NOT evaluate the conditions that can be checked automatically with Python code, including the ones listed below.
- DON'T EVALUATE: number of paragraphs/sentences/words/sections
- DON'T EVALUATE: existence of certain phrases/words/characters
- DON'T EVALUATE: capital or lowercase
Make sure to only evaluate the conditions that can be checked so far. For example, you cannot check if the response contains at least 20 sentences- this is because the given response is a partial, incomplete response and the full response later may possibly contain at least 20 sentences. Also, this can be checked automatically, so it corresponds to the first "DO NOT" condition listed above.

Instead, focus on the conditions that cannot be checked automatically and is more related to the content itself, as listed below.
- DO EVALUATE: whether the response follows the topic so far
- DO EVALUATE: whether the response matches the description of the characters/location/theme/etc laid out in the instruction so far
- DO EVALUATE: whether the response follows the tone requested in the instruction (e.g., persuasive, solemn, lively, etc.)
For example, if the response asks to write a conversation between a software engineer and a research scientist, make sure that there are two characters who are each software engineer and research scientist, respectively.

Instruction: {instruction}
Response so far: {response}

Begin your response by listing such content-based conditions and analyzing whether each condition has been satisfied on separate lines.
Be generous in terms of the evaluation criteria - only say "no" when you are sure that the partial response does not adhere to the content-based conditions. Otherwise, answer "yes" to each condition.
Most importantly, make sure to finish your evaluation with the phrase "Based on these evaluations, my overall evaluation is: ", followed by either "yes" or "no".
)";

constexpr std::string_view kTerminator = "my overall evaluation is:";

std::string label_of(std::string_view token) {
  std::string out;
  for (char c : token)
    if (textkit::is_ascii_alnum(c)) out.push_back(c);
  return textkit::to_lower_ascii(out);
}

}  // namespace

void validate(const GenerationRequest& request) {
  if (request.n_samples < 1) throw Error(ErrorCode::kPrecondition, "n_samples must be at least 1");
  if (!(request.temperature >= 0.0)) throw Error(ErrorCode::kPrecondition, "temperature must be non-negative");
  if (request.max_tokens < 1) throw Error(ErrorCode::kPrecondition, "max_tokens must be at least 1");
  if (request.messages.empty()) throw Error(ErrorCode::kPrecondition, "request has no messages");
}

double policy_score(std::span<const double> action_logprobs, double gamma) {
  if (action_logprobs.empty()) throw Error(ErrorCode::kEmptyAction, "policy score of an empty action");
  if (!(gamma > 0.0)) throw Error(ErrorCode::kPrecondition, "gamma must be positive");
  double sum = 0.0;
  for (double lp : action_logprobs) sum += lp;
  return std::exp(sum / std::pow(static_cast<double>(action_logprobs.size()), gamma));
}

SelfEvalConfig SelfEvalConfig::defaults() {
  SelfEvalConfig c;
  c.prompt_template = std::string(kSelfEvalTemplate);
  return c;
}

std::string_view default_self_eval_template() { return kSelfEvalTemplate; }

std::string render_self_eval_prompt(const SelfEvalConfig& config, std::string_view instruction,
                                    std::string_view partial_response) {
  std::string out = config.prompt_template.empty() ? std::string(kSelfEvalTemplate) : config.prompt_template;
  // Later slot first.
  const auto r = out.find("{response}");
  const auto i = out.find("{instruction}");
  if (r == std::string::npos || i == std::string::npos)
    throw Error(ErrorCode::kConfigError, "self-eval template needs {instruction} and {response} slots");
  if (r > i) {
    out.replace(r, 10, partial_response);
    out.replace(i, 13, instruction);
  } else {
    out.replace(i, 13, instruction);
    out.replace(r, 10, partial_response);
  }
  return out;
}

LabelProbabilities extract_label_probabilities(const GenerationResult& result, const SelfEvalConfig& config) {
  if (textkit::to_lower_ascii(result.text).find(kTerminator) == std::string::npos)
    throw Error(ErrorCode::kMissingFinalToken, "self-evaluation lacks the overall-evaluation terminator");
  const auto yes = label_of(config.yes_token);
  const auto no = label_of(config.no_token);
  LabelProbabilities p;

  if (!result.token_logprobs || result.token_logprobs->empty()) {
    auto words = textkit::split_words(result.text);
    if (!words.empty()) {
      const auto last = label_of(words.back());
      if (last == yes) p.yes = 1.0;
      if (last == no) p.no = 1.0;
    }
    return p;
  }

  const auto& tokens = *result.token_logprobs;
  std::size_t pos = tokens.size();
  while (pos > 0 && label_of(tokens[pos - 1].token).empty()) --pos;
  if (pos == 0) return p;
  const std::size_t final_index = pos - 1;

  if (result.top_logprobs && final_index < result.top_logprobs->size() &&
      !(*result.top_logprobs)[final_index].empty()) {
    for (const auto& alt : (*result.top_logprobs)[final_index]) {
      const auto label = label_of(alt.token);
      if (label == yes) p.yes = std::max(p.yes, std::exp(alt.logprob));
      if (label == no) p.no = std::max(p.no, std::exp(alt.logprob));
    }
    return p;
  }
  const auto label = label_of(tokens[final_index].token);
  if (label == yes) p.yes = std::exp(tokens[final_index].logprob);
  if (label == no) p.no = std::exp(tokens[final_index].logprob);
  return p;
}

double self_evaluate(Backend& backend, std::string_view instruction, std::string_view partial_response,
                     const SelfEvalConfig& config, std::uint64_t seed) {
  if (config.samples < 1) throw Error(ErrorCode::kPrecondition, "self-eval sample count must be at least 1");
  GenerationRequest req;
  req.messages = {{"user", render_self_eval_prompt(config, instruction, partial_response)}};
  req.temperature = config.temperature;
  req.max_tokens = 512;
  req.n_samples = config.samples;
  req.want_logprobs = true;
  req.top_logprobs = 5;
  req.seed = seed;
  req.purpose = "self_eval";
  auto results = backend.generate(req);
  if (static_cast<int>(results.size()) != config.samples)
    throw Error(ErrorCode::kMalformedResponse, "self-evaluation returned the wrong number of samples");
  double sum = 0.0;
  for (const auto& r : results) sum += self_eval_score(extract_label_probabilities(r, config));
  return sum / static_cast<double>(results.size());
}

}  // namespace ifpref
