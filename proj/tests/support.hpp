#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "ifpref/backend.hpp"
#include "ifpref/mock_backend.hpp"
#include "ifpref/synthesis.hpp"

namespace ifpref::testing {

// Backend whose generate() is a caller-supplied function.
class ScriptedBackend final : public Backend {
 public:
  using Handler = std::function<std::vector<GenerationResult>(const GenerationRequest&)>;

  explicit ScriptedBackend(Handler h) : handler_(std::move(h)) {}

  std::vector<GenerationResult> generate(const GenerationRequest& r) override { return handler_(r); }
  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    return MockBackend().embed(texts);
  }
  bool supports_logprobs() const override { return true; }
  std::string identity() const override { return "scripted"; }

 private:
  Handler handler_;
};

// Forwards to a mock and counts generate() calls per request purpose.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(MockConfig c = {}) : inner_(std::move(c)) {}

  std::vector<GenerationResult> generate(const GenerationRequest& r) override {
    {
      std::lock_guard lock(mu_);
      ++calls_[r.purpose];
    }
    return inner_.generate(r);
  }
  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    embed_calls_ += 1;
    return inner_.embed(texts);
  }
  bool supports_logprobs() const override { return inner_.supports_logprobs(); }
  std::string identity() const override { return inner_.identity(); }

  int calls(const std::string& purpose) {
    std::lock_guard lock(mu_);
    return calls_[purpose];
  }
  int embed_calls() const { return embed_calls_; }

 private:
  MockBackend inner_;
  std::mutex mu_;
  std::map<std::string, int> calls_;
  std::atomic<int> embed_calls_{0};
};

// Self-evaluation verdict whose final position carries P(yes) and P(no).
inline GenerationResult self_eval_result(double p_yes, double p_no) {
  GenerationResult r;
  r.text = "The response follows the instruction, so my overall evaluation is: yes";
  r.token_logprobs = std::vector<TokenLogprob>{{" is:", -0.01}, {" yes", std::log(p_yes)}};
  r.top_logprobs = std::vector<std::vector<TokenLogprob>>{{}, {{" yes", std::log(p_yes)}, {" no", std::log(p_no)}}};
  return r;
}

inline std::vector<SeedPrompt> sample_seeds() {
  std::vector<SeedPrompt> seeds;
  for (const char* p :
       {"Write a haiku about winter mornings. Use at least 3 words in bold.",
        "Describe the history of the printing press in exactly 4 paragraphs.",
        "Draft an email to a landlord about a broken heater. End your response with a P.S.",
        "Explain photosynthesis to a child. Do not use commas.",
        "Write a product review for noise cancelling headphones in at most 200 words.",
        "Summarize the plot of Hamlet. Wrap your response in double quotes.",
        "Give tips for a first marathon. Use all capital letters.",
        "Compose a limerick about a clumsy cat. Include the keyword yarn.",
        "Write a speech for a school graduation with a title in double angular brackets.",
        "Plan a three day trip to Kyoto. Answer with at least 5 bullet points.",
        "Propose a name for a bakery and justify it in two sentences.",
        "Outline a beginner workout routine. Highlight at least 2 sections."})
    seeds.push_back({p, {}});
  return seeds;
}

}  // namespace ifpref::testing
