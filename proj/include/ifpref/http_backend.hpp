#pragma once

// Client for OpenAI-style chat-completion servers (vLLM, TGI, hosted APIs).

#include <functional>
#include <memory>
#include <semaphore>
#include <string>

#include "ifpref/backend.hpp"

namespace ifpref {

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:8000 or https://host/v1
  std::string api_key;
  std::string model;
  std::string embedding_model;  // defaults to `model`
  double timeout_seconds = 120.0;
  int max_attempts = 5;
  double initial_backoff_seconds = 0.5;
  double max_backoff_seconds = 16.0;
  int max_in_flight = 8;
  bool supports_logprobs = true;

  // IFPREF_API_BASE, IFPREF_API_KEY, IFPREF_MODEL, IFPREF_EMBEDDING_MODEL.
  static HttpBackendConfig from_env();
};

class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(double seconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});
  ~HttpBackend() override;

  std::vector<GenerationResult> generate(const GenerationRequest& request) override;
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  bool supports_logprobs() const override { return config_.supports_logprobs; }
  std::string identity() const override;

  const HttpBackendConfig& config() const { return config_; }

 private:
  std::string post(const std::string& path, const std::string& body);

  HttpBackendConfig config_;
  Sleeper sleep_;
  std::string origin_;  // scheme://host[:port]
  std::string prefix_;  // path ending in /v1
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

// Exposed for tests.
std::string chat_request_body(const GenerationRequest& request, const std::string& model);
std::vector<GenerationResult> parse_chat_response(const std::string& body, const GenerationRequest& request);

}  // namespace ifpref
