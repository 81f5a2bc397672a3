#include "ifpref/http_backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ifpref/error.hpp"

namespace ifpref {
namespace {

using nlohmann::json;

std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

double parse_retry_after(const httplib::Result& res, double fallback) {
  if (!res || !res->has_header("Retry-After")) return fallback;
  try {
    return std::max(0.0, std::stod(res->get_header_value("Retry-After")));
  } catch (...) {
    return fallback;
  }
}

std::vector<TokenLogprob> read_alternatives(const json& arr) {
  std::vector<TokenLogprob> out;
  for (const auto& t : arr) out.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
  return out;
}

}  // namespace

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig c;
  c.base_url = env_or("IFPREF_API_BASE");
  c.api_key = env_or("IFPREF_API_KEY");
  c.model = env_or("IFPREF_MODEL");
  c.embedding_model = env_or("IFPREF_EMBEDDING_MODEL");
  if (c.base_url.empty()) throw Error(ErrorCode::kConfigError, "IFPREF_API_BASE is not set");
  if (c.model.empty()) throw Error(ErrorCode::kConfigError, "IFPREF_MODEL is not set");
  return c;
}

std::string chat_request_body(const GenerationRequest& request, const std::string& model) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json body = {{"model", model},
               {"messages", messages},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens},
               {"n", request.n_samples},
               {"seed", request.seed}};
  if (request.want_logprobs) {
    body["logprobs"] = true;
    if (request.top_logprobs > 0) body["top_logprobs"] = request.top_logprobs;
  }
  if (!request.stop.empty()) body["stop"] = request.stop;
  if (!request.messages.empty() && request.messages.back().role == "assistant") {
    // vLLM extension: extend the final assistant turn.
    body["continue_final_message"] = true;
    body["add_generation_prompt"] = false;
  }
  return body.dump();
}

std::vector<GenerationResult> parse_chat_response(const std::string& body, const GenerationRequest& request) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& choices = j.at("choices");
    std::vector<GenerationResult> out(choices.size());
    std::size_t position = 0;
    for (const auto& c : choices) {
      const auto index = c.value("index", position++);
      if (index >= out.size()) throw Error(ErrorCode::kMalformedResponse, "choice index out of range");
      auto& r = out[index];
      const auto& content = c.at("message").at("content");
      r.text = content.is_null() ? std::string() : content.get<std::string>();
      r.finish_reason = c.value("finish_reason", std::string("stop")) == "length" ? FinishReason::kLength
                                                                                : FinishReason::kStop;
      if (request.want_logprobs) {
        if (!c.contains("logprobs") || c["logprobs"].is_null() || !c["logprobs"].contains("content"))
          throw Error(ErrorCode::kMalformedResponse, "log-probabilities requested but missing");
        std::vector<TokenLogprob> tokens;
        std::vector<std::vector<TokenLogprob>> top;
        for (const auto& t : c["logprobs"]["content"]) {
          tokens.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
          top.push_back(t.contains("top_logprobs") ? read_alternatives(t["top_logprobs"]) : std::vector<TokenLogprob>{});
        }
        r.token_logprobs = std::move(tokens);
        if (request.top_logprobs > 0) r.top_logprobs = std::move(top);
      }
    }
    if (static_cast<int>(out.size()) != request.n_samples)
      throw Error(ErrorCode::kMalformedResponse, "server returned " + std::to_string(out.size()) + " choices, asked for " +
                                                     std::to_string(request.n_samples));
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unexpected response shape: ") + e.what());
  }
}

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
  if (!sleep_) sleep_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  if (config_.base_url.empty()) throw Error(ErrorCode::kConfigError, "HTTP backend needs a base URL");
  if (config_.max_attempts < 1 || config_.max_in_flight < 1 || config_.max_in_flight > 1024)
    throw Error(ErrorCode::kConfigError, "invalid retry or concurrency limits");
  if (config_.embedding_model.empty()) config_.embedding_model = config_.model;

  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kConfigError, "base URL needs a scheme");
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  origin_ = config_.base_url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? std::string() : config_.base_url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (prefix_.size() < 3 || prefix_.compare(prefix_.size() - 3, 3, "/v1") != 0) prefix_ += "/v1";
  slots_ = std::make_unique<std::counting_semaphore<1024>>(config_.max_in_flight);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::identity() const { return "http(" + origin_ + prefix_ + "," + config_.model + ")"; }

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  slots_->acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  httplib::Client client(origin_);
  const auto t = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(t));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  double backoff = config_.initial_backoff_seconds;
  std::string last_error = "no attempt made";
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    auto res = client.Post(prefix_ + path, headers, body, "application/json");
    const bool final_attempt = attempt == config_.max_attempts;
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      return res->body;
    } else if (res->status == 429) {
      const double wait = parse_retry_after(res, backoff);
      if (final_attempt) throw RateLimitedError("rate limited by " + origin_, wait);
      sleep_(std::min(wait, config_.max_backoff_seconds));
      backoff = std::min(backoff * 2.0, config_.max_backoff_seconds);
      continue;
    } else if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
    } else {
      throw Error(ErrorCode::kBackendError, "request rejected with status " + std::to_string(res->status) + ": " +
                                                res->body.substr(0, 400));
    }
    if (final_attempt) break;
    sleep_(backoff);
    backoff = std::min(backoff * 2.0, config_.max_backoff_seconds);
  }
  throw Error(ErrorCode::kBackendUnavailable,
              last_error + " after " + std::to_string(config_.max_attempts) + " attempts");
}

std::vector<GenerationResult> HttpBackend::generate(const GenerationRequest& request) {
  validate(request);
  if (request.want_logprobs && !config_.supports_logprobs)
    throw Error(ErrorCode::kMalformedResponse, "log-probabilities requested but the backend is configured without them");
  return parse_chat_response(post("/chat/completions", chat_request_body(request, config_.model)), request);
}

std::vector<Embedding> HttpBackend::embed(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  json body = {{"model", config_.embedding_model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto raw = post("/embeddings", body.dump());
  try {
    const auto j = json::parse(raw);
    std::vector<Embedding> out(texts.size());
    std::size_t seen = 0;
    for (const auto& item : j.at("data")) {
      const auto index = item.value("index", seen);
      if (index >= out.size()) throw Error(ErrorCode::kMalformedResponse, "embedding index out of range");
      out[index] = item.at("embedding").get<Embedding>();
      ++seen;
    }
    if (seen != texts.size()) throw Error(ErrorCode::kMalformedResponse, "embedding count mismatch");
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unexpected embedding response: ") + e.what());
  }
}

}  // namespace ifpref
