#include "ifpref/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ifpref/error.hpp"
#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"
#include "mock_responder.hpp"
#include "mock_vocab.hpp"

namespace ifpref {
namespace {

template <typename T, std::size_t N>
std::string_view pick(Rng& rng, const T (&items)[N]) {
  return items[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(N) - 1))];
}

const std::string& last_content(const GenerationRequest& r, std::string_view role) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it)
    if (it->role == role) return it->content;
  static const std::string empty;
  return empty;
}

const std::string& first_content(const GenerationRequest& r, std::string_view role) {
  for (const auto& m : r.messages)
    if (m.role == role) return m.content;
  static const std::string empty;
  return empty;
}

double token_logprob(std::uint64_t seed, std::size_t position, std::string_view token) {
  Rng rng(combine_seed(combine_seed(seed, position), hash_bytes(token)));
  return -(0.02 + 1.2 * rng.uniform01());
}

void attach_logprobs(GenerationResult& r, const std::vector<std::string>& tokens, std::uint64_t seed,
                     int top_k) {
  std::vector<TokenLogprob> lps;
  lps.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) lps.push_back({tokens[i], token_logprob(seed, i, tokens[i])});
  if (top_k > 0) {
    std::vector<std::vector<TokenLogprob>> top;
    for (const auto& t : lps) top.push_back({t});
    r.top_logprobs = std::move(top);
  }
  r.token_logprobs = std::move(lps);
}

std::vector<std::string> truncate_tokens(std::string& text, int max_tokens, FinishReason& reason) {
  auto tokens = mock::chunk_tokens(text);
  if (static_cast<int>(tokens.size()) > max_tokens) {
    tokens.resize(static_cast<std::size_t>(max_tokens));
    text.clear();
    for (const auto& t : tokens) text += t;
    reason = FinishReason::kLength;
  }
  return tokens;
}

std::string title_sentence(Rng& rng, int words) {
  std::string out;
  char prev = 0;
  for (int i = 0; i < words; ++i) {
    std::string w;
    do {
      w = std::string(pick(rng, mock::kFiller));
    } while (w.front() == prev);
    prev = w.front();
    w.front() = static_cast<char>(w.front() & ~0x20);
    if (i) out += ' ';
    out += w;
  }
  return out;
}

std::string kwarg_value(std::string_view purpose, Rng& rng) {
  const auto dot = purpose.rfind('.');
  const auto name = dot == std::string_view::npos ? purpose : purpose.substr(dot + 1);
  if (name == "keywords") {
    std::vector<std::string_view> pool(std::begin(mock::kKeywords), std::end(mock::kKeywords));
    rng.shuffle(std::span(pool));
    return std::string(pool[0]) + ", " + std::string(pool[1]) + ", " + std::string(pool[2]);
  }
  if (name == "first_word") return std::string(pick(rng, mock::kFirstWords));
  return title_sentence(rng, static_cast<int>(rng.uniform_int(4, 6)));
}

std::string propose_text(Rng& rng, const MockConfig::Vocabulary& vocab, int count) {
  auto choose = [&](const std::vector<std::string>& custom, const auto& builtin) {
    if (!custom.empty())
      return custom[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(custom.size()) - 1))];
    return std::string(pick(rng, builtin));
  };
  std::string out;
  for (int i = 1; i <= count; ++i) {
    out += std::to_string(i) + ". Write a " + choose(vocab.forms, mock::kForms) + " about " +
           choose(vocab.topics, mock::kTopics) + " " + choose(vocab.qualifiers, mock::kQualifiers) + ".\n";
  }
  return out;
}

std::string self_eval_text(double q) {
  std::string out = "- The response follows the requested topic so far: ";
  out += q >= 0.5 ? "yes" : "no";
  out += "\n- The response keeps the requested tone: yes\nBased on these evaluations, my overall evaluation is: ";
  out += q >= 0.5 ? "yes" : "no";
  return out;
}

}  // namespace

std::string mock_strip_constraints(std::string_view prompt) {
  static constexpr std::string_view kMarkers[] = {
      "in exactly", "at least",  "at most",   "paragraph", "bold",       "capital",   "lowercase",
      "uppercase",  "exclamation", "parenthes", "placeholder", "tl;dr",   "quotation", "separator",
      "words",      "sentence",  "letter",    "keyword",   "header",     "section",   "vowel",
      "period",     "italic",    "alliteration", "highlight", "comma",    "json",      "bullet",
      "title",      "postscript", "p.s.",     "end your",  "start your", "format",    "wrap your",
  };
  auto has_marker = [&](std::string_view s) {
    const auto lowered = textkit::to_lower_ascii(s);
    return std::any_of(std::begin(kMarkers), std::end(kMarkers),
                       [&](std::string_view m) { return lowered.find(m) != std::string::npos; });
  };
  std::string kept;
  for (const auto& span : textkit::split_sentences(prompt)) {
    const auto sentence = span.view(prompt);
    if (has_marker(sentence)) continue;
    if (!kept.empty()) kept += ' ';
    kept += textkit::collapse_whitespace(sentence);
  }
  if (!kept.empty()) return kept;
  // Every sentence mentions a constraint: keep the text before the first marker.
  const auto lowered = textkit::to_lower_ascii(prompt);
  std::size_t cut = lowered.size();
  for (auto m : kMarkers) cut = std::min(cut, lowered.find(m));
  auto head = textkit::trim(prompt.substr(0, cut));
  while (!head.empty() && (head.back() == ',' || head.back() == ';')) head = textkit::trim(head.substr(0, head.size() - 1));
  return textkit::collapse_whitespace(head);
}

double MockConfig::satisfaction_for(ConstraintKind kind) const {
  auto it = satisfaction.find(kind);
  return it == satisfaction.end() ? default_satisfaction : it->second;
}

MockConfig MockConfig::from_json(const nlohmann::json& j) {
  MockConfig c;
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "mock config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else if (key == "satisfaction") {
      if (value.is_number()) {
        c.default_satisfaction = value.get<double>();
        continue;
      }
      for (const auto& [kind, p] : value.items()) {
        const double prob = p.get<double>();
        if (!(prob >= 0.0 && prob <= 1.0)) throw Error(ErrorCode::kConfigError, "satisfaction must lie in [0, 1]");
        if (kind == "default") {
          c.default_satisfaction = prob;
          continue;
        }
        auto k = kind_from_id(kind);
        if (!k) throw Error(ErrorCode::kUnknownConstraint, "unknown constraint '" + kind + "' in mock config");
        c.satisfaction[*k] = prob;
      }
    } else if (key == "supports_logprobs") {
      c.supports_logprobs = value.get<bool>();
    } else if (key == "embedding_dim") {
      c.embedding_dim = value.get<int>();
      if (c.embedding_dim < 1) throw Error(ErrorCode::kConfigError, "embedding_dim must be positive");
    } else if (key == "vocabulary") {
      for (const auto& [name, list] : value.items()) {
        auto words = list.get<std::vector<std::string>>();
        if (name == "topics") c.vocabulary.topics = std::move(words);
        else if (name == "forms") c.vocabulary.forms = std::move(words);
        else if (name == "qualifiers") c.vocabulary.qualifiers = std::move(words);
        else throw Error(ErrorCode::kConfigError, "unknown vocabulary list '" + name + "'");
      }
    } else {
      throw Error(ErrorCode::kConfigError, "unknown mock config key '" + key + "'");
    }
  }
  if (!(c.default_satisfaction >= 0.0 && c.default_satisfaction <= 1.0))
    throw Error(ErrorCode::kConfigError, "satisfaction must lie in [0, 1]");
  return c;
}

nlohmann::json MockConfig::to_json() const {
  nlohmann::json sat = {{"default", default_satisfaction}};
  for (const auto& [k, p] : satisfaction) sat[std::string(kind_id(k))] = p;
  nlohmann::json j = {{"seed", seed},
                      {"satisfaction", sat},
                      {"supports_logprobs", supports_logprobs},
                      {"embedding_dim", embedding_dim}};
  nlohmann::json vocab = nlohmann::json::object();
  if (!vocabulary.topics.empty()) vocab["topics"] = vocabulary.topics;
  if (!vocabulary.forms.empty()) vocab["forms"] = vocabulary.forms;
  if (!vocabulary.qualifiers.empty()) vocab["qualifiers"] = vocabulary.qualifiers;
  if (!vocab.empty()) j["vocabulary"] = vocab;
  return j;
}

MockBackend::MockBackend(MockConfig config) : config_(std::move(config)) {}

std::string MockBackend::identity() const {
  std::ostringstream os;
  os << "mock(seed=" << config_.seed << ",p=" << config_.default_satisfaction << ")";
  return os.str();
}

std::vector<GenerationResult> MockBackend::generate(const GenerationRequest& request) {
  validate(request);
  if (request.want_logprobs && !config_.supports_logprobs)
    throw Error(ErrorCode::kMalformedResponse, "log-probabilities requested but this backend does not expose them");

  const auto& purpose = request.purpose;
  const bool continuing = request.messages.back().role == "assistant";
  const std::string prefix = continuing ? request.messages.back().content : std::string();

  std::vector<GenerationResult> out;
  out.reserve(static_cast<std::size_t>(request.n_samples));
  for (int i = 0; i < request.n_samples; ++i) {
    const std::uint64_t sample = request.temperature == 0.0 ? 0 : static_cast<std::uint64_t>(i);
    const std::uint64_t seed = combine_seed(combine_seed(config_.seed, request.seed), sample);
    GenerationResult r;
    std::vector<std::string> tokens;

    if (purpose == "self_eval") {
      Rng rng(combine_seed(seed, hash_bytes(last_content(request, "user"))));
      const double q = 0.1 + 0.8 * rng.uniform01();
      r.text = self_eval_text(q);
      tokens = mock::chunk_tokens(r.text);
      if (request.want_logprobs) {
        attach_logprobs(r, tokens, seed, request.top_logprobs);
        const bool yes = q >= 0.5;
        r.token_logprobs->back().logprob = std::log(yes ? q : 1.0 - q);
        if (r.top_logprobs) {
          std::vector<TokenLogprob> alts = {{"yes", std::log(q)}, {"no", std::log(1.0 - q)}};
          if (!yes) std::swap(alts[0], alts[1]);
          r.top_logprobs->back() = alts;
        }
      }
      out.push_back(std::move(r));
      continue;
    }

    if (purpose.empty() || purpose == "respond") {
      auto c = mock::continue_response(config_, first_content(request, "user"), request.constraints, prefix,
                                       request.max_tokens, seed);
      r.text = std::move(c.text);
      tokens = std::move(c.tokens);
      r.finish_reason = c.finished ? FinishReason::kStop : FinishReason::kLength;
    } else {
      Rng rng(combine_seed(seed, hash_bytes(last_content(request, "user"))));
      if (purpose == "strip") {
        std::string_view content = last_content(request, "user");
        if (const auto at = content.rfind("Instruction: "); at != std::string_view::npos) content.remove_prefix(at + 13);
        r.text = mock_strip_constraints(content);
      } else if (purpose == "propose") {
        r.text = propose_text(rng, config_.vocabulary, 20);
      } else if (purpose.rfind("kwarg:", 0) == 0) {
        r.text = kwarg_value(purpose, rng);
      } else if (purpose == "render") {
        const auto& content = last_content(request, "user");
        const auto at = content.rfind("Draft:\n");
        r.text = at == std::string::npos ? content : content.substr(at + 7);
      } else {
        throw Error(ErrorCode::kPrecondition, "mock backend has no handler for purpose '" + purpose + "'");
      }
      tokens = truncate_tokens(r.text, request.max_tokens, r.finish_reason);
    }

    for (const auto& stop : request.stop) {
      if (stop.empty()) continue;
      const auto at = r.text.find(stop);
      if (at == std::string::npos) continue;
      r.text.resize(at);
      tokens = mock::chunk_tokens(r.text);
      r.finish_reason = FinishReason::kStop;
    }
    if (request.want_logprobs) attach_logprobs(r, tokens, seed, request.top_logprobs);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Embedding> MockBackend::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  const auto dim = static_cast<std::size_t>(config_.embedding_dim);
  for (const auto& text : texts) {
    Embedding v(dim, 0.0);
    const std::string padded = " " + textkit::to_lower_ascii(textkit::collapse_whitespace(text)) + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
      v[hash_bytes(std::string_view(padded).substr(i, 3)) % dim] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) {
      v[0] = 1.0;
    } else {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ifpref
