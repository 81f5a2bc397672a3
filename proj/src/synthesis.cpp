#include "ifpref/synthesis.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ifpref/dataset.hpp"
#include "ifpref/error.hpp"
#include "ifpref/kernels.hpp"
#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"

namespace ifpref {
namespace {

using nlohmann::json;

// Keeps a candidate whose similarity is within rounding of the threshold out.
constexpr double kSimilarityEpsilon = 1e-9;

struct FewShot {
  const char* seed;
  const char* base;
};

constexpr FewShot kStripExamples[] = {
    {"Write a poem about autumn leaves. Your answer must contain exactly 3 paragraphs separated by ***.",
     "Write a poem about autumn leaves."},
    {"Explain how vaccines work to a ten year old. Do not use any commas and wrap your entire response in double "
     "quotation marks.",
     "Explain how vaccines work to a ten year old."},
    {"Write a cover letter for a barista position. Include the keywords coffee and team. End your response with "
     "\"Is there anything else I can help with?\"",
     "Write a cover letter for a barista position."},
    {"Give me a short history of the bicycle.", "Give me a short history of the bicycle."},
};

std::string strip_instruction(const std::string& seed) {
  return "Remove every formatting or length requirement from the instruction below and keep only the underlying "
         "task. Reply with the rewritten instruction only.\n\nInstruction: " +
         seed;
}

std::string number_prefix_stripped(std::string_view line) {
  auto t = textkit::trim(line);
  std::size_t i = 0;
  while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
  if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) t = textkit::trim(t.substr(i + 1));
  return std::string(t);
}

std::string in_quotes(std::string_view s) { return "\"" + std::string(s) + "\""; }

std::string relation_words(const ConstraintSpec& spec) { return std::string(relation_name(spec.relation())); }

std::size_t word_count(std::string_view s) { return textkit::split_words(s).size(); }

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string aggregate_message(const std::vector<std::string>& failures, std::size_t total, std::string_view what) {
  return std::to_string(failures.size()) + " of " + std::to_string(total) + " " + std::string(what) +
         " requests failed; first: " + failures.front();
}

}  // namespace

json to_json(const PromptRecord& r) {
  json constraints = json::array();
  for (const auto& s : r.specs) constraints.push_back(to_json(s));
  return {{"id", r.id},
          {"base_prompt", r.base_prompt},
          {"final_prompt", r.final_prompt},
          {"k", r.k},
          {"constraints", constraints},
          {"provenance", r.provenance}};
}

PromptRecord prompt_record_from_json(const json& j) {
  try {
    PromptRecord r;
    r.id = j.at("id").get<std::string>();
    r.base_prompt = j.at("base_prompt").get<std::string>();
    r.final_prompt = j.at("final_prompt").get<std::string>();
    r.k = j.at("k").get<int>();
    for (const auto& c : j.at("constraints")) r.specs.push_back(spec_from_json(c));
    r.provenance = j.value("provenance", json::object());
    if (static_cast<std::size_t>(r.k) != r.specs.size())
      throw Error(ErrorCode::kInvalidSpec, "prompt " + r.id + ": k does not match its constraint count");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("bad prompt record: ") + e.what());
  }
}

std::vector<SeedPrompt> read_seed_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open seed file " + path.string());
  std::vector<SeedPrompt> out;
  std::string line;
  while (std::getline(in, line)) {
    if (textkit::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (!j.is_object()) {
      out.push_back({std::string(textkit::trim(line)), {}});
      continue;
    }
    if (!j.contains("prompt") || !j["prompt"].is_string())
      throw Error(ErrorCode::kIoError, "seed record without a prompt in " + path.string());
    SeedPrompt seed{j["prompt"].get<std::string>(), {}};
    if (j.contains("instruction_id_list") && j["instruction_id_list"].is_array()) {
      const auto& ids = j["instruction_id_list"];
      const json kwargs = j.value("kwargs", json::array());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        // IFEval ids carry a category prefix ("punctuation:no_comma").
        auto id = ids[i].get<std::string>();
        if (auto colon = id.find(':'); colon != std::string::npos) id = id.substr(colon + 1);
        json kw = i < kwargs.size() && kwargs[i].is_object() ? kwargs[i] : json::object();
        for (auto it = kw.begin(); it != kw.end();)
          it = it.value().is_null() ? kw.erase(it) : std::next(it);
        try {
          seed.constraints.push_back(spec_from_json({{"instruction_id", id}, {"kwargs", kw}}));
        } catch (const Error&) {
          // Constraint outside the supported set; the prompt text is still usable.
        }
      }
    }
    out.push_back(std::move(seed));
  }
  return out;
}

StripResult strip_constraints(std::span<const std::string> seed_prompts, Backend& backend, std::uint64_t seed) {
  if (seed_prompts.empty()) throw Error(ErrorCode::kPrecondition, "no seed prompts to strip");
  const std::size_t n = seed_prompts.size();
  std::vector<std::string> outputs(n);
  std::vector<std::string> errors(n);
  kernels::parallel_for(n, [&](std::size_t i) {
    GenerationRequest req;
    req.messages.push_back({"system", "You rewrite instructions so that only the core task remains."});
    for (const auto& ex : kStripExamples) {
      req.messages.push_back({"user", strip_instruction(ex.seed)});
      req.messages.push_back({"assistant", ex.base});
    }
    req.messages.push_back({"user", strip_instruction(seed_prompts[i])});
    req.temperature = 0.0;
    req.max_tokens = 512;
    req.seed = combine_seed(seed, i);
    req.purpose = "strip";
    try {
      auto results = backend.generate(req);
      if (!results.empty()) outputs[i] = std::string(textkit::trim(results.front().text));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::string> failures;
  StripResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      failures.push_back("seed " + std::to_string(i) + ": " + errors[i]);
    } else if (outputs[i].empty()) {
      out.dropped.push_back("seed " + std::to_string(i) + ": empty output");
    } else {
      out.base_prompts.push_back(std::move(outputs[i]));
    }
  }
  if (!failures.empty()) throw Error(ErrorCode::kBackendError, aggregate_message(failures, n, "strip"));
  return out;
}

std::vector<std::string> propose_base_prompts(std::span<const std::string> base_pool, std::size_t count,
                                              Backend& backend, std::uint64_t seed, std::size_t fewshot_size) {
  if (count == 0) return {};
  if (fewshot_size == 0 || base_pool.size() < fewshot_size)
    throw Error(ErrorCode::kPrecondition, "base pool has " + std::to_string(base_pool.size()) +
                                              " prompts, need at least " + std::to_string(fewshot_size));
  const std::size_t batches = (count + kProposalBatch - 1) / kProposalBatch;
  std::vector<std::vector<std::string>> per_batch(batches);
  kernels::parallel_for(batches, [&](std::size_t b) {
    Rng rng(combine_seed(seed, b));
    std::vector<std::size_t> order(base_pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    std::ostringstream os;
    os << "Here are some example instructions:\n";
    for (std::size_t i = 0; i < fewshot_size; ++i) os << (i + 1) << ". " << base_pool[order[i]] << "\n";
    os << "\nWrite " << kProposalBatch
       << " new instructions on different topics in the same style. Give one per line, numbered 1 to "
       << kProposalBatch << ".";

    GenerationRequest req;
    req.messages = {{"user", os.str()}};
    req.temperature = 1.0;
    req.max_tokens = 2048;
    req.seed = combine_seed(seed, b);
    req.purpose = "propose";
    auto results = backend.generate(req);
    if (results.empty()) throw Error(ErrorCode::kBackendError, "backend returned no proposal batch");
    for (auto line : textkit::split_lines(results.front().text)) {
      auto text = number_prefix_stripped(line);
      if (!text.empty()) per_batch[b].push_back(std::move(text));
    }
  });
  std::vector<std::string> out;
  for (auto& batch : per_batch)
    for (auto& p : batch) out.push_back(std::move(p));
  return out;
}

std::vector<std::string> dedup(std::span<const std::string> candidates, std::span<const std::string> existing,
                               double threshold, Backend& backend) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::kPrecondition, "dedup threshold must lie in (0, 1]");
  if (candidates.empty()) return {};
  auto cand_emb = backend.embed(candidates);
  std::vector<Embedding> rows = existing.empty() ? std::vector<Embedding>{} : backend.embed(existing);
  if (cand_emb.size() != candidates.size() || rows.size() != existing.size())
    throw Error(ErrorCode::kBackendError, "embedding count mismatch");

  std::set<std::string> seen(existing.begin(), existing.end());
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (seen.contains(candidates[i])) continue;
    if (kernels::max_similarity(cand_emb[i], rows) >= threshold - kSimilarityEpsilon) continue;
    seen.insert(candidates[i]);
    rows.push_back(std::move(cand_emb[i]));
    kept.push_back(candidates[i]);
  }
  return kept;
}

std::string_view render_mode_name(RenderMode m) { return m == RenderMode::kTemplate ? "template" : "backend"; }

RenderMode parse_render_mode(std::string_view s) {
  if (s == "template") return RenderMode::kTemplate;
  if (s == "backend") return RenderMode::kBackend;
  throw Error(ErrorCode::kConfigError, "render_mode must be template or backend, got '" + std::string(s) + "'");
}

std::string constraint_clause(const ConstraintSpec& spec) {
  using K = ConstraintKind;
  const auto num = [&](const char* name) { return std::to_string(spec.integer(name)); };
  switch (spec.kind) {
    case K::kAlliteration:
      return "Include an alliteration of at least " + num("num_alliteration_words") +
             " consecutive words that begin with the same letter.";
    case K::kAscendingNumWords:
      return "Make every sentence contain more words than the sentence before it.";
    case K::kEditResponse:
      return "Write a first draft, then a line containing only " + in_quotes(spec.text("separator")) +
             ", then an improved version of the draft.";
    case K::kEndQuotation:
      return "Wrap the final sentence of your response in double quotation marks.";
    case K::kFirstLetterCapital:
      return "Start every word of your response with a capital letter.";
    case K::kFrequencyLongWords:
      return "Use " + relation_words(spec) + " " + num("num_words") + " words that are at least " +
             num("word_length") + " letters long.";
    case K::kKeywordsOrdered: {
      const auto& kws = spec.strings("keywords");
      std::string list;
      for (std::size_t i = 0; i < kws.size(); ++i) {
        if (i > 0) list += i + 1 == kws.size() ? " and " : ", ";
        list += in_quotes(kws[i]);
      }
      return "Mention the keywords " + list + " in exactly that order.";
    }
    case K::kMaxWordLength:
      return "Do not use any word longer than " + num("max_word_length") + " letters.";
    case K::kNoPeriod:
      return "Do not use any period characters in your response.";
    case K::kNthSentenceCapital:
      return "Write the " + ordinal_word(spec.integer("nth_sentence")) +
             " sentence entirely in capital letters and keep every other sentence in normal case.";
    case K::kNthSentenceFirstWord:
      return "Write at least " + num("num_sentences") + " sentences and start the " +
             ordinal_word(spec.integer("nth_sentence")) + " sentence with the word " + in_quotes(spec.text("first_word")) +
             ".";
    case K::kNumWordsPerSentence:
      return "Every sentence must contain " + relation_words(spec) + " " + num("num_words") + " words.";
    case K::kNumberBoldWords:
      return "Highlight exactly " + num("num_words") + " single words in bold using <b></b> tags.";
    case K::kNumberExclamations:
      return "Use " + relation_words(spec) + " " + num("num_exclamations") + " exclamation marks.";
    case K::kNumberItalicWords:
      return "Put exactly " + num("num_words") + " single words in italics by wrapping each in underscores, like _this_.";
    case K::kNumberParentheses:
      return "Use exactly " + num("num_parentheses") + " parenthesis characters, counting both ( and ).";
    case K::kNumberParts:
      return "Split your response into " + num("num_parts") + " parts, each introduced on its own line by " +
             in_quotes(spec.text("part_splitter") + " N") + " where N is the part number.";
    case K::kNumberedHeaders:
      return "Organize your response under " + num("num_headers") +
             " numbered header lines written as \"1. \", \"2. \" in sequence.";
    case K::kRequiredSentence:
      return "Include the sentence " + in_quotes(spec.text("sentence")) + " word for word.";
    case K::kStartChecker:
      return "Begin your response with the sentence " + in_quotes(spec.text("first_sentence")) + ".";
    case K::kTldrSummary:
      return "End your response with a one-line summary that starts with \"TL;DR:\".";
    case K::kVariablePlaceholderFormat:
      return "Include " + relation_words(spec) + " " + num("num_placeholders") +
             " placeholder variables in curly braces, such as {name}.";
    case K::kVowelCapitalization:
      return "Capitalize every vowel in your response.";
  }
  throw Error(ErrorCode::kUnknownConstraint, "no clause for constraint kind");
}

std::string render_final_prompt(const std::string& base_prompt, std::span<const ConstraintSpec> specs,
                                Backend* backend, RenderMode mode, std::size_t max_words, std::uint64_t seed) {
  if (specs.empty()) return base_prompt;
  std::string draft = std::string(textkit::trim(base_prompt));
  for (const auto& s : specs) draft += " " + constraint_clause(s);

  std::string out = draft;
  if (mode == RenderMode::kBackend) {
    if (!backend) throw Error(ErrorCode::kPrecondition, "backend rendering needs a backend");
    GenerationRequest req;
    req.messages = {{"system", "You turn an instruction and a list of requirements into one fluent instruction."},
                    {"user",
                     "Rewrite the draft below as a single natural instruction. Keep the task and every requirement, "
                     "including exact numbers and quoted text. Reply with the instruction only.\n\nDraft:\n" +
                         draft}};
    req.temperature = 0.7;
    req.max_tokens = static_cast<int>(std::max<std::size_t>(max_words * 2, 64));
    req.seed = seed;
    req.purpose = "render";
    req.constraints.assign(specs.begin(), specs.end());
    auto results = backend->generate(req);
    if (results.empty() || textkit::trim(results.front().text).empty())
      throw Error(ErrorCode::kBackendError, "backend returned an empty rendering");
    out = std::string(textkit::trim(results.front().text));
  }
  if (word_count(out) > max_words)
    throw Error(ErrorCode::kRenderTooLong, "rendered prompt has " + std::to_string(word_count(out)) +
                                               " words, limit " + std::to_string(max_words));
  return out;
}

SynthesisConfig SynthesisConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"k_values",         "prompts_per_k", "dedup_threshold",
                                              "fewshot_size",     "render_mode",   "seeds",
                                              "max_prompt_words", "max_proposal_rounds", "conflict_table"};
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "synthesis config must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw Error(ErrorCode::kConfigError, "unknown config key '" + it.key() + "'");
  SynthesisConfig c;
  try {
    if (j.contains("k_values")) c.k_values = j["k_values"].get<std::vector<int>>();
    if (j.contains("prompts_per_k")) c.prompts_per_k = j["prompts_per_k"].get<std::size_t>();
    if (j.contains("dedup_threshold")) c.dedup_threshold = j["dedup_threshold"].get<double>();
    if (j.contains("fewshot_size")) c.fewshot_size = j["fewshot_size"].get<std::size_t>();
    if (j.contains("render_mode")) c.render_mode = parse_render_mode(j["render_mode"].get<std::string>());
    if (j.contains("seeds")) c.seed = j["seeds"].get<std::uint64_t>();
    if (j.contains("max_prompt_words")) c.max_prompt_words = j["max_prompt_words"].get<std::size_t>();
    if (j.contains("max_proposal_rounds")) c.max_proposal_rounds = j["max_proposal_rounds"].get<int>();
    if (j.contains("conflict_table")) {
      const auto& t = j["conflict_table"];
      if (t.is_string()) {
        std::filesystem::path p = t.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw Error(ErrorCode::kConfigError, "cannot open conflict table " + p.string());
        c.conflicts = ConflictTable::from_json(json::parse(in));
      } else {
        c.conflicts = ConflictTable::from_json(t);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad synthesis config: ") + e.what());
  }
  if (c.k_values.empty()) throw Error(ErrorCode::kConfigError, "k_values is empty");
  for (int k : c.k_values)
    if (k < 1 || k > static_cast<int>(kNumConstraintKinds))
      throw Error(ErrorCode::kConfigError, "k value " + std::to_string(k) + " out of range");
  if (!(c.dedup_threshold > 0.0 && c.dedup_threshold <= 1.0))
    throw Error(ErrorCode::kConfigError, "dedup_threshold must lie in (0, 1]");
  if (c.fewshot_size == 0) throw Error(ErrorCode::kConfigError, "fewshot_size must be positive");
  return c;
}

json SynthesisConfig::to_json() const {
  return {{"k_values", k_values},
          {"prompts_per_k", prompts_per_k},
          {"dedup_threshold", dedup_threshold},
          {"fewshot_size", fewshot_size},
          {"render_mode", std::string(render_mode_name(render_mode))},
          {"seeds", seed},
          {"max_prompt_words", max_prompt_words},
          {"max_proposal_rounds", max_proposal_rounds},
          {"conflict_table", conflicts.to_json()}};
}

std::vector<ConstraintSpec> sample_constraint_set(std::size_t k, std::uint64_t seed, std::string_view base_prompt,
                                                  Backend& backend, const ConflictTable& table,
                                                  const SamplingRanges& ranges) {
  constexpr int kAttempts = 200;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const auto attempt_seed = combine_seed(seed, static_cast<std::uint64_t>(attempt));
    const auto kinds = sample_combination(attempt_seed, k, table);
    std::vector<ConstraintSpec> specs;
    for (auto kind : kinds)
      specs.push_back({kind, sample_kwargs(kind, combine_seed(attempt_seed, static_cast<std::uint64_t>(kind)),
                                           base_prompt, &backend, ranges)});
    if (check_conflicts(specs, table).empty()) return specs;
  }
  throw Error(ErrorCode::kNoValidCombination,
              "no conflict-free set of " + std::to_string(k) + " constraints after " + std::to_string(kAttempts) +
                  " attempts");
}

SynthesisResult synthesize(const SynthesisConfig& config, std::span<const SeedPrompt> seeds, Backend& backend,
                           const std::optional<std::filesystem::path>& checkpoint) {
  if (seeds.empty()) throw Error(ErrorCode::kPrecondition, "no seed prompts");
  if (config.k_values.empty()) throw Error(ErrorCode::kConfigError, "k_values is empty");
  SynthesisResult result;

  std::map<std::string, PromptRecord> done;
  if (checkpoint && std::filesystem::exists(*checkpoint))
    for (auto& r : read_prompts(*checkpoint)) done.emplace(r.id, std::move(r));

  std::vector<std::string> seed_text;
  for (const auto& s : seeds) seed_text.push_back(s.prompt);
  auto stripped = strip_constraints(seed_text, backend, combine_seed(config.seed, hash_bytes("strip")));
  for (auto& d : stripped.dropped) result.warnings.push_back("strip: " + d);
  auto pool = dedup(stripped.base_prompts, {}, config.dedup_threshold, backend);

  const std::size_t total = config.k_values.size() * config.prompts_per_k;
  std::vector<std::string> fresh;
  std::vector<int> round_of;
  for (int round = 0; round < config.max_proposal_rounds && fresh.size() < total; ++round) {
    std::vector<std::string> examples = pool;
    examples.insert(examples.end(), fresh.begin(), fresh.end());
    auto proposed = propose_base_prompts(examples, total - fresh.size(), backend,
                                         combine_seed(config.seed, combine_seed(hash_bytes("propose"), round)),
                                         config.fewshot_size);
    auto kept = dedup(proposed, examples, config.dedup_threshold, backend);
    for (auto& p : kept) {
      if (fresh.size() == total) break;
      fresh.push_back(std::move(p));
      round_of.push_back(round);
    }
  }
  if (fresh.size() < total)
    result.warnings.push_back("only " + std::to_string(fresh.size()) + " of " + std::to_string(total) +
                              " base prompts survived deduplication");

  const std::size_t n = fresh.size();
  std::vector<std::optional<PromptRecord>> records(n);
  std::vector<std::string> soft_failures(n);
  std::vector<std::optional<Error>> hard_failures(n);
  constexpr std::size_t kChunk = 32;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + kChunk);
    kernels::parallel_for(end - begin, [&](std::size_t off) {
      const std::size_t i = begin + off;
      const int k = config.k_values[i / config.prompts_per_k];
      const auto record_seed = combine_seed(config.seed, combine_seed(hash_bytes(fresh[i]), k));
      const std::string id = "p" + hex16(record_seed);
      if (auto it = done.find(id); it != done.end()) {
        records[i] = it->second;
        return;
      }
      try {
        PromptRecord r;
        r.id = id;
        r.base_prompt = fresh[i];
        r.k = k;
        r.specs = sample_constraint_set(static_cast<std::size_t>(k), record_seed, fresh[i], backend,
                                        config.conflicts, config.ranges);
        r.final_prompt = render_final_prompt(fresh[i], r.specs, &backend, config.render_mode,
                                             config.max_prompt_words, record_seed);
        r.provenance = {{"seed", config.seed},
                        {"record_seed", record_seed},
                        {"backend", backend.identity()},
                        {"render_mode", std::string(render_mode_name(config.render_mode))},
                        {"proposal_round", round_of[i]},
                        {"stage_clock", {{"strip", 1}, {"propose", 2}, {"dedup", 3}, {"constraints", 4},
                                         {"render", 5}}}};
        records[i] = std::move(r);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kRenderTooLong || e.code() == ErrorCode::kNoValidCombination)
          soft_failures[i] = e.what();
        else
          hard_failures[i] = e;
      }
    });

    if (checkpoint) {
      std::vector<json> fresh_records;
      for (std::size_t i = begin; i < end; ++i)
        if (records[i] && !done.contains(records[i]->id)) fresh_records.push_back(to_json(*records[i]));
      if (!fresh_records.empty()) append_jsonl(*checkpoint, schema::kPrompts, fresh_records);
    }
  }

  std::optional<Error> first_hard;
  std::size_t hard_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i]) result.records.push_back(std::move(*records[i]));
    if (!soft_failures[i].empty()) result.warnings.push_back("prompt " + std::to_string(i) + ": " + soft_failures[i]);
    if (hard_failures[i]) {
      ++hard_count;
      if (!first_hard) first_hard = hard_failures[i];
    }
  }
  if (first_hard)
    throw Error(first_hard->code(), std::to_string(hard_count) + " prompts failed (completed records are in the "
                                                                "checkpoint); first: " + first_hard->what());
  return result;
}

}  // namespace ifpref
