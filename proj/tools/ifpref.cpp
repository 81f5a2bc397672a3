// ifpref: synthesize prompts, curate preference pairs, score, report, export.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifpref/curate.hpp"
#include "ifpref/dataset.hpp"
#include "ifpref/error.hpp"
#include "ifpref/http_backend.hpp"
#include "ifpref/mcts.hpp"
#include "ifpref/mock_backend.hpp"
#include "ifpref/synthesis.hpp"
#include "ifpref/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ifpref;

namespace {

struct Common {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string backend = "mock";
  std::string config;
  std::string mock_config;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, path + ": " + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const Common& c) {
  if (c.backend == "mock") {
    MockConfig mc;
    if (!c.mock_config.empty()) mc = MockConfig::from_json(read_json_file(c.mock_config));
    return std::make_unique<MockBackend>(mc);
  }
  if (c.backend == "http") return std::make_unique<HttpBackend>(HttpBackendConfig::from_env());
  throw Error(ErrorCode::kConfigError, "unknown backend '" + c.backend + "'");
}

// The config file holds synthesis keys at the top level and search keys
// under "mcts".
std::pair<json, json> split_config(const Common& c) {
  if (c.config.empty()) return {json::object(), json::object()};
  json j = read_json_file(c.config);
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, c.config + ": config must be an object");
  json mcts = json::object();
  if (j.contains("mcts")) {
    mcts = j["mcts"];
    j.erase("mcts");
  }
  return {j, mcts};
}

std::vector<PromptRecord> filter_k(std::vector<PromptRecord> prompts, const std::vector<int>& ks) {
  if (ks.empty()) return prompts;
  std::erase_if(prompts, [&](const PromptRecord& p) { return std::find(ks.begin(), ks.end(), p.k) == ks.end(); });
  return prompts;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

struct MctsFlags {
  std::optional<int> max_depth, num_actions, num_rollouts, self_eval_samples, max_action_tokens, iterations,
      rollout_max_tokens;
  std::optional<double> c_puct, lambda, gamma, temperature;

  void add(CLI::App* app) {
    app->add_option("--max-depth", max_depth, "Maximum tree depth");
    app->add_option("--num-actions", num_actions, "Actions sampled per expansion (K)");
    app->add_option("--num-rollouts", num_rollouts, "Rollouts per action (M)");
    app->add_option("--c-puct", c_puct, "Exploration constant");
    app->add_option("--lambda", lambda, "Weight of self-evaluation in the reward");
    app->add_option("--gamma", gamma, "Length normalisation exponent of the policy score");
    app->add_option("--self-eval-samples", self_eval_samples, "Self-evaluation samples (L)");
    app->add_option("--max-action-tokens", max_action_tokens, "Token budget per action");
    app->add_option("--iterations", iterations, "Search iterations per root");
    app->add_option("--temperature", temperature, "Sampling temperature");
    app->add_option("--rollout-max-tokens", rollout_max_tokens, "Token budget per rollout");
  }

  MctsConfig apply(const json& base) const {
    auto c = MctsConfig::from_json(base);
    if (max_depth) c.max_depth = *max_depth;
    if (num_actions) c.num_actions = *num_actions;
    if (num_rollouts) c.num_rollouts = *num_rollouts;
    if (c_puct) c.c_puct = *c_puct;
    if (lambda) c.lambda = *lambda;
    if (gamma) c.gamma = *gamma;
    if (self_eval_samples) c.self_eval_samples = *self_eval_samples;
    if (max_action_tokens) c.max_action_tokens = *max_action_tokens;
    if (iterations) c.iterations = *iterations;
    if (temperature) c.temperature = *temperature;
    if (rollout_max_tokens) c.rollout_max_tokens = *rollout_max_tokens;
    c.validate();
    return c;
  }
};

int run_synthesize(const Common& common, const std::string& seeds_path, const std::string& out,
                   const std::string& checkpoint, const std::vector<int>& ks, std::optional<std::size_t> per_k,
                   const std::string& render_mode) {
  auto [syn, _] = split_config(common);
  auto config = SynthesisConfig::from_json(syn, common.config.empty() ? fs::path() : fs::path(common.config).parent_path());
  if (common.seed_set) config.seed = common.seed;
  if (!ks.empty()) {
    for (int k : ks)
      if (std::find(config.k_values.begin(), config.k_values.end(), k) == config.k_values.end())
        throw Error(ErrorCode::kConfigError, "k=" + std::to_string(k) + " is not in the configured k_values");
    config.k_values = ks;
  }
  if (per_k) config.prompts_per_k = *per_k;
  if (!render_mode.empty()) config.render_mode = parse_render_mode(render_mode);

  auto backend = make_backend(common);
  const auto seeds = read_seed_prompts(seeds_path);
  auto result = synthesize(config, seeds, *backend,
                           checkpoint.empty() ? std::nullopt : std::optional<fs::path>(checkpoint));
  write_prompts(out, result.records);
  for (const auto& w : result.warnings) std::cerr << json{{"warning", w}}.dump() << "\n";
  print(dataset_stats(result.records, {}));
  return 0;
}

int run_curate(const Common& common, const std::string& prompts_path, const std::string& method,
               const std::vector<int>& ks, int n, const std::string& chosen, const std::string& rejected,
               const MctsFlags& flags, const std::string& trees_dir, const std::string& responses_out,
               const std::string& out) {
  auto [_, mcts_json] = split_config(common);
  const auto criteria = CurationCriteria::parse(chosen, rejected);
  const auto prompts = filter_k(read_prompts(prompts_path), ks);
  for (const auto& p : prompts) criteria.validate(p.k);
  auto backend = make_backend(common);
  const std::vector<CurationCriteria> all{criteria};

  std::vector<PreferencePair> pairs;
  if (method == "rs") {
    auto rs = curate_rs(prompts, n, all, *backend, 1.0, common.seed);
    if (!responses_out.empty()) write_responses(responses_out, response_records(prompts, rs.results));
    pairs = std::move(rs.pairs);
  } else if (method == "mcts") {
    const auto config = flags.apply(mcts_json);
    auto mc = curate_mcts(prompts, config, all, *backend, common.seed);
    if (!trees_dir.empty())
      for (const auto& t : mc.trees) write_tree(fs::path(trees_dir) / tree_file_name(t.prompt_id), t);
    pairs = std::move(mc.pairs);
  } else {
    throw Error(ErrorCode::kConfigError, "method must be rs or mcts");
  }
  write_pairs(out, pairs);
  print(dataset_stats({}, pairs)["pairs"]);
  return 0;
}

int run_extract(const std::string& prompts_path, const std::string& responses_path, const std::string& trees_dir,
                const std::string& chosen, const std::string& rejected, const std::string& out) {
  const auto criteria = CurationCriteria::parse(chosen, rejected);
  const auto prompts = read_prompts(prompts_path);
  std::vector<PreferencePair> pairs;
  if (!responses_path.empty() == !trees_dir.empty())
    throw Error(ErrorCode::kPrecondition, "give exactly one of --responses or --trees-dir");
  if (!responses_path.empty()) {
    std::map<std::string, std::vector<ScoredResponse>> by_prompt;
    for (const auto& r : read_responses(responses_path)) by_prompt[r.prompt_id].push_back({r.text, {}, r.correct_count, r.score});
    for (const auto& p : prompts) {
      auto it = by_prompt.find(p.id);
      if (it == by_prompt.end()) continue;
      // Verdicts are recomputed from the stored text.
      std::vector<ScoredResponse> scored;
      for (const auto& r : it->second) scored.push_back(aggregate_score(r.text, p.specs));
      auto found = extract_pairs_rs(p.id, scored, criteria);
      pairs.insert(pairs.end(), found.begin(), found.end());
    }
  } else {
    for (const auto& p : prompts) {
      const auto path = fs::path(trees_dir) / tree_file_name(p.id);
      if (!fs::exists(path)) continue;
      auto found = extract_pairs_mcts(read_tree(path), criteria);
      pairs.insert(pairs.end(), found.begin(), found.end());
    }
  }
  write_pairs(out, pairs);
  print(dataset_stats({}, pairs)["pairs"]);
  return 0;
}

int run_score(const std::string& prompt_file, const std::string& prompt_id, const std::string& response,
              const std::string& response_file) {
  const auto prompts = read_prompts(prompt_file);
  if (prompts.empty()) throw Error(ErrorCode::kEmptyDataset, prompt_file + " has no prompts");
  const PromptRecord* p = &prompts.front();
  if (!prompt_id.empty()) {
    auto it = std::find_if(prompts.begin(), prompts.end(), [&](const PromptRecord& r) { return r.id == prompt_id; });
    if (it == prompts.end()) throw Error(ErrorCode::kPrecondition, "no prompt with id " + prompt_id);
    p = &*it;
  }
  std::string text = response;
  if (!response_file.empty()) {
    std::ifstream in(response_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + response_file);
    std::ostringstream os;
    os << in.rdbuf();
    text = os.str();
  }
  auto scored = to_json(aggregate_score(text, p->specs));
  scored["prompt_id"] = p->id;
  print(scored);
  return 0;
}

int run_stats(const std::string& prompts_path, const std::string& pairs_path) {
  if (prompts_path.empty() && pairs_path.empty())
    throw Error(ErrorCode::kPrecondition, "give --prompts and/or --pairs");
  std::vector<PromptRecord> prompts;
  std::vector<PreferencePair> pairs;
  if (!prompts_path.empty()) prompts = read_prompts(prompts_path);
  if (!pairs_path.empty()) pairs = read_pairs(pairs_path);
  print(dataset_stats(prompts, pairs));
  return 0;
}

int run_export(const Common& common, const std::string& pairs_path, const std::string& prompts_path,
               const std::string& format_name, const std::string& out, const std::string& manifest) {
  const auto format = parse_export_format(format_name);
  const auto pairs = read_pairs(pairs_path);
  const auto prompts = read_prompts(prompts_path);
  const auto records = export_records(pairs, prompts, format);
  for (const auto& r : records) {
    std::string why;
    if (!validate_export_record(r, format, &why)) throw Error(ErrorCode::kInvalidSpec, "export record invalid: " + why);
  }
  write_export(out, records, format);
  if (!manifest.empty()) {
    auto [syn, mcts] = split_config(common);
    const json config = {{"synthesis", syn}, {"mcts", mcts}, {"backend", common.backend},
                         {"mock_config", common.mock_config}};
    std::string identity = common.backend;
    if (common.backend == "mock") identity = make_backend(common)->identity();
    std::ofstream m(manifest, std::ios::binary | std::ios::trunc);
    if (!m) throw Error(ErrorCode::kIoError, "cannot write " + manifest);
    m << build_manifest(config, prompts, pairs, identity, {{"seed", common.seed}}).dump(2) << "\n";
  }
  print({{"records", records.size()}, {"format", format_name}, {"out", out}});
  return 0;
}

void fail(std::string_view code, const std::string& message) {
  std::cerr << json{{"error", std::string(code)}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-following preference data: synthesis, curation and export"};
  app.require_subcommand(1);
  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Seed for every random choice")->each([&](const std::string&) {
      common.seed_set = true;
    });
    sub->add_option("--backend", common.backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
    sub->add_option("--config", common.config, "Pipeline config JSON");
    sub->add_option("--mock-config", common.mock_config, "Mock backend config JSON");
  };

  std::string seeds, out, checkpoint, render_mode;
  std::vector<int> ks;
  std::optional<std::size_t> per_k;
  auto* syn = app.add_subcommand("synthesize", "Generate constrained prompts from seed prompts");
  add_common(syn);
  syn->add_option("--seeds", seeds, "Seed prompt file (JSONL)")->required();
  syn->add_option("--out", out, "Output prompt file")->required();
  syn->add_option("--checkpoint", checkpoint, "Resumable checkpoint file");
  syn->add_option("--k", ks, "Restrict to these constraint counts")->delimiter(',');
  syn->add_option("--prompts-per-k", per_k, "Prompts per constraint count");
  syn->add_option("--render-mode", render_mode, "template or backend");

  std::string prompts, method = "rs", chosen, rejected, trees_dir, responses_out;
  int n = 64;
  MctsFlags mcts_flags;
  auto* cur = app.add_subcommand("curate", "Sample responses and extract preference pairs");
  add_common(cur);
  cur->add_option("--prompts", prompts, "Prompt file")->required();
  cur->add_option("--method", method, "rs or mcts")->check(CLI::IsMember({"rs", "mcts"}));
  cur->add_option("--k", ks, "Only prompts with these constraint counts")->delimiter(',');
  cur->add_option("--n", n, "Samples per prompt for rejection sampling");
  cur->add_option("--chosen", chosen, "Chosen correct counts, e.g. 5 or 4,5")->required();
  cur->add_option("--rejected", rejected, "Rejected correct counts, e.g. 1,2,3")->required();
  cur->add_option("--trees-dir", trees_dir, "Directory for search trees");
  cur->add_option("--responses-out", responses_out, "Write sampled responses here");
  cur->add_option("--out", out, "Output pair file")->required();
  mcts_flags.add(cur);

  std::string responses;
  auto* ext = app.add_subcommand("extract-pairs", "Extract pairs from stored responses or trees");
  add_common(ext);
  ext->add_option("--prompts", prompts, "Prompt file")->required();
  ext->add_option("--responses", responses, "Response file from curate --method rs");
  ext->add_option("--trees-dir", trees_dir, "Tree directory from curate --method mcts");
  ext->add_option("--chosen", chosen, "Chosen correct counts")->required();
  ext->add_option("--rejected", rejected, "Rejected correct counts")->required();
  ext->add_option("--out", out, "Output pair file")->required();

  std::string prompt_id, response, response_file;
  auto* sc = app.add_subcommand("score", "Verify one response against a prompt's constraints");
  add_common(sc);
  sc->add_option("--prompt-file", prompts, "Prompt file")->required();
  sc->add_option("--prompt-id", prompt_id, "Prompt id (default: first record)");
  auto* resp_opt = sc->add_option("--response", response, "Response text");
  sc->add_option("--response-file", response_file, "File holding the response")->excludes(resp_opt);

  std::string pairs;
  auto* st = app.add_subcommand("stats", "Prompt length and pair-yield statistics");
  add_common(st);
  st->add_option("--prompts", prompts, "Prompt file");
  st->add_option("--pairs", pairs, "Pair file");

  std::string format = "dpo", manifest;
  auto* ex = app.add_subcommand("export", "Write DPO or SFT training records");
  add_common(ex);
  ex->add_option("--pairs", pairs, "Pair file")->required();
  ex->add_option("--prompts", prompts, "Prompt file")->required();
  ex->add_option("--format", format, "dpo or sft")->check(CLI::IsMember({"dpo", "sft"}));
  ex->add_option("--out", out, "Output file")->required();
  ex->add_option("--manifest", manifest, "Also write a run manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) fail("UsageError", e.what());
    return app.exit(e);
  }

  try {
    if (*syn) return run_synthesize(common, seeds, out, checkpoint, ks, per_k, render_mode);
    if (*cur)
      return run_curate(common, prompts, method, ks, n, chosen, rejected, mcts_flags, trees_dir, responses_out, out);
    if (*ext) return run_extract(prompts, responses, trees_dir, chosen, rejected, out);
    if (*sc) return run_score(prompts, prompt_id, response, response_file);
    if (*st) return run_stats(prompts, pairs);
    if (*ex) return run_export(common, pairs, prompts, format, out, manifest);
  } catch (const Error& e) {
    fail(error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("InternalError", e.what());
    return 1;
  }
  return 1;
}
