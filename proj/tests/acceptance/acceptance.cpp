// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "../golden_cases.hpp"
#include "../oracles.hpp"
#include "../support.hpp"
#include "ifpref/dataset.hpp"
#include "ifpref/error.hpp"
#include "ifpref/mcts.hpp"
#include "ifpref/mock_backend.hpp"
#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"

using namespace ifpref;
using namespace ifpref::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

const std::vector<ConstraintSpec>& toy_specs() {
  static const std::vector<ConstraintSpec> specs = [] {
    auto s = [](const char* id, nlohmann::json kw) { return spec_from_json({{"instruction_id", id}, {"kwargs", kw}}); };
    return std::vector<ConstraintSpec>{
        s("no_period", nlohmann::json::object()), s("vowel_capitalization", nlohmann::json::object()),
        s("number_exclamations", {{"relation", "at least"}, {"num_exclamations", 1}}),
        s("max_word_length", {{"max_word_length", 5}}), s("number_parentheses", {{"num_parentheses", 2}})};
  }();
  return specs;
}

PromptRecord random_prompt(std::uint64_t seed, std::size_t k, Backend& backend) {
  PromptRecord p;
  p.id = "r" + std::to_string(seed);
  p.base_prompt = p.final_prompt = "Write a short note about topic " + std::to_string(seed % 97) + ".";
  p.specs = sample_constraint_set(k, seed, p.base_prompt, backend, ConflictTable::defaults(), SamplingRanges::defaults());
  p.k = static_cast<int>(k);
  return p;
}

CurationCriteria random_criteria(Rng& rng, int k) {
  const int split = static_cast<int>(rng.uniform_int(1, k));
  CurationCriteria c;
  while (c.chosen.empty())
    for (int v = split; v <= k; ++v)
      if (rng.bernoulli(0.6)) c.chosen.push_back(v);
  while (c.rejected.empty())
    for (int v = 0; v < split; ++v)
      if (rng.bernoulli(0.6)) c.rejected.push_back(v);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome criterion1() {
  Outcome o;
  const auto& cases = golden_cases();
  std::map<std::string, std::pair<int, int>> per_kind;
  std::vector<std::vector<bool>> runs;
  for (int run = 0; run < 5; ++run) {
    std::vector<bool> verdicts;
    for (const auto& c : cases) verdicts.push_back(verify_constraint(c.text, golden_spec(c)).satisfied);
    runs.push_back(verdicts);
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (runs[0][i] != cases[i].expected) ++wrong;
    auto& [pos, neg] = per_kind[cases[i].id];
    (cases[i].expected ? pos : neg) += 1;
  }
  o.require(per_kind.size() == kNumConstraintKinds, "golden cases cover " + std::to_string(per_kind.size()) + " kinds");
  for (const auto& [id, c] : per_kind) o.require(c.first >= 3 && c.second >= 3, id + " has too few cases");
  o.require(cases.size() >= 138, "only " + std::to_string(cases.size()) + " cases");
  o.require(wrong == 0, std::to_string(wrong) + " verdicts differ from the labels");
  for (int run = 1; run < 5; ++run) o.require(runs[run] == runs[0], "verdicts changed between runs");
  if (o.pass)
    o.detail = std::to_string(cases.size()) + " cases over " + std::to_string(per_kind.size()) +
               " kinds correct, identical across 5 runs";
  return o;
}

Outcome criterion2() {
  Outcome o;
  MockBackend mock;
  Rng rng(202);
  for (int i = 0; i < 1000 && o.pass; ++i) {
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 8));
    auto p = random_prompt(rng.next(), k, mock);
    GenerationRequest req;
    req.messages = {{"user", p.final_prompt}};
    req.seed = rng.next();
    req.purpose = "respond";
    req.constraints = p.specs;
    const auto text = mock.generate(req).at(0).text;
    const auto got = aggregate_score(text, p.specs);
    const auto want = brute_force_mean(text, p.specs);
    o.require(got.score.num() == want.num && got.score.den() == want.den,
              "instance " + std::to_string(i) + ": score " + std::to_string(got.score.num()) + "/" +
                  std::to_string(got.score.den()));
  }
  if (o.pass) o.detail = "1000 instances, aggregate score equals the brute-force rational mean";
  return o;
}

Outcome criterion3() {
  Outcome o;
  Rng rng(303);
  for (int t = 0; t < 10000 && o.pass; ++t) {
    std::vector<Rational> scores;
    const auto n = rng.uniform_int(1, 20);
    for (int i = 0; i < n; ++i) {
      const auto k = rng.uniform_int(1, 8);
      scores.emplace_back(rng.uniform_int(0, k), k);
    }
    const auto m = hard_soft_metrics(scores);
    o.require(m.hard <= m.soft, "trial " + std::to_string(t) + " has hard > soft");
  }
  std::vector<Rational> example = {Rational(1, 1), Rational(3, 5)};
  const auto m = hard_soft_metrics(example);
  o.require(m.hard == Rational(1, 2) && m.soft == Rational(4, 5), "[1.0, 0.6] did not give (1/2, 4/5)");
  if (o.pass) o.detail = "hard <= soft in 10000 trials; [1.0, 0.6] -> (1/2, 4/5)";
  return o;
}

Outcome criterion4() {
  Outcome o;
  Rng rng(404);
  for (int t = 0; t < 500 && o.pass; ++t) {
    std::vector<ChildStats> kids;
    const auto n = rng.uniform_int(1, 10);
    for (int i = 0; i < n; ++i) {
      if (i > 0 && rng.bernoulli(0.15)) {
        kids.push_back(kids[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
        continue;
      }
      kids.push_back({rng.uniform01(), rng.uniform01(), static_cast<int>(rng.uniform_int(0, 20))});
    }
    const int parent_n = static_cast<int>(rng.uniform_int(1, 200));
    const double c = rng.bernoulli(0.1) ? 0.0 : 3.0 * rng.uniform01();
    o.require(puct_select(kids, parent_n, c) == brute_force_puct(kids, parent_n, c),
              "configuration " + std::to_string(t) + " disagrees");
  }
  std::vector<ChildStats> ex = {{0.5, 0.6, 2}, {0.3, 0.4, 1}};
  const double a = puct_score(ex[0], 4, 1.0), b = puct_score(ex[1], 4, 1.0);
  o.require(std::abs(a - 0.9) < 1e-12 && std::abs(b - 0.7) < 1e-12, "worked example scores " + fmt(a, 15) + ", " + fmt(b, 15));
  o.require(puct_select(ex, 4, 1.0) == 0, "worked example selects B");
  if (o.pass) o.detail = "500 configurations match brute force; A=" + fmt(a, 12) + " B=" + fmt(b, 12) + " -> A";
  return o;
}

Outcome criterion5() {
  Outcome o;
  MockBackend mock;
  MctsConfig cfg;
  cfg.iterations = 200;
  auto prompt = random_prompt(55, 5, mock);
  std::size_t updates = 0;
  int last_root = -1, last_n = 0;
  double worst = 0.0;
  auto tree = mcts_search(prompt, cfg, mock, 5, [&](const MctsTree& t, int, int top) {
    ++updates;
    const auto q = closed_form_subtree(t, top);
    for (const auto& [id, want] : q) {
      const auto& n = t.node(id);
      if (n.n == 0) continue;
      worst = std::max(worst, std::abs(n.q - want));
      o.require(n.q >= 0.0 && n.q <= 1.0, "Q outside [0, 1] at node " + std::to_string(id));
    }
    const int n = t.node(top).n;
    o.require(top != last_root || n == last_n + 1, "root visit count did not advance by one");
    if (top != last_root) o.require(n >= 1, "root not visited");
    last_root = top;
    last_n = n;
  });
  o.require(worst <= 1e-12, "max |Q - closed form| = " + std::to_string(worst));
  o.require(updates >= 200, "only " + std::to_string(updates) + " iterations ran");
  for (const auto& n : tree.nodes) o.require(n.q >= 0.0 && n.q <= 1.0, "final Q outside [0, 1]");
  if (o.pass)
    o.detail = std::to_string(updates) + " updates over " + std::to_string(tree.root_path.size()) + " roots, " +
               std::to_string(tree.nodes.size()) + " nodes, max deviation " + std::to_string(worst);
  return o;
}

// One action "hEllO" whose single rollout completes "hEllO wOrld!", which
// satisfies 4 of the 5 toy constraints; self-evaluation is neutral.
double expanded_reward(double lambda, double p_yes, double p_no) {
  ScriptedBackend be([&](const GenerationRequest& r) {
    std::vector<GenerationResult> out;
    for (int i = 0; i < r.n_samples; ++i) {
      if (r.purpose == "self_eval") {
        out.push_back(self_eval_result(p_yes, p_no));
        continue;
      }
      GenerationResult g;
      g.finish_reason = FinishReason::kLength;
      if (r.want_logprobs) {
        g.text = "hEllO";
        g.token_logprobs = std::vector<TokenLogprob>{{"hEllO", -0.2}};
      } else {
        g.text = " wOrld!";
      }
      out.push_back(g);
    }
    return out;
  });
  MctsConfig cfg;
  cfg.num_actions = 1;
  cfg.num_rollouts = 1;
  cfg.lambda = lambda;
  MctsTree t;
  t.specs = toy_specs();
  t.nodes.push_back(MctsNode{});
  expand(t, 0, cfg, be, 1);
  return t.node(1).reward;
}

Outcome criterion6() {
  Outcome o;
  const double direct = mixed_reward(Rational(4, 5), 0.5, 0.2);
  const double via_expand = expanded_reward(0.2, 0.25, 0.25);
  o.require(direct == 0.74, "mixed_reward gave " + fmt(direct, 17));
  o.require(via_expand == 0.74, "expansion gave " + fmt(via_expand, 17));
  o.require(expanded_reward(0.0, 0.9, 0.05) == Rational(4, 5).to_double(), "lambda=0 is not verifier-only");
  const double se = (1.0 + 0.9 - 0.05) / 2.0;
  o.require(std::abs(expanded_reward(1.0, 0.9, 0.05) - se) < 1e-15, "lambda=1 is not self-eval-only");
  if (o.pass) o.detail = "R=0.74 exactly (direct and through expansion); lambda 0 -> 0.8, lambda 1 -> " + fmt(se, 3);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const double lps[] = {-0.1, -0.3};
  const double ps = policy_score(lps, 1.0);
  o.require(std::abs(ps - std::exp(-0.2)) < 1e-9, "policy score " + fmt(ps, 12));
  o.require(fmt(ps, 5) == "0.81873", "policy score rounds to " + fmt(ps, 5));
  auto cfg = SelfEvalConfig::defaults();
  double p_yes = 0.8, p_no = 0.2;
  ScriptedBackend be([&](const GenerationRequest& r) {
    return std::vector<GenerationResult>(static_cast<std::size_t>(r.n_samples), self_eval_result(p_yes, p_no));
  });
  const double se = self_evaluate(be, "Write a haiku.", "Snow on", cfg, 1);
  o.require(std::abs(se - 0.8) < 1e-12, "self-eval (0.8, 0.2) gave " + fmt(se, 15));
  p_yes = p_no = 0.35;
  const double neutral = self_evaluate(be, "Write a haiku.", "Snow on", cfg, 1);
  o.require(neutral == 0.5, "equal probabilities gave " + fmt(neutral, 17));
  if (o.pass) o.detail = "policy " + fmt(ps, 9) + ", self-eval " + fmt(se, 12) + ", neutral 0.5";
  return o;
}

Outcome criterion8() {
  Outcome o;
  MockBackend mock;
  Rng rng(808);
  std::size_t rs_pairs = 0;
  for (int t = 0; t < 1000 && o.pass; ++t) {
    const int k = static_cast<int>(rng.uniform_int(1, 6));
    const auto p = random_prompt(rng.next(), static_cast<std::size_t>(k), mock);
    const int n = static_cast<int>(rng.uniform_int(2, 64));
    auto responses = rs_generate(p, n, mock, 1.0, rng.next()).responses;
    for (int i = 1; i < n; ++i)
      if (rng.bernoulli(0.1)) responses[static_cast<std::size_t>(i)] = responses[static_cast<std::size_t>(rng.uniform_int(0, i - 1))];
    const auto crit = random_criteria(rng, k);
    const auto pairs = extract_pairs_rs(p.id, responses, crit);

    std::vector<std::string> left, right;
    std::set<std::string> seen;
    for (const auto& r : responses) {
      if (!seen.insert(r.text).second) continue;
      if (crit.chosen_ok(r.correct_count)) left.push_back(r.text);
      if (crit.rejected_ok(r.correct_count)) right.push_back(r.text);
    }
    std::vector<std::vector<std::size_t>> adj(left.size());
    for (auto& row : adj)
      for (std::size_t j = 0; j < right.size(); ++j) row.push_back(j);
    const auto best = max_matching(left.size(), right.size(), adj);
    o.require(pairs.size() == best, "rs set " + std::to_string(t) + ": " + std::to_string(pairs.size()) +
                                        " pairs, matching " + std::to_string(best));
    std::set<std::string> used;
    for (const auto& pair : pairs) {
      o.require(used.insert(pair.chosen.text).second && used.insert(pair.rejected.text).second,
                "rs set " + std::to_string(t) + " reuses a text");
      std::string why;
      o.require(audit_pair(pair, p.specs, &why), "rs audit: " + why);
    }
    rs_pairs += pairs.size();
  }

  std::size_t mcts_pairs = 0;
  for (int t = 0; t < 200 && o.pass; ++t) {
    const int k = static_cast<int>(rng.uniform_int(2, 6));
    const auto p = random_prompt(rng.next(), static_cast<std::size_t>(k), mock);
    MctsConfig cfg;
    cfg.max_depth = static_cast<int>(rng.uniform_int(2, 4));
    cfg.num_actions = static_cast<int>(rng.uniform_int(2, 4));
    cfg.num_rollouts = static_cast<int>(rng.uniform_int(1, 3));
    cfg.iterations = static_cast<int>(rng.uniform_int(2, 6));
    cfg.max_action_tokens = static_cast<int>(rng.uniform_int(4, 32));
    cfg.lambda = rng.bernoulli(0.5) ? 0.0 : 0.2;
    const auto tree = mcts_search(p, cfg, mock, rng.next());
    const auto crit = random_criteria(rng, k);
    const auto pairs = extract_pairs_mcts(tree, crit);
    const auto best = mcts_matching_bound(tree, crit);
    o.require(pairs.size() == best, "tree " + std::to_string(t) + ": " + std::to_string(pairs.size()) +
                                        " pairs, matching " + std::to_string(best));
    std::set<std::string> used;
    for (const auto& pair : pairs) {
      o.require(used.insert(pair.chosen.text).second && used.insert(pair.rejected.text).second,
                "tree " + std::to_string(t) + " reuses a text");
      std::string why;
      o.require(audit_pair(pair, p.specs, &why), "mcts audit: " + why);
    }
    mcts_pairs += pairs.size();
  }
  if (o.pass)
    o.detail = "1000 rs sets (" + std::to_string(rs_pairs) + " pairs) and 200 trees (" + std::to_string(mcts_pairs) +
               " pairs) match maximum matchings; all audited";
  return o;
}

Outcome criterion9() {
  Outcome o;
  MockConfig mc;
  mc.seed = 7;
  mc.default_satisfaction = 0.6;
  MockBackend mock(mc);
  SynthesisConfig sc;
  sc.k_values = {5};
  sc.prompts_per_k = 200;
  sc.seed = 11;
  auto prompts = synthesize(sc, sample_seeds(), mock).records;
  o.require(prompts.size() == 200, "synthesized " + std::to_string(prompts.size()) + " prompts");
  const std::vector<CurationCriteria> crit = {{{5}, {0}}, {{5}, {4}}};
  const auto rs = curate_rs(prompts, 64, crit, mock, 1.0, 3);
  const auto mcts = curate_mcts(prompts, MctsConfig{}, crit, mock, 3);
  auto count = [](const std::vector<PreferencePair>& pairs, const std::string& label, const std::string& source) {
    const auto t = yield_stats(pairs);
    if (!t.contains(label) || !t.at(label).contains(source)) return std::size_t{0};
    return t.at(label).at(source).total_pairs;
  };
  const auto rs_wide = count(rs.pairs, "c=5,r=0", "rs"), mcts_wide = count(mcts.pairs, "c=5,r=0", "mcts");
  const auto rs_narrow = count(rs.pairs, "c=5,r=4", "rs"), mcts_narrow = count(mcts.pairs, "c=5,r=4", "mcts");
  o.require(rs_wide > mcts_wide, "(5,0): rs " + std::to_string(rs_wide) + " vs mcts " + std::to_string(mcts_wide));
  o.require(mcts_narrow > rs_narrow,
            "(5,4): mcts " + std::to_string(mcts_narrow) + " vs rs " + std::to_string(rs_narrow));
  o.detail = "(5,0) rs " + std::to_string(rs_wide) + " > mcts " + std::to_string(mcts_wide) + "; (5,4) mcts " +
             std::to_string(mcts_narrow) + " > rs " + std::to_string(rs_narrow);
  return o;
}

struct PipelineFiles {
  fs::path prompts, responses, pairs, dpo, sft, manifest;
};

PipelineFiles run_pipeline(const fs::path& dir) {
  fs::create_directories(dir);
  PipelineFiles f{dir / "prompts.jsonl", dir / "responses.jsonl", dir / "pairs.jsonl",
                  dir / "dpo.jsonl",     dir / "sft.jsonl",       dir / "manifest.json"};
  MockBackend mock;
  SynthesisConfig sc;
  sc.k_values = {5};
  sc.prompts_per_k = 100;
  sc.seed = 42;
  write_prompts(f.prompts, synthesize(sc, sample_seeds(), mock).records);

  const auto prompts = read_prompts(f.prompts);
  const std::vector<CurationCriteria> crit = {{{4, 5}, {0, 1, 2, 3}}};
  const auto rs = curate_rs(prompts, 64, crit, mock, 1.0, 42);
  write_responses(f.responses, response_records(prompts, rs.results));

  std::map<std::string, std::vector<ScoredResponse>> by_prompt;
  std::map<std::string, const PromptRecord*> prompt_of;
  for (const auto& p : prompts) prompt_of[p.id] = &p;
  for (const auto& r : read_responses(f.responses))
    by_prompt[r.prompt_id].push_back(aggregate_score(r.text, prompt_of.at(r.prompt_id)->specs));
  std::vector<PreferencePair> pairs;
  for (const auto& p : prompts)
    for (auto& pair : extract_pairs_rs(p.id, by_prompt[p.id], crit[0])) pairs.push_back(std::move(pair));
  write_pairs(f.pairs, pairs);

  const auto stored = read_pairs(f.pairs);
  write_export(f.dpo, export_records(stored, prompts, ExportFormat::kDpo), ExportFormat::kDpo);
  write_export(f.sft, export_records(stored, prompts, ExportFormat::kSft), ExportFormat::kSft);
  std::ofstream(f.manifest) << build_manifest(sc.to_json(), prompts, stored, mock.identity(), {{"seed", 42}}).dump(2)
                            << "\n";
  return f;
}

Outcome criterion10(const fs::path& work) {
  Outcome o;
  fs::remove_all(work / "run1");
  fs::remove_all(work / "run2");
  auto t0 = Clock::now();
  const auto a = run_pipeline(work / "run1");
  const double first = seconds_since(t0);
  t0 = Clock::now();
  const auto b = run_pipeline(work / "run2");
  const double second = seconds_since(t0);
  for (auto [x, y] : {std::pair{a.prompts, b.prompts}, {a.responses, b.responses}, {a.pairs, b.pairs},
                      {a.dpo, b.dpo}, {a.sft, b.sft}, {a.manifest, b.manifest}}) {
    const auto bytes = slurp(x);
    o.require(!bytes.empty(), x.filename().string() + " is empty");
    o.require(bytes == slurp(y), x.filename().string() + " differs between runs");
  }
  o.require(first < 300.0 && second < 300.0, "pipeline took " + fmt(first, 1) + "s / " + fmt(second, 1) + "s");
  if (o.pass)
    o.detail = "6 artifacts byte-identical; 100 prompts at k=5 in " + fmt(first, 1) + "s and " + fmt(second, 1) + "s";
  return o;
}

Outcome criterion11() {
  Outcome o;
  MockBackend mock;
  std::vector<std::string> pool;
  for (const char* topic : {"tides", "owls", "bread", "comets", "chess", "rivers", "glass", "bees", "maps", "ferns"})
    for (const char* form : {"a short guide to", "a letter about", "a story about", "a review of", "an essay on"})
      pool.push_back(std::string("Write ") + form + " " + topic + ".");
  std::vector<double> means;
  for (int k : {4, 5, 6}) {
    double total = 0.0;
    for (const auto& base : pool) {
      const auto seed = combine_seed(hash_bytes(base), static_cast<std::uint64_t>(k));
      const auto specs =
          sample_constraint_set(static_cast<std::size_t>(k), seed, base, mock, ConflictTable::defaults(), SamplingRanges::defaults());
      total += static_cast<double>(textkit::split_words(render_final_prompt(base, specs, &mock)).size());
    }
    means.push_back(total / static_cast<double>(pool.size()));
  }
  o.require(means[0] < means[1] && means[1] < means[2], "means not increasing");
  o.detail = "mean words over " + std::to_string(pool.size()) + " bases: k=4 " + fmt(means[0], 2) + ", k=5 " +
             fmt(means[1], 2) + ", k=6 " + fmt(means[2], 2);
  return o;
}

Outcome criterion12(const fs::path& work) {
  Outcome o;
  const auto dir = work / "run1";
  if (!fs::exists(dir / "pairs.jsonl")) run_pipeline(dir);
  const auto prompts = read_prompts(dir / "prompts.jsonl");
  std::map<std::string, const PromptRecord*> by_id;
  for (const auto& p : prompts) by_id[p.id] = &p;
  const auto pairs = read_pairs(dir / "pairs.jsonl");
  o.require(!pairs.empty(), "no pairs were exported");
  const auto dpo = read_jsonl(dir / "dpo.jsonl", schema::kDpo).records;
  const auto sft = read_jsonl(dir / "sft.jsonl", schema::kSft).records;
  o.require(dpo.size() == pairs.size() && sft.size() == pairs.size(), "export sizes differ from the pair count");
  std::set<std::string> texts;
  for (std::size_t i = 0; i < pairs.size() && o.pass; ++i) {
    std::string why;
    o.require(validate_export_record(dpo[i], ExportFormat::kDpo, &why), "dpo record " + std::to_string(i) + ": " + why);
    o.require(validate_export_record(sft[i], ExportFormat::kSft, &why), "sft record " + std::to_string(i) + ": " + why);
    o.require(audit_pair(pairs[i], by_id.at(pairs[i].prompt_id)->specs, &why), "audit: " + why);
    const auto& m = dpo[i].at("metadata");
    const auto& p = *by_id.at(m.at("prompt_id").get<std::string>());
    o.require(dpo[i].at("prompt") == p.final_prompt, "dpo prompt text mismatch");
    o.require(dpo[i].at("chosen") == pairs[i].chosen.text && dpo[i].at("rejected") == pairs[i].rejected.text,
              "dpo texts mismatch");
    o.require(aggregate_score(dpo[i].at("chosen").get<std::string>(), p.specs).correct_count == m.at("chosen_correct"),
              "chosen_correct does not re-verify");
    o.require(
        aggregate_score(dpo[i].at("rejected").get<std::string>(), p.specs).correct_count == m.at("rejected_correct"),
        "rejected_correct does not re-verify");
    o.require(!sft[i].contains("rejected"), "sft record carries a rejected field");
    o.require(texts.insert(pairs[i].chosen.text).second && texts.insert(pairs[i].rejected.text).second,
              "a text appears in two pairs");
  }
  if (o.pass)
    o.detail = "training not implemented; " + std::to_string(dpo.size()) + " DPO and " + std::to_string(sft.size()) +
               " SFT records validate and re-verify";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string out_dir = (fs::temp_directory_path() / "ifpref_acceptance").string();
  std::vector<int> only;
  app.add_option("--out-dir", out_dir, "Scratch directory for pipeline artifacts");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  const fs::path work(out_dir);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"verifier golden suite", criterion1},
      {"aggregate score oracle", criterion2},
      {"hard/soft metrics", criterion3},
      {"puct oracle", criterion4},
      {"backpropagation oracle", criterion5},
      {"reward mixing", criterion6},
      {"policy and self-eval formulas", criterion7},
      {"pair extraction matching", criterion8},
      {"rs vs mcts yield", criterion9},
      {"pipeline determinism and speed", [&] { return criterion10(work); }},
      {"prompt length grows with k", criterion11},
      {"export schema and audit", [&] { return criterion12(work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail << " ("
              << fmt(seconds_since(t0), 1) << "s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
