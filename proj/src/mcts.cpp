#include "ifpref/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "ifpref/error.hpp"
#include "ifpref/kernels.hpp"
#include "ifpref/random.hpp"

namespace ifpref {
namespace {

using nlohmann::json;

Rational parse_exact(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) throw Error(ErrorCode::kIoError, "bad exact score '" + s + "'");
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

std::string exact(const Rational& r) { return std::to_string(r.num()) + "/" + std::to_string(r.den()); }

GenerationRequest continuation_request(const MctsTree& tree, const std::string& state) {
  GenerationRequest req;
  req.messages = {{"user", tree.prompt}};
  if (!state.empty()) req.messages.push_back({"assistant", state});
  req.purpose = "respond";
  req.constraints = tree.specs;
  return req;
}

// Index of the best rollout; ties go to the earliest.
std::size_t best_rollout(const MctsNode& n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n.rollouts.size(); ++i)
    if (n.rollouts[i].correct_count > n.rollouts[best].correct_count) best = i;
  return best;
}

int most_visited_child(const MctsTree& tree, int node) {
  int best = -1;
  for (int c : tree.node(node).children) {
    if (best < 0) {
      best = c;
      continue;
    }
    const auto& a = tree.node(c);
    const auto& b = tree.node(best);
    if (a.n > b.n || (a.n == b.n && a.reward > b.reward)) best = c;
  }
  return best;
}

void expand_child(MctsNode& child, const MctsTree& tree, const MctsConfig& config, Backend& backend,
                  std::uint64_t seed, bool finished) {
  std::vector<std::string> texts;
  if (finished) {
    texts.push_back(child.state);
  } else {
    auto req = continuation_request(tree, child.state);
    req.temperature = config.temperature;
    req.max_tokens = config.rollout_max_tokens;
    req.n_samples = config.num_rollouts;
    req.seed = combine_seed(seed, hash_bytes("rollout"));
    for (auto& r : backend.generate(req)) texts.push_back(child.state + r.text);
  }
  if (texts.empty()) throw Error(ErrorCode::kMalformedResponse, "backend returned no rollouts");

  child.self_eval = 0.0;
  if (config.lambda > 0.0) {
    auto se = SelfEvalConfig::defaults();
    se.samples = config.self_eval_samples;
    child.self_eval = self_evaluate(backend, tree.prompt, child.state, se, combine_seed(seed, hash_bytes("self_eval")));
  }

  Rational total(0, 1);
  for (auto& text : texts) {
    const auto scored = aggregate_score(text, tree.specs);
    total = total + scored.score;
    child.rollouts.push_back({std::move(text), scored.correct_count, scored.score,
                              mixed_reward(scored.score, child.self_eval, config.lambda)});
  }
  child.reward = mixed_reward(total / static_cast<std::int64_t>(child.rollouts.size()), child.self_eval, config.lambda);
}

}  // namespace

void MctsConfig::validate() const {
  const auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfigError, what);
  };
  need(max_depth >= 1, "max_depth must be at least 1");
  need(num_actions >= 1, "num_actions must be at least 1");
  need(num_rollouts >= 1, "num_rollouts must be at least 1");
  need(c_puct >= 0.0, "c_puct must be non-negative");
  need(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  need(gamma > 0.0, "gamma must be positive");
  need(self_eval_samples >= 1, "self_eval_samples must be at least 1");
  need(max_action_tokens >= 1, "max_action_tokens must be at least 1");
  need(iterations >= 0, "iterations must be non-negative");
  need(temperature >= 0.0, "temperature must be non-negative");
  need(rollout_max_tokens >= 1, "rollout_max_tokens must be at least 1");
}

json MctsConfig::to_json() const {
  return {{"max_depth", max_depth},
          {"num_actions", num_actions},
          {"num_rollouts", num_rollouts},
          {"c_puct", c_puct},
          {"lambda", lambda},
          {"gamma", gamma},
          {"self_eval_samples", self_eval_samples},
          {"max_action_tokens", max_action_tokens},
          {"iterations", iterations},
          {"temperature", temperature},
          {"rollout_max_tokens", rollout_max_tokens}};
}

MctsConfig MctsConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "search config must be an object");
  MctsConfig c;
  const auto known = c.to_json();
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw Error(ErrorCode::kConfigError, "unknown search key '" + it.key() + "'");
  try {
    c.max_depth = j.value("max_depth", c.max_depth);
    c.num_actions = j.value("num_actions", c.num_actions);
    c.num_rollouts = j.value("num_rollouts", c.num_rollouts);
    c.c_puct = j.value("c_puct", c.c_puct);
    c.lambda = j.value("lambda", c.lambda);
    c.gamma = j.value("gamma", c.gamma);
    c.self_eval_samples = j.value("self_eval_samples", c.self_eval_samples);
    c.max_action_tokens = j.value("max_action_tokens", c.max_action_tokens);
    c.iterations = j.value("iterations", c.iterations);
    c.temperature = j.value("temperature", c.temperature);
    c.rollout_max_tokens = j.value("rollout_max_tokens", c.rollout_max_tokens);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad search config: ") + e.what());
  }
  c.validate();
  return c;
}

double puct_score(const ChildStats& child, int parent_n, double c_puct) {
  return child.q + c_puct * child.prior * std::sqrt(static_cast<double>(parent_n)) / (1.0 + child.n);
}

std::size_t puct_select(std::span<const ChildStats> children, int parent_n, double c_puct) {
  if (children.empty()) throw Error(ErrorCode::kNoChildren, "node has no children to select from");
  std::size_t best = 0;
  double best_score = puct_score(children[0], parent_n, c_puct);
  for (std::size_t i = 1; i < children.size(); ++i) {
    const double s = puct_score(children[i], parent_n, c_puct);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

int puct_select(const MctsTree& tree, int node, double c_puct) {
  const auto& n = tree.node(node);
  std::vector<ChildStats> stats;
  stats.reserve(n.children.size());
  for (int c : n.children) stats.push_back({tree.node(c).q, tree.node(c).prior, tree.node(c).n});
  return n.children[puct_select(stats, n.n, c_puct)];
}

double mixed_reward(const Rational& mean_score, double self_eval, double lambda) {
  if (lambda == 0.0) return mean_score.to_double();
  if (lambda == 1.0) return self_eval;
  const auto den = static_cast<double>(mean_score.den());
  return ((1.0 - lambda) * static_cast<double>(mean_score.num()) + lambda * self_eval * den) / den;
}

double recomputed_q(const MctsTree& tree, int node) {
  const auto& n = tree.node(node);
  double weighted = 0.0;
  long visits = 0;
  for (int c : n.children) {
    weighted += tree.node(c).q * tree.node(c).n;
    visits += tree.node(c).n;
  }
  return (weighted + n.reward) / static_cast<double>(visits + 1);
}

void expand(MctsTree& tree, int node, const MctsConfig& config, Backend& backend, std::uint64_t seed) {
  {
    const auto& n = tree.node(node);
    if (n.terminal) throw Error(ErrorCode::kTerminalNode, "cannot expand terminal node " + std::to_string(node));
    if (!n.children.empty()) throw Error(ErrorCode::kPrecondition, "node " + std::to_string(node) + " is expanded");
  }
  const auto node_seed = combine_seed(seed, combine_seed(hash_bytes("expand"), static_cast<std::uint64_t>(node)));
  const auto parent_state = tree.node(node).state;
  const int depth = tree.node(node).depth + 1;

  auto req = continuation_request(tree, parent_state);
  req.temperature = config.temperature;
  req.max_tokens = config.max_action_tokens;
  req.n_samples = config.num_actions;
  req.want_logprobs = true;
  req.seed = node_seed;
  auto actions = backend.generate(req);

  std::vector<MctsNode> children;
  std::vector<bool> finished;
  for (auto& a : actions) {
    if (a.text.empty()) continue;
    if (!a.token_logprobs) throw Error(ErrorCode::kMalformedResponse, "action without log-probabilities");
    std::vector<double> lps;
    for (const auto& t : *a.token_logprobs) lps.push_back(t.logprob);
    MctsNode c;
    c.parent = node;
    c.depth = depth;
    c.prior = policy_score(lps, config.gamma);
    c.state = parent_state + a.text;
    c.action = std::move(a.text);
    finished.push_back(a.finish_reason == FinishReason::kStop);
    c.terminal = finished.back() || depth >= config.max_depth;
    children.push_back(std::move(c));
  }
  if (children.empty()) {
    tree.node(node).terminal = true;
    return;
  }

  const int first_id = static_cast<int>(tree.nodes.size());
  kernels::parallel_for(children.size(), [&](std::size_t i) {
    children[i].id = first_id + static_cast<int>(i);
    expand_child(children[i], tree, config, backend, combine_seed(node_seed, i), finished[i]);
  });
  for (auto& c : children) {
    tree.node(node).children.push_back(c.id);
    tree.nodes.push_back(std::move(c));
  }
}

void backpropagate(MctsTree& tree, int node, int top) {
  for (int v = node;; v = tree.node(v).parent) {
    if (v < 0) throw Error(ErrorCode::kPrecondition, "backpropagation top is not an ancestor");
    auto& n = tree.node(v);
    n.n += 1;
    n.q = recomputed_q(tree, v);
    if (v == top) break;
  }
}

MctsTree mcts_search(const PromptRecord& prompt, const MctsConfig& config, Backend& backend, std::uint64_t seed,
                     const MctsObserver& observer) {
  config.validate();
  MctsTree tree;
  tree.prompt_id = prompt.id;
  tree.prompt = prompt.final_prompt;
  tree.specs = prompt.specs;
  tree.nodes.push_back(MctsNode{});
  tree.root_path = {0};

  while (config.iterations > 0) {
    const int root = tree.current_root();
    for (int it = 0; it < config.iterations; ++it) {
      int v = root;
      while (!tree.node(v).children.empty()) v = puct_select(tree, v, config.c_puct);
      if (!tree.node(v).terminal) expand(tree, v, config, backend, seed);
      backpropagate(tree, v, root);
      if (observer) observer(tree, v, root);
    }
    if (tree.node(root).children.empty()) break;
    const int next = most_visited_child(tree, root);
    tree.root_path.push_back(next);
    if (tree.node(next).terminal || tree.node(next).children.empty()) break;
  }
  return tree;
}

std::vector<PreferencePair> extract_pairs_mcts(const MctsTree& tree, const CurationCriteria& criteria) {
  criteria.validate();
  std::unordered_set<std::string> used;
  std::vector<PreferencePair> pairs;
  for (const auto& parent : tree.nodes) {
    if (parent.children.size() < 2 || parent.state.empty()) continue;

    struct Rep {
      int node;
      std::size_t position;
      const Rollout* rollout;
    };
    std::vector<Rep> chosen, rejected;
    std::set<std::string_view> in_set;
    for (std::size_t pos = 0; pos < parent.children.size(); ++pos) {
      const auto& child = tree.node(parent.children[pos]);
      if (child.rollouts.empty()) continue;
      const auto* r = &child.rollouts[best_rollout(child)];
      if (used.contains(r->text) || !in_set.insert(r->text).second) continue;
      if (criteria.chosen_ok(r->correct_count)) chosen.push_back({child.id, pos, r});
      else if (criteria.rejected_ok(r->correct_count)) rejected.push_back({child.id, pos, r});
    }
    const auto order = [](const Rep& a, const Rep& b) {
      if (a.rollout->correct_count != b.rollout->correct_count)
        return a.rollout->correct_count > b.rollout->correct_count;
      return a.position < b.position;
    };
    std::sort(chosen.begin(), chosen.end(), order);
    std::sort(rejected.begin(), rejected.end(), order);
    if (chosen.empty() || rejected.empty()) continue;

    std::vector<int> path;
    for (int v = parent.id; v >= 0; v = tree.node(v).parent) path.push_back(v);
    std::reverse(path.begin(), path.end());

    for (std::size_t i = 0; i < std::min(chosen.size(), rejected.size()); ++i) {
      PreferencePair p;
      p.prompt_id = tree.prompt_id;
      p.source = PairSource::kMcts;
      p.chosen = aggregate_score(chosen[i].rollout->text, tree.specs);
      p.rejected = aggregate_score(rejected[i].rollout->text, tree.specs);
      p.shared_prefix_chars = parent.state.size();
      p.criteria = criteria;
      p.tree_path = TreePath{path, chosen[i].node, rejected[i].node};
      used.insert(p.chosen.text);
      used.insert(p.rejected.text);
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

json node_to_json(const MctsNode& n) {
  json rollouts = json::array();
  for (const auto& r : n.rollouts)
    rollouts.push_back({{"text", r.text},
                        {"correct_count", r.correct_count},
                        {"score", r.score.to_double()},
                        {"score_exact", exact(r.score)},
                        {"reward", r.reward}});
  return {{"id", n.id},         {"parent", n.parent}, {"depth", n.depth},       {"action", n.action},
          {"state", n.state},   {"q", n.q},           {"n", n.n},               {"prior", n.prior},
          {"reward", n.reward}, {"self_eval", n.self_eval}, {"terminal", n.terminal}, {"children", n.children},
          {"rollouts", rollouts}};
}

MctsNode node_from_json(const json& j) {
  try {
    MctsNode n;
    n.id = j.at("id").get<int>();
    n.parent = j.at("parent").get<int>();
    n.depth = j.at("depth").get<int>();
    n.action = j.at("action").get<std::string>();
    n.state = j.at("state").get<std::string>();
    n.q = j.at("q").get<double>();
    n.n = j.at("n").get<int>();
    n.prior = j.at("prior").get<double>();
    n.reward = j.at("reward").get<double>();
    n.self_eval = j.at("self_eval").get<double>();
    n.terminal = j.at("terminal").get<bool>();
    n.children = j.at("children").get<std::vector<int>>();
    for (const auto& r : j.at("rollouts"))
      n.rollouts.push_back({r.at("text").get<std::string>(), r.at("correct_count").get<int>(),
                            parse_exact(r.at("score_exact").get<std::string>()), r.at("reward").get<double>()});
    return n;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("bad tree node: ") + e.what());
  }
}

MctsCuration curate_mcts(std::span<const PromptRecord> prompts, const MctsConfig& config,
                         std::span<const CurationCriteria> criteria, Backend& backend, std::uint64_t seed) {
  config.validate();
  for (const auto& c : criteria) c.validate();
  MctsCuration out;
  out.trees.resize(prompts.size());
  std::vector<std::vector<PreferencePair>> per_prompt(prompts.size());
  kernels::parallel_for(prompts.size(), [&](std::size_t i) {
    out.trees[i] = mcts_search(prompts[i], config, backend, combine_seed(seed, hash_bytes(prompts[i].id)));
    for (const auto& c : criteria) {
      auto pairs = extract_pairs_mcts(out.trees[i], c);
      per_prompt[i].insert(per_prompt[i].end(), pairs.begin(), pairs.end());
    }
  });
  for (auto& v : per_prompt) out.pairs.insert(out.pairs.end(), v.begin(), v.end());
  return out;
}

}  // namespace ifpref
