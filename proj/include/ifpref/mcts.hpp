#pragma once

// Monte Carlo Tree Search over partial responses with PUCT selection,
// verifier/self-evaluation rewards and sibling pair extraction.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifpref/curate.hpp"

namespace ifpref {

struct MctsConfig {
  int max_depth = 5;
  int num_actions = 4;   // K
  int num_rollouts = 4;  // M
  double c_puct = 1.0;
  double lambda = 0.2;
  double gamma = 1.0;
  int self_eval_samples = 1;  // L
  int max_action_tokens = 64;
  int iterations = 8;  // per root
  double temperature = 1.0;
  int rollout_max_tokens = 1024;

  void validate() const;
  nlohmann::json to_json() const;
  static MctsConfig from_json(const nlohmann::json& j);
};

struct Rollout {
  std::string text;
  int correct_count = 0;
  Rational score{0, 1};
  double reward = 0.0;  // (1 - lambda) * score + lambda * self_eval
};

struct MctsNode {
  int id = 0;
  int parent = -1;
  int depth = 0;
  std::string action;
  std::string state;
  double q = 0.0;
  int n = 0;
  double prior = 1.0;
  double reward = 0.0;  // R(s)
  double self_eval = 0.0;
  bool terminal = false;
  std::vector<int> children;
  std::vector<Rollout> rollouts;
};

struct MctsTree {
  std::string prompt_id;
  std::string prompt;
  std::vector<ConstraintSpec> specs;
  std::vector<MctsNode> nodes;  // nodes[0] is the global root
  std::vector<int> root_path;   // successive roots, starting at 0

  int current_root() const { return root_path.empty() ? 0 : root_path.back(); }
  MctsNode& node(int id) { return nodes.at(static_cast<std::size_t>(id)); }
  const MctsNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
};

struct ChildStats {
  double q = 0.0;
  double prior = 0.0;
  int n = 0;
};

// Q + c * prior * sqrt(parent_n) / (1 + n)
double puct_score(const ChildStats& child, int parent_n, double c_puct);
// Index of the best child; ties go to the lowest index. Throws kNoChildren.
std::size_t puct_select(std::span<const ChildStats> children, int parent_n, double c_puct);
int puct_select(const MctsTree& tree, int node, double c_puct);

// (1 - lambda) * mean_score + lambda * self_eval
double mixed_reward(const Rational& mean_score, double self_eval, double lambda);

// (sum_c Q_c N_c + R) / (sum_c N_c + 1) over the node's children.
double recomputed_q(const MctsTree& tree, int node);

// Appends K children to `node`. Throws kTerminalNode for terminal nodes.
void expand(MctsTree& tree, int node, const MctsConfig& config, Backend& backend, std::uint64_t seed);

// Increments N and recomputes Q from `node` up to and including `top`.
void backpropagate(MctsTree& tree, int node, int top);

using MctsObserver = std::function<void(const MctsTree& tree, int updated_from, int top)>;

MctsTree mcts_search(const PromptRecord& prompt, const MctsConfig& config, Backend& backend, std::uint64_t seed,
                     const MctsObserver& observer = {});

// Sibling sets are the children of expanded nodes other than the global
// root; each sibling is represented by its best rollout (ties: lowest index).
std::vector<PreferencePair> extract_pairs_mcts(const MctsTree& tree, const CurationCriteria& criteria);

nlohmann::json node_to_json(const MctsNode& node);
MctsNode node_from_json(const nlohmann::json& j);

struct MctsCuration {
  std::vector<MctsTree> trees;  // per prompt, input order
  std::vector<PreferencePair> pairs;
};

MctsCuration curate_mcts(std::span<const PromptRecord> prompts, const MctsConfig& config,
                         std::span<const CurationCriteria> criteria, Backend& backend, std::uint64_t seed);

}  // namespace ifpref
