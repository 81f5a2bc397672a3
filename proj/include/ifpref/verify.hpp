#pragma once

// Deterministic verdicts for each constraint kind, the aggregate response
// score R = (1/|C|) * sum of verdicts, and hard/soft evaluation metrics.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ifpref/constraints.hpp"
#include "ifpref/rational.hpp"

namespace ifpref {

struct Verdict {
  ConstraintSpec constraint;
  bool satisfied = false;
  std::string detail;
};

struct ScoredResponse {
  std::string text;
  std::vector<Verdict> verdicts;
  int correct_count = 0;
  Rational score;
};

Verdict verify_constraint(std::string_view response, const ConstraintSpec& spec);

// Throws kEmptyConstraintSet when `specs` is empty.
ScoredResponse aggregate_score(std::string_view response, std::span<const ConstraintSpec> specs);

struct HardSoft {
  Rational hard;  // fraction of responses satisfying every constraint
  Rational soft;  // mean fraction of constraints satisfied
};

// Throws kEmptyInput on an empty batch.
HardSoft hard_soft_metrics(std::span<const ScoredResponse> scored);
HardSoft hard_soft_metrics(std::span<const Rational> scores);

nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const ScoredResponse& s);

}  // namespace ifpref
