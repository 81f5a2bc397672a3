#include "ifpref/curate.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_set>

#include "ifpref/error.hpp"
#include "ifpref/kernels.hpp"
#include "ifpref/random.hpp"
#include "ifpref/textkit.hpp"

namespace ifpref {
namespace {

using nlohmann::json;

std::vector<int> parse_count_list(std::string_view list) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto piece = textkit::trim(list.substr(start, comma == std::string_view::npos ? list.npos : comma - start));
    int v = 0;
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (piece.empty() || ec != std::errc() || ptr != piece.data() + piece.size())
      throw Error(ErrorCode::kPrecondition, "bad correct-count list '" + std::string(list) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> normalized(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string join_counts(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "/" : "") + std::to_string(v[i]);
  return out;
}

// Order of eligible candidates: more constraints satisfied first, then
// earlier generation.
bool better(const ScoredResponse& a, std::size_t ia, const ScoredResponse& b, std::size_t ib) {
  if (a.correct_count != b.correct_count) return a.correct_count > b.correct_count;
  return ia < ib;
}

}  // namespace

void CurationCriteria::validate(int k) const {
  if (chosen.empty() || rejected.empty()) throw Error(ErrorCode::kPrecondition, "criteria sets must be non-empty");
  for (const auto* set : {&chosen, &rejected})
    for (int c : *set)
      if (c < 0 || (k >= 0 && c > k))
        throw Error(ErrorCode::kPrecondition, "correct count " + std::to_string(c) + " outside [0, " +
                                                  (k >= 0 ? std::to_string(k) : std::string("k")) + "]");
  if (*std::max_element(rejected.begin(), rejected.end()) >= *std::min_element(chosen.begin(), chosen.end()))
    throw Error(ErrorCode::kPrecondition, "criteria " + label() + ": every rejected count must be below every chosen count");
}

bool CurationCriteria::chosen_ok(int correct) const {
  return std::find(chosen.begin(), chosen.end(), correct) != chosen.end();
}

bool CurationCriteria::rejected_ok(int correct) const {
  return std::find(rejected.begin(), rejected.end(), correct) != rejected.end();
}

std::string CurationCriteria::label() const { return "c=" + join_counts(chosen) + ",r=" + join_counts(rejected); }

CurationCriteria CurationCriteria::parse(std::string_view chosen_list, std::string_view rejected_list) {
  CurationCriteria c{normalized(parse_count_list(chosen_list)), normalized(parse_count_list(rejected_list))};
  c.validate();
  return c;
}

json to_json(const CurationCriteria& c) { return {{"chosen", c.chosen}, {"rejected", c.rejected}}; }

CurationCriteria criteria_from_json(const json& j) {
  try {
    CurationCriteria c{normalized(j.at("chosen").get<std::vector<int>>()),
                       normalized(j.at("rejected").get<std::vector<int>>())};
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kPrecondition, std::string("bad criteria: ") + e.what());
  }
}

std::string_view source_name(PairSource s) { return s == PairSource::kRs ? "rs" : "mcts"; }

PairSource parse_source(std::string_view s) {
  if (s == "rs") return PairSource::kRs;
  if (s == "mcts") return PairSource::kMcts;
  throw Error(ErrorCode::kConfigError, "unknown pair source '" + std::string(s) + "'");
}

std::size_t common_prefix_chars(std::string_view a, std::string_view b) {
  const auto n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

RsResult rs_generate(const PromptRecord& prompt, int n, Backend& backend, double temperature, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::kPrecondition, "rejection sampling needs n >= 2");
  GenerationRequest req;
  req.messages = {{"user", prompt.final_prompt}};
  req.temperature = temperature;
  req.max_tokens = 1024;
  req.n_samples = n;
  req.seed = combine_seed(seed, hash_bytes(prompt.id));
  req.purpose = "respond";
  req.constraints = prompt.specs;
  auto results = backend.generate(req);
  if (static_cast<int>(results.size()) != n)
    throw Error(ErrorCode::kMalformedResponse, "expected " + std::to_string(n) + " samples");

  RsResult out;
  std::unordered_set<std::string> seen;
  std::vector<kernels::ScoreJob> jobs;
  for (const auto& r : results) {
    out.collision.push_back(!seen.insert(r.text).second);
    jobs.push_back({&r.text, prompt.specs});
  }
  out.responses = kernels::score_batch(jobs);
  return out;
}

std::vector<PreferencePair> extract_pairs_rs(const std::string& prompt_id, std::span<const ScoredResponse> scored,
                                             const CurationCriteria& criteria) {
  criteria.validate();
  std::unordered_set<std::string_view> seen;
  std::vector<std::size_t> chosen, rejected;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!seen.insert(scored[i].text).second) continue;
    if (criteria.chosen_ok(scored[i].correct_count)) chosen.push_back(i);
    else if (criteria.rejected_ok(scored[i].correct_count)) rejected.push_back(i);
  }
  const auto order = [&](std::size_t a, std::size_t b) { return better(scored[a], a, scored[b], b); };
  std::sort(chosen.begin(), chosen.end(), order);
  std::sort(rejected.begin(), rejected.end(), order);

  std::vector<PreferencePair> pairs;
  for (std::size_t i = 0; i < std::min(chosen.size(), rejected.size()); ++i) {
    PreferencePair p;
    p.prompt_id = prompt_id;
    p.source = PairSource::kRs;
    p.chosen = scored[chosen[i]];
    p.rejected = scored[rejected[i]];
    p.shared_prefix_chars = common_prefix_chars(p.chosen.text, p.rejected.text);
    p.criteria = criteria;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

bool audit_pair(const PreferencePair& pair, std::span<const ConstraintSpec> specs, std::string* why) {
  const auto fail = [&](std::string reason) {
    if (why) *why = std::move(reason);
    return false;
  };
  if (pair.chosen.text == pair.rejected.text) return fail("chosen and rejected texts are identical");
  const auto c = aggregate_score(pair.chosen.text, specs);
  const auto r = aggregate_score(pair.rejected.text, specs);
  if (c.correct_count != pair.chosen.correct_count || c.score != pair.chosen.score)
    return fail("chosen score does not reproduce");
  if (r.correct_count != pair.rejected.correct_count || r.score != pair.rejected.score)
    return fail("rejected score does not reproduce");
  if (!pair.criteria.chosen_ok(c.correct_count)) return fail("chosen count outside criteria");
  if (!pair.criteria.rejected_ok(r.correct_count)) return fail("rejected count outside criteria");
  if (c.correct_count <= r.correct_count) return fail("chosen does not beat rejected");
  if (pair.shared_prefix_chars > common_prefix_chars(pair.chosen.text, pair.rejected.text))
    return fail("shared prefix longer than the common prefix");
  return true;
}

YieldTable yield_stats(std::span<const PreferencePair> pairs) {
  YieldTable table;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> prompts;
  for (const auto& p : pairs) {
    const auto label = p.criteria.label();
    const std::string source(source_name(p.source));
    ++table[label][source].total_pairs;
    prompts[{label, source}].insert(p.prompt_id);
  }
  for (const auto& [key, ids] : prompts) table[key.first][key.second].unique_prompts = ids.size();
  return table;
}

RsCuration curate_rs(std::span<const PromptRecord> prompts, int n, std::span<const CurationCriteria> criteria,
                     Backend& backend, double temperature, std::uint64_t seed) {
  for (const auto& c : criteria) c.validate();
  RsCuration out;
  out.results.resize(prompts.size());
  std::vector<std::vector<PreferencePair>> per_prompt(prompts.size());
  kernels::parallel_for(prompts.size(), [&](std::size_t i) {
    out.results[i] = rs_generate(prompts[i], n, backend, temperature, seed);
    for (const auto& c : criteria) {
      auto pairs = extract_pairs_rs(prompts[i].id, out.results[i].responses, c);
      per_prompt[i].insert(per_prompt[i].end(), pairs.begin(), pairs.end());
    }
  });
  for (auto& v : per_prompt) out.pairs.insert(out.pairs.end(), v.begin(), v.end());
  return out;
}

}  // namespace ifpref
