#include "ifpref/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "ifpref/error.hpp"
#include "ifpref/textkit.hpp"

namespace ifpref {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string exact(const Rational& r) { return std::to_string(r.num()) + "/" + std::to_string(r.den()); }

Rational parse_exact(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) throw std::invalid_argument(s);
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIoError, "bad exact score '" + s + "'");
  }
}

json response_json(const ScoredResponse& s) {
  return {{"text", s.text}, {"correct_count", s.correct_count}, {"score", s.score.to_double()},
          {"score_exact", exact(s.score)}};
}

ScoredResponse response_from(const json& j) {
  ScoredResponse s;
  s.text = j.at("text").get<std::string>();
  s.correct_count = j.at("correct_count").get<int>();
  s.score = parse_exact(j.at("score_exact").get<std::string>());
  return s;
}

void check_header(const json& header, std::string_view schema_name, const fs::path& path) {
  if (!header.is_object() || !header.contains("schema") || !header.contains("version"))
    throw Error(ErrorCode::kSchemaVersionMismatch, path.string() + ": missing schema header");
  if (header["schema"] != schema_name)
    throw Error(ErrorCode::kSchemaVersionMismatch, path.string() + ": expected schema " + std::string(schema_name) +
                                                       ", found " + header["schema"].dump());
  if (header["version"] != kSchemaVersion)
    throw Error(ErrorCode::kSchemaVersionMismatch,
                path.string() + ": unsupported version " + header["version"].dump());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::size_t word_count(std::string_view s) { return textkit::split_words(s).size(); }

}  // namespace

json schema_header(std::string_view name) { return {{"schema", std::string(name)}, {"version", kSchemaVersion}}; }

JsonlFile read_jsonl(const fs::path& path, std::string_view schema_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  JsonlFile out;
  out.header = json::object();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (textkit::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIoError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      check_header(j, schema_name, path);
      out.header = std::move(j);
      have_header = true;
    } else {
      out.records.push_back(std::move(j));
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed on " + path.string());
  return out;
}

void write_jsonl(const fs::path& path, const json& header, std::span<const json> records) {
  try {
    ensure_parent(path);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIoError, e.what());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << header.dump() << '\n';
    for (const auto& r : records) out << r.dump() << '\n';
    if (!out) throw Error(ErrorCode::kIoError, "write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot move " + tmp.string() + " into place: " + ec.message());
}

void append_jsonl(const fs::path& path, std::string_view schema_name, std::span<const json> records) {
  std::error_code ec;
  const bool fresh = !fs::exists(path, ec) || fs::file_size(path, ec) == 0;
  if (!fresh) {
    std::ifstream in(path, std::ios::binary);
    std::string first;
    std::getline(in, first);
    check_header(json::parse(first, nullptr, false), schema_name, path);
  } else {
    try {
      ensure_parent(path);
    } catch (const fs::filesystem_error& e) {
      throw Error(ErrorCode::kIoError, e.what());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + path.string());
  if (fresh) out << schema_header(schema_name).dump() << '\n';
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "append failed on " + path.string());
}

std::vector<PromptRecord> read_prompts(const fs::path& path) {
  std::vector<PromptRecord> out;
  for (const auto& j : read_jsonl(path, schema::kPrompts).records) out.push_back(prompt_record_from_json(j));
  return out;
}

void write_prompts(const fs::path& path, std::span<const PromptRecord> prompts) {
  std::vector<json> records;
  for (const auto& p : prompts) records.push_back(to_json(p));
  write_jsonl(path, schema_header(schema::kPrompts), records);
}

json to_json(const PreferencePair& p) {
  json j = {{"prompt_id", p.prompt_id},
            {"source", std::string(source_name(p.source))},
            {"chosen", response_json(p.chosen)},
            {"rejected", response_json(p.rejected)},
            {"shared_prefix_chars", p.shared_prefix_chars},
            {"criteria", to_json(p.criteria)}};
  if (p.tree_path)
    j["tree_path"] = {{"parent_path", p.tree_path->parent_path},
                      {"chosen_node", p.tree_path->chosen_node},
                      {"rejected_node", p.tree_path->rejected_node}};
  return j;
}

PreferencePair pair_from_json(const json& j) {
  try {
    PreferencePair p;
    p.prompt_id = j.at("prompt_id").get<std::string>();
    p.source = parse_source(j.at("source").get<std::string>());
    p.chosen = response_from(j.at("chosen"));
    p.rejected = response_from(j.at("rejected"));
    p.shared_prefix_chars = j.at("shared_prefix_chars").get<std::size_t>();
    p.criteria = criteria_from_json(j.at("criteria"));
    if (j.contains("tree_path")) {
      const auto& t = j["tree_path"];
      p.tree_path = TreePath{t.at("parent_path").get<std::vector<int>>(), t.at("chosen_node").get<int>(),
                             t.at("rejected_node").get<int>()};
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("bad pair record: ") + e.what());
  }
}

std::vector<PreferencePair> read_pairs(const fs::path& path) {
  std::vector<PreferencePair> out;
  for (const auto& j : read_jsonl(path, schema::kPairs).records) out.push_back(pair_from_json(j));
  return out;
}

void write_pairs(const fs::path& path, std::span<const PreferencePair> pairs) {
  std::vector<json> records;
  for (const auto& p : pairs) records.push_back(to_json(p));
  write_jsonl(path, schema_header(schema::kPairs), records);
}

std::vector<ResponseRecord> response_records(std::span<const PromptRecord> prompts, std::span<const RsResult> results) {
  if (prompts.size() != results.size()) throw Error(ErrorCode::kPrecondition, "one result per prompt expected");
  std::vector<ResponseRecord> out;
  for (std::size_t i = 0; i < prompts.size(); ++i)
    for (std::size_t j = 0; j < results[i].responses.size(); ++j) {
      const auto& r = results[i].responses[j];
      out.push_back({prompts[i].id, j, r.text, r.correct_count, r.score,
                     j < results[i].collision.size() && results[i].collision[j]});
    }
  return out;
}

std::vector<ResponseRecord> read_responses(const fs::path& path) {
  std::vector<ResponseRecord> out;
  for (const auto& j : read_jsonl(path, schema::kResponses).records) {
    try {
      out.push_back({j.at("prompt_id").get<std::string>(), j.at("index").get<std::size_t>(),
                     j.at("text").get<std::string>(), j.at("correct_count").get<int>(),
                     parse_exact(j.at("score_exact").get<std::string>()), j.value("collision", false)});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIoError, std::string("bad response record: ") + e.what());
    }
  }
  return out;
}

void write_responses(const fs::path& path, std::span<const ResponseRecord> responses) {
  std::vector<json> records;
  for (const auto& r : responses)
    records.push_back({{"prompt_id", r.prompt_id},
                       {"index", r.index},
                       {"text", r.text},
                       {"correct_count", r.correct_count},
                       {"score", r.score.to_double()},
                       {"score_exact", exact(r.score)},
                       {"collision", r.collision}});
  write_jsonl(path, schema_header(schema::kResponses), records);
}

void write_tree(const fs::path& path, const MctsTree& tree) {
  json specs = json::array();
  for (const auto& s : tree.specs) specs.push_back(to_json(s));
  auto header = schema_header(schema::kTree);
  header["prompt_id"] = tree.prompt_id;
  header["prompt"] = tree.prompt;
  header["constraints"] = specs;
  header["root_path"] = tree.root_path;
  std::vector<json> records;
  for (const auto& n : tree.nodes) records.push_back(node_to_json(n));
  write_jsonl(path, header, records);
}

MctsTree read_tree(const fs::path& path) {
  auto file = read_jsonl(path, schema::kTree);
  MctsTree tree;
  try {
    tree.prompt_id = file.header.at("prompt_id").get<std::string>();
    tree.prompt = file.header.at("prompt").get<std::string>();
    for (const auto& s : file.header.at("constraints")) tree.specs.push_back(spec_from_json(s));
    tree.root_path = file.header.at("root_path").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, path.string() + ": bad tree header: " + e.what());
  }
  for (const auto& j : file.records) tree.nodes.push_back(node_from_json(j));
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].id != static_cast<int>(i)) throw Error(ErrorCode::kIoError, path.string() + ": node ids out of order");
  return tree;
}

fs::path tree_file_name(const std::string& prompt_id) { return prompt_id + ".jsonl"; }

std::string_view export_format_name(ExportFormat f) { return f == ExportFormat::kDpo ? "dpo" : "sft"; }

ExportFormat parse_export_format(std::string_view s) {
  if (s == "dpo") return ExportFormat::kDpo;
  if (s == "sft") return ExportFormat::kSft;
  throw Error(ErrorCode::kConfigError, "export format must be dpo or sft, got '" + std::string(s) + "'");
}

std::vector<json> export_records(std::span<const PreferencePair> pairs, std::span<const PromptRecord> prompts,
                                 ExportFormat format) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyDataset, "no pairs to export");
  std::map<std::string, const PromptRecord*> by_id;
  for (const auto& p : prompts) by_id[p.id] = &p;
  std::vector<json> out;
  for (const auto& pair : pairs) {
    const auto it = by_id.find(pair.prompt_id);
    if (it == by_id.end()) throw Error(ErrorCode::kPrecondition, "pair refers to unknown prompt " + pair.prompt_id);
    json record = {{"prompt", it->second->final_prompt}, {"chosen", pair.chosen.text}};
    if (format == ExportFormat::kDpo) record["rejected"] = pair.rejected.text;
    record["metadata"] = {{"prompt_id", pair.prompt_id},
                          {"k", it->second->k},
                          {"source", std::string(source_name(pair.source))},
                          {"chosen_correct", pair.chosen.correct_count},
                          {"rejected_correct", pair.rejected.correct_count},
                          {"shared_prefix_chars", pair.shared_prefix_chars},
                          {"criteria", to_json(pair.criteria)}};
    out.push_back(std::move(record));
  }
  return out;
}

void write_export(const fs::path& path, std::span<const json> records, ExportFormat format) {
  write_jsonl(path, schema_header(format == ExportFormat::kDpo ? schema::kDpo : schema::kSft), records);
}

bool validate_export_record(const json& r, ExportFormat format, std::string* why) {
  const auto fail = [&](std::string reason) {
    if (why) *why = std::move(reason);
    return false;
  };
  if (!r.is_object()) return fail("record is not an object");
  const std::set<std::string> allowed = format == ExportFormat::kDpo
                                            ? std::set<std::string>{"prompt", "chosen", "rejected", "metadata"}
                                            : std::set<std::string>{"prompt", "chosen", "metadata"};
  for (auto it = r.begin(); it != r.end(); ++it)
    if (!allowed.contains(it.key())) return fail("unexpected field '" + it.key() + "'");
  for (const auto& key : allowed)
    if (!r.contains(key)) return fail("missing field '" + key + "'");
  for (const char* key : {"prompt", "chosen"})
    if (!r[key].is_string() || r[key].get<std::string>().empty()) return fail(std::string(key) + " must be text");
  if (format == ExportFormat::kDpo) {
    if (!r["rejected"].is_string() || r["rejected"].get<std::string>().empty()) return fail("rejected must be text");
    if (r["rejected"] == r["chosen"]) return fail("chosen equals rejected");
  }
  const auto& m = r["metadata"];
  if (!m.is_object()) return fail("metadata is not an object");
  for (const char* key : {"k", "chosen_correct", "rejected_correct", "shared_prefix_chars"})
    if (!m.contains(key) || !m[key].is_number_integer() || m[key].get<long long>() < 0)
      return fail(std::string("metadata.") + key + " must be a non-negative integer");
  if (!m.contains("source") || (m["source"] != "rs" && m["source"] != "mcts")) return fail("metadata.source invalid");
  if (!m.contains("prompt_id") || !m["prompt_id"].is_string()) return fail("metadata.prompt_id missing");
  if (!m.contains("criteria")) return fail("metadata.criteria missing");
  CurationCriteria c;
  try {
    c = criteria_from_json(m["criteria"]);
  } catch (const Error& e) {
    return fail(std::string("metadata.criteria: ") + e.what());
  }
  const int chosen = m["chosen_correct"].get<int>();
  const int rejected = m["rejected_correct"].get<int>();
  const int k = m["k"].get<int>();
  if (chosen > k || !c.chosen_ok(chosen)) return fail("chosen_correct inconsistent with criteria");
  if (!c.rejected_ok(rejected)) return fail("rejected_correct inconsistent with criteria");
  return true;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

json dataset_stats(std::span<const PromptRecord> prompts, std::span<const PreferencePair> pairs) {
  const auto summary_json = [](const std::vector<double>& words) {
    const auto s = summarize(words);
    json j = {{"num_prompts", s.count}, {"mean_words", nullptr}, {"std_words", nullptr}};
    if (s.count > 0) {
      j["mean_words"] = s.mean;
      j["std_words"] = s.stddev;
    }
    return j;
  };
  std::map<int, std::vector<double>> per_k;
  std::vector<double> all;
  for (const auto& p : prompts) {
    const auto w = static_cast<double>(word_count(p.final_prompt));
    per_k[p.k].push_back(w);
    all.push_back(w);
  }
  json by_k = json::object();
  for (const auto& [k, words] : per_k) by_k[std::to_string(k)] = summary_json(words);

  json yield = json::object();
  for (const auto& [label, sources] : yield_stats(pairs))
    for (const auto& [source, y] : sources)
      yield[label][source] = {{"unique_prompts", y.unique_prompts}, {"total_pairs", y.total_pairs}};

  return {{"prompts", {{"overall", summary_json(all)}, {"per_k", by_k}}},
          {"pairs", {{"total", pairs.size()}, {"yield", yield}}}};
}

json build_manifest(const json& config, std::span<const PromptRecord> prompts, std::span<const PreferencePair> pairs,
                    const std::string& backend_identity, const json& seeds) {
  std::map<std::string, std::size_t> per_k;
  for (const auto& p : prompts) ++per_k[std::to_string(p.k)];
  json pair_counts = json::object();
  for (const auto& [label, sources] : yield_stats(pairs))
    for (const auto& [source, y] : sources) pair_counts[label][source] = y.total_pairs;
  return {{"version", kSchemaVersion},
          {"config", config},
          {"prompt_counts_per_k", per_k},
          {"num_prompts", prompts.size()},
          {"pair_counts_per_criteria", pair_counts},
          {"num_pairs", pairs.size()},
          {"backend", backend_identity},
          {"seeds", seeds}};
}

}  // namespace ifpref
