#pragma once

// Versioned JSONL files for prompts, responses, search trees and pairs;
// DPO/SFT export, statistics and run manifests.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ifpref/curate.hpp"
#include "ifpref/mcts.hpp"
#include "ifpref/synthesis.hpp"

namespace ifpref {

inline constexpr int kSchemaVersion = 1;

namespace schema {
inline constexpr std::string_view kPrompts = "ifpref.prompts";
inline constexpr std::string_view kResponses = "ifpref.responses";
inline constexpr std::string_view kTree = "ifpref.tree";
inline constexpr std::string_view kPairs = "ifpref.pairs";
inline constexpr std::string_view kDpo = "ifpref.dpo";
inline constexpr std::string_view kSft = "ifpref.sft";
}  // namespace schema

nlohmann::json schema_header(std::string_view name);

struct JsonlFile {
  nlohmann::json header;  // empty object for an empty file
  std::vector<nlohmann::json> records;
};

// The first line must be a header naming `schema_name` at kSchemaVersion.
// An empty file is an empty dataset. Throws kIoError / kSchemaVersionMismatch.
JsonlFile read_jsonl(const std::filesystem::path& path, std::string_view schema_name);

// Writes through a temporary file then renames. Extra header fields are kept.
void write_jsonl(const std::filesystem::path& path, const nlohmann::json& header,
                 std::span<const nlohmann::json> records);

// Creates the file with a header if missing or empty.
void append_jsonl(const std::filesystem::path& path, std::string_view schema_name,
                  std::span<const nlohmann::json> records);

std::vector<PromptRecord> read_prompts(const std::filesystem::path& path);
void write_prompts(const std::filesystem::path& path, std::span<const PromptRecord> prompts);

nlohmann::json to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const nlohmann::json& j);
std::vector<PreferencePair> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, std::span<const PreferencePair> pairs);

struct ResponseRecord {
  std::string prompt_id;
  std::size_t index = 0;
  std::string text;
  int correct_count = 0;
  Rational score;
  bool collision = false;
};

std::vector<ResponseRecord> response_records(std::span<const PromptRecord> prompts, std::span<const RsResult> results);
std::vector<ResponseRecord> read_responses(const std::filesystem::path& path);
void write_responses(const std::filesystem::path& path, std::span<const ResponseRecord> responses);

// One file per prompt; the header carries prompt id, prompt text and specs.
void write_tree(const std::filesystem::path& path, const MctsTree& tree);
MctsTree read_tree(const std::filesystem::path& path);
std::filesystem::path tree_file_name(const std::string& prompt_id);

enum class ExportFormat { kDpo, kSft };
std::string_view export_format_name(ExportFormat f);
ExportFormat parse_export_format(std::string_view s);

// Prompt text is looked up by pair.prompt_id. Throws kEmptyDataset when no
// pair survives and kPrecondition when a prompt id is unknown.
std::vector<nlohmann::json> export_records(std::span<const PreferencePair> pairs,
                                           std::span<const PromptRecord> prompts, ExportFormat format);
void write_export(const std::filesystem::path& path, std::span<const nlohmann::json> records, ExportFormat format);

// Field-level schema check for one exported record.
bool validate_export_record(const nlohmann::json& record, ExportFormat format, std::string* why = nullptr);

// Population standard deviation.
struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};
Summary summarize(std::span<const double> values);

nlohmann::json dataset_stats(std::span<const PromptRecord> prompts, std::span<const PreferencePair> pairs);

nlohmann::json build_manifest(const nlohmann::json& config, std::span<const PromptRecord> prompts,
                              std::span<const PreferencePair> pairs, const std::string& backend_identity,
                              const nlohmann::json& seeds);

}  // namespace ifpref
