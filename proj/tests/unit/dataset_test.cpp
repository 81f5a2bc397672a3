#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "../support.hpp"
#include "ifpref/dataset.hpp"
#include "ifpref/error.hpp"

using namespace ifpref;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ifpref_dataset_test";
  fs::create_directories(dir);
  fs::remove(dir / name);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Fixture {
  std::vector<PromptRecord> prompts;
  std::vector<PreferencePair> pairs;
  std::vector<RsResult> results;

  Fixture() {
    MockBackend mock;
    SynthesisConfig cfg;
    cfg.k_values = {4, 5};
    cfg.prompts_per_k = 4;
    cfg.seed = 3;
    prompts = synthesize(cfg, testing::sample_seeds(), mock).records;
    auto rs = curate_rs(prompts, 16, std::vector<CurationCriteria>{{{3, 4, 5}, {0, 1, 2}}, {{4, 5}, {2, 3}}}, mock,
                        1.0, 4);
    pairs = rs.pairs;
    results = rs.results;
  }
};

PromptRecord bare(const std::string& id, const std::string& text) {
  PromptRecord p;
  p.id = id;
  p.base_prompt = p.final_prompt = text;
  return p;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("prompt and pair files round-trip") {
    Fixture f;
    REQUIRE(f.pairs.size() >= 10);
    auto pp = temp_path("prompts.jsonl");
    write_prompts(pp, f.prompts);
    CHECK(read_prompts(pp) == f.prompts);
    auto pf = temp_path("pairs.jsonl");
    write_pairs(pf, f.pairs);
    auto back = read_pairs(pf);
    REQUIRE(back.size() == f.pairs.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(to_json(back[i]) == to_json(f.pairs[i]));
      CHECK(back[i].chosen.score == f.pairs[i].chosen.score);
    }
    auto copy = temp_path("pairs2.jsonl");
    write_pairs(copy, back);
    CHECK(slurp(copy) == slurp(pf));
  }

  TEST_CASE("responses round-trip") {
    Fixture f;
    auto recs = response_records(f.prompts, f.results);
    CHECK(recs.size() == f.prompts.size() * 16);
    auto p = temp_path("responses.jsonl");
    write_responses(p, recs);
    auto back = read_responses(p);
    REQUIRE(back.size() == recs.size());
    CHECK(back[5].text == recs[5].text);
    CHECK(back[5].score == recs[5].score);
    CHECK(back[5].index == recs[5].index);
  }

  TEST_CASE("tree files round-trip") {
    MockBackend mock;
    Fixture f;
    MctsConfig cfg;
    cfg.iterations = 3;
    auto t = mcts_search(f.prompts[0], cfg, mock, 2);
    auto p = temp_path(tree_file_name(t.prompt_id).string());
    write_tree(p, t);
    auto back = read_tree(p);
    CHECK(back.prompt_id == t.prompt_id);
    CHECK(back.specs == t.specs);
    CHECK(back.root_path == t.root_path);
    REQUIRE(back.nodes.size() == t.nodes.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) CHECK(node_to_json(back.nodes[i]) == node_to_json(t.nodes[i]));
  }

  TEST_CASE("headers and versions") {
    auto p = temp_path("v.jsonl");
    {
      std::ofstream out(p);
      out << R"({"schema":"ifpref.prompts","version":99})" << "\n";
    }
    try {
      read_prompts(p);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchemaVersionMismatch);
    }
    {
      std::ofstream out(p);
      out << R"({"schema":"ifpref.pairs","version":1})" << "\n";
    }
    CHECK_THROWS_AS(read_prompts(p), Error);
    { std::ofstream out(p); }
    CHECK(read_prompts(p).empty());
    CHECK(read_jsonl(p, schema::kPairs).records.empty());
    CHECK_THROWS_AS(read_prompts(temp_path("absent.jsonl")), Error);
    {
      std::ofstream out(p);
      out << R"({"schema":"ifpref.prompts","version":1})" << "\n{broken\n";
    }
    try {
      read_prompts(p);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIoError);
    }
  }

  TEST_CASE("append creates the header once") {
    auto p = temp_path("append.jsonl");
    std::vector<json> a = {{{"x", 1}}};
    append_jsonl(p, "ifpref.test", a);
    append_jsonl(p, "ifpref.test", a);
    auto f = read_jsonl(p, "ifpref.test");
    CHECK(f.records.size() == 2);
    CHECK(f.header.at("version") == kSchemaVersion);
  }

  TEST_CASE("export") {
    Fixture f;
    std::vector<PreferencePair> ten(f.pairs.begin(), f.pairs.begin() + 10);
    auto dpo = export_records(ten, f.prompts, ExportFormat::kDpo);
    auto sft = export_records(ten, f.prompts, ExportFormat::kSft);
    CHECK(dpo.size() == 10);
    CHECK(sft.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      std::string why;
      CHECK_MESSAGE(validate_export_record(dpo[i], ExportFormat::kDpo, &why), why);
      CHECK_MESSAGE(validate_export_record(sft[i], ExportFormat::kSft, &why), why);
      CHECK_FALSE(sft[i].contains("rejected"));
      CHECK(dpo[i]["metadata"]["chosen_correct"] == ten[i].chosen.correct_count);
      CHECK(dpo[i]["metadata"]["rejected_correct"] == ten[i].rejected.correct_count);
      CHECK(criteria_from_json(dpo[i]["metadata"]["criteria"]) == ten[i].criteria);
    }
    CHECK_FALSE(validate_export_record(dpo[0], ExportFormat::kSft));
    auto broken = dpo[0];
    broken["metadata"]["chosen_correct"] = -1;
    CHECK_FALSE(validate_export_record(broken, ExportFormat::kDpo));
    broken = dpo[0];
    broken["extra"] = 1;
    CHECK_FALSE(validate_export_record(broken, ExportFormat::kDpo));
    CHECK_THROWS_AS(export_records({}, f.prompts, ExportFormat::kDpo), Error);
    CHECK_THROWS_AS(export_records(ten, {}, ExportFormat::kDpo), Error);

    auto p = temp_path("dpo.jsonl");
    write_export(p, dpo, ExportFormat::kDpo);
    auto file = read_jsonl(p, schema::kDpo);
    CHECK(file.records == dpo);
  }

  TEST_CASE("statistics") {
    std::vector<PromptRecord> prompts = {bare("a", "a b"), bare("b", "a b c d")};
    auto s = dataset_stats(prompts, {});
    CHECK(s["prompts"]["overall"]["mean_words"] == 3.0);
    CHECK(s["prompts"]["overall"]["std_words"] == 1.0);
    CHECK(s["prompts"]["overall"]["num_prompts"] == 2);
    auto empty = dataset_stats({}, {});
    CHECK(empty["prompts"]["overall"]["num_prompts"] == 0);
    CHECK(empty["prompts"]["overall"].at("mean_words").is_null());
    CHECK(empty["pairs"]["total"] == 0);

    Fixture f;
    auto stats = dataset_stats(f.prompts, f.pairs);
    for (const auto& [label, per_source] : yield_stats(f.pairs))
      for (const auto& [source, y] : per_source) {
        CHECK(stats["pairs"]["yield"][label][source]["total_pairs"] == y.total_pairs);
        CHECK(stats["pairs"]["yield"][label][source]["unique_prompts"] == y.unique_prompts);
      }
    const double v[] = {1.0, 3.0};
    auto sm = summarize(v);
    CHECK(sm.mean == 2.0);
    CHECK(sm.stddev == 1.0);
  }

  TEST_CASE("manifest") {
    Fixture f;
    auto m = build_manifest({{"n", 16}}, f.prompts, f.pairs, "mock", {{"seed", 3}});
    CHECK(m["num_prompts"] == f.prompts.size());
    CHECK(m["num_pairs"] == f.pairs.size());
    CHECK(m["backend"] == "mock");
    CHECK(m["prompt_counts_per_k"]["4"] == 4);
  }
}
