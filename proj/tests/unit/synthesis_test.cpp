#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "../support.hpp"
#include "ifpref/dataset.hpp"
#include "ifpref/error.hpp"
#include "ifpref/synthesis.hpp"
#include "ifpref/textkit.hpp"

using namespace ifpref;
using ifpref::testing::CountingBackend;
using ifpref::testing::sample_seeds;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> pool_of(std::size_t n) {
  std::vector<std::string> out;
  const char* topics[] = {"rivers", "bakeries", "comets", "libraries", "volcanoes", "gardens", "trains",
                          "lighthouses", "glaciers", "markets"};
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string("Tell me about ") + topics[i % 10] + " number " + std::to_string(i));
  return out;
}

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ifpref_synthesis_test";
  fs::create_directories(dir);
  fs::remove(dir / name);
  return dir / name;
}

}  // namespace

TEST_SUITE("synthesis") {
  TEST_CASE("stripping removes constraint clauses") {
    MockBackend mock;
    std::vector<std::string> seeds = {"Write a story about a fox in exactly 3 paragraphs.",
                                      "Describe a sunrise over the sea"};
    auto r = strip_constraints(seeds, mock, 1);
    REQUIRE(r.base_prompts.size() == 2);
    CHECK(r.base_prompts[0].find("paragraph") == std::string::npos);
    CHECK(r.base_prompts[0].find("fox") != std::string::npos);
    CHECK(r.base_prompts[1] == "Describe a sunrise over the sea");
    CHECK_THROWS_AS(strip_constraints({}, mock, 1), Error);
    CHECK(mock_strip_constraints("Explain tides. Use at least 3 words in bold.") == "Explain tides.");
  }

  TEST_CASE("proposals are batched and reproducible") {
    CountingBackend be;
    auto pool = pool_of(10);
    auto a = propose_base_prompts(pool, 40, be, 5);
    CHECK(be.calls("propose") == 2);
    CHECK(a.size() == 40);
    auto b = propose_base_prompts(pool, 40, be, 5);
    CHECK(a == b);
    CHECK(propose_base_prompts(pool, 0, be, 5).empty());
    CHECK(be.calls("propose") == 4);
    CHECK_THROWS_AS(propose_base_prompts(pool_of(3), 5, be, 5), Error);
  }

  TEST_CASE("dedup") {
    MockBackend mock;
    std::vector<std::string> existing = {"Write a poem about the ocean"};
    std::vector<std::string> cands = {"Write a poem about the ocean"};
    CHECK(dedup(cands, existing, 0.85, mock).empty());
    cands = {"same candidate text", "same candidate text"};
    CHECK(dedup(cands, {}, 0.85, mock).size() == 1);
    cands = {"aaaa aaaa", "zzzz zzzz", "qqqq"};
    CHECK(dedup(cands, {}, 0.85, mock) == cands);
    auto once = dedup(pool_of(30), {}, 0.85, mock);
    CHECK(dedup(once, {}, 0.85, mock) == once);
    CHECK_THROWS_AS(dedup(cands, {}, 0.0, mock), Error);
    CHECK_THROWS_AS(dedup(cands, {}, 1.5, mock), Error);
  }

  TEST_CASE("template rendering") {
    auto tldr = spec_from_json({{"instruction_id", "tldr_summary"}, {"kwargs", nlohmann::json::object()}});
    const std::string base = "Explain how bridges carry load.";
    CHECK(render_final_prompt(base, {}, nullptr) == base);
    std::vector<ConstraintSpec> specs = {tldr};
    const auto out = render_final_prompt(base, specs, nullptr);
    CHECK(out == base + " " + constraint_clause(tldr));
    CHECK(textkit::split_words(out).size() >= textkit::split_words(base).size());
    std::size_t hits = 0;
    for (auto pos = out.find("TL;DR"); pos != std::string::npos; pos = out.find("TL;DR", pos + 1)) ++hits;
    CHECK(hits == 1);
    try {
      render_final_prompt(base, specs, nullptr, RenderMode::kTemplate, 5);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kRenderTooLong);
    }
  }

  TEST_CASE("every kind has a clause") {
    MockBackend mock;
    for (auto k : all_kinds()) {
      ConstraintSpec s{k, sample_kwargs(k, 3, "Write about owls", &mock)};
      CHECK_FALSE(constraint_clause(s).empty());
    }
  }

  TEST_CASE("backend rendering returns the rewritten draft") {
    MockBackend mock;
    auto tldr = spec_from_json({{"instruction_id", "tldr_summary"}, {"kwargs", nlohmann::json::object()}});
    std::vector<ConstraintSpec> specs = {tldr};
    auto out = render_final_prompt("Explain rain.", specs, &mock, RenderMode::kBackend);
    CHECK(out.find("TL;DR") != std::string::npos);
    CHECK_THROWS_AS(render_final_prompt("Explain rain.", specs, nullptr, RenderMode::kBackend), Error);
  }

  TEST_CASE("sampled constraint sets are conflict-free") {
    MockBackend mock;
    auto table = ConflictTable::defaults();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto specs = sample_constraint_set(5, seed, "Describe a city park", mock, table, SamplingRanges::defaults());
      CHECK(specs.size() == 5);
      CHECK(check_conflicts(specs, table).empty());
      for (const auto& s : specs) validate(s);
    }
  }

  TEST_CASE("synthesize 100 prompts at k=5") {
    MockBackend mock;
    SynthesisConfig cfg;
    cfg.k_values = {5};
    cfg.prompts_per_k = 100;
    cfg.seed = 21;
    auto seeds = sample_seeds();
    auto a = synthesize(cfg, seeds, mock);
    CHECK(a.records.size() >= 90);
    std::set<std::string> ids;
    for (const auto& r : a.records) {
      CHECK(r.specs.size() == 5);
      CHECK(r.k == 5);
      CHECK(check_conflicts(r.specs, cfg.conflicts).empty());
      ids.insert(r.id);
    }
    CHECK(ids.size() == a.records.size());
    auto b = synthesize(cfg, seeds, mock);
    REQUIRE(b.records.size() == a.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].id == b.records[i].id);
      CHECK(a.records[i].final_prompt == b.records[i].final_prompt);
    }
  }

  TEST_CASE("checkpoint resumes without regenerating") {
    SynthesisConfig cfg;
    cfg.k_values = {4, 6};
    cfg.prompts_per_k = 10;
    cfg.seed = 2;
    auto ck = temp_path("ck.jsonl");
    CountingBackend first;
    auto a = synthesize(cfg, sample_seeds(), first, ck);
    CHECK(read_prompts(ck).size() == a.records.size());
    CountingBackend second;
    auto b = synthesize(cfg, sample_seeds(), second, ck);
    CHECK(second.calls("render") == 0);
    CHECK(b.records == a.records);
    CHECK(read_prompts(ck).size() == a.records.size());
  }

  TEST_CASE("config parsing") {
    auto c = SynthesisConfig::from_json({{"k_values", {4, 5}}, {"prompts_per_k", 3}, {"seeds", 9}});
    CHECK(c.k_values == std::vector<int>{4, 5});
    CHECK(c.seed == 9);
    CHECK(SynthesisConfig::from_json(c.to_json()).to_json() == c.to_json());
    CHECK_THROWS_AS(SynthesisConfig::from_json({{"k_values", {30}}}), Error);
    CHECK_THROWS_AS(SynthesisConfig::from_json({{"nonsense", 1}}), Error);
    CHECK_THROWS_AS(SynthesisConfig::from_json({{"dedup_threshold", 0}}), Error);
    CHECK_THROWS_AS(parse_render_mode("fancy"), Error);
  }

  TEST_CASE("seed file formats") {
    auto p = temp_path("seeds.jsonl");
    {
      std::ofstream out(p);
      out << R"({"key": 1, "prompt": "Write a limerick. Do not use any commas.", "instruction_id_list": ["punctuation:no_comma", "detectable_format:number_highlighted_sections"], "kwargs": [{}, {"num_highlights": null}]})"
          << "\n"
          << R"({"prompt": "Describe a heron."})" << "\n"
          << "Plain text seed prompt\n\n";
    }
    auto seeds = read_seed_prompts(p);
    REQUIRE(seeds.size() == 3);
    CHECK(seeds[0].constraints.empty());
    CHECK(seeds[1].prompt == "Describe a heron.");
    CHECK(seeds[2].prompt == "Plain text seed prompt");
    CHECK_THROWS_AS(read_seed_prompts(temp_path("missing.jsonl")), Error);
  }

  TEST_CASE("prompt record json round-trip") {
    MockBackend mock;
    SynthesisConfig cfg;
    cfg.k_values = {4};
    cfg.prompts_per_k = 3;
    auto res = synthesize(cfg, sample_seeds(), mock);
    for (const auto& r : res.records) CHECK(prompt_record_from_json(to_json(r)) == r);
  }
}
