#include <benchmark/benchmark.h>

#include "ifpref/kernels.hpp"
#include "ifpref/mock_backend.hpp"
#include "ifpref/synthesis.hpp"

using namespace ifpref;

namespace {

struct Batch {
  std::vector<std::string> texts;
  std::vector<std::vector<ConstraintSpec>> specs;
  std::vector<kernels::ScoreJob> jobs;
};

const Batch& batch() {
  static const Batch b = [] {
    Batch out;
    MockBackend mock;
    for (std::uint64_t i = 0; i < 512; ++i) {
      const std::string base = "Write a short note about topic " + std::to_string(i) + ".";
      out.specs.push_back(
          sample_constraint_set(6, i, base, mock, ConflictTable::defaults(), SamplingRanges::defaults()));
      GenerationRequest req;
      req.messages = {{"user", base}};
      req.seed = i;
      req.purpose = "respond";
      req.constraints = out.specs.back();
      out.texts.push_back(mock.generate(req).at(0).text);
    }
    for (std::size_t i = 0; i < out.texts.size(); ++i) out.jobs.push_back({&out.texts[i], out.specs[i]});
    return out;
  }();
  return b;
}

const std::vector<Embedding>& rows() {
  static const std::vector<Embedding> r = [] {
    std::vector<std::string> texts;
    for (int i = 0; i < 2000; ++i) texts.push_back("prompt number " + std::to_string(i));
    return MockBackend().embed(texts);
  }();
  return r;
}

void BM_ScoreSerial(benchmark::State& s) {
  const auto& b = batch();
  for (auto _ : s) benchmark::DoNotOptimize(kernels::score_batch_serial(b.jobs));
}

void BM_ScoreParallel(benchmark::State& s) {
  kernels::set_num_threads(static_cast<int>(s.range(0)));
  const auto& b = batch();
  for (auto _ : s) benchmark::DoNotOptimize(kernels::score_batch(b.jobs));
}

void BM_SimilaritySerial(benchmark::State& s) {
  const auto& r = rows();
  for (auto _ : s) benchmark::DoNotOptimize(kernels::max_similarity_serial(r[0], std::span(r).subspan(1)));
}

void BM_SimilarityParallel(benchmark::State& s) {
  kernels::set_num_threads(static_cast<int>(s.range(0)));
  const auto& r = rows();
  for (auto _ : s) benchmark::DoNotOptimize(kernels::max_similarity(r[0], std::span(r).subspan(1)));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimilaritySerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SimilarityParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
