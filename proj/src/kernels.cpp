#include "ifpref/kernels.hpp"

#include <algorithm>
#include <limits>

namespace ifpref::kernels {

std::vector<ScoredResponse> score_batch_serial(std::span<const ScoreJob> jobs) {
  std::vector<ScoredResponse> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(aggregate_score(*job.text, job.specs));
  return out;
}

std::vector<ScoredResponse> score_batch(std::span<const ScoreJob> jobs) {
  std::vector<ScoredResponse> out(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) { out[i] = aggregate_score(*jobs[i].text, jobs[i].specs); });
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double max_similarity_serial(std::span<const double> query, std::span<const Embedding> rows) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) best = std::max(best, dot(query, row));
  return best;
}

double max_similarity(std::span<const double> query, std::span<const Embedding> rows) {
  double best = -std::numeric_limits<double>::infinity();
  const auto n = static_cast<long long>(rows.size());
#pragma omp parallel for reduction(max : best) schedule(static)
  for (long long i = 0; i < n; ++i) best = std::max(best, dot(query, rows[static_cast<std::size_t>(i)]));
  return best;
}

void set_num_threads(int n) { omp_set_num_threads(n); }
int num_threads() { return omp_get_max_threads(); }

}  // namespace ifpref::kernels
