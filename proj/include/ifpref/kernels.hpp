#pragma once

// Data-parallel hot loops. Each OpenMP kernel has a serial reference with
// identical results; tests assert equality and bench_kernels compares speed.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ifpref/backend.hpp"
#include "ifpref/verify.hpp"

namespace ifpref::kernels {

struct ScoreJob {
  const std::string* text;
  std::span<const ConstraintSpec> specs;
};

std::vector<ScoredResponse> score_batch_serial(std::span<const ScoreJob> jobs);
std::vector<ScoredResponse> score_batch(std::span<const ScoreJob> jobs);

double dot(std::span<const double> a, std::span<const double> b);

// max over rows of dot(query, rows[i]); -infinity for no rows.
double max_similarity_serial(std::span<const double> query, std::span<const Embedding> rows);
double max_similarity(std::span<const double> query, std::span<const Embedding> rows);

// Runs body(i) for i in [0, n) across threads; results must be written to
// per-index slots so output order is independent of scheduling. The first
// exception thrown by any iteration is rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t n, Body&& body);

void set_num_threads(int n);
int num_threads();

}  // namespace ifpref::kernels

#include "ifpref/kernels_inl.hpp"
