#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "braindec/types.hpp"

namespace braindec {

struct RetrievalConfig {
  int set_size = 499;  // negatives per retrieval set
  int num_sets = 50;
  int top_k = 5;
  std::uint64_t seed = 0;
};

struct RetrievalReport {
  double median_relative_rank = 0.0;  // percent, mean across sets
  double topk_accuracy = 0.0;         // percent, mean across sets
  int k = 0;
  int set_size = 0;
  int num_sets = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_set_mr;
  std::vector<double> per_set_topk;
  double sem_mr = 0.0;  // standard error of the mean across sets
  double sem_topk = 0.0;
};

double cosine_similarity(const Vector& a, const Vector& b);

/// Fraction of negatives strictly more similar to pred than the truth is.
double relative_rank(const Vector& pred, const Vector& truth, const std::vector<Vector>& negatives);

/// Retrieval evaluation over num_sets seeded draws from the pool. For every
/// sample, negatives are set_size pool rows excluding the sample's own pool
/// row; the truth joins them as candidate 0, so the candidate list has
/// set_size + 1 entries and similarity ties resolve toward the truth.
///
/// truth_indices maps each sample to its pool row (-1 = truth not in the
/// pool). When absent, the identity mapping is assumed if pool and truths
/// have equal row counts, otherwise no exclusion is performed.
RetrievalReport evaluate_retrieval(const Matrix& preds, const Matrix& truths, const Matrix& pool,
                                   const RetrievalConfig& cfg,
                                   const std::optional<std::vector<int>>& truth_indices = std::nullopt);

}  // namespace braindec
