#include "braindec/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "braindec/errors.hpp"
#include "braindec/rng.hpp"

namespace braindec {

namespace {

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sem(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

Matrix normalize_rows(const Matrix& m, const char* what) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (!(norm > 0.0)) {
      throw ValidationError(std::string("retrieval: zero ") + what + " vector at row " + std::to_string(i));
    }
    out.row(i) = m.row(i) / norm;
  }
  return out;
}

}  // namespace

double cosine_similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ValidationError("cosine_similarity: size mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw ValidationError("cosine_similarity: zero vector");
  return a.dot(b) / (na * nb);
}

double relative_rank(const Vector& pred, const Vector& truth, const std::vector<Vector>& negatives) {
  if (negatives.empty()) throw ValidationError("relative_rank: negatives must be non-empty");
  const double s_truth = cosine_similarity(pred, truth);
  int above = 0;
  for (const Vector& neg : negatives) {
    if (cosine_similarity(pred, neg) > s_truth) ++above;
  }
  return static_cast<double>(above) / static_cast<double>(negatives.size());
}

RetrievalReport evaluate_retrieval(const Matrix& preds, const Matrix& truths, const Matrix& pool,
                                   const RetrievalConfig& cfg,
                                   const std::optional<std::vector<int>>& truth_indices) {
  const Index n = preds.rows();
  const Index pool_size = pool.rows();
  if (n < 1) throw ValidationError("evaluate_retrieval: no samples");
  if (truths.rows() != n || truths.cols() != preds.cols() || pool.cols() != preds.cols()) {
    throw ValidationError("evaluate_retrieval: preds, truths and pool must agree in shape");
  }
  if (cfg.set_size < 1 || cfg.num_sets < 1 || cfg.top_k < 1) {
    throw ValidationError("evaluate_retrieval: set_size, num_sets and top_k must be positive");
  }

  std::vector<int> indices;
  if (truth_indices.has_value()) {
    indices = *truth_indices;
    if (static_cast<Index>(indices.size()) != n) {
      throw ValidationError("evaluate_retrieval: truth_indices length must equal the sample count");
    }
    for (const int idx : indices) {
      if (idx >= static_cast<int>(pool_size)) throw ValidationError("evaluate_retrieval: truth index out of pool");
    }
  } else if (pool_size == n) {
    indices.resize(static_cast<std::size_t>(n));
    for (Index t = 0; t < n; ++t) indices[static_cast<std::size_t>(t)] = static_cast<int>(t);
  } else {
    indices.assign(static_cast<std::size_t>(n), -1);
  }
  const bool any_in_pool = std::any_of(indices.begin(), indices.end(), [](int i) { return i >= 0; });
  const Index draw = cfg.set_size + (any_in_pool ? 1 : 0);
  if (pool_size < draw) {
    throw ValidationError("evaluate_retrieval: pool of " + std::to_string(pool_size) +
                          " rows is too small for set_size " + std::to_string(cfg.set_size));
  }

  const Matrix preds_n = normalize_rows(preds, "prediction");
  const Matrix pool_n = normalize_rows(pool, "pool");
  const Matrix truths_n = normalize_rows(truths, "truth");

  // sim_pool(t, p) = cosine(pred_t, pool_p); sim_truth(t) = cosine(pred_t, truth_t).
  // When the truth is a pool row its similarity is taken from the same matrix
  // product, so duplicate pool rows tie bitwise and the strict comparison
  // below resolves toward the truth.
  const Matrix sim_pool = preds_n * pool_n.transpose();
  Vector sim_truth(n);
  for (Index t = 0; t < n; ++t) {
    const int self = indices[static_cast<std::size_t>(t)];
    sim_truth[t] = self >= 0 ? sim_pool(t, self) : preds_n.row(t).dot(truths_n.row(t));
  }

  RetrievalReport report;
  report.k = cfg.top_k;
  report.set_size = cfg.set_size;
  report.num_sets = cfg.num_sets;
  report.seed = cfg.seed;

  for (int s = 0; s < cfg.num_sets; ++s) {
    Rng rng(derive_seed(cfg.seed, "retrieval-set", static_cast<std::uint64_t>(s)));
    const std::vector<int> drawn =
        rng.sample_without_replacement(static_cast<int>(pool_size), static_cast<int>(draw));

    std::vector<double> rel_ranks(static_cast<std::size_t>(n));
    int hits = 0;
    for (Index t = 0; t < n; ++t) {
      const int self = indices[static_cast<std::size_t>(t)];
      int above = 0;
      int used = 0;
      for (const int p : drawn) {
        if (used == cfg.set_size) break;
        if (p == self) continue;  // the sample's own pool row is never a negative
        ++used;
        if (sim_pool(t, p) > sim_truth[t]) ++above;
      }
      rel_ranks[static_cast<std::size_t>(t)] = static_cast<double>(above) / static_cast<double>(cfg.set_size);
      // Truth is candidate 0 of the (set_size + 1)-element list, so on ties
      // it sorts ahead; its position equals the strict count.
      if (above < cfg.top_k) ++hits;
    }
    report.per_set_mr.push_back(100.0 * median(rel_ranks));
    report.per_set_topk.push_back(100.0 * static_cast<double>(hits) / static_cast<double>(n));
  }

  double mr = 0.0;
  double acc = 0.0;
  for (int s = 0; s < cfg.num_sets; ++s) {
    mr += report.per_set_mr[static_cast<std::size_t>(s)];
    acc += report.per_set_topk[static_cast<std::size_t>(s)];
  }
  report.median_relative_rank = mr / cfg.num_sets;
  report.topk_accuracy = acc / cfg.num_sets;
  report.sem_mr = sem(report.per_set_mr);
  report.sem_topk = sem(report.per_set_topk);
  return report;
}

}  // namespace braindec
