#include "braindec/preprocess.hpp"

#include <cmath>
#include <numbers>

#include "braindec/errors.hpp"

namespace braindec {

FirAggregation parse_aggregation(const std::string& name) {
  if (name == "average") return FirAggregation::Average;
  if (name == "stack") return FirAggregation::Stack;
  throw ValidationError("unknown FIR aggregation '" + name + "' (expected average or stack)");
}

std::string aggregation_name(FirAggregation agg) {
  return agg == FirAggregation::Average ? "average" : "stack";
}

Matrix detrend_cosine(const Matrix& run, int order) {
  const Index n = run.rows();
  if (order < 1) throw ValidationError("detrend_cosine: order must be >= 1");
  if (order >= n) throw ValidationError("detrend_cosine: rank error, order must be smaller than run length");

  // Constant column plus the leading DCT-II vectors (half-sample phase).
  Matrix basis(n, order + 1);
  basis.col(0).setOnes();
  for (int k = 1; k <= order; ++k) {
    for (Index t = 0; t < n; ++t) {
      basis(t, k) = std::cos(std::numbers::pi * k * (static_cast<double>(t) + 0.5) / static_cast<double>(n));
    }
  }

  const Matrix coeffs = basis.colPivHouseholderQr().solve(run);
  return run - basis * coeffs;
}

int default_detrend_order(Index n, double tr_seconds) {
  if (n < 2) throw ValidationError("default_detrend_order: run too short");
  if (!(tr_seconds > 0.0)) throw ValidationError("default_detrend_order: TR must be positive");
  const double raw = std::ceil(2.0 * static_cast<double>(n) * tr_seconds / 128.0);
  const auto order = static_cast<int>(raw);
  return std::max(1, std::min(order, static_cast<int>(n) - 1));
}

Matrix standardize(const Matrix& run) {
  const Index n = run.rows();
  if (n < 2) throw ValidationError("standardize: need at least 2 rows");

  Matrix out(n, run.cols());
  for (Index j = 0; j < run.cols(); ++j) {
    const double mean = run.col(j).mean();
    const Vector centered = run.col(j).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(n);  // population variance
    if (var <= 0.0) {
      out.col(j).setZero();
    } else {
      out.col(j) = centered / std::sqrt(var);
    }
  }
  return out;
}

Matrix fir_features(const Matrix& run, const FirSpec& spec) {
  if (spec.lag < 0) throw ValidationError("fir_features: lag must be >= 0");
  if (spec.window < 1) throw ValidationError("fir_features: window must be >= 1");
  const Index n = run.rows();
  const Index v = run.cols();
  if (n < spec.lag + spec.window) {
    throw ValidationError("fir_features: length error, run has " + std::to_string(n) +
                          " rows but lag+window needs " + std::to_string(spec.lag + spec.window));
  }

  const Index out_rows = n - spec.lag - spec.window + 1;
  if (spec.aggregation == FirAggregation::Average) {
    Matrix out = Matrix::Zero(out_rows, v);
    for (int w = 0; w < spec.window; ++w) {
      out += run.middleRows(spec.lag + w, out_rows);
    }
    out /= static_cast<double>(spec.window);
    return out;
  }

  // Stack: volumes concatenated in increasing time order.
  Matrix out(out_rows, v * spec.window);
  for (int w = 0; w < spec.window; ++w) {
    out.middleCols(static_cast<Index>(w) * v, v) = run.middleRows(spec.lag + w, out_rows);
  }
  return out;
}

}  // namespace braindec
