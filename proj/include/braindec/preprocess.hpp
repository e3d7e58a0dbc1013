#pragma once

#include <string>

#include "braindec/types.hpp"

namespace braindec {

enum class FirAggregation { Average, Stack };

// Finite-impulse-response windowing: decode the stimulus at frame t from
// brain volumes t+lag .. t+lag+window-1, either averaged or stacked.
struct FirSpec {
  int lag = 2;
  int window = 2;
  FirAggregation aggregation = FirAggregation::Average;
};

FirAggregation parse_aggregation(const std::string& name);
std::string aggregation_name(FirAggregation agg);

/// Residual of the least-squares projection of each column onto
/// {1} ∪ {cos(pi k (t + 0.5)/n), k = 1..order}.
Matrix detrend_cosine(const Matrix& run, int order);

/// Default drift-basis order for a run of n frames at the given repetition
/// time: ceil(2 n TR / 128 s), clamped into [1, n-1].
int default_detrend_order(Index n, double tr_seconds);

/// Center each column and scale it to unit population standard deviation.
/// Zero-variance columns map to all zeros.
Matrix standardize(const Matrix& run);

/// FIR feature construction. Output has n - lag - window + 1 rows; callers
/// truncate the latent matrix to the same length to stay time-locked.
Matrix fir_features(const Matrix& run, const FirSpec& spec);

}  // namespace braindec
