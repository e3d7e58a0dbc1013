#pragma once

#include <string>
#include <vector>

#include "braindec/preprocess.hpp"
#include "braindec/types.hpp"

namespace braindec {

struct TrainingMeta {
  std::vector<std::string> subjects;
  Index rows = 0;
  std::string alignment = "none";  // provenance: none | functional(<reference>)
};

// Ridge solution plus the FIR configuration it was trained under, so
// prediction applies identical windowing.
struct DecoderModel {
  Matrix weights;  // v' x m; empty (0 x m) for the dummy mean predictor
  Vector bias;     // length m
  FirSpec fir;
  double alpha_ridge = 0.0;
  TrainingMeta meta;

  bool is_dummy() const { return weights.rows() == 0; }
};

/// Ridge regression with centered X and Y and an unpenalized intercept:
/// solves (X_c^T X_c + alpha I) W = X_c^T Y_c, b = mean(Y) - mean(X) W.
DecoderModel fit_ridge(const Matrix& X, const Matrix& Y, double alpha_ridge);

/// Y_hat = X W + 1 b^T. Dummy models predict the constant bias row.
Matrix predict(const DecoderModel& model, const Matrix& X);

/// Baseline that always predicts the column means of the training latents.
DecoderModel fit_dummy(const Matrix& Y);

}  // namespace braindec
