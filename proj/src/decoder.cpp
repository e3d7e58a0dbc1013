#include "braindec/decoder.hpp"

#include <string>

#include "braindec/errors.hpp"

namespace braindec {

DecoderModel fit_ridge(const Matrix& X, const Matrix& Y, double alpha_ridge) {
  if (X.rows() != Y.rows()) {
    throw ValidationError("fit_ridge: X and Y row counts differ (" + std::to_string(X.rows()) + " vs " +
                          std::to_string(Y.rows()) + ")");
  }
  if (X.rows() < 2) throw ValidationError("fit_ridge: need at least 2 samples");
  if (alpha_ridge < 0.0) throw ValidationError("fit_ridge: alpha_ridge must be >= 0");

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const Matrix Xc = X.rowwise() - x_mean;
  const Matrix Yc = Y.rowwise() - y_mean;

  DecoderModel model;
  model.alpha_ridge = alpha_ridge;
  if (alpha_ridge == 0.0) {
    const auto qr = Xc.colPivHouseholderQr();
    if (qr.rank() < Xc.cols()) {
      throw NumericalError("fit_ridge: singular system, centered X is rank-deficient with alpha_ridge = 0");
    }
    model.weights = qr.solve(Yc);
  } else {
    Matrix gram = Xc.transpose() * Xc;
    gram.diagonal().array() += alpha_ridge;
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("fit_ridge: Cholesky factorization of the regularized Gram matrix failed");
    }
    model.weights = llt.solve(Xc.transpose() * Yc);
  }
  model.bias = (y_mean - x_mean * model.weights).transpose();
  model.meta.rows = X.rows();
  return model;
}

Matrix predict(const DecoderModel& model, const Matrix& X) {
  if (model.is_dummy()) {
    Matrix out(X.rows(), model.bias.size());
    out.rowwise() = model.bias.transpose();
    return out;
  }
  if (X.cols() != model.weights.rows()) {
    throw ValidationError("predict: shape error, X has " + std::to_string(X.cols()) +
                          " columns but the model expects " + std::to_string(model.weights.rows()));
  }
  Matrix out = X * model.weights;
  out.rowwise() += model.bias.transpose();
  return out;
}

DecoderModel fit_dummy(const Matrix& Y) {
  if (Y.rows() < 1) throw ValidationError("fit_dummy: need at least 1 sample");
  DecoderModel model;
  model.weights = Matrix(0, Y.cols());
  model.bias = Y.colwise().mean().transpose();
  model.meta.rows = Y.rows();
  return model;
}

}  // namespace braindec
