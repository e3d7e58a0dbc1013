#include <doctest.h>

#include <cmath>
#include <numbers>

#include "braindec/errors.hpp"
#include "braindec/preprocess.hpp"
#include "braindec/rng.hpp"

using namespace braindec;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  }
  return m;
}

Matrix cosine_basis(Index n, int order) {
  Matrix basis(n, order + 1);
  basis.col(0).setOnes();
  for (int k = 1; k <= order; ++k) {
    for (Index t = 0; t < n; ++t) {
      basis(t, k) = std::cos(std::numbers::pi * k * (static_cast<double>(t) + 0.5) / static_cast<double>(n));
    }
  }
  return basis;
}

// Independent oracle: explicit normal equations, residual = x - B (B^T B)^-1 B^T x.
Matrix normal_equations_residual(const Matrix& run, int order) {
  const Matrix basis = cosine_basis(run.rows(), order);
  const Matrix gram_inv = (basis.transpose() * basis).inverse();
  return run - basis * (gram_inv * (basis.transpose() * run));
}

}  // namespace

TEST_CASE("constant columns are removed by the drift basis") {
  Matrix run(4, 1);
  run << 5, 5, 5, 5;
  const Matrix out = detrend_cosine(run, 1);
  CHECK(out.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a pure basis cosine leaves a zero residual") {
  const Index n = 16;
  Matrix run(n, 1);
  for (Index t = 0; t < n; ++t) {
    run(t, 0) = std::cos(std::numbers::pi * (static_cast<double>(t) + 0.5) / static_cast<double>(n));
  }
  const Matrix out = detrend_cosine(run, 1);
  CHECK(out.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("random run matches the normal-equations oracle") {
  const Matrix run = random_matrix(20, 3, 11);
  const Matrix fast = detrend_cosine(run, 3);
  const Matrix oracle = normal_equations_residual(run, 3);
  CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("residuals are orthogonal to every basis vector") {
  const Matrix run = random_matrix(30, 4, 12);
  const int order = 4;
  const Matrix out = detrend_cosine(run, order);
  const Matrix basis = cosine_basis(run.rows(), order);
  CHECK((basis.transpose() * out).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("detrending is idempotent") {
  const Matrix run = random_matrix(25, 2, 13);
  const Matrix once = detrend_cosine(run, 2);
  const Matrix twice = detrend_cosine(once, 2);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("order >= n is a rank error") {
  const Matrix run = random_matrix(5, 1, 14);
  CHECK_THROWS_AS(detrend_cosine(run, 5), ValidationError);
  CHECK_THROWS_AS(detrend_cosine(run, 0), ValidationError);
}

TEST_CASE("default detrend order follows the 128 s high-pass rule") {
  CHECK(default_detrend_order(300, 2.0) == 10);  // ceil(2*300*2/128) = ceil(9.375)
  CHECK(default_detrend_order(10, 2.0) == 1);
  CHECK(default_detrend_order(2, 2.0) == 1);
}

TEST_CASE("standardize: two-point column") {
  Matrix run(2, 1);
  run << 1, 3;
  const Matrix out = standardize(run);
  CHECK(out(0, 0) == doctest::Approx(-1.0));
  CHECK(out(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardize: constant column maps to zeros") {
  Matrix run(3, 1);
  run << 7, 7, 7;
  const Matrix out = standardize(run);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standardize: random run has zero means and unit population stds") {
  const Matrix run = random_matrix(50, 4, 15);
  const Matrix out = standardize(run);
  for (Index j = 0; j < out.cols(); ++j) {
    CHECK(std::abs(out.col(j).mean()) < 1e-12);
    const double var = out.col(j).squaredNorm() / 50.0;
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
  }
}

TEST_CASE("standardize rejects single-row input") {
  CHECK_THROWS_AS(standardize(Matrix::Ones(1, 2)), ValidationError);
}

TEST_CASE("fir: lag 2 window 2 average") {
  Matrix run(4, 1);
  run << 0, 10, 20, 30;
  const Matrix out = fir_features(run, {2, 2, FirAggregation::Average});
  REQUIRE(out.rows() == 1);
  CHECK(out(0, 0) == 25.0);
}

TEST_CASE("fir: lag 1 window 2 stack") {
  Matrix run(4, 1);
  run << 0, 10, 20, 30;
  const Matrix out = fir_features(run, {1, 2, FirAggregation::Stack});
  REQUIRE(out.rows() == 2);
  REQUIRE(out.cols() == 2);
  CHECK(out(0, 0) == 10.0);
  CHECK(out(0, 1) == 20.0);
  CHECK(out(1, 0) == 20.0);
  CHECK(out(1, 1) == 30.0);
}

TEST_CASE("fir: lag 0 window 1 is the identity for both aggregations") {
  const Matrix run = random_matrix(6, 3, 16);
  for (const auto agg : {FirAggregation::Average, FirAggregation::Stack}) {
    const Matrix out = fir_features(run, {0, 1, agg});
    CHECK((out.array() == run.array()).all());
  }
}

TEST_CASE("fir: window 1 is a pure row shift for both aggregations") {
  const Matrix run = random_matrix(9, 2, 17);
  for (const auto agg : {FirAggregation::Average, FirAggregation::Stack}) {
    const Matrix out = fir_features(run, {3, 1, agg});
    REQUIRE(out.rows() == 6);
    CHECK((out.array() == run.bottomRows(6).array()).all());
  }
}

TEST_CASE("fir: run shorter than lag + window is a length error") {
  const Matrix run = random_matrix(3, 1, 18);
  CHECK_THROWS_AS(fir_features(run, {2, 2, FirAggregation::Average}), ValidationError);
}
