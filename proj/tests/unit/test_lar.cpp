#include <doctest.h>

#include <cmath>

#include "larmap/lar.hpp"
#include "oracles.hpp"

using namespace larmap;
using larmap::testing::TestRng;

namespace {

Vector random_response(const Matrix& x, TestRng& rng, int sparsity = 3, double noise = 0.5) {
  Vector beta = Vector::Zero(x.cols());
  for (int k = 0; k < sparsity && k < x.cols(); ++k)
    beta[rng.uniform_int(0, static_cast<int>(x.cols()) - 1)] = rng.normal() * 2.0;
  Vector y = x * beta;
  for (Index i = 0; i < y.size(); ++i) y[i] += noise * rng.normal() + 1.5;
  return y;
}

}  // namespace

TEST_CASE("single-column path is two steps ending at OLS") {
  TestRng rng(21);
  Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(12, 1, rng));
  Vector y = random_response(x, rng, 1);
  LarPath path = lar_path(x, y);
  REQUIRE(path.steps.size() == 2);
  CHECK(path.steps[0].active.empty());
  CHECK(path.steps[1].active.size() == 1);
  Vector yc = y.array() - y.mean();
  double ols = x.col(0).dot(yc);  // unit-norm column
  CHECK(path.steps[1].coefficients[0] == doctest::Approx(ols).epsilon(1e-10));
  CHECK(path.intercept == doctest::Approx(y.mean()));
  CHECK(path.stop_reason == StopReason::df_exhausted);
}

TEST_CASE("orthonormal designs: knots equal soft-thresholded OLS") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    TestRng rng(seed);
    Matrix x = larmap::testing::orthonormal_standardized(10, 5, rng);
    Vector y = random_response(x, rng, 3, 0.3);
    Vector yc = y.array() - y.mean();
    Vector b = x.transpose() * yc;  // per-column OLS under orthonormality

    LarPath path = lar_path(x, y, {LarVariant::lasso, 0.0, {}});
    for (const auto& step : path.steps) {
      double lambda = step.max_abs_corr;
      for (int j = 0; j < 5; ++j) {
        double expect = 0.0;
        if (b[j] > lambda) expect = b[j] - lambda;
        else if (b[j] < -lambda) expect = b[j] + lambda;
        CHECK(std::abs(step.coefficients[j] - expect) < 1e-8);
      }
    }
  }
}

TEST_CASE("lasso knots match coordinate descent at the knot penalty") {
  for (std::uint64_t seed = 31; seed <= 36; ++seed) {
    TestRng rng(seed);
    Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(20, 8, rng));
    Vector y = random_response(x, rng);
    Vector yc = y.array() - y.mean();

    LarPath path = lar_path(x, y, {LarVariant::lasso, 0.0, {}});
    Vector warm = Vector::Zero(8);
    for (const auto& step : path.steps) {
      Vector oracle = larmap::testing::cd_lasso(x, yc, step.max_abs_corr, warm);
      CHECK((oracle - step.coefficients).cwiseAbs().maxCoeff() < 1e-6);
      warm = oracle;
    }
  }
}

TEST_CASE("path invariants on random instances, including p > n") {
  int checked_p_gt_n = 0;
  for (std::uint64_t seed = 50; seed < 70; ++seed) {
    TestRng rng(seed);
    int n = rng.uniform_int(15, 40);
    int p = rng.uniform_int(2, 30);
    if (seed % 3 == 0) p = std::min(30, n + rng.uniform_int(1, 8));  // force p > n sometimes
    if (p > n) ++checked_p_gt_n;
    Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(n, p, rng));
    Vector y = random_response(x, rng);

    LarPath path = lar_path(x, y, {LarVariant::lasso, 0.0, {}});
    Vector yc = y.array() - y.mean();

    double prev_level = std::numeric_limits<double>::infinity();
    for (const auto& step : path.steps) {
      // monotone penalty proxy
      CHECK(step.max_abs_corr <= prev_level + 1e-10);
      prev_level = step.max_abs_corr;

      Vector corr = x.transpose() * (yc - x * step.coefficients);
      double active_max = 0.0, active_min = std::numeric_limits<double>::infinity();
      for (int j : step.active) {
        active_max = std::max(active_max, std::abs(corr[j]));
        active_min = std::min(active_min, std::abs(corr[j]));
      }
      if (!step.active.empty()) {
        CHECK(active_max - active_min < 1e-8);  // equal-correlation invariant
        for (int j = 0; j < p; ++j) {
          bool is_active = false;
          for (int a : step.active) is_active |= (a == j);
          if (!is_active) CHECK(std::abs(corr[j]) <= active_max + 1e-8);
        }
      }
      // lasso sign consistency
      for (int j : step.active) {
        double bj = step.coefficients[j];
        if (std::abs(bj) > 1e-12) CHECK(bj * corr[j] >= -1e-10);
      }
      // coefficients vanish exactly off the active set
      for (int j = 0; j < p; ++j) {
        bool is_active = false;
        for (int a : step.active) is_active |= (a == j);
        if (!is_active) CHECK(step.coefficients[j] == 0.0);
      }
    }

    if (p >= n) {
      CHECK(path.stop_reason == StopReason::df_exhausted);
      CHECK(static_cast<int>(path.steps.back().active.size()) <= n - 1);
    }

    // reproducibility
    LarPath again = lar_path(x, y, {LarVariant::lasso, 0.0, {}});
    REQUIRE(again.steps.size() == path.steps.size());
    for (size_t s = 0; s < path.steps.size(); ++s) {
      CHECK(again.steps[s].active == path.steps[s].active);
      CHECK((again.steps[s].coefficients - path.steps[s].coefficients).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }
  CHECK(checked_p_gt_n >= 3);
}

TEST_CASE("final step with p < n and corr_tol 0 is the OLS fit") {
  for (std::uint64_t seed = 80; seed < 86; ++seed) {
    TestRng rng(seed);
    Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(25, 6, rng));
    Vector y = random_response(x, rng);
    Vector yc = y.array() - y.mean();
    LarPath path = lar_path(x, y, {LarVariant::lasso, 0.0, {}});
    Vector ols = larmap::testing::ols_coefficients(x, yc);
    CHECK((path.steps.back().coefficients - ols).cwiseAbs().maxCoeff() < 1e-8);

    FittedModel m = model_at(path, static_cast<int>(path.steps.size()) - 1);
    Vector fitted = predict(m, x);
    Vector ols_fitted = (x * ols).array() + y.mean();
    CHECK((fitted - ols_fitted).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("model_at endpoints and bounds") {
  TestRng rng(90);
  Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(15, 4, rng));
  Vector y = random_response(x, rng);
  LarPath path = lar_path(x, y);

  FittedModel m0 = model_at(path, 0);
  CHECK(m0.terms.empty());
  Vector pred = predict(m0, x);
  CHECK((pred.array() - y.mean()).abs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(model_at(path, -1), Error);
  CHECK_THROWS_AS(model_at(path, static_cast<int>(path.steps.size())), Error);

  // prediction at any step reproduces the step's residual vector
  for (size_t s = 0; s < path.steps.size(); ++s) {
    FittedModel m = model_at(path, static_cast<int>(s));
    Vector resid = y - predict(m, x);
    Vector expected = (y.array() - y.mean()).matrix() - x * path.steps[s].coefficients;
    CHECK((resid - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("predict validates column width and honors standardization") {
  TestRng rng(91);
  Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(10, 3, rng));
  Vector y = random_response(x, rng);
  LarPath path = lar_path(x, y);
  FittedModel m = model_at(path, 1);
  Matrix wrong(4, 5);
  CHECK_THROWS_AS(predict(m, wrong), DataError);

  // a one-column model with coefficient 1 on a standardized column maps a
  // training row to that row's standardized value plus the intercept
  FittedModel simple;
  simple.terms = {1};
  simple.coefficients = Vector::Ones(1);
  simple.intercept = 2.0;
  simple.centers = Vector::Zero(1);
  simple.scales = Vector::Ones(1);
  simple.design_width = 3;
  Vector out = predict(simple, x);
  CHECK(out[4] == doctest::Approx(2.0 + x(4, 1)).epsilon(1e-14));
}

TEST_CASE("unstandardized input is a precondition error") {
  TestRng rng(92);
  Matrix x = larmap::testing::random_matrix(10, 3, rng);  // raw columns
  Vector y = random_response(x, rng);
  CHECK_THROWS_AS(lar_path(x, y), NumericError);
}

TEST_CASE("pure lar variant never drops columns") {
  TestRng rng(93);
  Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(25, 10, rng));
  Vector y = random_response(x, rng);
  LarPath path = lar_path(x, y, {LarVariant::lar, 0.0, {}});
  for (const auto& step : path.steps) CHECK(step.action.kind != PathAction::Kind::drop);
}

TEST_CASE("corr_tol and max_steps stop the path early") {
  TestRng rng(94);
  Matrix x = larmap::testing::standardize_columns(larmap::testing::random_matrix(30, 10, rng));
  Vector y = random_response(x, rng);

  LarPath full = lar_path(x, y);
  double mid_level = full.steps[full.steps.size() / 2].max_abs_corr;
  LarPath tol_path = lar_path(x, y, {LarVariant::lasso, mid_level, {}});
  CHECK(tol_path.stop_reason == StopReason::corr_tol);
  CHECK(tol_path.steps.size() < full.steps.size());

  LarPath capped = lar_path(x, y, {LarVariant::lasso, 0.0, 2});
  CHECK(capped.stop_reason == StopReason::max_steps);
  CHECK(capped.steps.size() == 3);  // init + two knots
}
