#include "oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace larmap::testing {

Matrix random_matrix(int n, int p, TestRng& rng) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

Matrix standardize_columns(const Matrix& x) {
  Matrix out = x.rowwise() - x.colwise().mean();
  for (Index j = 0; j < out.cols(); ++j) {
    double norm = out.col(j).norm();
    out.col(j) /= norm;
  }
  return out;
}

Matrix orthonormal_standardized(int n, int p, TestRng& rng) {
  Matrix x = random_matrix(n, p, rng);
  Matrix centered = x.rowwise() - x.colwise().mean();
  Eigen::HouseholderQR<Matrix> qr(centered);
  Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  return q;
}

Vector cd_lasso(const Matrix& x, const Vector& yc, double lambda, const Vector& warm_start,
                double tol, int max_sweeps) {
  const int p = static_cast<int>(x.cols());
  Vector beta = warm_start.size() == p ? warm_start : Vector::Zero(p);
  Vector col_sq(p);
  for (int j = 0; j < p; ++j) col_sq[j] = x.col(j).squaredNorm();
  Vector resid = yc - x * beta;

  auto soft = [](double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (int j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;
      double old = beta[j];
      double rho = x.col(j).dot(resid) + col_sq[j] * old;
      double updated = soft(rho, lambda) / col_sq[j];
      if (updated != old) {
        beta[j] = updated;
        resid += x.col(j) * (old - updated);
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
    }
    if (max_delta <= tol) break;
  }
  return beta;
}

Vector ols_coefficients(const Matrix& x, const Vector& yc) {
  Matrix gram = x.transpose() * x;
  return Eigen::LDLT<Matrix>(gram).solve(x.transpose() * yc);
}

namespace {

double subset_rss(const Matrix& xc, const Vector& yc, const std::vector<int>& subset) {
  if (subset.empty()) return yc.squaredNorm();
  Matrix xs(xc.rows(), static_cast<Index>(subset.size()));
  for (size_t q = 0; q < subset.size(); ++q) xs.col(static_cast<Index>(q)) = xc.col(subset[q]);
  Matrix gram = xs.transpose() * xs;
  Vector beta = Eigen::LDLT<Matrix>(gram).solve(xs.transpose() * yc);
  return (yc - xs * beta).squaredNorm();
}

}  // namespace

std::map<int, OracleSubset> brute_force_best_subsets(const Matrix& x, const Vector& y,
                                                     int max_size) {
  const int p = static_cast<int>(x.cols());
  Matrix xc = x.rowwise() - x.colwise().mean();
  Vector yc = y.array() - y.mean();

  std::map<int, OracleSubset> best;
  for (int size = 1; size <= std::min(max_size, p); ++size) {
    OracleSubset winner;
    winner.rss = std::numeric_limits<double>::infinity();
    std::vector<int> comb(size);
    for (int i = 0; i < size; ++i) comb[i] = i;
    for (;;) {
      double rss = subset_rss(xc, yc, comb);
      double slack = 1e-12 * (1.0 + std::min(rss, winner.rss));
      // lexicographic enumeration: strict improvement keeps the lex-smallest
      if (rss < winner.rss - slack) {
        winner.rss = rss;
        winner.terms = comb;
      }
      // advance combination
      int i = size - 1;
      while (i >= 0 && comb[i] == p - size + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int k = i + 1; k < size; ++k) comb[k] = comb[k - 1] + 1;
    }
    best[size] = winner;
  }
  return best;
}

}  // namespace larmap::testing
