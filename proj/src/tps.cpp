#include "larmap/tps.hpp"

#include <Eigen/LU>

#include <cmath>

namespace larmap {

TpsModel tps_fit(std::span<const std::pair<GeoPoint, double>> samples, double ridge) {
  const int m = static_cast<int>(samples.size());
  if (m < 3) throw DataError("thin plate spline needs at least 3 samples");
  if (ridge < 0.0) throw DataError("tps ridge must be non-negative");

  // Fit in centroid-normalized coordinates to keep the kernel matrix well
  // scaled, then map the solution back to the original-coordinate form.
  double mu_e = 0.0, mu_n = 0.0;
  for (const auto& [p, v] : samples) {
    mu_e += p.easting;
    mu_n += p.northing;
  }
  mu_e /= m;
  mu_n /= m;
  double sigma = 0.0;
  for (const auto& [p, v] : samples)
    sigma = std::max(sigma, std::hypot(p.easting - mu_e, p.northing - mu_n));
  if (sigma == 0.0)
    throw SingularSystemError("all thin plate spline sample locations coincide");

  const int dim = m + 3;
  Matrix A = Matrix::Zero(dim, dim);
  Vector b = Vector::Zero(dim);
  std::vector<double> se(m), sn(m);
  for (int i = 0; i < m; ++i) {
    se[i] = (samples[i].first.easting - mu_e) / sigma;
    sn[i] = (samples[i].first.northing - mu_n) / sigma;
    b[i] = samples[i].second;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double k = tps_kernel(std::hypot(se[i] - se[j], sn[i] - sn[j]));
      A(i, j) = k;
      A(j, i) = k;
    }
    A(i, i) = ridge;
    A(i, m) = A(m, i) = 1.0;
    A(i, m + 1) = A(m + 1, i) = se[i];
    A(i, m + 2) = A(m + 2, i) = sn[i];
  }

  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible())
    throw SingularSystemError(
        "thin plate spline system is singular (collinear or duplicated sample locations)");
  Vector sol = lu.solve(b);

  // Back-convert: w = w'/sigma^2 and the affine part picks up the constant
  // from phi(r/sigma) = phi(r)/sigma^2 - (log sigma / sigma^2) r^2, whose
  // quadratic piece collapses to a constant under the side conditions.
  TpsModel model;
  model.ridge = ridge;
  model.centers.reserve(m);
  model.rbf_weights = Vector(m);
  const double s2 = sigma * sigma;
  double quad_const = 0.0;
  for (int i = 0; i < m; ++i) {
    model.centers.push_back(samples[i].first);
    model.rbf_weights[i] = sol[i] / s2;
    quad_const += sol[i] * (samples[i].first.easting * samples[i].first.easting +
                            samples[i].first.northing * samples[i].first.northing);
  }
  model.ax = sol[m + 1] / sigma;
  model.ay = sol[m + 2] / sigma;
  model.a0 = sol[m] - (sol[m + 1] * mu_e + sol[m + 2] * mu_n) / sigma -
             std::log(sigma) / s2 * quad_const;

  if (ridge == 0.0) {
    double scale = 1.0;
    for (const auto& [p, v] : samples) scale = std::max(scale, std::abs(v));
    for (const auto& [p, v] : samples) {
      if (std::abs(tps_eval(model, p) - v) > 1e-7 * scale)
        throw NumericError(
            "thin plate spline solve failed to interpolate the samples; near-duplicate "
            "locations are likely, retry with ridge > 0");
    }
  }
  return model;
}

double tps_eval(const TpsModel& model, const GeoPoint& at) {
  double acc = model.a0 + model.ax * at.easting + model.ay * at.northing;
  for (size_t i = 0; i < model.centers.size(); ++i)
    acc += model.rbf_weights[static_cast<Index>(i)] * tps_kernel(distance(at, model.centers[i]));
  return acc;
}

}  // namespace larmap
