#ifndef LARMAP_TPS_HPP
#define LARMAP_TPS_HPP

#include <span>
#include <utility>
#include <vector>

#include "larmap/types.hpp"

namespace larmap {

/// 2-D thin plate spline: f(p) = a0 + ax*e + ay*n + sum_i w_i * phi(|p - c_i|)
/// with phi(r) = r^2 log r and phi(0) = 0. Weights satisfy the side
/// conditions sum w = sum w*e = sum w*n = 0.
struct TpsModel {
  std::vector<GeoPoint> centers;
  Vector rbf_weights;
  double a0 = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double ridge = 0.0;
};

/// Exact interpolation when ridge = 0; ridge > 0 smooths and tolerates
/// near-duplicate sample locations. Throws SingularSystemError for collinear
/// or duplicated centers, NumericError when the solve is too ill-conditioned
/// (the message suggests a positive ridge).
TpsModel tps_fit(std::span<const std::pair<GeoPoint, double>> samples, double ridge = 0.0);

double tps_eval(const TpsModel& model, const GeoPoint& at);

inline double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

}  // namespace larmap

#endif
