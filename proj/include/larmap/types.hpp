#ifndef LARMAP_TYPES_HPP
#define LARMAP_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace larmap {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;
using Index = Eigen::Index;

/// Planar coordinates in meters. No reprojection is done anywhere in this
/// library; all inputs must share one coordinate system.
struct GeoPoint {
  double easting = 0.0;
  double northing = 0.0;
};

inline double distance(const GeoPoint& a, const GeoPoint& b) {
  return std::hypot(a.easting - b.easting, a.northing - b.northing);
}

// Error taxonomy. The CLI maps these onto exit codes: ConfigError -> 2,
// DataError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// Data-side refinements, kept distinct so tests can pin the failure mode.
struct SchemaError : DataError {
  using DataError::DataError;
};
struct ParseError : DataError {
  using DataError::DataError;
};
struct FormatError : DataError {
  using DataError::DataError;
};
struct CoverageError : DataError {
  using DataError::DataError;
};

struct SingularSystemError : NumericError {
  using NumericError::NumericError;
};
struct DegenerateColumnError : NumericError {
  using NumericError::NumericError;
};

}  // namespace larmap

#endif
