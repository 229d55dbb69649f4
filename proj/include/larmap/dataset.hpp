#ifndef LARMAP_DATASET_HPP
#define LARMAP_DATASET_HPP

#include <string>
#include <utility>
#include <vector>

#include "larmap/raster.hpp"
#include "larmap/types.hpp"

namespace larmap {

struct ResponseObservation {
  GeoPoint location;
  double value = 0.0;
};

/// Scattered samples of one covariate, e.g. one channel of a vehicle-mounted
/// survey. priority_rank orders sources for correlation filtering
/// (lower = finer resolution = preferred).
struct PointCovariate {
  std::string name;
  std::vector<std::pair<GeoPoint, double>> samples;
  int priority_rank = 0;
};

struct RasterCovariate {
  std::string name;
  RasterGrid grid;
  int priority_rank = 0;
};

/// Position of one covariate in manifest order.
struct CovariateRef {
  bool is_point = false;
  int index = 0;  // into point_covariates or raster_covariates
};

struct Dataset {
  std::vector<ResponseObservation> responses;
  std::vector<PointCovariate> point_covariates;
  std::vector<RasterCovariate> raster_covariates;
  // manifest order; realigned tables use this column order. Empty means
  // "points first, then rasters" (see covariate_order()).
  std::vector<CovariateRef> order;

  int n() const { return static_cast<int>(responses.size()); }
  int covariate_count() const {
    return static_cast<int>(point_covariates.size() + raster_covariates.size());
  }

  std::vector<CovariateRef> covariate_order() const;
  const std::string& covariate_name(const CovariateRef& ref) const;
  int covariate_rank(const CovariateRef& ref) const;

  /// Checks the structural invariants: n >= 2, finite values, unique
  /// covariate names, point covariates fit for spline interpolation.
  void validate() const;
};

/// One manifest record. `kind` is "point" or "raster"; value_column is the
/// CSV column to read for point covariates and ignored for rasters.
struct ManifestEntry {
  std::string name;
  std::string kind;
  std::string path;
  int priority_rank = 0;
  std::string value_column;
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

/// Reads (easting, northing, value) records from a headered CSV.
std::vector<std::pair<GeoPoint, double>> load_points(const std::string& path,
                                                     const std::string& value_column);

/// Assembles the full dataset: responses from `response_path` (column
/// `response_column`) plus every manifest covariate. Paths in the manifest
/// are resolved relative to the manifest file's directory.
Dataset load_dataset(const std::string& manifest_path, const std::string& response_path,
                     const std::string& response_column);

}  // namespace larmap

#endif
