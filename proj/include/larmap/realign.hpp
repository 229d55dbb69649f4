#ifndef LARMAP_REALIGN_HPP
#define LARMAP_REALIGN_HPP

#include <span>
#include <string>
#include <vector>

#include "larmap/dataset.hpp"
#include "larmap/tps.hpp"
#include "larmap/types.hpp"

namespace larmap {

/// Square block centred on a target location, evaluated over a regular
/// grid_n x grid_n lattice placed at sub-cell centers (block edges are not
/// lattice points).
struct BlockSpec {
  GeoPoint center;
  double side = 25.0;
  int grid_n = 100;

  void validate() const {
    if (side <= 0.0) throw DataError("block side must be > 0");
    if (grid_n < 1) throw DataError("block grid_n must be >= 1");
  }
};

struct RealignOptions {
  double side = 25.0;
  int grid_n = 100;
  double ridge = 0.0;
  /// Point covariates with more samples than this are fitted per block from
  /// the nearest samples to the block center.
  int tps_neighbors = 200;
  int threads = 1;
};

/// Realigned covariate values: one row per target center, one column per
/// covariate in manifest order.
struct RealignedTable {
  std::vector<std::string> names;
  std::vector<int> priority_ranks;
  Matrix values;
};

/// Per-center failure log for masked realignment (full-cover prediction
/// marks failed pixels as nodata instead of aborting).
struct RealignReport {
  std::vector<bool> valid_row;
  std::vector<std::string> failures;
};

double block_mean_point(const TpsModel& model, const BlockSpec& block);

/// Mean of nearest-cell raster values over the block lattice, skipping
/// nodata cells and points outside the extent. Throws CoverageError when no
/// lattice point yields a value.
double block_mean_raster(const RasterGrid& grid, const BlockSpec& block);

/// Realigns every covariate to blocks centred at `centers`. With report ==
/// nullptr any failure aborts with a CoverageError naming the covariate and
/// center index; otherwise failures only invalidate their row.
RealignedTable realign_at(const Dataset& ds, std::span<const GeoPoint> centers,
                          const RealignOptions& options, RealignReport* report = nullptr);

/// Blocks centred on the response observations.
RealignedTable realign_dataset(const Dataset& ds, const RealignOptions& options);

}  // namespace larmap

#endif
