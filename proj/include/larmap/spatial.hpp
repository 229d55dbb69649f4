#ifndef LARMAP_SPATIAL_HPP
#define LARMAP_SPATIAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "larmap/ensemble.hpp"
#include "larmap/raster.hpp"
#include "larmap/realign.hpp"
#include "larmap/types.hpp"

namespace larmap {

/// Residuals of the model-averaged prediction at the observation rows.
Vector residuals(const Ensemble& ens, const Matrix& x_raw, const Vector& y);

struct SpatialCvConfig {
  int single_max = 12;
  int inter_total_max = 6;
  double mccm = 0.95;
  SelectorConfig selector;  // lasso_lar by default
  double sse_floor = 1e-12;
  int threads = 1;
  std::uint64_t seed = 0;  // correlation-filter tie breaks
};

struct SpatialEnsembleResult {
  Ensemble ensemble;
  DesignMatrix filtered;  // spatial terms surviving the correlation filter
  SpatialBasis basis;
  std::vector<DropRecord> drop_log;
};

/// Fits the residual trend-surface ensemble: spatial polynomial design on
/// the observation coordinates, correlation pre-filter, then the same
/// split/selection/weighting pipeline as the covariate stage. The splits are
/// passed in so members can pair with the covariate ensemble's members.
SpatialEnsembleResult spatial_ensemble(std::span<const GeoPoint> coords, const Vector& resid,
                                       std::span<const Split> splits,
                                       const SpatialCvConfig& config);

/// Raw rows for the given spatial terms at arbitrary coordinates.
Matrix spatial_rows_for_terms(const SpatialBasis& basis, std::span<const TermMeta> terms,
                              std::span<const GeoPoint> coords);

/// Term values (powers/products per the term metadata) for realigned rows;
/// used to evaluate a fitted design at prediction locations. Unlike
/// expand_terms this never re-derives column statistics or validates
/// constancy, it only computes values.
Matrix expand_rows(const RealignedTable& realigned, std::span<const TermMeta> terms);

struct PixelRows {
  std::vector<GeoPoint> centers;  // row-major, northernmost row first
  Matrix rows;                    // n_pixels x n_terms, raw values
  std::vector<bool> valid;
  std::vector<std::string> failures;
};

/// Realigns every covariate to a block centred on each pixel center and
/// evaluates the given covariate terms there. Pixels whose realignment fails
/// coverage are flagged invalid and surface as nodata downstream.
PixelRows build_pixel_rows(const Dataset& ds, const RasterGrid& geometry,
                           const RealignOptions& realign_options,
                           std::span<const TermMeta> terms);

enum class Pairing { matched, cross };

/// Per-pixel member predictions from the covariate and spatial ensembles.
/// matched: member k = covariate member k + spatial member k, weights
/// proportional to the product of the two member weights. cross: all
/// (i, j) pairs with weights W_i * W_j.
struct PredictionStack {
  RasterGrid geometry;  // header only; values stay empty
  Matrix members;       // n_pixels x n_members
  Vector weights;
  std::vector<bool> valid;
};

PredictionStack predict_full_cover(const Ensemble& cov_ens, const Ensemble& spat_ens,
                                   const Matrix& pixel_rows, const Matrix& spat_pixel_rows,
                                   const RasterGrid& geometry, const std::vector<bool>& valid,
                                   Pairing pairing = Pairing::matched, int threads = 1);

struct OutputRasters {
  RasterGrid prediction;
  RasterGrid uncertainty;
};

/// prediction = weighted member average; uncertainty = width of the central
/// `central` interval of the unweighted member predictions (linear
/// interpolation of order statistics). Invalid pixels become nodata.
OutputRasters summarize_stack(const PredictionStack& stack, double central = 0.95);

/// Audit dump: pixel_id, member_id, value.
void write_member_stack_csv(const PredictionStack& stack, const std::string& path);

}  // namespace larmap

#endif
