#ifndef LARMAP_DESIGN_HPP
#define LARMAP_DESIGN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "larmap/realign.hpp"
#include "larmap/types.hpp"

namespace larmap {

enum class TermKind { linear, power, interaction, spatial_power, spatial_interaction };

std::string term_kind_name(TermKind k);

/// Metadata for one design-matrix column. Interactions are products of two
/// distinct linear terms; spatial terms are powers of recentred coordinates.
struct TermMeta {
  std::string label;
  TermKind kind = TermKind::linear;
  std::string base_a;
  int order_a = 1;
  std::string base_b;  // empty unless interaction
  int order_b = 0;
  int source_rank = 0;

  bool is_interaction() const {
    return kind == TermKind::interaction || kind == TermKind::spatial_interaction;
  }
  int kind_rank() const { return is_interaction() ? 1 : 0; }
  int total_order() const { return order_a + order_b; }
};

/// Per-column centering/scaling stats. `scales` are centered Euclidean
/// norms, not standard deviations.
struct Standardization {
  Vector centers;
  Vector scales;
};

struct DesignMatrix {
  std::vector<TermMeta> terms;
  Matrix values;  // n x p
  std::optional<Standardization> standardization;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
};

/// Polynomial powers 1..max_order of every covariate plus (optionally) all
/// pairwise products of the linear terms. Column order: covariates in input
/// order with ascending powers, then pairs in lexicographic (i, j) order.
DesignMatrix expand_terms(const RealignedTable& realigned, int max_order = 4,
                          bool pairwise = true);

/// Recentring applied to coordinates before powering; needed to build the
/// same spatial terms at prediction locations.
struct SpatialBasis {
  double e_center = 0.0, e_scale = 1.0;
  double n_center = 0.0, n_scale = 1.0;
  std::vector<TermMeta> terms;
};

struct SpatialDesign {
  DesignMatrix design;
  SpatialBasis basis;
};

/// Single-coordinate powers up to single_max plus all E^a * N^b with
/// a, b >= 1 and a + b <= inter_total_max. Coordinates are recentred to
/// their mean and rescaled by their standard deviation before powering.
SpatialDesign spatial_design(std::span<const GeoPoint> coords, int single_max = 12,
                             int inter_total_max = 6);

/// Raw rows on `basis.terms` for new coordinates (uses the stored
/// recentring, never re-estimates).
Matrix spatial_rows(const SpatialBasis& basis, std::span<const GeoPoint> coords);

/// Center to mean zero, scale to unit Euclidean norm. Errors on constant
/// columns, naming the term.
std::pair<DesignMatrix, Standardization> standardize(const DesignMatrix& d);

/// Applies training-set standardization to new raw rows.
Matrix mirror(const Matrix& raw, const Standardization& stats);

struct DropRecord {
  std::string dropped;
  std::string kept;
  double abs_r = 0.0;
  std::string rule;  // source | kind | order | random
};

struct FilterResult {
  DesignMatrix design;
  std::vector<int> kept;  // column indices into the input design
  std::vector<DropRecord> drop_log;
};

/// Greedy correlation filter: repeatedly take the highest-|r| remaining pair
/// above the threshold and drop its lower-priority member. Priority is the
/// lexicographic key (source_rank, kind_rank, total_order, seeded random).
FilterResult prefilter_mccm(const DesignMatrix& d, double threshold, std::uint64_t seed);

}  // namespace larmap

#endif
