#ifndef LARMAP_VEGINDEX_HPP
#define LARMAP_VEGINDEX_HPP

#include <map>
#include <string>
#include <vector>

#include "larmap/dataset.hpp"
#include "larmap/types.hpp"

namespace larmap {

/// Spectral vegetation indices derived from NIR and RED reflectance.
/// Indices whose formula is undefined at the given inputs land in `errors`
/// with the reason; everything else lands in `values`.
struct VegIndexResult {
  std::map<std::string, double> values;
  std::map<std::string, std::string> errors;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double value(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) {
      auto err = errors.find(key);
      throw DataError("vegetation index " + key +
                      (err != errors.end() ? " undefined: " + err->second : " not computed"));
    }
    return it->second;
  }
};

/// Keys: SR, DVI, NDVI, SAVI, NLI, MNLI, MSR, TVI, RDVI.
/// soil_factor is the soil-adjustment L used by SAVI and MNLI.
VegIndexResult vegetation_indices(double nir, double red, double soil_factor = 0.5);

/// Derives one point covariate per index from co-located NIR and RED
/// covariates. Sample locations must match pairwise in order. Indices that
/// are undefined at any sample are skipped entirely (recorded in `skipped`).
struct DerivedVegCovariates {
  std::vector<PointCovariate> covariates;
  std::map<std::string, std::string> skipped;
};

DerivedVegCovariates derive_vegetation_covariates(const PointCovariate& nir,
                                                  const PointCovariate& red,
                                                  double soil_factor = 0.5,
                                                  int priority_rank = 0,
                                                  const std::string& name_prefix = "");

}  // namespace larmap

#endif
