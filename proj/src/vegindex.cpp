#include "larmap/vegindex.hpp"

#include <cmath>

namespace larmap {

VegIndexResult vegetation_indices(double nir, double red, double soil_factor) {
  if (!std::isfinite(nir) || !std::isfinite(red))
    throw DataError("vegetation indices need finite reflectance values");
  if (nir < 0.0 || red < 0.0)
    throw DataError("vegetation indices need non-negative reflectance values");

  const double L = soil_factor;
  VegIndexResult out;

  if (red == 0.0) {
    out.errors["SR"] = "red reflectance is zero";
    out.errors["MSR"] = "red reflectance is zero";
  } else {
    double sr = nir / red;
    out.values["SR"] = sr;
    out.values["MSR"] = (sr - 1.0) / (std::sqrt(sr) + 1.0);
  }

  out.values["DVI"] = nir - red;

  if (nir + red == 0.0) {
    out.errors["NDVI"] = "nir + red is zero";
    out.errors["TVI"] = "nir + red is zero";
    out.errors["RDVI"] = "nir + red is zero";
  } else {
    double ndvi = (nir - red) / (nir + red);
    out.values["NDVI"] = ndvi;
    if (ndvi < -0.5)
      out.errors["TVI"] = "NDVI below -0.5";
    else
      out.values["TVI"] = std::sqrt(ndvi + 0.5);
    out.values["RDVI"] = (nir - red) / std::sqrt(nir + red);
  }

  double nir2 = nir * nir;
  out.values["NLI"] = (nir2 - red) / (nir2 + red);
  out.values["MNLI"] = (nir2 - red) * (1.0 + L) / (nir2 + red + L);
  // NLI/MNLI denominators vanish only at nir = red = 0, caught above
  if (nir2 + red == 0.0) {
    out.values.erase("NLI");
    out.values.erase("MNLI");
    out.errors["NLI"] = "nir^2 + red is zero";
    out.errors["MNLI"] = "nir^2 + red is zero";
  }

  out.values["SAVI"] = (nir - red) * (1.0 + L) / (nir + red + L);
  return out;
}

DerivedVegCovariates derive_vegetation_covariates(const PointCovariate& nir,
                                                  const PointCovariate& red,
                                                  double soil_factor, int priority_rank,
                                                  const std::string& name_prefix) {
  if (nir.samples.size() != red.samples.size())
    throw DataError("NIR and RED covariates have different sample counts");
  for (size_t i = 0; i < nir.samples.size(); ++i) {
    if (nir.samples[i].first.easting != red.samples[i].first.easting ||
        nir.samples[i].first.northing != red.samples[i].first.northing)
      throw DataError("NIR and RED sample locations differ at record " + std::to_string(i));
  }

  static const char* kKeys[] = {"SR", "DVI", "NDVI", "SAVI", "NLI", "MNLI", "MSR", "TVI", "RDVI"};
  DerivedVegCovariates out;
  std::map<std::string, std::vector<std::pair<GeoPoint, double>>> series;
  for (const char* k : kKeys) series[k] = {};

  for (size_t i = 0; i < nir.samples.size(); ++i) {
    VegIndexResult r =
        vegetation_indices(nir.samples[i].second, red.samples[i].second, soil_factor);
    for (const char* k : kKeys) {
      if (out.skipped.count(k)) continue;
      if (r.has(k)) {
        series[k].emplace_back(nir.samples[i].first, r.value(k));
      } else {
        out.skipped[k] = r.errors.at(k) + " at record " + std::to_string(i);
      }
    }
  }

  for (const char* k : kKeys) {
    if (out.skipped.count(k)) continue;
    PointCovariate pc;
    pc.name = name_prefix + k;
    pc.priority_rank = priority_rank;
    pc.samples = std::move(series[k]);
    out.covariates.push_back(std::move(pc));
  }
  return out;
}

}  // namespace larmap
