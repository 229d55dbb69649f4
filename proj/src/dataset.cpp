#include "larmap/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "larmap/csv.hpp"
#include "larmap/numformat.hpp"

namespace larmap {

namespace {

// Non-collinearity check used before TPS fitting is possible: the affine
// part of the spline needs three sample locations spanning the plane.
bool has_non_collinear_triple(const std::vector<std::pair<GeoPoint, double>>& samples) {
  if (samples.size() < 3) return false;
  const GeoPoint& a = samples[0].first;
  for (size_t i = 1; i < samples.size(); ++i) {
    for (size_t j = i + 1; j < samples.size(); ++j) {
      const GeoPoint& b = samples[i].first;
      const GeoPoint& c = samples[j].first;
      double cross = (b.easting - a.easting) * (c.northing - a.northing) -
                     (b.northing - a.northing) * (c.easting - a.easting);
      if (std::abs(cross) > 1e-12 * (1.0 + std::abs(cross))) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<CovariateRef> Dataset::covariate_order() const {
  if (!order.empty()) return order;
  std::vector<CovariateRef> def;
  for (int i = 0; i < static_cast<int>(point_covariates.size()); ++i)
    def.push_back({true, i});
  for (int i = 0; i < static_cast<int>(raster_covariates.size()); ++i)
    def.push_back({false, i});
  return def;
}

const std::string& Dataset::covariate_name(const CovariateRef& ref) const {
  return ref.is_point ? point_covariates[ref.index].name : raster_covariates[ref.index].name;
}

int Dataset::covariate_rank(const CovariateRef& ref) const {
  return ref.is_point ? point_covariates[ref.index].priority_rank
                      : raster_covariates[ref.index].priority_rank;
}

void Dataset::validate() const {
  if (responses.size() < 2)
    throw DataError("need at least 2 response observations, have " +
                    std::to_string(responses.size()));
  for (const auto& r : responses) {
    if (!std::isfinite(r.value) || !std::isfinite(r.location.easting) ||
        !std::isfinite(r.location.northing))
      throw DataError("non-finite response observation");
  }
  std::set<std::string> names;
  auto check_name = [&](const std::string& name) {
    if (!names.insert(name).second)
      throw DataError("duplicate covariate name: " + name);
  };
  for (const auto& pc : point_covariates) {
    check_name(pc.name);
    if (pc.samples.size() < 3 || !has_non_collinear_triple(pc.samples))
      throw DataError("point covariate '" + pc.name +
                      "' needs at least 3 non-collinear sample locations");
    // duplicate locations with conflicting values break interpolation
    for (size_t i = 0; i < pc.samples.size(); ++i)
      for (size_t j = i + 1; j < pc.samples.size(); ++j)
        if (pc.samples[i].first.easting == pc.samples[j].first.easting &&
            pc.samples[i].first.northing == pc.samples[j].first.northing &&
            pc.samples[i].second != pc.samples[j].second)
          throw DataError("point covariate '" + pc.name +
                          "' has conflicting values at a duplicated location");
  }
  for (const auto& rc : raster_covariates) {
    check_name(rc.name);
    rc.grid.validate();
  }
}

std::vector<std::pair<GeoPoint, double>> load_points(const std::string& path,
                                                     const std::string& value_column) {
  CsvTable t = read_csv(path);
  int ce = t.column("easting");
  int cn = t.column("northing");
  int cv = t.column(value_column);
  if (ce < 0) throw SchemaError(path + ": missing column 'easting'");
  if (cn < 0) throw SchemaError(path + ": missing column 'northing'");
  if (cv < 0) throw SchemaError(path + ": missing column '" + value_column + "'");

  std::vector<std::pair<GeoPoint, double>> out;
  out.reserve(t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    // rows counted over data records, header excluded
    std::string where = path + " row " + std::to_string(i + 1);
    GeoPoint p{parse_double(t.rows[i][ce], where + " easting"),
               parse_double(t.rows[i][cn], where + " northing")};
    double v = parse_double(t.rows[i][cv], where + " " + value_column);
    out.emplace_back(p, v);
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  CsvTable t = read_csv(path);
  int cname = t.column("name");
  int ckind = t.column("kind");
  int cpath = t.column("path");
  int crank = t.column("priority_rank");
  int ccol = t.column("value_column");
  if (cname < 0 || ckind < 0 || cpath < 0 || crank < 0 || ccol < 0)
    throw SchemaError(path +
                      ": manifest needs columns name,kind,path,priority_rank,value_column");
  std::vector<ManifestEntry> out;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    ManifestEntry e;
    e.name = t.rows[i][cname];
    e.kind = t.rows[i][ckind];
    e.path = t.rows[i][cpath];
    e.priority_rank = static_cast<int>(
        parse_int(t.rows[i][crank], path + " row " + std::to_string(i + 1)));
    e.value_column = t.rows[i][ccol];
    if (e.kind != "point" && e.kind != "raster")
      throw SchemaError(path + ": covariate '" + e.name + "' has kind '" + e.kind +
                        "', expected point or raster");
    out.push_back(std::move(e));
  }
  return out;
}

Dataset load_dataset(const std::string& manifest_path, const std::string& response_path,
                     const std::string& response_column) {
  namespace fs = std::filesystem;
  Dataset ds;
  for (auto& [p, v] : load_points(response_path, response_column))
    ds.responses.push_back({p, v});

  fs::path base = fs::path(manifest_path).parent_path();
  for (const auto& e : load_manifest(manifest_path)) {
    fs::path file = fs::path(e.path).is_absolute() ? fs::path(e.path) : base / e.path;
    if (e.kind == "point") {
      PointCovariate pc;
      pc.name = e.name;
      pc.priority_rank = e.priority_rank;
      pc.samples = load_points(file.string(), e.value_column);
      ds.order.push_back({true, static_cast<int>(ds.point_covariates.size())});
      ds.point_covariates.push_back(std::move(pc));
    } else {
      ds.order.push_back({false, static_cast<int>(ds.raster_covariates.size())});
      ds.raster_covariates.push_back({e.name, load_raster(file.string()), e.priority_rank});
    }
  }
  ds.validate();
  return ds;
}

}  // namespace larmap
