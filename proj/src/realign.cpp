#include "larmap/realign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "larmap/parallel.hpp"

namespace larmap {

namespace {

// lattice offsets along one axis: sub-cell centers of grid_n equal cells
std::vector<double> lattice_offsets(const BlockSpec& block) {
  std::vector<double> off(block.grid_n);
  for (int i = 0; i < block.grid_n; ++i)
    off[i] = -block.side / 2.0 + block.side * (i + 0.5) / block.grid_n;
  return off;
}

std::vector<std::pair<GeoPoint, double>> nearest_samples(
    const std::vector<std::pair<GeoPoint, double>>& samples, const GeoPoint& center, int k) {
  std::vector<int> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](int i) {
    double de = samples[i].first.easting - center.easting;
    double dn = samples[i].first.northing - center.northing;
    return std::pair<double, int>(de * de + dn * dn, i);
  };
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(),
                   [&](int a, int b) { return key(a) < key(b); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());  // keep original sample order
  std::vector<std::pair<GeoPoint, double>> out;
  out.reserve(k);
  for (int i : idx) out.push_back(samples[i]);
  return out;
}

}  // namespace

double block_mean_point(const TpsModel& model, const BlockSpec& block) {
  block.validate();
  auto off = lattice_offsets(block);
  double acc = 0.0;
  for (double oy : off)
    for (double ox : off)
      acc += tps_eval(model, {block.center.easting + ox, block.center.northing + oy});
  return acc / (static_cast<double>(block.grid_n) * block.grid_n);
}

double block_mean_raster(const RasterGrid& grid, const BlockSpec& block) {
  block.validate();
  auto off = lattice_offsets(block);
  double acc = 0.0;
  long count = 0;
  for (double oy : off) {
    for (double ox : off) {
      double v;
      if (grid.sample({block.center.easting + ox, block.center.northing + oy}, v)) {
        acc += v;
        ++count;
      }
    }
  }
  if (count == 0)
    throw CoverageError("block has no raster coverage (all lattice points outside the "
                        "extent or nodata)");
  return acc / count;
}

RealignedTable realign_at(const Dataset& ds, std::span<const GeoPoint> centers,
                          const RealignOptions& options, RealignReport* report) {
  const auto order = ds.covariate_order();
  const int n = static_cast<int>(centers.size());
  const int p = static_cast<int>(order.size());
  if (p == 0) throw DataError("dataset has no covariates to realign");

  RealignedTable table;
  table.values = Matrix::Zero(n, p);
  for (const auto& ref : order) {
    table.names.push_back(ds.covariate_name(ref));
    table.priority_ranks.push_back(ds.covariate_rank(ref));
  }

  // Point covariates small enough for one global spline are fitted once.
  std::vector<TpsModel> global_tps(ds.point_covariates.size());
  std::vector<bool> has_global(ds.point_covariates.size(), false);
  for (size_t i = 0; i < ds.point_covariates.size(); ++i) {
    const auto& pc = ds.point_covariates[i];
    if (static_cast<int>(pc.samples.size()) <= options.tps_neighbors) {
      global_tps[i] = tps_fit(pc.samples, options.ridge);
      has_global[i] = true;
    }
  }

  if (report) {
    report->valid_row.assign(n, true);
    report->failures.clear();
  }
  std::vector<std::string> row_failure(n);

  parallel_for(static_cast<size_t>(n), options.threads, [&](size_t row) {
    BlockSpec block{centers[row], options.side, options.grid_n};
    for (int col = 0; col < p; ++col) {
      const auto& ref = order[col];
      try {
        double value;
        if (ref.is_point) {
          const auto& pc = ds.point_covariates[ref.index];
          if (has_global[ref.index]) {
            value = block_mean_point(global_tps[ref.index], block);
          } else {
            auto local = nearest_samples(pc.samples, block.center, options.tps_neighbors);
            value = block_mean_point(tps_fit(local, options.ridge), block);
          }
        } else {
          value = block_mean_raster(ds.raster_covariates[ref.index].grid, block);
        }
        table.values(static_cast<Index>(row), col) = value;
      } catch (const Error& e) {
        std::string msg = "covariate '" + table.names[col] + "' at center " +
                          std::to_string(row) + ": " + e.what();
        if (row_failure[row].empty()) row_failure[row] = msg;
      }
    }
  });

  for (int row = 0; row < n; ++row) {
    if (row_failure[row].empty()) continue;
    if (!report) throw CoverageError(row_failure[row]);
    report->valid_row[row] = false;
    report->failures.push_back(row_failure[row]);
  }
  return table;
}

RealignedTable realign_dataset(const Dataset& ds, const RealignOptions& options) {
  std::vector<GeoPoint> centers;
  centers.reserve(ds.responses.size());
  for (const auto& r : ds.responses) centers.push_back(r.location);
  return realign_at(ds, centers, options);
}

}  // namespace larmap
