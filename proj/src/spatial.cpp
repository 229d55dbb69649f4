#include "larmap/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "larmap/csv.hpp"
#include "larmap/numformat.hpp"
#include "larmap/parallel.hpp"

namespace larmap {

Vector residuals(const Ensemble& ens, const Matrix& x_raw, const Vector& y) {
  if (x_raw.rows() != y.size()) throw DataError("residuals: row/response size mismatch");
  return y - model_averaged_predict(ens, x_raw);
}

SpatialEnsembleResult spatial_ensemble(std::span<const GeoPoint> coords, const Vector& resid,
                                       std::span<const Split> splits,
                                       const SpatialCvConfig& config) {
  if (static_cast<Index>(coords.size()) != resid.size())
    throw DataError("spatial_ensemble: coordinate/residual size mismatch");
  SpatialDesign sd = spatial_design(coords, config.single_max, config.inter_total_max);
  FilterResult filtered = prefilter_mccm(sd.design, config.mccm, config.seed);

  SpatialEnsembleResult out;
  out.basis = sd.basis;
  out.drop_log = std::move(filtered.drop_log);
  out.filtered = std::move(filtered.design);
  out.ensemble = build_ensemble(out.filtered, resid, splits, config.selector, config.threads,
                                config.sse_floor);
  return out;
}

Matrix spatial_rows_for_terms(const SpatialBasis& basis, std::span<const TermMeta> terms,
                              std::span<const GeoPoint> coords) {
  SpatialBasis sub = basis;
  sub.terms.assign(terms.begin(), terms.end());
  return spatial_rows(sub, coords);
}

Matrix expand_rows(const RealignedTable& realigned, std::span<const TermMeta> terms) {
  std::map<std::string, int> col_of;
  for (size_t j = 0; j < realigned.names.size(); ++j)
    col_of[realigned.names[j]] = static_cast<int>(j);

  const Index n = realigned.values.rows();
  Matrix out(n, static_cast<Index>(terms.size()));
  for (size_t t = 0; t < terms.size(); ++t) {
    const TermMeta& term = terms[t];
    auto it = col_of.find(term.base_a);
    if (it == col_of.end())
      throw DataError("expand_rows: unknown covariate '" + term.base_a + "'");
    Vector base = realigned.values.col(it->second);
    Vector acc = base;
    for (int k = 2; k <= term.order_a; ++k) acc = acc.cwiseProduct(base);
    if (!term.base_b.empty()) {
      auto jt = col_of.find(term.base_b);
      if (jt == col_of.end())
        throw DataError("expand_rows: unknown covariate '" + term.base_b + "'");
      Vector other = realigned.values.col(jt->second);
      Vector acc_b = other;
      for (int k = 2; k <= term.order_b; ++k) acc_b = acc_b.cwiseProduct(other);
      acc = acc.cwiseProduct(acc_b);
    }
    out.col(static_cast<Index>(t)) = acc;
  }
  return out;
}

PixelRows build_pixel_rows(const Dataset& ds, const RasterGrid& geometry,
                           const RealignOptions& realign_options,
                           std::span<const TermMeta> terms) {
  geometry.validate();
  PixelRows out;
  out.centers.reserve(static_cast<size_t>(geometry.ncols) * geometry.nrows);
  for (int r = 0; r < geometry.nrows; ++r)
    for (int c = 0; c < geometry.ncols; ++c) out.centers.push_back(geometry.cell_center(c, r));

  RealignReport report;
  RealignedTable realigned = realign_at(ds, out.centers, realign_options, &report);
  out.valid = report.valid_row;
  out.failures = std::move(report.failures);
  out.rows = expand_rows(realigned, terms);
  return out;
}

PredictionStack predict_full_cover(const Ensemble& cov_ens, const Ensemble& spat_ens,
                                   const Matrix& pixel_rows, const Matrix& spat_pixel_rows,
                                   const RasterGrid& geometry, const std::vector<bool>& valid,
                                   Pairing pairing, int threads) {
  const int n_pix = static_cast<int>(pixel_rows.rows());
  if (spat_pixel_rows.rows() != n_pix)
    throw DataError("predict_full_cover: covariate and spatial pixel row counts differ");
  if (static_cast<int>(valid.size()) != n_pix)
    throw DataError("predict_full_cover: validity mask size mismatch");
  const int mc = cov_ens.size();
  const int ms = spat_ens.size();
  if (mc < 1 || ms < 1) throw DataError("predict_full_cover: empty ensemble");

  PredictionStack stack;
  stack.geometry = geometry;
  stack.geometry.values.clear();
  stack.valid.assign(valid.begin(), valid.end());

  if (pairing == Pairing::matched) {
    if (mc != ms)
      throw DataError("matched pairing needs equal member counts (covariate " +
                      std::to_string(mc) + ", spatial " + std::to_string(ms) + ")");
    for (int k = 0; k < mc; ++k) {
      const auto& a = cov_ens.results[k].split.train_idx;
      const auto& b = spat_ens.results[k].split.train_idx;
      if (a != b)
        throw DataError("matched pairing needs the two ensembles to share their split list "
                        "(member " + std::to_string(k) + " differs)");
    }
    stack.members = Matrix(n_pix, mc);
    parallel_for(static_cast<size_t>(mc), threads, [&](size_t k) {
      stack.members.col(static_cast<Index>(k)) =
          predict(cov_ens.results[k].model, pixel_rows) +
          predict(spat_ens.results[k].model, spat_pixel_rows);
    });
    Vector w = cov_ens.weights.cwiseProduct(spat_ens.weights);
    double total = w.sum();
    if (!(total > 0.0)) throw NumericError("combined member weights sum to zero");
    stack.weights = w / total;
  } else {
    double entries = static_cast<double>(n_pix) * mc * ms;
    if (entries > 2e8)
      throw ConfigError("cross pairing would materialize " + format_double(entries) +
                        " member predictions; use matched pairing or a smaller grid");
    Matrix cov_pred(n_pix, mc), spat_pred(n_pix, ms);
    parallel_for(static_cast<size_t>(mc), threads, [&](size_t k) {
      cov_pred.col(static_cast<Index>(k)) = predict(cov_ens.results[k].model, pixel_rows);
    });
    parallel_for(static_cast<size_t>(ms), threads, [&](size_t k) {
      spat_pred.col(static_cast<Index>(k)) = predict(spat_ens.results[k].model, spat_pixel_rows);
    });
    stack.members = Matrix(n_pix, static_cast<Index>(mc) * ms);
    stack.weights = Vector(static_cast<Index>(mc) * ms);
    for (int i = 0; i < mc; ++i) {
      for (int j = 0; j < ms; ++j) {
        Index col = static_cast<Index>(i) * ms + j;
        stack.members.col(col) = cov_pred.col(i) + spat_pred.col(j);
        stack.weights[col] = cov_ens.weights[i] * spat_ens.weights[j];
      }
    }
  }
  return stack;
}

OutputRasters summarize_stack(const PredictionStack& stack, double central) {
  if (!(central > 0.0) || central >= 1.0)
    throw ConfigError("central probability must lie in (0, 1)");
  const int n_pix = static_cast<int>(stack.members.rows());
  const int m = static_cast<int>(stack.members.cols());
  if (m < 2) throw DataError("summarize_stack: need at least two members");
  if (stack.geometry.ncols * stack.geometry.nrows != n_pix)
    throw DataError("summarize_stack: geometry does not match pixel count");

  OutputRasters out;
  out.prediction = stack.geometry;
  out.prediction.values.assign(static_cast<size_t>(n_pix), stack.geometry.nodata);
  out.uncertainty = out.prediction;

  const double q_lo = (1.0 - central) / 2.0;
  const double q_hi = (1.0 + central) / 2.0;
  std::vector<double> sorted(m);
  for (int i = 0; i < n_pix; ++i) {
    if (!stack.valid.empty() && !stack.valid[i]) continue;
    out.prediction.values[i] = stack.members.row(i) * stack.weights;
    for (int k = 0; k < m; ++k) sorted[k] = stack.members(i, k);
    std::sort(sorted.begin(), sorted.end());
    double width = quantile_sorted(sorted, q_hi) - quantile_sorted(sorted, q_lo);
    out.uncertainty.values[i] = std::max(width, 0.0);
  }
  return out;
}

void write_member_stack_csv(const PredictionStack& stack, const std::string& path) {
  CsvWriter out(path);
  out.row({"pixel_id", "member_id", "value"});
  for (Index i = 0; i < stack.members.rows(); ++i) {
    if (!stack.valid.empty() && !stack.valid[static_cast<size_t>(i)]) continue;
    for (Index k = 0; k < stack.members.cols(); ++k)
      out.row({format_int(i), format_int(k), format_double(stack.members(i, k))});
  }
}

}  // namespace larmap
