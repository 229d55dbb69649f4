#include "larmap/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "larmap/rng.hpp"

namespace larmap {

namespace {

std::string power_label(const std::string& base, int order) {
  return order == 1 ? base : base + "^" + std::to_string(order);
}

void check_no_constant_columns(const DesignMatrix& d) {
  for (int j = 0; j < d.p(); ++j) {
    double lo = d.values.col(j).minCoeff();
    double hi = d.values.col(j).maxCoeff();
    if (lo == hi)
      throw DegenerateColumnError("design column '" + d.terms[j].label + "' is constant");
  }
}

}  // namespace

std::string term_kind_name(TermKind k) {
  switch (k) {
    case TermKind::linear: return "linear";
    case TermKind::power: return "power";
    case TermKind::interaction: return "interaction";
    case TermKind::spatial_power: return "spatial_power";
    case TermKind::spatial_interaction: return "spatial_interaction";
  }
  return "?";
}

DesignMatrix expand_terms(const RealignedTable& realigned, int max_order, bool pairwise) {
  const int n = static_cast<int>(realigned.values.rows());
  const int p = static_cast<int>(realigned.values.cols());
  if (p < 1) throw DataError("expand_terms needs at least one covariate");
  if (n < 2) throw DataError("expand_terms needs at least two rows");
  if (max_order < 1) throw ConfigError("max_order must be >= 1");

  const int n_terms = p * max_order + (pairwise ? p * (p - 1) / 2 : 0);
  DesignMatrix d;
  d.terms.reserve(n_terms);
  d.values = Matrix(n, n_terms);

  int col = 0;
  for (int j = 0; j < p; ++j) {
    Vector base = realigned.values.col(j);
    Vector acc = base;
    for (int k = 1; k <= max_order; ++k) {
      if (k > 1) acc = acc.cwiseProduct(base);
      TermMeta t;
      t.label = power_label(realigned.names[j], k);
      t.kind = k == 1 ? TermKind::linear : TermKind::power;
      t.base_a = realigned.names[j];
      t.order_a = k;
      t.source_rank = realigned.priority_ranks[j];
      d.values.col(col) = acc;
      d.terms.push_back(std::move(t));
      ++col;
    }
  }
  if (pairwise) {
    for (int a = 0; a < p; ++a) {
      for (int b = a + 1; b < p; ++b) {
        TermMeta t;
        t.label = realigned.names[a] + ":" + realigned.names[b];
        t.kind = TermKind::interaction;
        t.base_a = realigned.names[a];
        t.order_a = 1;
        t.base_b = realigned.names[b];
        t.order_b = 1;
        t.source_rank = std::max(realigned.priority_ranks[a], realigned.priority_ranks[b]);
        d.values.col(col) = realigned.values.col(a).cwiseProduct(realigned.values.col(b));
        d.terms.push_back(std::move(t));
        ++col;
      }
    }
  }
  check_no_constant_columns(d);
  return d;
}

SpatialDesign spatial_design(std::span<const GeoPoint> coords, int single_max,
                             int inter_total_max) {
  const int n = static_cast<int>(coords.size());
  if (n < 2) throw DataError("spatial design needs at least two coordinates");
  if (single_max < 1 || inter_total_max < 0)
    throw ConfigError("spatial polynomial orders must be positive");

  double me = 0.0, mn = 0.0;
  for (const auto& c : coords) {
    me += c.easting;
    mn += c.northing;
  }
  me /= n;
  mn /= n;
  double ve = 0.0, vn = 0.0;
  for (const auto& c : coords) {
    ve += (c.easting - me) * (c.easting - me);
    vn += (c.northing - mn) * (c.northing - mn);
  }
  ve = std::sqrt(ve / (n - 1));
  vn = std::sqrt(vn / (n - 1));
  if (ve == 0.0 || vn == 0.0)
    throw DataError("degenerate coordinates: need at least two distinct eastings and northings");

  SpatialDesign out;
  out.basis.e_center = me;
  out.basis.e_scale = ve;
  out.basis.n_center = mn;
  out.basis.n_scale = vn;

  auto add_single = [&](const std::string& axis, int order) {
    TermMeta t;
    t.label = power_label(axis, order);
    t.kind = TermKind::spatial_power;
    t.base_a = axis;
    t.order_a = order;
    out.basis.terms.push_back(std::move(t));
  };
  for (int a = 1; a <= single_max; ++a) add_single("E", a);
  for (int b = 1; b <= single_max; ++b) add_single("N", b);
  for (int a = 1; a + 1 <= inter_total_max; ++a) {
    for (int b = 1; a + b <= inter_total_max; ++b) {
      TermMeta t;
      t.label = power_label("E", a) + ":" + power_label("N", b);
      t.kind = TermKind::spatial_interaction;
      t.base_a = "E";
      t.order_a = a;
      t.base_b = "N";
      t.order_b = b;
      out.basis.terms.push_back(std::move(t));
    }
  }

  out.design.terms = out.basis.terms;
  out.design.values = spatial_rows(out.basis, coords);
  check_no_constant_columns(out.design);
  return out;
}

Matrix spatial_rows(const SpatialBasis& basis, std::span<const GeoPoint> coords) {
  const int n = static_cast<int>(coords.size());
  const int p = static_cast<int>(basis.terms.size());
  Matrix rows(n, p);
  for (int i = 0; i < n; ++i) {
    double e = (coords[i].easting - basis.e_center) / basis.e_scale;
    double nn = (coords[i].northing - basis.n_center) / basis.n_scale;
    for (int j = 0; j < p; ++j) {
      const TermMeta& t = basis.terms[j];
      double v = std::pow(t.base_a == "E" ? e : nn, t.order_a);
      if (t.order_b > 0) v *= std::pow(nn, t.order_b);
      rows(i, j) = v;
    }
  }
  return rows;
}

std::pair<DesignMatrix, Standardization> standardize(const DesignMatrix& d) {
  const int n = d.n(), p = d.p();
  if (n < 2) throw DataError("standardize needs at least two rows");
  Standardization stats;
  stats.centers = Vector(p);
  stats.scales = Vector(p);
  DesignMatrix out;
  out.terms = d.terms;
  out.values = Matrix(n, p);
  for (int j = 0; j < p; ++j) {
    double center = d.values.col(j).mean();
    Vector c = d.values.col(j).array() - center;
    double scale = c.norm();
    if (scale == 0.0 || scale <= 1e-13 * std::abs(center))
      throw DegenerateColumnError("cannot standardize constant column '" + d.terms[j].label +
                                  "'");
    stats.centers[j] = center;
    stats.scales[j] = scale;
    out.values.col(j) = c / scale;
  }
  out.standardization = stats;
  return {std::move(out), std::move(stats)};
}

Matrix mirror(const Matrix& raw, const Standardization& stats) {
  if (raw.cols() != stats.centers.size())
    throw DataError("mirror: matrix has " + std::to_string(raw.cols()) +
                    " columns, standardization has " + std::to_string(stats.centers.size()));
  return (raw.rowwise() - stats.centers.transpose()).array().rowwise() /
         stats.scales.transpose().array();
}

FilterResult prefilter_mccm(const DesignMatrix& d, double threshold, std::uint64_t seed) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw ConfigError("mccm threshold must lie in (0, 1], got " + std::to_string(threshold));
  const int p = d.p();
  if (p < 1) throw DataError("prefilter needs at least one column");

  // Pearson correlations over all rows of the unstandardized matrix.
  Matrix centered = d.values.rowwise() - d.values.colwise().mean();
  Vector norms = centered.colwise().norm();
  for (int j = 0; j < p; ++j)
    if (norms[j] == 0.0)
      throw DegenerateColumnError("prefilter: column '" + d.terms[j].label + "' is constant");

  struct Pair {
    double abs_r;
    int i, j;
  };
  std::vector<Pair> pairs;
  {
    Matrix unit = centered.array().rowwise() / norms.transpose().array();
    Matrix corr = unit.transpose() * unit;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) {
        double r = std::min(1.0, std::abs(corr(i, j)));
        if (r > threshold) pairs.push_back({r, i, j});
      }
  }
  // Highest |r| first; ties by column order. Dropping columns never creates
  // new pairs, so one descending pass equals repeated take-the-max.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  // seeded tie-break value per column, independent of elimination order
  std::vector<std::uint64_t> tiebreak(p);
  for (int j = 0; j < p; ++j) tiebreak[j] = derive_seed(seed, static_cast<std::uint64_t>(j));

  auto decide = [&](int i, int j) -> std::pair<int, std::string> {
    // returns {column to drop, rule}
    const TermMeta& a = d.terms[i];
    const TermMeta& b = d.terms[j];
    if (a.source_rank != b.source_rank)
      return {a.source_rank < b.source_rank ? j : i, "source"};
    if (a.kind_rank() != b.kind_rank()) return {a.kind_rank() < b.kind_rank() ? j : i, "kind"};
    if (a.total_order() != b.total_order())
      return {a.total_order() < b.total_order() ? j : i, "order"};
    if (tiebreak[i] != tiebreak[j]) return {tiebreak[i] < tiebreak[j] ? j : i, "random"};
    return {j, "random"};
  };

  std::vector<bool> alive(p, true);
  FilterResult out;
  for (const Pair& pr : pairs) {
    if (!alive[pr.i] || !alive[pr.j]) continue;
    auto [drop, rule] = decide(pr.i, pr.j);
    int keep = drop == pr.i ? pr.j : pr.i;
    alive[drop] = false;
    out.drop_log.push_back({d.terms[drop].label, d.terms[keep].label, pr.abs_r, rule});
  }

  for (int j = 0; j < p; ++j)
    if (alive[j]) out.kept.push_back(j);
  out.design.terms.reserve(out.kept.size());
  out.design.values = Matrix(d.n(), static_cast<Index>(out.kept.size()));
  for (size_t c = 0; c < out.kept.size(); ++c) {
    out.design.terms.push_back(d.terms[out.kept[c]]);
    out.design.values.col(static_cast<Index>(c)) = d.values.col(out.kept[c]);
  }
  return out;
}

}  // namespace larmap
