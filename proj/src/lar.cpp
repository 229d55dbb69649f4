#include "larmap/lar.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "larmap/csv.hpp"
#include "larmap/numformat.hpp"

namespace larmap {

namespace {

constexpr double kStandardizeTol = 1e-8;

void check_standardized(const Matrix& x) {
  for (Index j = 0; j < x.cols(); ++j) {
    double mean = x.col(j).mean();
    double norm = x.col(j).norm();
    if (std::abs(mean) > kStandardizeTol || std::abs(norm - 1.0) > kStandardizeTol)
      throw NumericError("lar_path requires standardized columns (mean 0, unit norm); "
                         "column " + std::to_string(j) + " has mean " + format_double(mean) +
                         ", norm " + format_double(norm));
  }
}

}  // namespace

LarPath lar_path(const Matrix& x, const Vector& y, const LarOptions& options) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (n < 2) throw DataError("lar_path needs at least two observations");
  if (p < 1) throw DataError("lar_path needs at least one column");
  if (y.size() != n) throw DataError("lar_path: response length does not match rows");
  if (!y.allFinite()) throw DataError("lar_path: response contains non-finite values");
  if (options.corr_tol < 0.0) throw ConfigError("corr_tol must be >= 0");
  check_standardized(x);

  LarPath path;
  path.variant = options.variant;
  path.intercept = y.mean();

  Vector resid = y.array() - path.intercept;
  Vector beta = Vector::Zero(p);

  const double corr_scale = std::max(1.0, (x.transpose() * resid).cwiseAbs().maxCoeff());
  const double tol_floor = 1e-12 * corr_scale;

  std::vector<int> active;
  std::vector<char> in_active(p, 0);
  const int max_active = std::min(p, n - 1);

  auto record = [&](PathAction action) {
    PathStep step;
    step.active = active;
    step.coefficients = beta;
    step.max_abs_corr = (x.transpose() * resid).cwiseAbs().maxCoeff();
    step.action = action;
    path.steps.push_back(std::move(step));
  };
  record({PathAction::Kind::init, -1});

  // Knot budget guard; add/drop cycles beyond this indicate a degenerate
  // instance rather than a path worth extending.
  const int hard_cap = 8 * p + 4 * n + 64;
  bool drop_pending = false;
  std::vector<int> boundary_cols;  // columns sitting exactly on the correlation
                                   // boundary whose zero-length entering event
                                   // must be ignored for one segment

  for (;;) {
    Vector corr = x.transpose() * resid;
    double level = corr.cwiseAbs().maxCoeff();

    double inactive_level = 0.0;
    for (int j = 0; j < p; ++j)
      if (!in_active[j]) inactive_level = std::max(inactive_level, std::abs(corr[j]));

    if (static_cast<int>(active.size()) >= max_active) {
      path.stop_reason = StopReason::df_exhausted;
      break;
    }
    if (inactive_level <= options.corr_tol + tol_floor) {
      path.stop_reason = StopReason::corr_tol;
      break;
    }
    int taken = static_cast<int>(path.steps.size()) - 1;
    if ((options.max_steps && taken >= *options.max_steps) || taken >= hard_cap) {
      path.stop_reason = StopReason::max_steps;
      break;
    }

    std::vector<char> at_boundary(p, 0);
    for (int j : boundary_cols) at_boundary[j] = 1;
    boundary_cols.clear();

    int added = -1;
    if (!drop_pending) {
      // activate the inactive column with the largest |corr|
      // (lowest index wins exact ties)
      double best = -1.0;
      for (int j = 0; j < p; ++j) {
        if (in_active[j]) continue;
        double a = std::abs(corr[j]);
        if (a > best) {
          best = a;
          added = j;
        }
      }
      active.push_back(added);
      in_active[added] = 1;
    }
    drop_pending = false;

    // Equiangular direction: solve (Xa^T Xa) w = 1 through a rank-revealing
    // QR of Xa; rank loss truncates the path instead of crashing. A new
    // column whose direction component is not positive would move against
    // its correlation sign: the solution path keeps it at zero (its
    // constraint only touches the boundary), so it is put back and its
    // zero-length entering event suppressed for this segment.
    int touched = -1;
    int a_size = 0;
    Vector signs, w;
    Matrix xa;
    double aa = 0.0;
    bool truncated = false;
    for (;;) {
      a_size = static_cast<int>(active.size());
      signs = Vector(a_size);
      xa = Matrix(n, a_size);
      for (int q = 0; q < a_size; ++q) {
        double cq = corr[active[q]];
        double s = cq > 0.0 ? 1.0 : (cq < 0.0 ? -1.0 : (beta[active[q]] >= 0.0 ? 1.0 : -1.0));
        signs[q] = s;
        xa.col(q) = x.col(active[q]) * s;
      }
      Eigen::ColPivHouseholderQR<Matrix> qr(xa);
      qr.setThreshold(1e-10);
      if (qr.rank() < a_size) {
        if (added >= 0) {
          active.pop_back();
          in_active[added] = 0;
        }
        truncated = true;
        break;
      }
      Matrix r_fac = qr.matrixR().topLeftCorner(a_size, a_size).triangularView<Eigen::Upper>();
      Vector rhs = qr.colsPermutation().transpose() * Vector::Ones(a_size);
      Vector z = r_fac.transpose().triangularView<Eigen::Lower>().solve(rhs);
      Vector w_perm = r_fac.triangularView<Eigen::Upper>().solve(z);
      w = qr.colsPermutation() * w_perm;

      double inv_norm_sq = w.sum();  // = 1' G^{-1} 1 > 0 for full-rank Xa
      if (!(inv_norm_sq > 0.0) || !std::isfinite(inv_norm_sq)) {
        if (added >= 0) {
          active.pop_back();
          in_active[added] = 0;
        }
        truncated = true;
        break;
      }
      aa = 1.0 / std::sqrt(inv_norm_sq);

      if (added >= 0 && a_size > 1 && w[a_size - 1] <= 0.0) {
        at_boundary[added] = 1;
        touched = added;
        active.pop_back();
        in_active[added] = 0;
        added = -1;
        continue;
      }
      break;
    }
    if (truncated) {
      path.stop_reason = StopReason::df_exhausted;
      break;
    }

    Vector u = xa * (w * aa);
    Vector a_corr = x.transpose() * u;

    // distance to the next entering event
    const double gamma_full = level / aa;
    double gamma = gamma_full;
    if (a_size < p) {
      double best = std::numeric_limits<double>::infinity();
      const double clip = 1e-12 * (1.0 + gamma_full);
      const double boundary_floor = 1e-9 * (1.0 + gamma_full);
      for (int j = 0; j < p; ++j) {
        if (in_active[j]) continue;
        for (double cand : {(level - corr[j]) / (aa - a_corr[j]),
                            (level + corr[j]) / (aa + a_corr[j])}) {
          if (!std::isfinite(cand)) continue;
          if (cand < -clip) continue;
          // a column parked on the boundary re-enters only via a real event
          if (at_boundary[j] && cand <= boundary_floor) continue;
          best = std::min(best, std::max(cand, 0.0));
        }
      }
      if (best < gamma) gamma = best;
    }

    // lasso modification: stop at the first sign change and drop that column
    std::vector<int> drops;
    if (options.variant == LarVariant::lasso) {
      double gamma_drop = std::numeric_limits<double>::infinity();
      for (int q = 0; q < a_size; ++q) {
        double dir = signs[q] * w[q] * aa;
        double b = beta[active[q]];
        if (b * dir < 0.0) gamma_drop = std::min(gamma_drop, -b / dir);
      }
      if (gamma_drop < gamma) {
        gamma = gamma_drop;
        for (int q = 0; q < a_size; ++q) {
          double dir = signs[q] * w[q] * aa;
          double b = beta[active[q]];
          if (b * dir < 0.0 && -b / dir <= gamma_drop * (1.0 + 1e-12))
            drops.push_back(q);
        }
      }
    }

    for (int q = 0; q < a_size; ++q) beta[active[q]] += gamma * signs[q] * w[q] * aa;

    // action bookkeeping: drops (including boundary touches) outrank adds;
    // a resume segment with no membership change keeps kind init
    PathAction action{PathAction::Kind::init, -1};
    if (added >= 0) action = {PathAction::Kind::add, added};
    if (touched >= 0) action = {PathAction::Kind::drop, touched};
    if (!drops.empty()) {
      action = {PathAction::Kind::drop, active[drops.front()]};
      for (auto it = drops.rbegin(); it != drops.rend(); ++it) {
        int col = active[*it];
        beta[col] = 0.0;
        in_active[col] = 0;
        boundary_cols.push_back(col);
        active.erase(active.begin() + *it);
      }
      drop_pending = true;
    }

    resid = (y.array() - path.intercept).matrix() - x * beta;
    record(action);
  }

  return path;
}

FittedModel model_at(const LarPath& path, int step) {
  if (path.steps.empty()) throw Error("model_at: empty path");
  int p = static_cast<int>(path.steps.front().coefficients.size());
  Standardization identity;
  identity.centers = Vector::Zero(p);
  identity.scales = Vector::Ones(p);
  std::vector<int> column_map(p);
  for (int j = 0; j < p; ++j) column_map[j] = j;
  return model_at(path, step, identity, column_map, p);
}

FittedModel model_at(const LarPath& path, int step, const Standardization& stats,
                     std::span<const int> column_map, int design_width) {
  if (step < 0 || step >= static_cast<int>(path.steps.size()))
    throw Error("model_at: step " + std::to_string(step) + " outside path of length " +
                std::to_string(path.steps.size()));
  const PathStep& s = path.steps[step];

  std::vector<int> local(s.active);
  std::sort(local.begin(), local.end());

  FittedModel m;
  m.intercept = path.intercept;
  m.design_width = design_width;
  m.terms.reserve(local.size());
  m.coefficients = Vector(static_cast<Index>(local.size()));
  m.centers = Vector(static_cast<Index>(local.size()));
  m.scales = Vector(static_cast<Index>(local.size()));
  for (size_t q = 0; q < local.size(); ++q) {
    int lj = local[q];
    m.terms.push_back(column_map[lj]);
    m.coefficients[static_cast<Index>(q)] = s.coefficients[lj];
    m.centers[static_cast<Index>(q)] = stats.centers[lj];
    m.scales[static_cast<Index>(q)] = stats.scales[lj];
  }
  // column_map is ascending, so terms stay sorted
  return m;
}

Vector predict(const FittedModel& model, const Matrix& x_raw) {
  if (static_cast<int>(x_raw.cols()) != model.design_width)
    throw DataError("predict: matrix has " + std::to_string(x_raw.cols()) +
                    " columns, model expects " + std::to_string(model.design_width));
  Vector out = Vector::Constant(x_raw.rows(), model.intercept);
  for (size_t q = 0; q < model.terms.size(); ++q) {
    Index iq = static_cast<Index>(q);
    out += model.coefficients[iq] *
           ((x_raw.col(model.terms[q]).array() - model.centers[iq]) / model.scales[iq]).matrix();
  }
  return out;
}

void write_path_csv(const LarPath& path, const std::string& file) {
  CsvWriter out(file);
  out.row({"step", "action", "active_size", "max_abs_corr"});
  for (size_t i = 0; i < path.steps.size(); ++i) {
    const PathStep& s = path.steps[i];
    std::string action = "init";
    if (s.action.kind == PathAction::Kind::add)
      action = "add(" + std::to_string(s.action.index) + ")";
    else if (s.action.kind == PathAction::Kind::drop)
      action = "drop(" + std::to_string(s.action.index) + ")";
    out.row({format_int(static_cast<long long>(i)), action,
             format_int(static_cast<long long>(s.active.size())),
             format_double(s.max_abs_corr)});
  }
}

}  // namespace larmap
