#ifndef LARMAP_LAR_HPP
#define LARMAP_LAR_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "larmap/design.hpp"
#include "larmap/types.hpp"

namespace larmap {

enum class LarVariant { lar, lasso };
enum class StopReason { df_exhausted, corr_tol, max_steps };

struct PathAction {
  enum class Kind { init, add, drop };
  Kind kind = Kind::init;
  int index = -1;
};

/// One knot of the solution path. `max_abs_corr` is the largest absolute
/// column-residual inner product at this state; for the lasso variant the
/// state solves the L1-penalized problem with penalty equal to that value.
struct PathStep {
  std::vector<int> active;  // entry order
  Vector coefficients;      // length p, zero off the active set
  double max_abs_corr = 0.0;
  PathAction action;
};

struct LarPath {
  std::vector<PathStep> steps;  // step 0 is the empty model
  double intercept = 0.0;       // training response mean
  LarVariant variant = LarVariant::lasso;
  StopReason stop_reason = StopReason::corr_tol;
};

struct LarOptions {
  LarVariant variant = LarVariant::lasso;
  double corr_tol = 0.0;
  std::optional<int> max_steps;
};

/// Least angle regression on a standardized matrix (columns mean zero, unit
/// Euclidean norm, both within 1e-8). The response is centered internally.
/// Runs until the active set reaches min(p, n-1), no inactive column
/// correlates with the residual beyond corr_tol, or max_steps knots.
LarPath lar_path(const Matrix& X, const Vector& y, const LarOptions& options = {});

/// Self-contained linear model on a subset of a raw column universe:
/// prediction = intercept + sum_k coefficients[k] * (x[terms[k]] - centers[k]) / scales[k].
struct FittedModel {
  std::vector<int> terms;  // ascending indices into the raw design
  Vector coefficients;
  double intercept = 0.0;
  Vector centers;
  Vector scales;
  int design_width = 0;  // expected raw column count
};

/// Model at one path step, on the path's own column universe (identity
/// standardization).
FittedModel model_at(const LarPath& path, int step);

/// Model at one path step, mapped onto a wider raw universe: local column q
/// becomes raw column column_map[q] with the training stats attached.
FittedModel model_at(const LarPath& path, int step, const Standardization& stats,
                     std::span<const int> column_map, int design_width);

Vector predict(const FittedModel& model, const Matrix& x_raw);

/// Diagnostic dump: step, action, active_size, max_abs_corr.
void write_path_csv(const LarPath& path, const std::string& file);

}  // namespace larmap

#endif
