#ifndef LARMAP_ENSEMBLE_HPP
#define LARMAP_ENSEMBLE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "larmap/design.hpp"
#include "larmap/lar.hpp"
#include "larmap/types.hpp"

namespace larmap {

struct Split {
  std::vector<int> train_idx;  // ascending
  std::vector<int> valid_idx;  // ascending complement
};

/// m pairwise-distinct train/validation divisions, uniform over the
/// C(n, train_size) possibilities, deterministic in the seed.
std::vector<Split> generate_splits(int n, int train_size, int m, std::uint64_t seed);

enum class Selector { lasso_lar, exhaustive, forward, backward, seqrep };

Selector selector_from_name(const std::string& name);
std::string selector_name(Selector s);

struct SelectorConfig {
  Selector selector = Selector::lasso_lar;
  double corr_tol = 0.0;
  std::optional<int> max_steps;
  int max_subset_size = 6;  // forward/seqrep/exhaustive depth
  bool allow_large_exhaustive = false;
};

struct SplitResult {
  Split split;
  FittedModel model;
  Vector vsepe;  // validation errors, observed minus predicted
  double sse = 0.0;
  int chosen_step = 0;  // path knot or subset size (0 = intercept only)
  double train_rss = 0.0;
  std::vector<int> dropped_constant_cols;  // constant within this training set
};

/// Standardizes on the training rows, mirrors the validation rows, runs the
/// selector, and keeps the candidate with the smallest validation SSE (ties
/// go to the smaller model). Columns constant within the training subset are
/// dropped for this split only.
SplitResult run_split(const DesignMatrix& design, const Vector& y, const Split& split,
                      const SelectorConfig& config);

struct Ensemble {
  std::vector<SplitResult> results;
  Vector weights;

  int size() const { return static_cast<int>(results.size()); }
};

/// Weights inversely proportional to validation SSE, normalized to sum 1.
/// SSEs below sse_floor are lifted to it; pass sse_floor = 0 to forbid
/// interpolating members instead (then any zero SSE throws).
Vector ensemble_weights(std::span<const SplitResult> results, double sse_floor = 1e-12);

/// Runs every split (optionally in parallel) and attaches Eq-style weights.
Ensemble build_ensemble(const DesignMatrix& design, const Vector& y,
                        std::span<const Split> splits, const SelectorConfig& config,
                        int threads = 1, double sse_floor = 1e-12);

Vector model_averaged_predict(const Ensemble& ens, const Matrix& x_raw);

struct SummaryStats {
  double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
};

/// Quantile with linear interpolation of order statistics at position
/// 1 + (N-1)q. `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double q);

/// Pooled absolute validation errors over all member splits.
SummaryStats vsepe_summary(const Ensemble& ens);

double r_squared(const Vector& observed, const Vector& predicted);

struct TermFrequency {
  int term = 0;
  int count = 0;
};

/// Counts member models whose nonzero coefficients include each term;
/// descending by count, ties by term index.
std::vector<TermFrequency> selection_frequency(const Ensemble& ens, bool include_zeros = false);

std::map<int, int> subset_size_histogram(const Ensemble& ens);

struct SweepConfig {
  int train_size = 35;
  double mccm = 0.95;
};

struct SweepRow {
  SweepConfig config;
  SummaryStats vsepe;
  double map_r2 = 0.0;
};

/// Full pipeline (filter -> splits -> ensemble -> summaries) per config on a
/// shared expanded design; map_r2 scores the model-averaged prediction at
/// the observation rows.
std::vector<SweepRow> sweep(const DesignMatrix& expanded, const Vector& y,
                            std::span<const SweepConfig> configs, const SelectorConfig& selector,
                            int n_splits, std::uint64_t seed, int threads = 1,
                            double sse_floor = 1e-12);

}  // namespace larmap

#endif
