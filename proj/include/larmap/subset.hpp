#ifndef LARMAP_SUBSET_HPP
#define LARMAP_SUBSET_HPP

#include <map>
#include <span>
#include <vector>

#include "larmap/types.hpp"

namespace larmap {

struct OlsFit {
  Vector coefficients;  // aligned with the subset
  double intercept = 0.0;
  double rss = 0.0;
};

/// Least squares with intercept on the selected columns. Throws
/// SingularSystemError naming the dependent columns on rank deficiency.
OlsFit ols_fit(const Matrix& x, const Vector& y, std::span<const int> subset);

enum class SubsetMethod { exhaustive, forward, backward, seqrep };

struct SubsetModel {
  std::vector<int> terms;  // ascending
  double rss = 0.0;
  Vector coefficients;
  double intercept = 0.0;
};

struct SubsetSequence {
  SubsetMethod method = SubsetMethod::forward;
  std::map<int, SubsetModel> per_size;
};

/// Exact per-size best subsets by branch and bound, pruned with the
/// RSS-monotonicity bound (supersets never fit worse). Refuses p > 40
/// without allow_large: the model count grows as sum_k C(p, k).
SubsetSequence exhaustive_best(const Matrix& x, const Vector& y, int max_size,
                               bool allow_large = false);

SubsetSequence forward_select(const Matrix& x, const Vector& y, int max_size);

/// Starts from the all-columns fit (needs p < n) and removes the column
/// whose removal increases RSS least, down to min_size.
SubsetSequence backward_select(const Matrix& x, const Vector& y, int min_size);

/// Forward steps, each followed by single-column swaps while any swap
/// lowers RSS at fixed size.
SubsetSequence seqrep_select(const Matrix& x, const Vector& y, int max_size);

}  // namespace larmap

#endif
