#include "larmap/subset.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "larmap/numformat.hpp"

namespace larmap {

namespace {

// Fits on mean-centered data: with an intercept always in the model, the
// subset RSS equals the no-intercept RSS of the centered problem.
struct CenteredProblem {
  Matrix xc;
  Vector yc;
  Vector col_means;
  double y_mean = 0.0;
  double tss = 0.0;

  CenteredProblem(const Matrix& x, const Vector& y)
      : xc(x.rows(), x.cols()), yc(y.size()), col_means(x.cols()) {
    y_mean = y.mean();
    yc = y.array() - y_mean;
    tss = yc.squaredNorm();
    for (Index j = 0; j < x.cols(); ++j) {
      col_means[j] = x.col(j).mean();
      xc.col(j) = x.col(j).array() - col_means[j];
    }
  }

  double rss(std::span<const int> subset) const {
    if (subset.empty()) return tss;
    Matrix xs(xc.rows(), static_cast<Index>(subset.size()));
    for (size_t q = 0; q < subset.size(); ++q) xs.col(static_cast<Index>(q)) = xc.col(subset[q]);
    Eigen::ColPivHouseholderQR<Matrix> qr(xs);
    Vector beta = qr.solve(yc);
    return (yc - xs * beta).squaredNorm();
  }

  OlsFit fit(std::span<const int> subset) const {
    OlsFit out;
    if (subset.empty()) {
      out.coefficients = Vector(0);
      out.intercept = y_mean;
      out.rss = tss;
      return out;
    }
    Matrix xs(xc.rows(), static_cast<Index>(subset.size()));
    for (size_t q = 0; q < subset.size(); ++q) xs.col(static_cast<Index>(q)) = xc.col(subset[q]);
    Eigen::ColPivHouseholderQR<Matrix> qr(xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Index>(subset.size())) {
      std::string cols;
      auto perm = qr.colsPermutation().indices();
      for (Index k = qr.rank(); k < perm.size(); ++k) {
        if (!cols.empty()) cols += ", ";
        cols += std::to_string(subset[perm[k]]);
      }
      throw SingularSystemError("ols_fit: selected columns are collinear (dependent: " + cols +
                                ")");
    }
    out.coefficients = qr.solve(yc);
    out.rss = (yc - xs * out.coefficients).squaredNorm();
    double shift = 0.0;
    for (size_t q = 0; q < subset.size(); ++q)
      shift += out.coefficients[static_cast<Index>(q)] * col_means[subset[q]];
    out.intercept = y_mean - shift;
    return out;
  }
};

SubsetModel make_model(const CenteredProblem& prob, std::vector<int> subset) {
  std::sort(subset.begin(), subset.end());
  OlsFit f = prob.fit(subset);
  SubsetModel m;
  m.terms = std::move(subset);
  m.rss = f.rss;
  m.coefficients = f.coefficients;
  m.intercept = f.intercept;
  return m;
}

double subset_count(int p, int max_size) {
  double total = 0.0, c = 1.0;
  for (int i = 1; i <= max_size; ++i) {
    c = c * (p - i + 1) / i;
    total += c;
  }
  return total;
}

}  // namespace

OlsFit ols_fit(const Matrix& x, const Vector& y, std::span<const int> subset) {
  if (static_cast<Index>(subset.size()) >= x.rows())
    throw DataError("ols_fit: subset size must be below the observation count");
  for (int j : subset)
    if (j < 0 || j >= x.cols()) throw DataError("ols_fit: column index out of range");
  CenteredProblem prob(x, y);
  return prob.fit(subset);
}

SubsetSequence exhaustive_best(const Matrix& x, const Vector& y, int max_size,
                               bool allow_large) {
  const int p = static_cast<int>(x.cols());
  const int n = static_cast<int>(x.rows());
  if (max_size < 1 || max_size >= n)
    throw DataError("exhaustive_best: need 1 <= max_size < n");
  max_size = std::min(max_size, p);
  if (p > 40 && !allow_large)
    throw ConfigError("exhaustive search over " + std::to_string(p) +
                      " columns would touch about " + format_double(subset_count(p, max_size)) +
                      " candidate models; pass the override to proceed anyway");

  CenteredProblem prob(x, y);

  struct Incumbent {
    double rss = std::numeric_limits<double>::infinity();
    std::vector<int> subset;
  };
  std::vector<Incumbent> best(max_size + 1);

  auto try_update = [&](int size, double rss, const std::vector<int>& subset_sorted) {
    Incumbent& inc = best[size];
    double slack = 1e-12 * (1.0 + std::min(rss, inc.rss));
    if (rss < inc.rss - slack) {
      inc.rss = rss;
      inc.subset = subset_sorted;
    } else if (rss <= inc.rss + slack && subset_sorted < inc.subset) {
      // exact-tie determinism: prefer the lexicographically smaller subset
      inc.rss = std::min(inc.rss, rss);
      inc.subset = subset_sorted;
    }
  };

  // Visit columns in decreasing marginal correlation; good incumbents early
  // make the monotonicity bound bite sooner.
  std::vector<int> order(p);
  for (int j = 0; j < p; ++j) order[j] = j;
  Vector score = (prob.xc.transpose() * prob.yc).cwiseAbs();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });

  // Seed incumbents from the forward path.
  {
    SubsetSequence fwd = forward_select(x, y, max_size);
    for (const auto& [size, model] : fwd.per_size) try_update(size, model.rss, model.terms);
  }

  std::vector<int> prefix;
  std::vector<int> prefix_sorted;
  auto dfs = [&](auto&& self, int next_pos) -> void {
    int size = static_cast<int>(prefix.size());
    if (size > 0) {
      prefix_sorted = prefix;
      std::sort(prefix_sorted.begin(), prefix_sorted.end());
      try_update(size, prob.rss(prefix_sorted), prefix_sorted);
    }
    if (size == max_size || next_pos >= p) return;

    // lower bound for every completion: RSS with all remaining columns added
    std::vector<int> full(prefix);
    for (int pos = next_pos; pos < p; ++pos) full.push_back(order[pos]);
    double bound = prob.rss(full);
    int deepest = std::min(max_size, size + (p - next_pos));
    bool improvable = false;
    for (int s = size + 1; s <= deepest; ++s) {
      if (bound <= best[s].rss + 1e-12 * (1.0 + bound)) {
        improvable = true;
        break;
      }
    }
    if (!improvable) return;

    for (int pos = next_pos; pos < p; ++pos) {
      prefix.push_back(order[pos]);
      self(self, pos + 1);
      prefix.pop_back();
    }
  };
  dfs(dfs, 0);

  SubsetSequence out;
  out.method = SubsetMethod::exhaustive;
  for (int s = 1; s <= max_size; ++s) out.per_size[s] = make_model(prob, best[s].subset);
  return out;
}

SubsetSequence forward_select(const Matrix& x, const Vector& y, int max_size) {
  const int p = static_cast<int>(x.cols());
  const int n = static_cast<int>(x.rows());
  if (max_size < 1 || max_size >= n)
    throw DataError("forward_select: need 1 <= max_size < n");
  max_size = std::min(max_size, p);

  CenteredProblem prob(x, y);
  SubsetSequence out;
  out.method = SubsetMethod::forward;

  std::vector<int> current;
  std::vector<char> used(p, 0);
  for (int s = 1; s <= max_size; ++s) {
    int best_j = -1;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      current.push_back(j);
      double r = prob.rss(current);
      current.pop_back();
      if (r < best_rss) {
        best_rss = r;
        best_j = j;
      }
    }
    current.push_back(best_j);
    used[best_j] = 1;
    out.per_size[s] = make_model(prob, current);
  }
  return out;
}

SubsetSequence backward_select(const Matrix& x, const Vector& y, int min_size) {
  const int p = static_cast<int>(x.cols());
  const int n = static_cast<int>(x.rows());
  if (p >= n)
    throw DataError("backward_select: needs p < n so the full fit exists (p = " +
                    std::to_string(p) + ", n = " + std::to_string(n) + ")");
  if (min_size < 0 || min_size > p)
    throw DataError("backward_select: min_size out of range");

  CenteredProblem prob(x, y);
  SubsetSequence out;
  out.method = SubsetMethod::backward;

  std::vector<int> current(p);
  for (int j = 0; j < p; ++j) current[j] = j;
  out.per_size[p] = make_model(prob, current);

  while (static_cast<int>(current.size()) > min_size) {
    int best_q = -1;
    double best_rss = std::numeric_limits<double>::infinity();
    for (size_t q = 0; q < current.size(); ++q) {
      std::vector<int> trial(current);
      trial.erase(trial.begin() + static_cast<long>(q));
      double r = prob.rss(trial);
      if (r < best_rss) {
        best_rss = r;
        best_q = static_cast<int>(q);
      }
    }
    current.erase(current.begin() + best_q);
    out.per_size[static_cast<int>(current.size())] = make_model(prob, current);
  }
  return out;
}

SubsetSequence seqrep_select(const Matrix& x, const Vector& y, int max_size) {
  const int p = static_cast<int>(x.cols());
  const int n = static_cast<int>(x.rows());
  if (max_size < 1 || max_size >= n)
    throw DataError("seqrep_select: need 1 <= max_size < n");
  max_size = std::min(max_size, p);

  CenteredProblem prob(x, y);
  SubsetSequence out;
  out.method = SubsetMethod::seqrep;

  std::vector<int> current;
  std::vector<char> used(p, 0);
  for (int s = 1; s <= max_size; ++s) {
    // forward step
    int best_j = -1;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      current.push_back(j);
      double r = prob.rss(current);
      current.pop_back();
      if (r < best_rss) {
        best_rss = r;
        best_j = j;
      }
    }
    current.push_back(best_j);
    used[best_j] = 1;

    // replacement sweeps: accept the best strictly-improving single swap
    double cur_rss = prob.rss(current);
    for (;;) {
      double swap_rss = cur_rss;
      int swap_q = -1, swap_j = -1;
      for (size_t q = 0; q < current.size(); ++q) {
        for (int j = 0; j < p; ++j) {
          if (used[j]) continue;
          int saved = current[q];
          current[q] = j;
          double r = prob.rss(current);
          current[q] = saved;
          if (r < swap_rss) {
            swap_rss = r;
            swap_q = static_cast<int>(q);
            swap_j = j;
          }
        }
      }
      if (swap_q < 0) break;
      used[current[swap_q]] = 0;
      used[swap_j] = 1;
      current[swap_q] = swap_j;
      cur_rss = swap_rss;
    }
    out.per_size[s] = make_model(prob, current);
  }
  return out;
}

}  // namespace larmap
