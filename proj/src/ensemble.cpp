#include "larmap/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "larmap/parallel.hpp"
#include "larmap/rng.hpp"
#include "larmap/subset.hpp"

namespace larmap {

namespace {

// C(n, k) saturating at a large cap; only compared against split counts.
double choose_capped(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > 1e18) return 1e18;
  }
  return c;
}

}  // namespace

std::vector<Split> generate_splits(int n, int train_size, int m, std::uint64_t seed) {
  if (train_size < 2 || train_size >= n)
    throw ConfigError("train_size must satisfy 2 <= train_size < n (train_size = " +
                      std::to_string(train_size) + ", n = " + std::to_string(n) + ")");
  if (m < 1) throw ConfigError("number of splits must be positive");
  double available = choose_capped(n, train_size);
  if (static_cast<double>(m) > available)
    throw ConfigError("cannot draw " + std::to_string(m) + " distinct splits: only " +
                      std::to_string(static_cast<long long>(available)) +
                      " divisions of " + std::to_string(n) + " into training sets of " +
                      std::to_string(train_size) + " exist");

  std::mt19937_64 rng(derive_seed(seed, 0x73706c6974ULL));  // "split"
  std::set<std::vector<int>> seen;
  std::vector<Split> out;
  out.reserve(m);
  std::vector<int> pool(n);
  while (static_cast<int>(out.size()) < m) {
    for (int i = 0; i < n; ++i) pool[i] = i;
    // partial Fisher-Yates: first train_size entries are the sample
    for (int i = 0; i < train_size; ++i) {
      int j = i + static_cast<int>(bounded_rand(rng, static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> train(pool.begin(), pool.begin() + train_size);
    std::sort(train.begin(), train.end());
    if (!seen.insert(train).second) continue;
    Split s;
    s.train_idx = std::move(train);
    std::vector<char> in_train(n, 0);
    for (int i : s.train_idx) in_train[i] = 1;
    for (int i = 0; i < n; ++i)
      if (!in_train[i]) s.valid_idx.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

Selector selector_from_name(const std::string& name) {
  if (name == "lasso_lar") return Selector::lasso_lar;
  if (name == "exhaustive") return Selector::exhaustive;
  if (name == "forward") return Selector::forward;
  if (name == "backward") return Selector::backward;
  if (name == "seqrep") return Selector::seqrep;
  throw ConfigError("unknown selector '" + name +
                    "' (expected lasso_lar|exhaustive|forward|backward|seqrep)");
}

std::string selector_name(Selector s) {
  switch (s) {
    case Selector::lasso_lar: return "lasso_lar";
    case Selector::exhaustive: return "exhaustive";
    case Selector::forward: return "forward";
    case Selector::backward: return "backward";
    case Selector::seqrep: return "seqrep";
  }
  return "?";
}

SplitResult run_split(const DesignMatrix& design, const Vector& y, const Split& split,
                      const SelectorConfig& config) {
  const int p = design.p();
  const int t = static_cast<int>(split.train_idx.size());
  const int v = static_cast<int>(split.valid_idx.size());
  if (t < 2) throw DataError("run_split: training set too small");
  if (v < 1) throw DataError("run_split: empty validation set");

  SplitResult res;
  res.split = split;

  Matrix train_raw(t, p), valid_raw(v, p);
  Vector y_train(t), y_valid(v);
  for (int i = 0; i < t; ++i) {
    train_raw.row(i) = design.values.row(split.train_idx[i]);
    y_train[i] = y[split.train_idx[i]];
  }
  for (int i = 0; i < v; ++i) {
    valid_raw.row(i) = design.values.row(split.valid_idx[i]);
    y_valid[i] = y[split.valid_idx[i]];
  }

  // columns constant within this training subset cannot be standardized
  std::vector<int> kept;
  kept.reserve(p);
  for (int j = 0; j < p; ++j) {
    if (train_raw.col(j).maxCoeff() == train_raw.col(j).minCoeff())
      res.dropped_constant_cols.push_back(j);
    else
      kept.push_back(j);
  }
  const int k = static_cast<int>(kept.size());

  DesignMatrix train_kept;
  train_kept.values = Matrix(t, k);
  train_kept.terms.resize(k);
  Matrix valid_kept(v, k);
  for (int q = 0; q < k; ++q) {
    train_kept.values.col(q) = train_raw.col(kept[q]);
    train_kept.terms[q] = design.terms[kept[q]];
    valid_kept.col(q) = valid_raw.col(kept[q]);
  }

  const double y_mean = y_train.mean();
  double best_sse = (y_valid.array() - y_mean).matrix().squaredNorm();
  int best_size = 0;

  // intercept-only is always admissible
  FittedModel best_model;
  best_model.intercept = y_mean;
  best_model.design_width = p;
  best_model.coefficients = Vector(0);
  best_model.centers = Vector(0);
  best_model.scales = Vector(0);
  Vector best_pred = Vector::Constant(v, y_mean);
  int best_step = 0;
  double best_train_rss = (y_train.array() - y_mean).matrix().squaredNorm();

  auto consider = [&](FittedModel&& cand, int step, int size) {
    Vector pred = predict(cand, valid_raw);
    double sse = (y_valid - pred).squaredNorm();
    if (sse < best_sse || (sse == best_sse && size < best_size)) {
      best_sse = sse;
      best_size = size;
      best_model = std::move(cand);
      best_pred = std::move(pred);
      best_step = step;
      Vector train_pred = predict(best_model, train_raw);
      best_train_rss = (y_train - train_pred).squaredNorm();
    }
  };

  if (k > 0) {
    auto [xs, stats] = standardize(train_kept);

    if (config.selector == Selector::lasso_lar) {
      LarOptions opts;
      opts.variant = LarVariant::lasso;
      opts.corr_tol = config.corr_tol;
      opts.max_steps = config.max_steps;
      LarPath path = lar_path(xs.values, y_train, opts);
      for (int s = 1; s < static_cast<int>(path.steps.size()); ++s) {
        FittedModel cand = model_at(path, s, stats, kept, p);
        int size = static_cast<int>(cand.terms.size());
        consider(std::move(cand), s, size);
      }
    } else {
      SubsetSequence seq;
      int cap = std::min(config.max_subset_size, t - 2);
      cap = std::min(cap, k);
      if (cap < 1)
        throw DataError("run_split: training set leaves no degrees of freedom for subsets");
      switch (config.selector) {
        case Selector::exhaustive:
          seq = exhaustive_best(xs.values, y_train, cap, config.allow_large_exhaustive);
          break;
        case Selector::forward:
          seq = forward_select(xs.values, y_train, cap);
          break;
        case Selector::backward:
          if (k >= t)
            throw DataError("run_split: backward selection needs fewer columns than "
                            "training rows (have " + std::to_string(k) + " columns, " +
                            std::to_string(t) + " rows); tighten the correlation filter");
          seq = backward_select(xs.values, y_train, 1);
          break;
        case Selector::seqrep:
          seq = seqrep_select(xs.values, y_train, cap);
          break;
        default:
          break;
      }
      for (const auto& [size, model] : seq.per_size) {
        FittedModel cand;
        cand.intercept = model.intercept;
        cand.design_width = p;
        cand.terms.reserve(model.terms.size());
        cand.coefficients = model.coefficients;
        cand.centers = Vector(static_cast<Index>(model.terms.size()));
        cand.scales = Vector(static_cast<Index>(model.terms.size()));
        for (size_t q = 0; q < model.terms.size(); ++q) {
          int lj = model.terms[q];
          cand.terms.push_back(kept[lj]);
          cand.centers[static_cast<Index>(q)] = stats.centers[lj];
          cand.scales[static_cast<Index>(q)] = stats.scales[lj];
        }
        consider(std::move(cand), size, size);
      }
    }
  }

  res.model = std::move(best_model);
  res.vsepe = y_valid - best_pred;
  res.sse = res.vsepe.squaredNorm();
  res.chosen_step = best_step;
  res.train_rss = best_train_rss;
  return res;
}

Vector ensemble_weights(std::span<const SplitResult> results, double sse_floor) {
  const int m = static_cast<int>(results.size());
  if (m < 1) throw DataError("ensemble_weights: no results");
  if (sse_floor < 0.0) throw ConfigError("sse_floor must be >= 0");
  Vector inv(m);
  for (int i = 0; i < m; ++i) {
    double sse = results[i].sse;
    if (sse <= 0.0 && sse_floor <= 0.0)
      throw NumericError("ensemble_weights: member " + std::to_string(i) +
                         " has zero validation SSE; weights are undefined, use a positive "
                         "sse floor");
    inv[i] = 1.0 / std::max(sse, sse_floor);
  }
  return inv / inv.sum();
}

Ensemble build_ensemble(const DesignMatrix& design, const Vector& y,
                        std::span<const Split> splits, const SelectorConfig& config,
                        int threads, double sse_floor) {
  Ensemble ens;
  ens.results.resize(splits.size());
  parallel_for(splits.size(), threads,
               [&](size_t i) { ens.results[i] = run_split(design, y, splits[i], config); });
  ens.weights = ensemble_weights(ens.results, sse_floor);
  return ens;
}

Vector model_averaged_predict(const Ensemble& ens, const Matrix& x_raw) {
  if (ens.results.empty()) throw DataError("model_averaged_predict: empty ensemble");
  Vector out = Vector::Zero(x_raw.rows());
  for (int i = 0; i < ens.size(); ++i)
    out += ens.weights[i] * predict(ens.results[i].model, x_raw);
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of empty sample");
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double pos = (static_cast<double>(n) - 1.0) * q;  // 0-based position
  double lo = std::floor(pos);
  double hi = std::ceil(pos);
  size_t il = static_cast<size_t>(std::clamp(lo, 0.0, static_cast<double>(n - 1)));
  size_t ih = static_cast<size_t>(std::clamp(hi, 0.0, static_cast<double>(n - 1)));
  if (il == ih) return sorted[il];
  return sorted[il] + (pos - lo) * (sorted[ih] - sorted[il]);
}

SummaryStats vsepe_summary(const Ensemble& ens) {
  if (ens.results.empty()) throw DataError("vsepe_summary: empty ensemble");
  std::vector<double> abs_errors;
  for (const auto& r : ens.results)
    for (Index i = 0; i < r.vsepe.size(); ++i) abs_errors.push_back(std::abs(r.vsepe[i]));
  std::sort(abs_errors.begin(), abs_errors.end());
  SummaryStats s;
  s.min = abs_errors.front();
  s.max = abs_errors.back();
  s.q1 = quantile_sorted(abs_errors, 0.25);
  s.median = quantile_sorted(abs_errors, 0.5);
  s.q3 = quantile_sorted(abs_errors, 0.75);
  double sum = 0.0;
  for (double e : abs_errors) sum += e;
  s.mean = sum / static_cast<double>(abs_errors.size());
  return s;
}

double r_squared(const Vector& observed, const Vector& predicted) {
  if (observed.size() != predicted.size())
    throw DataError("r_squared: length mismatch");
  if (observed.size() < 2) throw DataError("r_squared: need at least two values");
  double mean = observed.mean();
  double sst = (observed.array() - mean).matrix().squaredNorm();
  if (sst == 0.0) throw DataError("r_squared: observed values are constant");
  double sse = (observed - predicted).squaredNorm();
  return 1.0 - sse / sst;
}

std::vector<TermFrequency> selection_frequency(const Ensemble& ens, bool include_zeros) {
  std::map<int, int> counts;
  int width = 0;
  for (const auto& r : ens.results) {
    width = std::max(width, r.model.design_width);
    for (size_t q = 0; q < r.model.terms.size(); ++q)
      if (r.model.coefficients[static_cast<Index>(q)] != 0.0) counts[r.model.terms[q]]++;
  }
  std::vector<TermFrequency> out;
  if (include_zeros) {
    for (int j = 0; j < width; ++j) out.push_back({j, counts.count(j) ? counts[j] : 0});
  } else {
    for (const auto& [term, count] : counts) out.push_back({term, count});
  }
  std::stable_sort(out.begin(), out.end(), [](const TermFrequency& a, const TermFrequency& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.term < b.term;
  });
  return out;
}

std::map<int, int> subset_size_histogram(const Ensemble& ens) {
  std::map<int, int> hist;
  for (const auto& r : ens.results) {
    int size = 0;
    for (Index q = 0; q < r.model.coefficients.size(); ++q)
      if (r.model.coefficients[q] != 0.0) ++size;
    hist[size]++;
  }
  return hist;
}

std::vector<SweepRow> sweep(const DesignMatrix& expanded, const Vector& y,
                            std::span<const SweepConfig> configs, const SelectorConfig& selector,
                            int n_splits, std::uint64_t seed, int threads, double sse_floor) {
  std::vector<SweepRow> rows;
  rows.reserve(configs.size());
  const int n = expanded.n();
  for (size_t c = 0; c < configs.size(); ++c) {
    const SweepConfig& cfg = configs[c];
    std::string label = "sweep config (train_size=" + std::to_string(cfg.train_size) +
                        ", mccm=" + std::to_string(cfg.mccm) + "): ";
    try {
      FilterResult filtered = prefilter_mccm(expanded, cfg.mccm, derive_seed(seed, 1000 + c));
      auto splits = generate_splits(n, cfg.train_size, n_splits, derive_seed(seed, 2000 + c));
      Ensemble ens =
          build_ensemble(filtered.design, y, splits, selector, threads, sse_floor);
      SweepRow row;
      row.config = cfg;
      row.vsepe = vsepe_summary(ens);
      row.map_r2 = r_squared(y, model_averaged_predict(ens, filtered.design.values));
      rows.push_back(row);
    } catch (const ConfigError& e) {
      throw ConfigError(label + e.what());
    } catch (const DataError& e) {
      throw DataError(label + e.what());
    } catch (const NumericError& e) {
      throw NumericError(label + e.what());
    }
  }
  return rows;
}

}  // namespace larmap
