#ifndef LARMAP_PIPELINE_HPP
#define LARMAP_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "larmap/dataset.hpp"
#include "larmap/design.hpp"
#include "larmap/ensemble.hpp"
#include "larmap/realign.hpp"
#include "larmap/spatial.hpp"

namespace larmap {

/// Flat run configuration. Every key can come from a `key = value` config
/// file or from a command-line flag of the same name; later sources win.
/// Defaults reproduce the reference configuration: 25 m blocks on 100x100
/// lattices, order-4 expansion with pairwise interactions, correlation cap
/// 0.95, 500 training sets of 35, LASSO-LAR selection, order-12 spatial
/// polynomials with order-6 interactions, central 95% uncertainty intervals.
struct RunConfig {
  std::string manifest;
  std::string response_path;
  std::string response_column = "response";
  double side = 25.0;
  int grid_n = 100;
  double ridge = 0.0;
  int tps_neighbors = 200;
  int max_order = 4;
  bool pairwise = true;
  double mccm = 0.95;
  int train_size = 35;
  int n_splits = 500;
  std::string selector = "lasso_lar";
  double corr_tol = 0.0;
  int max_subset_size = 6;
  bool allow_large_exhaustive = false;
  int spatial_single_max = 12;
  int spatial_inter_total_max = 6;
  double central = 0.95;
  double sse_floor = 1e-12;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
  int threads = 0;  // 0 = all available
  std::string pairing = "matched";
  bool dump_members = false;
  std::string sweep_train_sizes = "35,45,55";
  std::string sweep_mccm = "0.95,0.8,0.6,0.4";
  // explicit output grid; when unset, predict uses the first raster
  // covariate's geometry
  std::optional<double> grid_xll, grid_yll, grid_cellsize;
  std::optional<int> grid_ncols, grid_nrows;

  /// Assigns one key from its textual form. Throws ConfigError for unknown
  /// keys or unparseable values.
  void set(const std::string& key, const std::string& value);

  /// Canonical (key, value) list over every key, fixed order; feeds the
  /// config hash and the metadata record.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;

  /// All config keys, in canonical order.
  static std::vector<std::string> keys();

  /// Collects every violated constraint for `command`; empty means valid.
  std::vector<std::string> problems(const std::string& command) const;

  /// Throws ConfigError listing all problems at once.
  void validate(const std::string& command) const;

  int resolved_threads() const;

  /// Hash over every result-affecting key (threads and output_dir excluded).
  std::string config_hash() const;
};

/// Reads `key = value` lines ('#' comments) into cfg.
void load_config_file(const std::string& path, RunConfig& cfg);

// Batch commands. Each writes its outputs plus a <command>_meta.json record
// (config hash, seed, per-stage wall times, output list) into output_dir and
// returns the written file names.
std::vector<std::string> cmd_realign(const RunConfig& cfg);
std::vector<std::string> cmd_expand(const RunConfig& cfg);
std::vector<std::string> cmd_select(const RunConfig& cfg);
std::vector<std::string> cmd_sweep(const RunConfig& cfg);
std::vector<std::string> cmd_predict(const RunConfig& cfg);

}  // namespace larmap

#endif
