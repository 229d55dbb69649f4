#include "larmap/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "larmap/csv.hpp"
#include "larmap/numformat.hpp"
#include "larmap/parallel.hpp"
#include "larmap/rng.hpp"

namespace larmap {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a boolean");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_double(item, "config key " + key));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  for (double v : parse_double_list(s, key)) out.push_back(static_cast<int>(v));
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// wall-clock stage timer for the metadata record
class StageClock {
 public:
  void start(const std::string& name) {
    name_ = name;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    auto dt = std::chrono::steady_clock::now() - t0_;
    times_.emplace_back(name_,
                        std::chrono::duration_cast<std::chrono::milliseconds>(dt).count());
  }
  const std::vector<std::pair<std::string, long long>>& times() const { return times_; }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::pair<std::string, long long>> times_;
};

void write_meta(const RunConfig& cfg, const std::string& command, const StageClock& clock,
                const std::vector<std::string>& outputs) {
  json meta;
  meta["command"] = command;
  meta["config_hash"] = cfg.config_hash();
  if (cfg.seed) meta["seed"] = *cfg.seed;
  json cfg_json = json::object();
  for (const auto& [k, v] : cfg.to_pairs()) cfg_json[k] = v;
  meta["config"] = cfg_json;
  json times = json::object();
  for (const auto& [name, ms] : clock.times()) times[name] = ms;
  meta["stage_wall_ms"] = times;
  meta["outputs"] = outputs;

  fs::path path = fs::path(cfg.output_dir) / (command + "_meta.json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write metadata record: " + path.string());
  out << meta.dump(2) << '\n';
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

RealignOptions realign_options(const RunConfig& cfg) {
  RealignOptions o;
  o.side = cfg.side;
  o.grid_n = cfg.grid_n;
  o.ridge = cfg.ridge;
  o.tps_neighbors = cfg.tps_neighbors;
  o.threads = cfg.resolved_threads();
  return o;
}

SelectorConfig selector_config(const RunConfig& cfg) {
  SelectorConfig s;
  s.selector = selector_from_name(cfg.selector);
  s.corr_tol = cfg.corr_tol;
  s.max_subset_size = cfg.max_subset_size;
  s.allow_large_exhaustive = cfg.allow_large_exhaustive;
  return s;
}

struct Prepared {
  Dataset ds;
  RealignedTable realigned;
  DesignMatrix expanded;
  FilterResult filtered;
  Vector y;
  std::vector<GeoPoint> coords;
};

Prepared prepare(const RunConfig& cfg, StageClock& clock, bool filter = true) {
  Prepared p;
  clock.start("load");
  p.ds = load_dataset(cfg.manifest, cfg.response_path, cfg.response_column);
  clock.stop();

  p.y = Vector(p.ds.n());
  for (int i = 0; i < p.ds.n(); ++i) {
    p.y[i] = p.ds.responses[i].value;
    p.coords.push_back(p.ds.responses[i].location);
  }

  clock.start("realign");
  p.realigned = realign_dataset(p.ds, realign_options(cfg));
  clock.stop();

  clock.start("expand");
  p.expanded = expand_terms(p.realigned, cfg.max_order, cfg.pairwise);
  clock.stop();

  if (filter) {
    clock.start("prefilter");
    p.filtered = prefilter_mccm(p.expanded, cfg.mccm, derive_seed(cfg.seed.value_or(0), 1));
    clock.stop();
  }
  return p;
}

void write_realigned_csv(const std::string& path, const Prepared& p, const RunConfig& cfg) {
  CsvWriter out(path);
  std::vector<std::string> header{"easting", "northing", cfg.response_column};
  for (const auto& name : p.realigned.names) header.push_back(name);
  out.row(header);
  for (int i = 0; i < p.ds.n(); ++i) {
    std::vector<std::string> row{format_double(p.coords[i].easting),
                                 format_double(p.coords[i].northing), format_double(p.y[i])};
    for (int j = 0; j < static_cast<int>(p.realigned.names.size()); ++j)
      row.push_back(format_double(p.realigned.values(i, j)));
    out.row(row);
  }
}

void write_drop_log(const std::string& path, const std::vector<DropRecord>& log) {
  CsvWriter out(path);
  out.row({"dropped_term", "kept_term", "abs_r", "rule"});
  for (const auto& rec : log)
    out.row({rec.dropped, rec.kept, format_double(rec.abs_r), rec.rule});
}

void write_ensemble_report(const std::string& path, const Ensemble& ens) {
  CsvWriter out(path);
  out.row({"split_id", "chosen_size", "train_rss", "valid_sse", "weight"});
  for (int i = 0; i < ens.size(); ++i) {
    const SplitResult& r = ens.results[i];
    int size = 0;
    for (Index q = 0; q < r.model.coefficients.size(); ++q)
      if (r.model.coefficients[q] != 0.0) ++size;
    out.row({format_int(i), format_int(size), format_double(r.train_rss),
             format_double(r.sse), format_double(ens.weights[i])});
  }
}

void write_frequency_csv(const std::string& path, const Ensemble& ens,
                         const std::vector<TermMeta>& terms) {
  CsvWriter out(path);
  out.row({"term", "count"});
  for (const auto& tf : selection_frequency(ens))
    out.row({terms[tf.term].label, format_int(tf.count)});
}

void write_histogram_csv(const std::string& path, const Ensemble& ens) {
  CsvWriter out(path);
  out.row({"size", "count"});
  for (const auto& [size, count] : subset_size_histogram(ens))
    out.row({format_int(size), format_int(count)});
}

void write_summary_csv(const std::string& path, const std::string& method, double mccm,
                       const SummaryStats& s, double r2) {
  CsvWriter out(path);
  out.row({"method", "mccm", "min", "q1", "median", "mean", "q3", "max", "r2"});
  out.row({method, format_double(mccm), format_double(s.min), format_double(s.q1),
           format_double(s.median), format_double(s.mean), format_double(s.q3),
           format_double(s.max), format_double(r2)});
}

struct CovariateStage {
  Prepared prep;
  std::vector<Split> splits;
  Ensemble ensemble;
};

CovariateStage run_covariate_stage(const RunConfig& cfg, StageClock& clock) {
  CovariateStage stage;
  stage.prep = prepare(cfg, clock);
  clock.start("splits");
  stage.splits = generate_splits(stage.prep.ds.n(), cfg.train_size, cfg.n_splits, *cfg.seed);
  clock.stop();
  clock.start("ensemble");
  stage.ensemble = build_ensemble(stage.prep.filtered.design, stage.prep.y, stage.splits,
                                  selector_config(cfg), cfg.resolved_threads(), cfg.sse_floor);
  clock.stop();
  return stage;
}

std::vector<std::string> write_select_outputs(const RunConfig& cfg, const CovariateStage& stage) {
  std::vector<std::string> outputs;
  auto add = [&](const std::string& name) {
    outputs.push_back(out_path(cfg, name));
    return outputs.back();
  };
  write_ensemble_report(add("ensemble_report.csv"), stage.ensemble);
  write_frequency_csv(add("selection_frequency.csv"), stage.ensemble,
                      stage.prep.filtered.design.terms);
  write_histogram_csv(add("size_histogram.csv"), stage.ensemble);
  double map_r2 = r_squared(
      stage.prep.y, model_averaged_predict(stage.ensemble, stage.prep.filtered.design.values));
  write_summary_csv(add("vsepe_summary.csv"), cfg.selector, cfg.mccm,
                    vsepe_summary(stage.ensemble), map_r2);
  return outputs;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto ctx = [&] { return "config key " + key; };
  if (key == "manifest") manifest = value;
  else if (key == "response_path") response_path = value;
  else if (key == "response_column") response_column = value;
  else if (key == "side") side = parse_double(value, ctx());
  else if (key == "grid_n") grid_n = static_cast<int>(parse_int(value, ctx()));
  else if (key == "ridge") ridge = parse_double(value, ctx());
  else if (key == "tps_neighbors") tps_neighbors = static_cast<int>(parse_int(value, ctx()));
  else if (key == "max_order") max_order = static_cast<int>(parse_int(value, ctx()));
  else if (key == "pairwise") pairwise = parse_bool(value, key);
  else if (key == "mccm") mccm = parse_double(value, ctx());
  else if (key == "train_size") train_size = static_cast<int>(parse_int(value, ctx()));
  else if (key == "n_splits") n_splits = static_cast<int>(parse_int(value, ctx()));
  else if (key == "selector") selector = value;
  else if (key == "corr_tol") corr_tol = parse_double(value, ctx());
  else if (key == "max_subset_size") max_subset_size = static_cast<int>(parse_int(value, ctx()));
  else if (key == "allow_large_exhaustive") allow_large_exhaustive = parse_bool(value, key);
  else if (key == "spatial_single_max")
    spatial_single_max = static_cast<int>(parse_int(value, ctx()));
  else if (key == "spatial_inter_total_max")
    spatial_inter_total_max = static_cast<int>(parse_int(value, ctx()));
  else if (key == "central") central = parse_double(value, ctx());
  else if (key == "sse_floor") sse_floor = parse_double(value, ctx());
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, ctx()));
  else if (key == "output_dir") output_dir = value;
  else if (key == "threads") threads = static_cast<int>(parse_int(value, ctx()));
  else if (key == "pairing") pairing = value;
  else if (key == "dump_members") dump_members = parse_bool(value, key);
  else if (key == "sweep_train_sizes") sweep_train_sizes = value;
  else if (key == "sweep_mccm") sweep_mccm = value;
  else if (key == "grid_xll") grid_xll = parse_double(value, ctx());
  else if (key == "grid_yll") grid_yll = parse_double(value, ctx());
  else if (key == "grid_cellsize") grid_cellsize = parse_double(value, ctx());
  else if (key == "grid_ncols") grid_ncols = static_cast<int>(parse_int(value, ctx()));
  else if (key == "grid_nrows") grid_nrows = static_cast<int>(parse_int(value, ctx()));
  else throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
  std::vector<std::pair<std::string, std::string>> p;
  p.emplace_back("manifest", manifest);
  p.emplace_back("response_path", response_path);
  p.emplace_back("response_column", response_column);
  p.emplace_back("side", format_double(side));
  p.emplace_back("grid_n", format_int(grid_n));
  p.emplace_back("ridge", format_double(ridge));
  p.emplace_back("tps_neighbors", format_int(tps_neighbors));
  p.emplace_back("max_order", format_int(max_order));
  p.emplace_back("pairwise", bool_str(pairwise));
  p.emplace_back("mccm", format_double(mccm));
  p.emplace_back("train_size", format_int(train_size));
  p.emplace_back("n_splits", format_int(n_splits));
  p.emplace_back("selector", selector);
  p.emplace_back("corr_tol", format_double(corr_tol));
  p.emplace_back("max_subset_size", format_int(max_subset_size));
  p.emplace_back("allow_large_exhaustive", bool_str(allow_large_exhaustive));
  p.emplace_back("spatial_single_max", format_int(spatial_single_max));
  p.emplace_back("spatial_inter_total_max", format_int(spatial_inter_total_max));
  p.emplace_back("central", format_double(central));
  p.emplace_back("sse_floor", format_double(sse_floor));
  p.emplace_back("seed", seed ? format_int(static_cast<long long>(*seed)) : "");
  p.emplace_back("output_dir", output_dir);
  p.emplace_back("threads", format_int(threads));
  p.emplace_back("pairing", pairing);
  p.emplace_back("dump_members", bool_str(dump_members));
  p.emplace_back("sweep_train_sizes", sweep_train_sizes);
  p.emplace_back("sweep_mccm", sweep_mccm);
  p.emplace_back("grid_xll", grid_xll ? format_double(*grid_xll) : "");
  p.emplace_back("grid_yll", grid_yll ? format_double(*grid_yll) : "");
  p.emplace_back("grid_cellsize", grid_cellsize ? format_double(*grid_cellsize) : "");
  p.emplace_back("grid_ncols", grid_ncols ? format_int(*grid_ncols) : "");
  p.emplace_back("grid_nrows", grid_nrows ? format_int(*grid_nrows) : "");
  return p;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : RunConfig().to_pairs()) out.push_back(k);
  return out;
}

std::vector<std::string> RunConfig::problems(const std::string& command) const {
  std::vector<std::string> bad;
  const bool needs_data = command != "none";
  if (needs_data) {
    if (manifest.empty()) bad.push_back("manifest: required");
    if (response_path.empty()) bad.push_back("response_path: required");
    if (response_column.empty()) bad.push_back("response_column: required");
  }
  if (!(side > 0.0)) bad.push_back("side: must be > 0");
  if (grid_n < 1) bad.push_back("grid_n: must be >= 1");
  if (ridge < 0.0) bad.push_back("ridge: must be >= 0");
  if (tps_neighbors < 3) bad.push_back("tps_neighbors: must be >= 3");
  if (max_order < 1) bad.push_back("max_order: must be >= 1");
  if (!(mccm > 0.0 && mccm <= 1.0)) bad.push_back("mccm: must lie in (0, 1]");
  if (train_size < 2) bad.push_back("train_size: must be >= 2");
  if (n_splits < 1) bad.push_back("n_splits: must be >= 1");
  if (corr_tol < 0.0) bad.push_back("corr_tol: must be >= 0");
  if (max_subset_size < 1) bad.push_back("max_subset_size: must be >= 1");
  if (spatial_single_max < 1) bad.push_back("spatial_single_max: must be >= 1");
  if (spatial_inter_total_max < 0) bad.push_back("spatial_inter_total_max: must be >= 0");
  if (!(central > 0.0 && central < 1.0)) bad.push_back("central: must lie in (0, 1)");
  if (sse_floor < 0.0) bad.push_back("sse_floor: must be >= 0");
  if (threads < 0) bad.push_back("threads: must be >= 0 (0 = auto)");
  if (pairing != "matched" && pairing != "cross")
    bad.push_back("pairing: must be matched or cross");
  try {
    selector_from_name(selector);
  } catch (const ConfigError&) {
    bad.push_back("selector: unknown name '" + selector + "'");
  }
  bool needs_seed = command == "select" || command == "sweep" || command == "predict";
  if (needs_seed && !seed) bad.push_back("seed: required for " + command);
  if (command == "sweep") {
    if (parse_int_list(sweep_train_sizes, "sweep_train_sizes").empty())
      bad.push_back("sweep_train_sizes: needs at least one value");
    if (parse_double_list(sweep_mccm, "sweep_mccm").empty())
      bad.push_back("sweep_mccm: needs at least one value");
  }
  int grid_keys = (grid_xll ? 1 : 0) + (grid_yll ? 1 : 0) + (grid_cellsize ? 1 : 0) +
                  (grid_ncols ? 1 : 0) + (grid_nrows ? 1 : 0);
  if (grid_keys != 0 && grid_keys != 5)
    bad.push_back("grid_*: set all of grid_xll, grid_yll, grid_cellsize, grid_ncols, "
                  "grid_nrows or none");
  return bad;
}

void RunConfig::validate(const std::string& command) const {
  auto bad = problems(command);
  if (bad.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& b : bad) msg += "\n  " + b;
  throw ConfigError(msg);
}

int RunConfig::resolved_threads() const {
  return threads == 0 ? hardware_threads() : threads;
}

std::string RunConfig::config_hash() const {
  std::string blob;
  for (const auto& [k, v] : to_pairs()) {
    if (k == "threads" || k == "output_dir") continue;  // do not affect results
    blob += k;
    blob += '=';
    blob += v;
    blob += '\n';
  }
  return hex64(fnv1a(blob));
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r\n") != std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": expected 'key = value', got '" + line + "'");
      continue;
    }
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      size_t e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    cfg.set(key, value);
  }
}

std::vector<std::string> cmd_realign(const RunConfig& cfg) {
  cfg.validate("realign");
  StageClock clock;
  Prepared p = prepare(cfg, clock, /*filter=*/false);
  clock.start("write");
  std::vector<std::string> outputs{out_path(cfg, "realigned.csv")};
  write_realigned_csv(outputs[0], p, cfg);
  clock.stop();
  write_meta(cfg, "realign", clock, outputs);
  return outputs;
}

std::vector<std::string> cmd_expand(const RunConfig& cfg) {
  cfg.validate("expand");
  StageClock clock;
  Prepared p = prepare(cfg, clock);

  clock.start("write");
  std::vector<std::string> outputs;
  outputs.push_back(out_path(cfg, "design.csv"));
  {
    CsvWriter out(outputs.back());
    std::vector<std::string> header;
    for (const auto& t : p.filtered.design.terms) header.push_back(t.label);
    out.row(header);
    for (int i = 0; i < p.filtered.design.n(); ++i) {
      std::vector<std::string> row;
      for (int j = 0; j < p.filtered.design.p(); ++j)
        row.push_back(format_double(p.filtered.design.values(i, j)));
      out.row(row);
    }
  }
  outputs.push_back(out_path(cfg, "design_terms.csv"));
  {
    CsvWriter out(outputs.back());
    out.row({"label", "kind", "base_a", "order_a", "base_b", "order_b", "source_rank"});
    for (const auto& t : p.filtered.design.terms)
      out.row({t.label, term_kind_name(t.kind), t.base_a, format_int(t.order_a), t.base_b,
               format_int(t.order_b), format_int(t.source_rank)});
  }
  outputs.push_back(out_path(cfg, "drop_log.csv"));
  write_drop_log(outputs.back(), p.filtered.drop_log);
  clock.stop();
  write_meta(cfg, "expand", clock, outputs);
  return outputs;
}

std::vector<std::string> cmd_select(const RunConfig& cfg) {
  cfg.validate("select");
  StageClock clock;
  CovariateStage stage = run_covariate_stage(cfg, clock);
  clock.start("write");
  std::vector<std::string> outputs = write_select_outputs(cfg, stage);
  clock.stop();
  write_meta(cfg, "select", clock, outputs);
  return outputs;
}

std::vector<std::string> cmd_sweep(const RunConfig& cfg) {
  cfg.validate("sweep");
  StageClock clock;
  Prepared p = prepare(cfg, clock, /*filter=*/false);

  std::vector<SweepConfig> configs;
  for (double m : parse_double_list(cfg.sweep_mccm, "sweep_mccm"))
    for (int t : parse_int_list(cfg.sweep_train_sizes, "sweep_train_sizes"))
      configs.push_back({t, m});

  clock.start("sweep");
  auto rows = sweep(p.expanded, p.y, configs, selector_config(cfg), cfg.n_splits, *cfg.seed,
                    cfg.resolved_threads(), cfg.sse_floor);
  clock.stop();

  clock.start("write");
  std::vector<std::string> outputs{out_path(cfg, "sweep.csv")};
  {
    CsvWriter out(outputs[0]);
    out.row({"mccm", "train_size", "min", "q1", "median", "mean", "q3", "max", "r2"});
    for (const auto& row : rows)
      out.row({format_double(row.config.mccm), format_int(row.config.train_size),
               format_double(row.vsepe.min), format_double(row.vsepe.q1),
               format_double(row.vsepe.median), format_double(row.vsepe.mean),
               format_double(row.vsepe.q3), format_double(row.vsepe.max),
               format_double(row.map_r2)});
  }
  clock.stop();
  write_meta(cfg, "sweep", clock, outputs);
  return outputs;
}

std::vector<std::string> cmd_predict(const RunConfig& cfg) {
  cfg.validate("predict");
  StageClock clock;
  CovariateStage stage = run_covariate_stage(cfg, clock);
  const Prepared& p = stage.prep;

  clock.start("spatial");
  Vector resid = residuals(stage.ensemble, p.filtered.design.values, p.y);
  SpatialCvConfig scfg;
  scfg.single_max = cfg.spatial_single_max;
  scfg.inter_total_max = cfg.spatial_inter_total_max;
  scfg.mccm = cfg.mccm;
  scfg.selector.selector = Selector::lasso_lar;  // residual trend surfaces always use the path
  scfg.selector.corr_tol = cfg.corr_tol;
  scfg.sse_floor = cfg.sse_floor;
  scfg.threads = cfg.resolved_threads();
  scfg.seed = derive_seed(*cfg.seed, 2);
  SpatialEnsembleResult spat = spatial_ensemble(p.coords, resid, stage.splits, scfg);
  clock.stop();

  clock.start("pixels");
  RasterGrid geometry;
  if (cfg.grid_xll) {
    geometry.xllcorner = *cfg.grid_xll;
    geometry.yllcorner = *cfg.grid_yll;
    geometry.cellsize = *cfg.grid_cellsize;
    geometry.ncols = *cfg.grid_ncols;
    geometry.nrows = *cfg.grid_nrows;
    geometry.values.assign(static_cast<size_t>(geometry.ncols) * geometry.nrows, 0.0);
  } else if (!p.ds.raster_covariates.empty()) {
    geometry = p.ds.raster_covariates.front().grid;
  } else {
    throw ConfigError("predict: no raster covariate supplies the output geometry; set the "
                      "grid_xll/grid_yll/grid_cellsize/grid_ncols/grid_nrows keys");
  }

  PixelRows pixels =
      build_pixel_rows(p.ds, geometry, realign_options(cfg), p.filtered.design.terms);
  Matrix spat_pixels =
      spatial_rows_for_terms(spat.basis, spat.filtered.terms, pixels.centers);
  clock.stop();

  clock.start("stack");
  Pairing pairing = cfg.pairing == "cross" ? Pairing::cross : Pairing::matched;
  PredictionStack stack =
      predict_full_cover(stage.ensemble, spat.ensemble, pixels.rows, spat_pixels, geometry,
                         pixels.valid, pairing, cfg.resolved_threads());
  OutputRasters rasters = summarize_stack(stack, cfg.central);
  clock.stop();

  clock.start("write");
  std::vector<std::string> outputs = write_select_outputs(cfg, stage);
  auto add = [&](const std::string& name) {
    outputs.push_back(out_path(cfg, name));
    return outputs.back();
  };
  write_raster(rasters.prediction, add("prediction.asc"));
  write_raster(rasters.uncertainty, add("uncertainty.asc"));
  write_ensemble_report(add("spatial_ensemble_report.csv"), spat.ensemble);
  write_frequency_csv(add("spatial_selection_frequency.csv"), spat.ensemble,
                      spat.filtered.terms);
  write_drop_log(add("spatial_drop_log.csv"), spat.drop_log);
  if (cfg.dump_members) write_member_stack_csv(stack, add("member_stack.csv"));
  if (!pixels.failures.empty()) {
    CsvWriter out(add("pixel_failures.csv"));
    out.row({"detail"});
    for (const auto& f : pixels.failures) {
      std::string clean = f;
      for (char& c : clean)
        if (c == ',') c = ';';
      out.row({clean});
    }
  }
  clock.stop();
  write_meta(cfg, "predict", clock, outputs);
  return outputs;
}

}  // namespace larmap
