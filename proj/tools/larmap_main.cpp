// Batch front end: realign | expand | select | sweep | predict.
// Every RunConfig key is also a flag of the same name; flags override the
// config file. Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric.

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>

#include "larmap/pipeline.hpp"

namespace {

struct SubcommandState {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> flag_values;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate-assisted spatial interpolation via LASSO-LAR model averaging"};
  app.require_subcommand(1);

  const std::vector<std::string> commands{"realign", "expand", "select", "sweep", "predict"};
  const std::vector<std::string> descriptions{
      "realign covariates to blocks centred on the response locations",
      "expand the realigned table into polynomial/interaction terms and filter by correlation",
      "run the cross-validated selection ensemble and write its reports",
      "run the train-size x correlation-threshold sweep table",
      "write full-cover prediction and uncertainty rasters"};

  std::vector<SubcommandState> states(commands.size());
  auto keys = larmap::RunConfig::keys();
  for (size_t c = 0; c < commands.size(); ++c) {
    SubcommandState& st = states[c];
    st.app = app.add_subcommand(commands[c], descriptions[c]);
    st.app->add_option("--config", st.config_file, "key = value configuration file");
    for (const auto& key : keys)
      st.app->add_option("--" + key, st.flag_values[key]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (size_t c = 0; c < commands.size(); ++c) {
      SubcommandState& st = states[c];
      if (!st.app->parsed()) continue;

      larmap::RunConfig cfg;
      if (!st.config_file.empty()) larmap::load_config_file(st.config_file, cfg);
      for (const auto& key : keys)
        if (st.app->count("--" + key) > 0) cfg.set(key, st.flag_values[key]);

      std::vector<std::string> outputs;
      if (commands[c] == "realign") outputs = larmap::cmd_realign(cfg);
      else if (commands[c] == "expand") outputs = larmap::cmd_expand(cfg);
      else if (commands[c] == "select") outputs = larmap::cmd_select(cfg);
      else if (commands[c] == "sweep") outputs = larmap::cmd_sweep(cfg);
      else outputs = larmap::cmd_predict(cfg);

      for (const auto& f : outputs) std::printf("wrote %s\n", f.c_str());
    }
  } catch (const larmap::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const larmap::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const larmap::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
