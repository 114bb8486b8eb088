#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "istb/experiment.hpp"
#include "istb/io.hpp"
#include "istb/scenario.hpp"

namespace {

using namespace istb;
using bench::ConfigError;
using bench::DataError;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string models;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_models) {
  cmd->add_option("--config", args.config, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "override the output directory");
  if (need_models)
    cmd->add_option("--models", args.models,
                    "comma-separated subset of sass,hysei");
  cmd->add_option("--jobs", args.jobs,
                  "parallel learning periods (0 = all cores)");
}

void apply_overrides(bench::ExperimentConfig& config, const CommonArgs& args) {
  if (args.seed) config.seed = *args.seed;
  if (!args.out.empty()) config.out_dir = args.out;
  if (!args.models.empty()) {
    config.sass.enabled = false;
    config.hysei.enabled = false;
    std::string rest = args.models;
    while (!rest.empty()) {
      const auto cut = rest.find(',');
      const std::string tok = rest.substr(0, cut);
      rest = cut == std::string::npos ? "" : rest.substr(cut + 1);
      if (tok == "sass") config.sass.enabled = true;
      else if (tok == "hysei") config.hysei.enabled = true;
      else if (!tok.empty())
        throw ConfigError("unknown model in --models: " + tok);
    }
    bench::validate_config(config);
  }
}

int run_command(const CommonArgs& args, bool force_both) {
  auto config = bench::load_config(args.config);
  apply_overrides(config, args);
  if (force_both) {
    config.sass.enabled = true;
    config.hysei.enabled = true;
  }
  const auto report = bench::run_experiment(config, args.jobs);
  bench::emit_report(report, config, config.out_dir);
  if (config.sass.enabled && config.hysei.enabled) {
    const auto tables = bench::compare_models(report, config, "sass", "hysei");
    bench::emit_comparison(tables, report, config.out_dir);
  }
  std::printf("wrote %s (%zu learning periods, %zu model(s))\n",
              config.out_dir.c_str(), report.learning_ends.size(),
              report.models.size());
  for (const auto& m : report.models) {
    std::size_t errors = 0;
    for (const auto& p : m.periods)
      if (p.model_error) ++errors;
    if (errors > 0)
      std::fprintf(stderr, "%s: model error in %zu of %zu periods\n",
                   m.id.c_str(), errors, m.periods.size());
    if (errors == m.periods.size()) {
      std::fprintf(stderr, "%s: failed in every learning period (first: %s)\n",
                   m.id.c_str(), m.periods.front().error.c_str());
      return kExitModel;
    }
  }
  return kExitOk;
}

int synth_command(const CommonArgs& args) {
  auto spec = bench::load_scenario_spec(args.config);
  if (args.seed) spec.seed = *args.seed;
  const std::string out = args.out.empty() ? "synth_out" : args.out;
  const auto scenario = scenario::generate_scenario(spec);
  std::filesystem::create_directories(out);
  save_catalog(out + "/catalog.csv", scenario.catalog);
  save_hydraulics(out + "/hydraulics.csv", scenario.hydraulics);
  std::printf("wrote %s: %zu events, shut-in at %g s\n", out.c_str(),
              scenario.catalog.size(), scenario.shut_in);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-prospective test bench for induced-seismicity "
               "forecast models"};
  app.require_subcommand(1);

  CommonArgs run_args, cmp_args, synth_args, val_args;
  auto* run = app.add_subcommand(
      "run", "run the experiment and write evaluation matrices");
  add_common(run, run_args, true);
  auto* cmp = app.add_subcommand(
      "compare", "run both models and write comparison tables");
  add_common(cmp, cmp_args, false);
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic stimulation dataset");
  add_common(synth, synth_args, false);
  auto* val = app.add_subcommand("validate-config",
                                 "parse and validate a config, then exit");
  val->add_option("--config", val_args.config, "experiment config (JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(run_args, false);
    if (cmp->parsed()) return run_command(cmp_args, true);
    if (synth->parsed()) return synth_command(synth_args);
    if (val->parsed()) {
      bench::load_config(val_args.config);
      std::printf("config ok\n");
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitConfig;
}
