#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "rcbo/rcbo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Photonic reservoir computer hyper-parameter search"};
  app.require_subcommand(1);

  rcbo::CliOptions options;
  std::uint64_t seed_value = 0;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_value,
                    "Override the campaign seed from the config")
        ->each([&](const std::string&) { options.seed_override = seed_value; });
  };

  auto* optimize = app.add_subcommand(
      "optimize", "Run the configured campaign and write its logs");
  optimize->add_option("--config", options.config_path, "Campaign config (JSON)")
      ->required();
  optimize->add_option("--out", options.output_override,
                       "Override the output directory");
  optimize->add_option("--workers", options.workers,
                       "Concurrent evaluations for grid sweeps");
  optimize->add_flag("--tune-lambda", options.tune_lambda,
                     "Pick the ridge constant on a validation split");
  add_seed(optimize);

  auto* report = app.add_subcommand(
      "report", "Summarise a stored observation log");
  report->add_option("--log", options.log_path, "observations.txt path")
      ->required();

  auto* replay = app.add_subcommand(
      "replay", "Re-run a campaign and verify it reproduces a stored log");
  replay->add_option("--log", options.log_path, "observations.txt path")
      ->required();
  replay->add_option("--config", options.config_path, "Campaign config (JSON)")
      ->required();
  replay->add_option("--workers", options.workers,
                     "Concurrent evaluations for grid sweeps");
  replay->add_flag("--tune-lambda", options.tune_lambda,
                   "Match a run that used --tune-lambda");
  add_seed(replay);

  auto* export_ds = app.add_subcommand(
      "export-dataset", "Write the configured dataset to disk");
  export_ds->add_option("--config", options.config_path, "Campaign config (JSON)")
      ->required();
  export_ds->add_option("--out", options.output_override,
                        "Target directory (default: <output_dir>/dataset)");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(optimize)) return rcbo::cmd_optimize(options);
  if (app.got_subcommand(report)) return rcbo::cmd_report(options.log_path);
  if (app.got_subcommand(replay))
    return rcbo::cmd_replay(options.log_path, options.config_path, options);
  if (app.got_subcommand(export_ds)) return rcbo::cmd_export_dataset(options);
  return rcbo::kExitConfig;
}
