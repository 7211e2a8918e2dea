#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "rcbo/campaign.hpp"
#include "rcbo/config.hpp"
#include "rcbo/log_io.hpp"
#include "rcbo/tasks.hpp"

namespace rcbo {

// Exit code contract: 0 success, 1 runtime failure or replay divergence,
// 2 configuration/parse error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct CliOptions {
  std::string config_path;
  std::string log_path;
  std::string output_override;
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
  bool tune_lambda = false;
};

namespace detail {

struct PreparedTask {
  ObjectiveFn objective;
  Direction direction = Direction::maximize;
  std::string label;
};

/// Builds the objective closure for a parsed config. Dataset tasks hold their
/// data by shared ownership so the returned closure is self-contained.
inline PreparedTask prepare_task(const CampaignConfig& cfg, bool tune_lambda) {
  PreparedTask task;
  task.label = cfg.task.label();
  if (cfg.task.type == TaskConfig::Type::toy) {
    task.direction = Direction::minimize;
    const std::string name = cfg.task.toy_name;
    const HyperSpace space = cfg.space;
    task.objective = [name, space](const HyperPoint& p) {
      return toy_surface(name, to_unit(space, p));
    };
    return task;
  }
  auto dataset = std::make_shared<Dataset>(
      cfg.task.type == TaskConfig::Type::synthetic
          ? generate_synthetic(cfg.task.synthetic)
          : load_features(cfg.task.features_manifest));
  ReservoirConfig reservoir = cfg.reservoir;
  reservoir.n_inputs = dataset->k;
  TrainingConfig training = cfg.training;
  training.tune_lambda = tune_lambda;
  task.direction = Direction::maximize;
  task.objective = [dataset, reservoir, training](const HyperPoint& p) {
    return evaluate_objective(*dataset, p, reservoir, training);
  };
  return task;
}

inline CampaignLog run_campaign(const CampaignConfig& cfg,
                                const PreparedTask& task, int workers,
                                const ObservationCallback& on_observation) {
  if (cfg.method.type == MethodConfig::Type::bayes) {
    BayesOptions opts;
    opts.budget = cfg.method.budget;
    opts.init_count = cfg.method.init_count;
    opts.seed = cfg.seed;
    opts.direction = task.direction;
    opts.acquisition = cfg.method.acquisition;
    opts.gp.random_starts = cfg.method.gp_random_starts;
    opts.gp.max_evals_per_start = cfg.method.gp_max_evals;
    opts.target = cfg.method.target;
    opts.patience = cfg.method.patience;
    opts.task_label = task.label;
    opts.on_observation = on_observation;
    return run_bayesian(task.objective, cfg.space, opts);
  }
  GridOptions opts;
  opts.seed = cfg.seed;
  opts.direction = task.direction;
  opts.workers = workers;
  opts.task_label = task.label;
  opts.on_observation = on_observation;
  return run_grid(task.objective, cfg.space, cfg.method.grid, opts);
}

}  // namespace detail

/// Runs the configured campaign and writes observations.txt, summary.json,
/// surrogate.txt and running_best.txt into the output directory. Observation
/// lines are streamed, so an interrupted campaign leaves a usable partial log.
inline int cmd_optimize(const CliOptions& options,
                        std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CampaignConfig cfg;
  detail::PreparedTask task;
  try {
    cfg = parse_config_file(options.config_path);
    if (options.seed_override) cfg.seed = *options.seed_override;
    if (!options.output_override.empty()) cfg.output_dir = options.output_override;
    task = detail::prepare_task(cfg, options.tune_lambda);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  namespace fs = std::filesystem;
  try {
    fs::create_directories(cfg.output_dir);
  } catch (const std::exception& e) {
    err << "error: cannot create output directory: " << e.what() << "\n";
    return kExitRuntime;
  }
  const std::string obs_path = (fs::path(cfg.output_dir) / "observations.txt").string();
  std::ofstream obs_stream(obs_path);
  if (!obs_stream) {
    err << "error: cannot open " << obs_path << "\n";
    return kExitRuntime;
  }

  {
    CampaignLog header;
    header.task = task.label;
    header.direction = task.direction;
    header.space = cfg.space;
    header.seed = cfg.seed;
    header.budget = cfg.method.type == MethodConfig::Type::bayes
                        ? cfg.method.budget
                        : static_cast<int>(grid_points(cfg.space, cfg.method.grid).size());
    header.init_count =
        cfg.method.type == MethodConfig::Type::bayes ? cfg.method.init_count : 0;
    write_observation_header(obs_stream, header);
    obs_stream.flush();
  }

  CampaignLog log;
  try {
    log = detail::run_campaign(cfg, task, options.workers,
                               [&](const Observation& o) {
                                 write_observation_line(obs_stream, o, cfg.seed);
                                 obs_stream.flush();
                               });
  } catch (const std::exception& e) {
    err << "error: campaign failed: " << e.what() << "\n";
    err << "partial log: " << obs_path << "\n";
    return kExitRuntime;
  }

  try {
    {
      std::ofstream s((fs::path(cfg.output_dir) / "surrogate.txt").string());
      write_surrogate(s, log);
    }
    {
      std::ofstream s((fs::path(cfg.output_dir) / "running_best.txt").string());
      write_running_best(s, log);
    }
    {
      std::ofstream s((fs::path(cfg.output_dir) / "summary.json").string());
      s << summary_json(log).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: writing outputs failed: " << e.what() << "\n";
    return kExitRuntime;
  }

  for (const auto& note : log.notes) err << "note: " << note << "\n";
  try {
    const Observation& b = best(log);
    out << "evaluations: " << log.observations.size() << "\n";
    out << "best: iteration " << b.iteration << " objective "
        << format_double(b.objective) << " at alpha=" << format_double(b.point.alpha)
        << " beta=" << format_double(b.point.beta)
        << " gamma=" << format_double(b.point.gamma)
        << " rho=" << format_double(b.point.rho) << "\n";
  } catch (const std::domain_error&) {
    out << "evaluations: " << log.observations.size()
        << " (no successful observation)\n";
  }
  out << "outputs: " << cfg.output_dir << "\n";
  return kExitOk;
}

/// Prints the best observation, a per-dimension sensitivity summary over the
/// top 10% of observations and iterations-to-within tables for a stored log.
inline int cmd_report(const std::string& log_path,
                      std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  CampaignLog log;
  try {
    log = read_observations_file(log_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  out << "log: " << log_path << "\n";
  out << "task " << log.task << " direction " << to_string(log.direction)
      << " seed " << log.seed << " evaluations " << log.observations.size()
      << "\n";

  try {
    const Observation& b = best(log);
    out << "best: iteration " << b.iteration << " method "
        << to_string(b.method) << " objective " << format_double(b.objective)
        << "\n";
    out << "  alpha=" << format_double(b.point.alpha)
        << " beta=" << format_double(b.point.beta)
        << " gamma=" << format_double(b.point.gamma)
        << " rho=" << format_double(b.point.rho) << "\n";
  } catch (const std::domain_error&) {
    out << "best: no successful observation\n";
    return kExitOk;
  }

  out << "sensitivity (top 10% of observations, unit coordinates):\n";
  try {
    const SensitivityReport rep = sensitivity_report(log, 0.1);
    for (int d = 0; d < kDims; ++d) {
      const auto& dim = rep.dims[d];
      const char* flag =
          dim.flag == DimensionSensitivity::Flag::insensitive
              ? "insensitive"
              : (dim.flag == DimensionSensitivity::Flag::sensitive
                     ? "sensitive"
                     : "indeterminate");
      out << "  " << kDimNames[d] << ": min " << format_double(dim.min_u)
          << " max " << format_double(dim.max_u) << " spread "
          << format_double(dim.spread) << " -> " << flag << "\n";
    }
    out << "  (top " << rep.top_count << " observations)\n";
  } catch (const std::domain_error&) {
    out << "  insufficient data (need at least 10 observations)\n";
  }

  out << "iterations to reach within slack of the final best:\n";
  for (double slack : {0.0, 0.013}) {
    out << "  slack " << format_double(slack) << ": iteration "
        << iterations_to_within(log, slack) << "\n";
  }
  return kExitOk;
}

/// Re-runs the campaign described by the config and verifies point-by-point
/// identity with the stored log. Exit 0 iff identical.
inline int cmd_replay(const std::string& log_path,
                      const std::string& config_path, const CliOptions& options,
                      std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  CampaignConfig cfg;
  CampaignLog stored;
  detail::PreparedTask task;
  try {
    cfg = parse_config_file(config_path);
    if (options.seed_override) cfg.seed = *options.seed_override;
    stored = read_observations_file(log_path);
    task = detail::prepare_task(cfg, options.tune_lambda);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  CampaignLog fresh;
  try {
    fresh = detail::run_campaign(cfg, task, options.workers, nullptr);
  } catch (const std::exception& e) {
    err << "error: campaign failed: " << e.what() << "\n";
    return kExitRuntime;
  }

  auto same = [](double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
  };
  const std::size_t n = std::min(stored.observations.size(),
                                 fresh.observations.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = stored.observations[i];
    const auto& f = fresh.observations[i];
    const bool equal = s.iteration == f.iteration && s.method == f.method &&
                       same(s.point.alpha, f.point.alpha) &&
                       same(s.point.beta, f.point.beta) &&
                       same(s.point.gamma, f.point.gamma) &&
                       same(s.point.rho, f.point.rho) &&
                       same(s.objective, f.objective);
    if (!equal) {
      err << "replay divergence at iteration " << s.iteration << "\n";
      return kExitRuntime;
    }
  }
  if (stored.observations.size() != fresh.observations.size()) {
    err << "replay divergence at iteration " << (n + 1)
        << " (log lengths differ)\n";
    return kExitRuntime;
  }
  out << "replay ok: " << fresh.observations.size() << " observations match\n";
  return kExitOk;
}

/// Materialises the configured dataset (synthetic or features) into the
/// documented manifest + matrix-file layout.
inline int cmd_export_dataset(const CliOptions& options,
                              std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  CampaignConfig cfg;
  Dataset ds;
  try {
    cfg = parse_config_file(options.config_path);
    if (cfg.task.type == TaskConfig::Type::toy)
      throw ConfigError("export-dataset: task is an analytic surface, "
                        "nothing to export");
    ds = cfg.task.type == TaskConfig::Type::synthetic
             ? generate_synthetic(cfg.task.synthetic)
             : load_features(cfg.task.features_manifest);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::string dir =
      !options.output_override.empty()
          ? options.output_override
          : (std::filesystem::path(cfg.output_dir) / "dataset").string();
  try {
    export_dataset(ds, dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << "dataset: " << ds.sequences.size() << " sequences -> " << dir << "\n";
  return kExitOk;
}

}  // namespace rcbo
