#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "rcbo/campaign.hpp"
#include "rcbo/hyperspace.hpp"
#include "rcbo/reservoir.hpp"
#include "rcbo/tasks.hpp"

namespace rcbo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TaskConfig {
  enum class Type { synthetic, features, toy };
  Type type = Type::toy;
  SyntheticTaskSpec synthetic;
  std::string features_manifest;
  std::string toy_name = "pit_2d";

  std::string label() const {
    switch (type) {
      case Type::toy: return "toy:" + toy_name;
      case Type::synthetic: {
        std::ostringstream s;
        s << "synthetic:k" << synthetic.k << "c" << synthetic.c << "s"
          << synthetic.seed;
        return s.str();
      }
      case Type::features:
        return "features:" +
               std::filesystem::path(features_manifest).filename().string();
    }
    return "?";
  }
};

struct MethodConfig {
  enum class Type { bayes, grid };
  Type type = Type::bayes;
  // bayes
  int budget = 20;
  int init_count = 8;
  AcquisitionConfig acquisition;
  int gp_random_starts = 8;
  int gp_max_evals = 200;
  std::optional<double> target;
  std::optional<int> patience;
  // grid
  GridSpec grid = GridSpec::defaults();
};

/// One campaign, fully described by a single JSON file.
struct CampaignConfig {
  int version = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  TaskConfig task;
  HyperSpace space = HyperSpace::defaults();
  MethodConfig method;
  ReservoirConfig reservoir;
  TrainingConfig training;
};

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j,
                                         const std::string& key,
                                         const std::string& where) {
  if (!j.contains(key))
    throw ConfigError("config: missing '" + key + "' in " + where);
  return j.at(key);
}

inline DimensionBounds parse_bounds(const nlohmann::json& j,
                                    const std::string& name) {
  if (!j.is_object())
    throw ConfigError("config: space." + name + " must be an object");
  DimensionBounds b;
  b.low = require_key(j, "low", "space." + name).get<double>();
  b.high = require_key(j, "high", "space." + name).get<double>();
  b.scale = scale_from_string(
      j.value("scale", std::string(name == "alpha" ? "linear" : "log10")));
  return b;
}

}  // namespace detail

inline CampaignConfig parse_config_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  CampaignConfig cfg;
  cfg.version = j.value("version", 1);
  if (cfg.version != 1)
    throw ConfigError("config: unsupported version " +
                      std::to_string(cfg.version));
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.output_dir = j.value("output_dir", std::string("out"));

  // task
  {
    const auto& t = detail::require_key(j, "task", "config");
    const std::string type =
        detail::require_key(t, "type", "task").get<std::string>();
    if (type == "toy") {
      cfg.task.type = TaskConfig::Type::toy;
      cfg.task.toy_name =
          detail::require_key(t, "name", "task").get<std::string>();
      if (!is_toy_surface(cfg.task.toy_name))
        throw ConfigError("config: unknown toy surface '" + cfg.task.toy_name + "'");
    } else if (type == "synthetic") {
      cfg.task.type = TaskConfig::Type::synthetic;
      auto& s = cfg.task.synthetic;
      s.k = t.value("k", s.k);
      s.c = t.value("c", s.c);
      s.sequences_per_class = t.value("sequences_per_class", s.sequences_per_class);
      s.min_length = t.value("min_length", s.min_length);
      s.max_length = t.value("max_length", s.max_length);
      s.class_separation = t.value("separation", s.class_separation);
      s.temporal_correlation = t.value("correlation", s.temporal_correlation);
      s.noise = t.value("noise", s.noise);
      s.train_fraction = t.value("train_fraction", s.train_fraction);
      s.seed = t.value("seed", s.seed);
      try {
        s.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else if (type == "features") {
      cfg.task.type = TaskConfig::Type::features;
      cfg.task.features_manifest =
          detail::require_key(t, "manifest", "task").get<std::string>();
      if (!std::filesystem::exists(cfg.task.features_manifest))
        throw ConfigError("config: feature manifest '" +
                          cfg.task.features_manifest + "' does not exist");
    } else {
      throw ConfigError("config: unknown task type '" + type + "'");
    }
  }

  // space (optional; defaults cover the standard search box)
  if (j.contains("space")) {
    const auto& s = j.at("space");
    for (int d = 0; d < kDims; ++d) {
      const std::string name = kDimNames[d];
      cfg.space.dims[d] =
          detail::parse_bounds(detail::require_key(s, name, "space"), name);
    }
    try {
      cfg.space.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  // method
  {
    const auto& m = detail::require_key(j, "method", "config");
    const std::string type =
        detail::require_key(m, "type", "method").get<std::string>();
    if (type == "bayes") {
      cfg.method.type = MethodConfig::Type::bayes;
      cfg.method.budget = detail::require_key(m, "budget", "method").get<int>();
      cfg.method.init_count = m.value("init_count", 8);
      cfg.method.acquisition.candidate_pool_size = m.value("pool_size", 4096);
      cfg.method.acquisition.local_refinement_steps =
          m.value("refinement_steps", 50);
      cfg.method.acquisition.duplicate_tol = m.value("duplicate_tol", 1e-6);
      cfg.method.acquisition.exploration_jitter =
          m.value("exploration_jitter", 0.0);
      cfg.method.gp_random_starts = m.value("gp_random_starts", 8);
      cfg.method.gp_max_evals = m.value("gp_max_evals", 200);
      if (m.contains("target") && !m.at("target").is_null())
        cfg.method.target = m.at("target").get<double>();
      if (m.contains("patience") && !m.at("patience").is_null())
        cfg.method.patience = m.at("patience").get<int>();
      if (cfg.method.init_count < 2)
        throw ConfigError("config: method.init_count must be >= 2");
      if (cfg.method.budget < cfg.method.init_count)
        throw ConfigError("config: method.budget must be >= init_count");
      try {
        cfg.method.acquisition.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else if (type == "grid") {
      cfg.method.type = MethodConfig::Type::grid;
      for (int d = 0; d < kDims; ++d) {
        const std::string name = kDimNames[d];
        if (m.contains(name))
          cfg.method.grid.values[d] = m.at(name).get<std::vector<double>>();
      }
      try {
        cfg.method.grid.validate(cfg.space);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else {
      throw ConfigError("config: unknown method type '" + type + "'");
    }
  }

  // reservoir (only consulted by dataset tasks)
  if (j.contains("reservoir")) {
    const auto& r = j.at("reservoir");
    auto& rc = cfg.reservoir;
    rc.n_nodes = r.value("n_nodes", rc.n_nodes);
    rc.i0 = r.value("i0", rc.i0);
    rc.quantisation_enabled = r.value("quantisation", rc.quantisation_enabled);
    rc.quant_in_bits = r.value("quant_in_bits", rc.quant_in_bits);
    rc.quant_out_bits = r.value("quant_out_bits", rc.quant_out_bits);
    rc.rng_seed = r.value("seed", rc.rng_seed);
    try {
      rc.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  // training
  if (j.contains("training")) {
    const auto& t = j.at("training");
    cfg.training.ridge_lambda = t.value("ridge_lambda", cfg.training.ridge_lambda);
    cfg.training.include_bias = t.value("include_bias", cfg.training.include_bias);
    try {
      cfg.training.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  return cfg;
}

inline CampaignConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config_json(j);
}

}  // namespace rcbo
