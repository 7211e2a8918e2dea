#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcbo/campaign.hpp"
#include "rcbo/matrix_io.hpp"

namespace rcbo {

// Observation log, line-delimited:
//   rcbo-observations v1
//   task <label> direction <max|min> seed <u64> budget <int> init <int>
//   space alpha <low> <high> <scale> beta ... gamma ... rho ...
//   columns iteration method alpha beta gamma rho objective wall_time seed
//   <one observation per line; failed evaluations carry objective nan>

inline void write_observation_header(std::ostream& os, const CampaignLog& log) {
  os << "rcbo-observations v1\n";
  os << "task " << log.task << " direction " << to_string(log.direction)
     << " seed " << log.seed << " budget " << log.budget << " init "
     << log.init_count << "\n";
  os << "space";
  for (int d = 0; d < kDims; ++d) {
    const auto& b = log.space.dims[d];
    os << ' ' << kDimNames[d] << ' ' << format_double(b.low) << ' '
       << format_double(b.high) << ' ' << to_string(b.scale);
  }
  os << "\ncolumns iteration method alpha beta gamma rho objective wall_time seed\n";
}

inline void write_observation_line(std::ostream& os, const Observation& obs,
                                   std::uint64_t seed) {
  os << obs.iteration << ' ' << to_string(obs.method) << ' '
     << format_double(obs.point.alpha) << ' ' << format_double(obs.point.beta)
     << ' ' << format_double(obs.point.gamma) << ' '
     << format_double(obs.point.rho) << ' '
     << format_double(obs.ok ? obs.objective
                             : std::numeric_limits<double>::quiet_NaN())
     << ' ' << format_double(obs.wall_time) << ' ' << seed << '\n';
}

inline void write_observations(std::ostream& os, const CampaignLog& log) {
  write_observation_header(os, log);
  for (const auto& obs : log.observations)
    write_observation_line(os, obs, log.seed);
}

inline CampaignLog read_observations(std::istream& is) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "rcbo-observations")
    throw std::runtime_error("not an observation log (bad magic '" + magic + "')");
  if (version != "v1")
    throw std::runtime_error("unsupported observation log version '" + version + "'");

  CampaignLog log;
  std::string key;
  // task/direction/seed/budget/init line
  std::string direction;
  is >> key >> log.task;
  if (key != "task") throw std::runtime_error("observation log: expected 'task'");
  is >> key >> direction;
  if (key != "direction")
    throw std::runtime_error("observation log: expected 'direction'");
  log.direction = direction_from_string(direction);
  std::string seed_token;
  is >> key >> seed_token;
  if (key != "seed") throw std::runtime_error("observation log: expected 'seed'");
  log.seed = parse_u64(seed_token);
  is >> key >> log.budget;
  if (key != "budget") throw std::runtime_error("observation log: expected 'budget'");
  is >> key >> log.init_count;
  if (key != "init") throw std::runtime_error("observation log: expected 'init'");

  is >> key;
  if (key != "space") throw std::runtime_error("observation log: expected 'space'");
  for (int d = 0; d < kDims; ++d) {
    std::string name, low, high, scale;
    if (!(is >> name >> low >> high >> scale))
      throw std::runtime_error("observation log: truncated space line");
    if (name != kDimNames[d])
      throw std::runtime_error("observation log: unexpected dimension '" + name + "'");
    log.space.dims[d] = {parse_double(low), parse_double(high),
                         scale_from_string(scale)};
  }
  log.space.validate();

  is >> key;
  if (key != "columns")
    throw std::runtime_error("observation log: expected 'columns'");
  std::string rest;
  std::getline(is, rest);
  const std::string expected =
      " iteration method alpha beta gamma rho objective wall_time seed";
  if (rest != expected)
    throw std::runtime_error("observation log: unexpected column layout");

  int last_iteration = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Observation obs;
    std::string method, a, b, g, r, objective, wall, seed;
    if (!(ls >> obs.iteration >> method >> a >> b >> g >> r >> objective >>
          wall >> seed))
      throw std::runtime_error("observation log: malformed line '" + line + "'");
    obs.method = method_from_string(method);
    obs.point = {parse_double(a), parse_double(b), parse_double(g),
                 parse_double(r)};
    obs.objective = parse_double(objective);
    obs.ok = std::isfinite(obs.objective);
    obs.wall_time = parse_double(wall);
    if (obs.iteration <= last_iteration)
      throw std::runtime_error("observation log: iteration indices must increase");
    last_iteration = obs.iteration;
    log.observations.push_back(obs);
  }
  return log;
}

inline void write_observations_file(const std::string& path,
                                    const CampaignLog& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_observations(os, log);
}

inline CampaignLog read_observations_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_observations(is);
}

// Surrogate snapshots, one line per refit:
//   rcbo-surrogate v1
//   columns iteration signal_variance ls_alpha ls_beta ls_gamma ls_rho
//           noise_variance lml jitter

inline void write_surrogate(std::ostream& os, const CampaignLog& log) {
  os << "rcbo-surrogate v1\n";
  os << "columns iteration signal_variance ls_alpha ls_beta ls_gamma ls_rho "
        "noise_variance lml jitter\n";
  for (const auto& s : log.snapshots) {
    os << s.iteration << ' ' << format_double(s.params.signal_variance);
    for (int d = 0; d < kDims; ++d)
      os << ' ' << format_double(s.params.length_scales[d]);
    os << ' ' << format_double(s.params.noise_variance) << ' '
       << format_double(s.lml) << ' ' << format_double(s.jitter) << '\n';
  }
}

// Plot-ready running best:
//   rcbo-running-best v1
//   columns iteration best_objective

inline void write_running_best(std::ostream& os, const CampaignLog& log) {
  os << "rcbo-running-best v1\n";
  os << "columns iteration best_objective\n";
  double running = std::numeric_limits<double>::quiet_NaN();
  for (const auto& o : log.observations) {
    if (o.ok && (std::isnan(running) ||
                 detail::is_better(log.direction, o.objective, running)))
      running = o.objective;
    os << o.iteration << ' ' << format_double(running) << '\n';
  }
}

inline nlohmann::json summary_json(const CampaignLog& log) {
  nlohmann::json j;
  j["format"] = "rcbo-summary";
  j["version"] = 1;
  j["task"] = log.task;
  j["direction"] = to_string(log.direction);
  j["seed"] = log.seed;
  j["budget"] = log.budget;
  j["init"] = log.init_count;
  j["evaluations"] = log.observations.size();
  int failures = 0;
  for (const auto& o : log.observations)
    if (!o.ok) ++failures;
  j["failures"] = failures;
  try {
    const Observation& b = best(log);
    j["best"] = {{"iteration", b.iteration},
                 {"method", to_string(b.method)},
                 {"alpha", b.point.alpha},
                 {"beta", b.point.beta},
                 {"gamma", b.point.gamma},
                 {"rho", b.point.rho},
                 {"objective", b.objective}};
    j["iterations_to_within"] = {
        {"0", iterations_to_within(log, 0.0)},
        {"0.013", iterations_to_within(log, 0.013)}};
  } catch (const std::domain_error&) {
    j["best"] = nullptr;
  }
  if (!log.notes.empty()) j["notes"] = log.notes;
  return j;
}

}  // namespace rcbo
