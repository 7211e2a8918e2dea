#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rcbo/acquisition.hpp"
#include "rcbo/gp.hpp"
#include "rcbo/hyperspace.hpp"
#include "rcbo/rng.hpp"

namespace rcbo {

enum class Method { initial, bayes, grid };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::initial: return "initial";
    case Method::bayes: return "bayes";
    case Method::grid: return "grid";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  if (s == "initial") return Method::initial;
  if (s == "bayes") return Method::bayes;
  if (s == "grid") return Method::grid;
  throw std::domain_error("unknown method tag '" + s + "'");
}

enum class Direction { maximize, minimize };

inline const char* to_string(Direction d) {
  return d == Direction::maximize ? "max" : "min";
}

inline Direction direction_from_string(const std::string& s) {
  if (s == "max") return Direction::maximize;
  if (s == "min") return Direction::minimize;
  throw std::domain_error("unknown direction tag '" + s + "'");
}

struct Observation {
  int iteration = 0;  // 1-based, strictly increasing within a log
  Method method = Method::initial;
  HyperPoint point{};
  double objective = std::numeric_limits<double>::quiet_NaN();
  bool ok = true;  // false when the evaluator failed; objective is NaN
  double wall_time = 0.0;  // seconds
};

struct SurrogateSnapshot {
  int iteration = 0;  // iteration whose proposal this model produced
  KernelParams params;
  double lml = 0.0;
  double jitter = 0.0;
};

struct CampaignLog {
  int version = 1;
  std::string task;  // short descriptor, no spaces
  Direction direction = Direction::maximize;
  HyperSpace space = HyperSpace::defaults();
  std::uint64_t seed = 0;
  int budget = 0;
  int init_count = 0;
  std::vector<Observation> observations;
  std::vector<SurrogateSnapshot> snapshots;
  std::vector<std::string> notes;
};

using ObjectiveFn = std::function<double(const HyperPoint&)>;
using ObservationCallback = std::function<void(const Observation&)>;

/// Starting design: count-1 unit-cube corners chosen by greedy maximin from
/// the all-low corner (seeded tie-breaking), plus the cube center. Counts
/// beyond the 16 corners fall back to seeded uniform fill.
inline std::vector<HyperPoint> initial_design(const HyperSpace& space,
                                              int count, Rng& rng) {
  if (count < 2) throw std::domain_error("initial_design: count must be >= 2");
  const int corner_total = 1 << kDims;

  std::vector<Unit4> corners(corner_total);
  for (int mask = 0; mask < corner_total; ++mask)
    for (int d = 0; d < kDims; ++d)
      corners[mask][d] = (mask >> d) & 1 ? 1.0 : 0.0;

  auto dist2 = [](const Unit4& a, const Unit4& b) {
    double s = 0.0;
    for (int d = 0; d < kDims; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
  };

  std::vector<Unit4> chosen;
  std::vector<bool> used(corner_total, false);
  chosen.push_back(corners[0]);  // all-low corner
  used[0] = true;
  const int corner_goal = std::min(count - 1, corner_total);
  while (static_cast<int>(chosen.size()) < corner_goal) {
    double best_score = -1.0;
    std::vector<int> ties;
    for (int i = 0; i < corner_total; ++i) {
      if (used[i]) continue;
      double score = std::numeric_limits<double>::infinity();
      for (const auto& c : chosen) score = std::min(score, dist2(corners[i], c));
      if (score > best_score) {
        best_score = score;
        ties.assign(1, i);
      } else if (score == best_score) {
        ties.push_back(i);
      }
    }
    const int pick = ties[static_cast<std::size_t>(rng.below(ties.size()))];
    used[pick] = true;
    chosen.push_back(corners[pick]);
  }

  chosen.push_back(Unit4{0.5, 0.5, 0.5, 0.5});

  while (static_cast<int>(chosen.size()) < count) {
    Unit4 u;
    for (int d = 0; d < kDims; ++d) u[d] = rng.uniform();
    bool clash = false;
    for (const auto& c : chosen) {
      double dist = 0.0;
      for (int d = 0; d < kDims; ++d) dist = std::max(dist, std::abs(u[d] - c[d]));
      if (dist <= 1e-6) {
        clash = true;
        break;
      }
    }
    if (!clash) chosen.push_back(u);
  }

  std::vector<HyperPoint> out;
  out.reserve(chosen.size());
  for (const auto& u : chosen) out.push_back(from_unit(space, u));
  return out;
}

struct BayesOptions {
  int budget = 20;
  int init_count = 8;
  std::uint64_t seed = 0;
  Direction direction = Direction::maximize;
  AcquisitionConfig acquisition{};
  GpFitConfig gp{};
  std::optional<double> target;  // stop once the running best reaches this
  std::optional<int> patience;   // stop after this many non-improving steps
  std::string task_label = "objective";
  /// Above this many observations the per-iteration refit warm-starts from
  /// the previous kernel parameters with fewer random restarts.
  int warm_start_threshold = 40;
  ObservationCallback on_observation;
};

namespace detail {

inline double to_minimise(Direction dir, double objective) {
  return dir == Direction::maximize ? -objective : objective;
}

inline bool is_better(Direction dir, double candidate, double incumbent) {
  return dir == Direction::maximize ? candidate > incumbent
                                    : candidate < incumbent;
}

inline Observation evaluate_point(const ObjectiveFn& objective,
                                  const HyperPoint& p, int iteration,
                                  Method method) {
  Observation obs;
  obs.iteration = iteration;
  obs.method = method;
  obs.point = p;
  const auto start = std::chrono::steady_clock::now();
  try {
    obs.objective = objective(p);
    obs.ok = std::isfinite(obs.objective);
  } catch (const std::exception&) {
    obs.ok = false;
  }
  if (!obs.ok) obs.objective = std::numeric_limits<double>::quiet_NaN();
  obs.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return obs;
}

}  // namespace detail

/// Sequential model-based search: evaluate the initial design, then loop
/// fit -> propose -> evaluate until the budget is exhausted (or an optional
/// early stop triggers). Failed evaluations are logged and excluded from the
/// surrogate. Fully deterministic given (objective, options).
inline CampaignLog run_bayesian(const ObjectiveFn& objective,
                                const HyperSpace& space,
                                const BayesOptions& opts) {
  space.validate();
  if (opts.init_count < 2)
    throw std::domain_error("run_bayesian: init_count must be >= 2");
  if (opts.budget < opts.init_count)
    throw std::domain_error("run_bayesian: budget must be >= init_count");

  CampaignLog log;
  log.task = opts.task_label;
  log.direction = opts.direction;
  log.space = space;
  log.seed = opts.seed;
  log.budget = opts.budget;
  log.init_count = opts.init_count;

  auto record = [&](Observation obs) {
    log.observations.push_back(obs);
    if (opts.on_observation) opts.on_observation(obs);
  };

  Rng design_rng = Rng::substream(opts.seed, "design");
  const auto design = initial_design(space, opts.init_count, design_rng);

  double best = std::numeric_limits<double>::quiet_NaN();
  int since_improvement = 0;
  auto note_result = [&](const Observation& obs) {
    if (!obs.ok) return false;
    if (std::isnan(best) || detail::is_better(opts.direction, obs.objective, best)) {
      best = obs.objective;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    return opts.target && !std::isnan(best) &&
           !detail::is_better(opts.direction, *opts.target, best);
  };

  bool stop = false;
  int iteration = 0;
  for (const auto& p : design) {
    if (iteration >= opts.budget || stop) break;
    const Observation obs =
        detail::evaluate_point(objective, p, ++iteration, Method::initial);
    record(obs);
    stop = note_result(obs);
  }

  std::vector<HyperPoint> history;
  for (const auto& o : log.observations) history.push_back(o.point);

  std::optional<KernelParams> previous_params;
  while (iteration < opts.budget && !stop) {
    std::vector<Unit4> xs;
    std::vector<double> ys;
    for (const auto& o : log.observations) {
      if (!o.ok) continue;
      xs.push_back(to_unit(space, o.point));
      ys.push_back(detail::to_minimise(opts.direction, o.objective));
    }
    bool distinct = false;
    for (std::size_t i = 1; i < xs.size() && !distinct; ++i)
      distinct = xs[i] != xs[0];

    HyperPoint next;
    const int upcoming = iteration + 1;
    if (xs.size() >= 2 && distinct) {
      GpFitConfig fit_cfg = opts.gp;
      fit_cfg.seed = mix64(opts.seed ^ fnv1a64("fit")) + static_cast<std::uint64_t>(upcoming);
      if (previous_params &&
          static_cast<int>(xs.size()) > opts.warm_start_threshold) {
        fit_cfg.warm_start = previous_params;
        fit_cfg.random_starts = 2;
      }
      const GPModel model = fit(xs, ys, fit_cfg);
      previous_params = model.params();
      log.snapshots.push_back({upcoming, model.params(),
                               model.log_marginal_likelihood(), model.jitter()});
      Rng acq_rng = Rng::substream(opts.seed, "acquire",
                                   static_cast<std::uint64_t>(upcoming));
      const Proposal proposal =
          propose_next(model, space, history, opts.acquisition, acq_rng);
      if (proposal.duplicate_fallback) {
        log.notes.push_back("iteration " + std::to_string(upcoming) +
                            ": all candidates duplicated history; "
                            "best-EI candidate used anyway");
      }
      next = proposal.point;
    } else {
      // Not enough usable observations for a surrogate; draw a fresh point.
      Rng fb_rng = Rng::substream(opts.seed, "fallback",
                                  static_cast<std::uint64_t>(upcoming));
      Unit4 u;
      for (int attempt = 0; attempt < 256; ++attempt) {
        for (int d = 0; d < kDims; ++d) u[d] = fb_rng.uniform();
        if (!is_duplicate(space, from_unit(space, u), history,
                          opts.acquisition.duplicate_tol))
          break;
      }
      next = from_unit(space, u);
      log.notes.push_back("iteration " + std::to_string(upcoming) +
                          ": surrogate unavailable, random point used");
    }

    const Observation obs =
        detail::evaluate_point(objective, next, ++iteration, Method::bayes);
    record(obs);
    history.push_back(obs.point);
    stop = note_result(obs);
    if (opts.patience && since_improvement >= *opts.patience) stop = true;
  }

  return log;
}

struct GridOptions {
  std::uint64_t seed = 0;  // recorded in the log; the sweep itself is exact
  Direction direction = Direction::maximize;
  int workers = 1;
  std::string task_label = "objective";
  ObservationCallback on_observation;
};

/// Exhaustive sweep over the grid in its documented row-major order. Points
/// may be evaluated by several workers; the log order stays the grid order.
inline CampaignLog run_grid(const ObjectiveFn& objective,
                            const HyperSpace& space, const GridSpec& grid,
                            const GridOptions& opts) {
  space.validate();
  const auto points = grid_points(space, grid);

  CampaignLog log;
  log.task = opts.task_label;
  log.direction = opts.direction;
  log.space = space;
  log.seed = opts.seed;
  log.budget = static_cast<int>(points.size());
  log.init_count = 0;

  std::vector<Observation> results(points.size());
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i)
      results[i] = detail::evaluate_point(objective, points[i],
                                          static_cast<int>(i) + 1, Method::grid);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < points.size(); i += workers)
          results[i] = detail::evaluate_point(
              objective, points[i], static_cast<int>(i) + 1, Method::grid);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& obs : results) {
    log.observations.push_back(obs);
    if (opts.on_observation) opts.on_observation(obs);
  }
  return log;
}

/// Observation with the best objective (direction-aware); earliest iteration
/// wins ties. Requires at least one successful observation.
inline const Observation& best(const CampaignLog& log) {
  const Observation* found = nullptr;
  for (const auto& o : log.observations) {
    if (!o.ok) continue;
    if (!found || detail::is_better(log.direction, o.objective, found->objective))
      found = &o;
  }
  if (!found)
    throw std::domain_error("best: log has no successful observation");
  return *found;
}

struct DimensionSensitivity {
  double min_u = 0.0;
  double max_u = 0.0;
  double spread = 0.0;
  enum class Flag { sensitive, indeterminate, insensitive } flag =
      Flag::indeterminate;
};

struct SensitivityReport {
  std::array<DimensionSensitivity, kDims> dims;
  int top_count = 0;
};

inline constexpr double kInsensitiveSpread = 0.8;
inline constexpr double kSensitiveSpread = 0.2;

/// Among the top `top_fraction` successful observations by objective, the
/// per-dimension unit-coordinate range. A dimension whose top values spread
/// across most of [0, 1] clearly does not need tuning; one pinned to a narrow
/// band does.
inline SensitivityReport sensitivity_report(const CampaignLog& log,
                                            double top_fraction) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw std::domain_error("sensitivity: top_fraction must be in (0, 1]");
  std::vector<const Observation*> ok;
  for (const auto& o : log.observations)
    if (o.ok) ok.push_back(&o);
  if (ok.size() < 10)
    throw std::domain_error("sensitivity: need at least 10 observations");

  std::stable_sort(ok.begin(), ok.end(),
                   [&](const Observation* a, const Observation* b) {
                     return detail::is_better(log.direction, a->objective,
                                              b->objective);
                   });
  const int top = std::max(
      1, std::min(static_cast<int>(ok.size()),
                  static_cast<int>(std::floor(top_fraction * ok.size() + 1e-9))));

  SensitivityReport report;
  report.top_count = top;
  for (int d = 0; d < kDims; ++d) {
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < top; ++i) {
      const Unit4 u = to_unit(log.space, ok[i]->point);
      lo = std::min(lo, u[d]);
      hi = std::max(hi, u[d]);
    }
    auto& dim = report.dims[d];
    dim.min_u = lo;
    dim.max_u = hi;
    dim.spread = hi - lo;
    dim.flag = dim.spread >= kInsensitiveSpread
                   ? DimensionSensitivity::Flag::insensitive
                   : (dim.spread <= kSensitiveSpread
                          ? DimensionSensitivity::Flag::sensitive
                          : DimensionSensitivity::Flag::indeterminate);
  }
  return report;
}

/// Smallest iteration index whose running best is within `slack` (absolute,
/// objective units) of the final best.
inline int iterations_to_within(const CampaignLog& log, double slack) {
  if (!(slack >= 0.0))
    throw std::domain_error("iterations_to_within: slack must be >= 0");
  const double final_best = best(log).objective;
  double running = std::numeric_limits<double>::quiet_NaN();
  for (const auto& o : log.observations) {
    if (!o.ok) continue;
    if (std::isnan(running) ||
        detail::is_better(log.direction, o.objective, running))
      running = o.objective;
    if (std::abs(final_best - running) <= slack) return o.iteration;
  }
  throw std::domain_error("iterations_to_within: no successful observation");
}

}  // namespace rcbo
