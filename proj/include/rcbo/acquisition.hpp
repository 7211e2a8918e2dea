#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rcbo/gp.hpp"
#include "rcbo/hyperspace.hpp"
#include "rcbo/rng.hpp"

namespace rcbo {

inline double normal_pdf(double z) {
  return 0.3989422804014326779 * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

struct AcquisitionConfig {
  int candidate_pool_size = 4096;
  int local_refinement_steps = 50;
  double duplicate_tol = 1e-6;
  double exploration_jitter = 0.0;  // xi

  void validate() const {
    if (candidate_pool_size < 1)
      throw std::domain_error("acquisition: pool size must be >= 1");
    if (local_refinement_steps < 0)
      throw std::domain_error("acquisition: refinement steps must be >= 0");
    if (!(duplicate_tol >= 0.0))
      throw std::domain_error("acquisition: duplicate_tol must be >= 0");
    if (!(exploration_jitter >= 0.0))
      throw std::domain_error("acquisition: exploration_jitter must be >= 0");
  }
};

/// Expected improvement under a minimisation convention: the expected amount
/// by which a Normal(mean, sd^2) draw falls below f_best - xi. At sd = 0 this
/// reduces to max(0, f_best - mean - xi).
inline double expected_improvement(double mean, double sd, double f_best,
                                   double xi = 0.0) {
  if (!(sd >= 0.0)) throw std::domain_error("expected_improvement: sd must be >= 0");
  const double gap = f_best - mean - xi;
  if (sd == 0.0) return std::max(0.0, gap);
  const double z = gap / sd;
  const double ei = gap * normal_cdf(z) + sd * normal_pdf(z);
  return std::max(0.0, ei);
}

struct Proposal {
  HyperPoint point{};
  Unit4 unit{};
  double ei = 0.0;
  /// True when every candidate duplicated the history even after widening the
  /// pool; the best-EI candidate is returned regardless and the caller should
  /// log the condition.
  bool duplicate_fallback = false;
};

namespace detail {

inline double ei_at(const GPModel& model, const Unit4& u, double f_best,
                    double xi) {
  const auto [mean, var] = model.predict(u);
  return expected_improvement(mean, std::sqrt(var), f_best, xi);
}

}  // namespace detail

/// Picks the next candidate by maximising expected improvement over a seeded
/// uniform pool on the unit cube, then refining the best non-duplicate
/// candidate with coordinate-wise perturbations. Deterministic given
/// (model, history, rng state).
inline Proposal propose_next(const GPModel& model, const HyperSpace& space,
                             const std::vector<HyperPoint>& history,
                             const AcquisitionConfig& cfg, Rng& rng) {
  cfg.validate();
  if (history.empty())
    throw std::domain_error("propose_next: history must be nonempty");
  const double f_best = model.min_observed();
  const double xi = cfg.exploration_jitter;

  std::vector<Unit4> unit_history;
  unit_history.reserve(history.size());
  for (const auto& h : history) unit_history.push_back(to_unit(space, h));
  auto duplicated = [&](const Unit4& u) {
    for (const auto& h : unit_history) {
      double dist = 0.0;
      for (int d = 0; d < kDims; ++d) dist = std::max(dist, std::abs(u[d] - h[d]));
      if (dist <= cfg.duplicate_tol) return true;
    }
    return false;
  };

  Unit4 best_unit{};
  double best_ei = -1.0;
  Unit4 best_any_unit{};
  double best_any_ei = -1.0;
  bool found = false;

  auto scan_pool = [&](int count) {
    for (int i = 0; i < count; ++i) {
      Unit4 u;
      for (int d = 0; d < kDims; ++d) u[d] = rng.uniform();
      const double ei = detail::ei_at(model, u, f_best, xi);
      if (ei > best_any_ei) {
        best_any_ei = ei;
        best_any_unit = u;
      }
      if (!duplicated(u) && ei > best_ei) {
        best_ei = ei;
        best_unit = u;
        found = true;
      }
    }
  };

  scan_pool(cfg.candidate_pool_size);
  if (!found) scan_pool(2 * cfg.candidate_pool_size);
  if (!found) {
    Proposal p;
    p.unit = best_any_unit;
    p.point = from_unit(space, best_any_unit);
    p.ei = best_any_ei;
    p.duplicate_fallback = true;
    return p;
  }

  // Coordinate-wise hill climb with a shrinking step, accepting only strict
  // in-bounds, non-duplicate improvements.
  double step = 0.05;
  for (int it = 0; it < cfg.local_refinement_steps && step > 1e-5; ++it) {
    bool improved = false;
    for (int d = 0; d < kDims; ++d) {
      for (double dir : {+1.0, -1.0}) {
        Unit4 cand = best_unit;
        cand[d] = std::clamp(cand[d] + dir * step, 0.0, 1.0);
        if (cand[d] == best_unit[d]) continue;
        const double ei = detail::ei_at(model, cand, f_best, xi);
        if (ei > best_ei && !duplicated(cand)) {
          best_ei = ei;
          best_unit = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  Proposal p;
  p.unit = best_unit;
  p.point = from_unit(space, best_unit);
  p.ei = best_ei;
  return p;
}

}  // namespace rcbo
