#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcbo {

inline constexpr int kDims = 4;
inline constexpr std::array<const char*, kDims> kDimNames = {"alpha", "beta",
                                                             "gamma", "rho"};

/// One setting of the four reservoir hyper-parameters.
struct HyperPoint {
  double alpha = 0.0;  // feedback gain (diagonal of W)
  double beta = 0.0;   // input gain (mask scaling)
  double gamma = 0.0;  // interconnection gain (off-diagonal value)
  double rho = 0.0;    // interconnection density, fraction in [0, 1]

  std::array<double, kDims> to_array() const { return {alpha, beta, gamma, rho}; }

  static HyperPoint from_array(const std::array<double, kDims>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
};

/// Point in the normalized [0,1]^4 search cube.
using Unit4 = std::array<double, kDims>;

enum class Scale { linear, log10 };

inline const char* to_string(Scale s) {
  return s == Scale::linear ? "linear" : "log10";
}

inline Scale scale_from_string(const std::string& s) {
  if (s == "linear") return Scale::linear;
  if (s == "log10") return Scale::log10;
  throw std::domain_error("unknown scale tag '" + s + "'");
}

struct DimensionBounds {
  double low = 0.0;
  double high = 1.0;
  Scale scale = Scale::linear;
};

/// The 4-dimensional search domain with per-dimension bounds and scale tags.
struct HyperSpace {
  std::array<DimensionBounds, kDims> dims;

  /// Default search box: alpha in [0.1, 1.5] on a linear scale, the other
  /// three spanning [1e-10, 1] on a log10 scale.
  static HyperSpace defaults() {
    HyperSpace s;
    s.dims[0] = {0.1, 1.5, Scale::linear};
    s.dims[1] = {1e-10, 1.0, Scale::log10};
    s.dims[2] = {1e-10, 1.0, Scale::log10};
    s.dims[3] = {1e-10, 1.0, Scale::log10};
    return s;
  }

  void validate() const {
    for (int d = 0; d < kDims; ++d) {
      if (!(dims[d].low < dims[d].high))
        throw std::domain_error(std::string("hyperspace: ") + kDimNames[d] +
                                " requires low < high");
      if (dims[d].scale == Scale::log10 && !(dims[d].low > 0.0))
        throw std::domain_error(std::string("hyperspace: log-scaled ") +
                                kDimNames[d] + " requires low > 0");
    }
  }
};

namespace detail {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline double to_unit_coord(const DimensionBounds& b, double v) {
  if (b.scale == Scale::linear) return clamp01((v - b.low) / (b.high - b.low));
  const double lo = std::log10(b.low);
  const double hi = std::log10(b.high);
  return clamp01((std::log10(v) - lo) / (hi - lo));
}

inline double from_unit_coord(const DimensionBounds& b, double u) {
  if (u == 0.0) return b.low;
  if (u == 1.0) return b.high;
  double v;
  if (b.scale == Scale::linear) {
    v = b.low + u * (b.high - b.low);
  } else {
    const double lo = std::log10(b.low);
    const double hi = std::log10(b.high);
    v = std::pow(10.0, lo + u * (hi - lo));
  }
  // Snap roundoff back into the box so round-trips stay in-bounds.
  if (v < b.low) v = b.low;
  if (v > b.high) v = b.high;
  return v;
}

}  // namespace detail

/// Maps an in-bounds point to the unit cube; log-scaled dimensions are mapped
/// affinely in log10 space so one kernel length-scale regime covers values
/// spanning ten decades.
inline Unit4 to_unit(const HyperSpace& space, const HyperPoint& p) {
  const auto coords = p.to_array();
  Unit4 u{};
  for (int d = 0; d < kDims; ++d) {
    const auto& b = space.dims[d];
    if (!(coords[d] >= b.low && coords[d] <= b.high)) {
      std::ostringstream msg;
      msg << "hyperpoint out of bounds: " << kDimNames[d] << "=" << coords[d]
          << " outside [" << b.low << ", " << b.high << "]";
      throw std::domain_error(msg.str());
    }
    u[d] = detail::to_unit_coord(b, coords[d]);
  }
  return u;
}

/// Exact inverse of to_unit (to 1e-12 relative); unit coordinates must lie in
/// [0, 1].
inline HyperPoint from_unit(const HyperSpace& space, const Unit4& u) {
  std::array<double, kDims> coords{};
  for (int d = 0; d < kDims; ++d) {
    if (!(u[d] >= 0.0 && u[d] <= 1.0)) {
      std::ostringstream msg;
      msg << "unit coordinate out of range: " << kDimNames[d] << "=" << u[d];
      throw std::domain_error(msg.str());
    }
    coords[d] = detail::from_unit_coord(space.dims[d], u[d]);
  }
  return HyperPoint::from_array(coords);
}

/// Explicit per-dimension value lists for exhaustive search.
struct GridSpec {
  std::array<std::vector<double>, kDims> values;

  /// Coarse default grid: 3 x 2 x 3 x 3 = 54 combinations.
  static GridSpec defaults() {
    GridSpec g;
    g.values[0] = {0.6, 0.8, 1.0};
    g.values[1] = {0.01, 0.1};
    g.values[2] = {0.001, 0.01, 0.1};
    g.values[3] = {0.001, 0.01, 0.1};
    return g;
  }

  void validate(const HyperSpace& space) const {
    for (int d = 0; d < kDims; ++d) {
      if (values[d].empty())
        throw std::domain_error(std::string("grid: empty value list for ") +
                                kDimNames[d]);
      for (double v : values[d]) {
        if (!(v >= space.dims[d].low && v <= space.dims[d].high)) {
          std::ostringstream msg;
          msg << "grid: value " << v << " for " << kDimNames[d]
              << " outside bounds";
          throw std::domain_error(msg.str());
        }
      }
    }
  }
};

/// Cartesian product of the grid lists in row-major order over
/// (alpha, beta, gamma, rho); rho varies fastest.
inline std::vector<HyperPoint> grid_points(const HyperSpace& space,
                                           const GridSpec& grid) {
  grid.validate(space);
  std::vector<HyperPoint> out;
  out.reserve(grid.values[0].size() * grid.values[1].size() *
              grid.values[2].size() * grid.values[3].size());
  for (double a : grid.values[0])
    for (double b : grid.values[1])
      for (double g : grid.values[2])
        for (double r : grid.values[3]) out.push_back({a, b, g, r});
  return out;
}

/// True iff some historical point lies within `tol` of `p` in the unit-cube
/// infinity norm. Scale-free duplicate detection for the acquisition loop.
inline bool is_duplicate(const HyperSpace& space, const HyperPoint& p,
                         const std::vector<HyperPoint>& history, double tol) {
  if (!(tol >= 0.0)) throw std::domain_error("duplicate tolerance must be >= 0");
  const Unit4 up = to_unit(space, p);
  for (const auto& h : history) {
    const Unit4 uh = to_unit(space, h);
    double dist = 0.0;
    for (int d = 0; d < kDims; ++d)
      dist = std::max(dist, std::abs(up[d] - uh[d]));
    if (dist <= tol) return true;
  }
  return false;
}

}  // namespace rcbo
