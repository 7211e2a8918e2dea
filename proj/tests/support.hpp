#pragma once

// Shared test helpers: independent reference implementations (oracles) and
// small generators. Oracles are hand-rolled straight-line code so they share
// no solver path with the library.

#include <unistd.h>

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "rcbo/rcbo.hpp"

namespace oracle {

// ---- dense linear algebra via Gauss-Jordan with partial pivoting ----

inline Eigen::MatrixXd dense_solve(Eigen::MatrixXd a, Eigen::MatrixXd b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw std::runtime_error("oracle: singular matrix");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      b.row(pivot).swap(b.row(col));
    }
    const double inv = 1.0 / a(col, col);
    a.row(col) *= inv;
    b.row(col) *= inv;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      a.row(r) -= factor * a.row(col);
      b.row(r) -= factor * b.row(col);
    }
  }
  return b;
}

// log(det A) for a positive-definite A, by forward elimination.
inline double dense_log_det(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  double log_det = 0.0;
  int sign = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) throw std::runtime_error("oracle: singular matrix");
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      sign = -sign;
    }
    log_det += std::log(std::abs(a(col, col)));
    if (a(col, col) < 0.0) sign = -sign;
    for (int r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      a.row(r) -= factor * a.row(col);
    }
  }
  if (sign < 0) throw std::runtime_error("oracle: negative determinant");
  return log_det;
}

// ---- reservoir transfer function, straight-line re-implementation ----

inline double reference_nonlinearity_scalar(double x,
                                            const rcbo::ReservoirConfig& cfg) {
  const double two_pi = 6.283185307179586476925286766559;
  if (!cfg.quantisation_enabled) {
    const double s = std::sin(x);
    return cfg.i0 * s * s;
  }
  const double in_levels = std::ldexp(1.0, cfg.quant_in_bits);
  const double width = two_pi / in_levels;
  double xc = x;
  if (xc < 0.0) xc = 0.0;
  if (xc > two_pi) xc = two_pi;
  double idx = std::floor(xc / width + 0.5);
  if (idx > in_levels - 1.0) idx = in_levels - 1.0;
  const double phase = idx * width;
  const double s = std::sin(phase);
  const double y = cfg.i0 * s * s;

  const double out_levels = std::ldexp(1.0, cfg.quant_out_bits);
  double rel = y / cfg.i0;
  if (rel < 0.0) rel = 0.0;
  if (rel > 1.0) rel = 1.0;
  double oidx = std::floor(rel * out_levels);
  if (oidx > out_levels - 1.0) oidx = out_levels - 1.0;
  return cfg.i0 * oidx / out_levels;
}

// Naive full-loop reservoir step over a dense interconnection matrix.
inline Eigen::VectorXd reference_step(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u,
                                      const Eigen::MatrixXd& w_dense,
                                      const Eigen::MatrixXd& mask,
                                      const rcbo::ReservoirConfig& cfg) {
  Eigen::VectorXd next(cfg.n_nodes);
  for (int i = 0; i < cfg.n_nodes; ++i) {
    double acc = 0.0;
    for (int j = 0; j < cfg.n_nodes; ++j) acc += w_dense(i, j) * x[j];
    for (int k = 0; k < cfg.n_inputs; ++k) acc += mask(i, k) * u[k];
    next[i] = reference_nonlinearity_scalar(acc, cfg);
  }
  return next;
}

// ---- Gaussian-process posterior via the dense route ----

struct GpOracleResult {
  double mean = 0.0;
  double variance = 0.0;
  double lml = 0.0;
};

inline double kernel_ref(const rcbo::KernelParams& kp, const rcbo::Unit4& a,
                         const rcbo::Unit4& b) {
  double q = 0.0;
  for (int d = 0; d < rcbo::kDims; ++d) {
    const double t = (a[d] - b[d]) / kp.length_scales[d];
    q += t * t;
  }
  return kp.signal_variance * std::exp(-0.5 * q);
}

inline GpOracleResult gp_oracle(const std::vector<rcbo::Unit4>& points,
                                const std::vector<double>& values,
                                const rcbo::KernelParams& kp, double jitter,
                                const rcbo::Unit4& x) {
  const int n = static_cast<int>(points.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  const double scale = var > 0.0 ? std::sqrt(var) : 1.0;

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = (values[i] - mean) / scale;

  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = kernel_ref(kp, points[i], points[j]);
  k.diagonal().array() += kp.noise_variance + jitter;

  const Eigen::VectorXd alpha = dense_solve(k, y);
  Eigen::VectorXd k_star(n);
  for (int i = 0; i < n; ++i) k_star[i] = kernel_ref(kp, points[i], x);
  const Eigen::VectorXd z = dense_solve(k, k_star);

  GpOracleResult r;
  r.mean = mean + scale * k_star.dot(alpha);
  double var_std = kp.signal_variance - k_star.dot(z);
  if (var_std < 0.0) var_std = 0.0;
  r.variance = scale * scale * var_std;
  r.lml = -0.5 * y.dot(alpha) - 0.5 * dense_log_det(k) -
          0.5 * n * std::log(2.0 * 3.141592653589793);
  return r;
}

// ---- Monte-Carlo expected improvement (minimisation convention) ----

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline McEstimate mc_expected_improvement(double mean, double sd, double f_best,
                                          double xi, int samples,
                                          std::uint64_t seed) {
  rcbo::Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double y = mean + sd * rng.normal();
    const double improvement = std::max(0.0, f_best - y - xi);
    sum += improvement;
    sum_sq += improvement * improvement;
  }
  McEstimate est;
  est.mean = sum / samples;
  const double sample_var =
      std::max(0.0, sum_sq / samples - est.mean * est.mean);
  est.standard_error = std::sqrt(sample_var / samples);
  return est;
}

}  // namespace oracle

namespace testgen {

inline rcbo::Unit4 unit_point(rcbo::Rng& rng) {
  rcbo::Unit4 u;
  for (int d = 0; d < rcbo::kDims; ++d) u[d] = rng.uniform();
  return u;
}

inline rcbo::HyperPoint point_in(const rcbo::HyperSpace& space, rcbo::Rng& rng) {
  return rcbo::from_unit(space, unit_point(rng));
}

inline bool close(double a, double b, double rel, double abs_tol = 1e-12) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_tol;
}

inline std::string describe(double a, double b) {
  std::ostringstream s;
  s << rcbo::format_double(a) << " vs " << rcbo::format_double(b);
  return s.str();
}

/// Unique scratch directory under the working directory, removed on scope
/// exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::absolute("tmp_" + tag + "_" +
                                      std::to_string(::getpid()) + "_" +
                                      std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path_.string() : (path_ / child).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testgen
