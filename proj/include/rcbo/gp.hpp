#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcbo/detail/nelder_mead.hpp"
#include "rcbo/hyperspace.hpp"
#include "rcbo/rng.hpp"

namespace rcbo {

/// Squared-exponential kernel with one length scale per unit-cube dimension.
struct KernelParams {
  double signal_variance = 1.0;
  std::array<double, kDims> length_scales{1.0, 1.0, 1.0, 1.0};
  double noise_variance = 1e-4;

  void validate() const {
    if (!(signal_variance > 0.0))
      throw std::domain_error("kernel: signal_variance must be > 0");
    for (double l : length_scales)
      if (!(l > 0.0)) throw std::domain_error("kernel: length scales must be > 0");
    if (!(noise_variance >= 0.0))
      throw std::domain_error("kernel: noise_variance must be >= 0");
  }
};

inline double kernel_value(const KernelParams& kp, const Unit4& a,
                           const Unit4& b) {
  double q = 0.0;
  for (int d = 0; d < kDims; ++d) {
    const double t = (a[d] - b[d]) / kp.length_scales[d];
    q += t * t;
  }
  return kp.signal_variance * std::exp(-0.5 * q);
}

struct GpFitConfig {
  int random_starts = 8;        // plus one start at unit length scales
  int max_evals_per_start = 200;
  std::uint64_t seed = 0;
  double noise_floor = 1e-8;    // lower clamp on fitted noise variance
  std::optional<KernelParams> warm_start;  // extra start, e.g. previous fit
};

/// Gaussian-process posterior over the unit cube. Targets are standardised to
/// zero mean / unit variance internally; predictions are mapped back to
/// objective units. The kernel matrix factor includes the fitted noise plus
/// an escalating jitter (1e-10 to 1e-4 times the signal variance).
class GPModel {
 public:
  GPModel(std::vector<Unit4> points, std::vector<double> values,
          KernelParams params)
      : x_(std::move(points)), y_raw_(std::move(values)), params_(params) {
    params_.validate();
    const std::size_t n = x_.size();
    if (n < 1) throw std::domain_error("gp: need at least one observation");
    if (y_raw_.size() != n) throw std::domain_error("gp: point/value mismatch");

    double mean = 0.0;
    for (double v : y_raw_) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y_raw_) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    y_mean_ = mean;
    y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;  // constant-target guard

    y_std_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      y_std_[static_cast<Eigen::Index>(i)] = (y_raw_[i] - y_mean_) / y_scale_;

    Eigen::MatrixXd k(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        k(i, j) = k(j, i) = kernel_value(params_, x_[i], x_[j]);

    jitter_ = 1e-10 * params_.signal_variance;
    const double jitter_cap = 1e-4 * params_.signal_variance;
    while (true) {
      Eigen::MatrixXd k_eff = k;
      k_eff.diagonal().array() += params_.noise_variance + jitter_;
      llt_.compute(k_eff);
      if (llt_.info() == Eigen::Success) break;
      jitter_ *= 10.0;
      if (jitter_ > jitter_cap)
        throw std::runtime_error(
            "gp: kernel matrix not positive definite even at maximum jitter");
    }

    alpha_ = llt_.solve(y_std_);
    double log_det = 0.0;
    const auto& l = llt_.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i));
    lml_ = -0.5 * y_std_.dot(alpha_) - log_det -
           0.5 * static_cast<double>(n) * std::log(2.0 * 3.141592653589793);
  }

  /// Posterior mean and (clamped nonnegative) variance of the latent function
  /// at x, in objective units.
  std::pair<double, double> predict(const Unit4& x) const {
    const Eigen::Index n = y_std_.size();
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i)
      k_star[i] = kernel_value(params_, x_[static_cast<std::size_t>(i)], x);
    const double mean_std = k_star.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
    double var_std = params_.signal_variance - v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;
    return {y_mean_ + y_scale_ * mean_std, y_scale_ * y_scale_ * var_std};
  }

  /// Log marginal likelihood of the standardised targets.
  double log_marginal_likelihood() const { return lml_; }

  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  double prior_variance() const {
    return y_scale_ * y_scale_ * params_.signal_variance;
  }
  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<Unit4>& points() const { return x_; }
  const std::vector<double>& values() const { return y_raw_; }

  double min_observed() const {
    double best = std::numeric_limits<double>::infinity();
    for (double v : y_raw_) best = std::min(best, v);
    return best;
  }

 private:
  std::vector<Unit4> x_;
  std::vector<double> y_raw_;
  Eigen::VectorXd y_std_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  KernelParams params_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

namespace detail {

// Log-parameter vector layout: [log sv, log l0..l3, log nv].
inline constexpr int kGpParams = kDims + 2;
inline constexpr double kLogSvLo = -18.4, kLogSvHi = 9.2;   // ~[1e-8, 1e4]
inline constexpr double kLogLenLo = -6.9, kLogLenHi = 6.9;  // ~[1e-3, 1e3]
inline constexpr double kLogNvHi = 4.6;                     // ~1e2

inline KernelParams params_from_log(const std::vector<double>& theta,
                                    double noise_floor) {
  auto clamp = [](double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
  };
  KernelParams kp;
  kp.signal_variance = std::exp(clamp(theta[0], kLogSvLo, kLogSvHi));
  for (int d = 0; d < kDims; ++d)
    kp.length_scales[d] = std::exp(clamp(theta[1 + d], kLogLenLo, kLogLenHi));
  kp.noise_variance =
      std::exp(clamp(theta[1 + kDims], std::log(noise_floor), kLogNvHi));
  return kp;
}

inline std::vector<double> log_from_params(const KernelParams& kp) {
  std::vector<double> theta(kGpParams);
  theta[0] = std::log(kp.signal_variance);
  for (int d = 0; d < kDims; ++d) theta[1 + d] = std::log(kp.length_scales[d]);
  theta[1 + kDims] = std::log(std::max(kp.noise_variance, 1e-300));
  return theta;
}

/// Negative log marginal likelihood of standardised targets for a candidate
/// parameter set; +1e30 when the factorisation fails at every jitter level.
class LmlObjective {
 public:
  LmlObjective(const std::vector<Unit4>& x, Eigen::VectorXd y_std,
               double noise_floor)
      : x_(x), y_(std::move(y_std)), noise_floor_(noise_floor) {
    const std::size_t n = x_.size();
    for (int d = 0; d < kDims; ++d) {
      dist2_[d].resize(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double t = x_[i][d] - x_[j][d];
          dist2_[d](i, j) = t * t;
        }
    }
  }

  double operator()(const std::vector<double>& theta) const {
    const KernelParams kp = params_from_log(theta, noise_floor_);
    const Eigen::Index n = y_.size();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int d = 0; d < kDims; ++d)
      q += dist2_[d] / (kp.length_scales[d] * kp.length_scales[d]);
    Eigen::MatrixXd k = kp.signal_variance * (-0.5 * q.array()).exp().matrix();

    double jitter = 1e-10 * kp.signal_variance;
    const double cap = 1e-4 * kp.signal_variance;
    Eigen::LLT<Eigen::MatrixXd> llt;
    while (true) {
      Eigen::MatrixXd k_eff = k;
      k_eff.diagonal().array() += kp.noise_variance + jitter;
      llt.compute(k_eff);
      if (llt.info() == Eigen::Success) break;
      jitter *= 10.0;
      if (jitter > cap) return 1e30;
    }
    const Eigen::VectorXd alpha = llt.solve(y_);
    double log_det = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(l(i, i));
    const double lml = -0.5 * y_.dot(alpha) - log_det -
                       0.5 * static_cast<double>(n) * std::log(2.0 * 3.141592653589793);
    return std::isfinite(lml) ? -lml : 1e30;
  }

 private:
  const std::vector<Unit4>& x_;
  Eigen::VectorXd y_;
  double noise_floor_;
  std::array<Eigen::MatrixXd, kDims> dist2_;
};

}  // namespace detail

/// Fits kernel parameters by maximising the log marginal likelihood with a
/// multistart Nelder-Mead search in log-parameter space: one start at unit
/// length scales, an optional warm start, and `random_starts` random starts.
inline GPModel fit(const std::vector<Unit4>& points,
                   const std::vector<double>& values, const GpFitConfig& cfg) {
  if (points.size() < 2)
    throw std::domain_error("gp fit: need at least two observations");
  if (points.size() != values.size())
    throw std::domain_error("gp fit: point/value mismatch");
  bool distinct = false;
  for (std::size_t i = 1; i < points.size() && !distinct; ++i)
    distinct = points[i] != points[0];
  if (!distinct)
    throw std::domain_error("gp fit: need at least two distinct points");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  if (var == 0.0) {
    // Constant targets: nothing to fit; keep the default prior.
    KernelParams kp;
    kp.noise_variance = std::max(1e-6, cfg.noise_floor);
    return GPModel(points, values, kp);
  }

  Eigen::VectorXd y_std(static_cast<Eigen::Index>(values.size()));
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < values.size(); ++i)
    y_std[static_cast<Eigen::Index>(i)] = (values[i] - mean) / sd;

  const detail::LmlObjective objective(points, y_std, cfg.noise_floor);

  std::vector<std::vector<double>> starts;
  {
    KernelParams unit;
    unit.noise_variance = 1e-2;
    starts.push_back(detail::log_from_params(unit));
  }
  if (cfg.warm_start) starts.push_back(detail::log_from_params(*cfg.warm_start));
  Rng rng = Rng::substream(cfg.seed, "gp-fit");
  for (int s = 0; s < cfg.random_starts; ++s) {
    std::vector<double> theta(detail::kGpParams);
    theta[0] = rng.uniform(std::log(0.1), std::log(10.0));
    for (int d = 0; d < kDims; ++d)
      theta[1 + d] = rng.uniform(std::log(0.05), std::log(2.0));
    theta[1 + kDims] = rng.uniform(std::log(1e-6), std::log(1e-1));
    starts.push_back(std::move(theta));
  }

  std::vector<double> best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    auto result =
        detail::nelder_mead(objective, start, 0.5, cfg.max_evals_per_start);
    if (result.value < best_value) {
      best_value = result.value;
      best_theta = std::move(result.x);
    }
  }
  if (!std::isfinite(best_value) || best_value >= 1e30)
    throw std::runtime_error("gp fit: no parameter set factorised");

  return GPModel(points, values,
                 detail::params_from_log(best_theta, cfg.noise_floor));
}

}  // namespace rcbo
