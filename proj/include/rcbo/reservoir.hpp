#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rcbo/hyperspace.hpp"
#include "rcbo/rng.hpp"

namespace rcbo {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Simulated photonic reservoir: N nodes driven through a quantised sin^2
/// transfer function, with a random input mask and a sparse random
/// interconnection matrix.
struct ReservoirConfig {
  int n_nodes = 64;    // N
  int n_inputs = 1;    // K
  HyperPoint point{0.8, 0.1, 0.01, 0.01};
  double i0 = 1.0;     // normalized illumination intensity
  int quant_in_bits = 8;    // phase modulator depth
  int quant_out_bits = 10;  // camera depth
  bool quantisation_enabled = true;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (n_nodes < 1) throw std::domain_error("reservoir: n_nodes must be >= 1");
    if (n_inputs < 1) throw std::domain_error("reservoir: n_inputs must be >= 1");
    if (!(i0 > 0.0)) throw std::domain_error("reservoir: i0 must be > 0");
    if (quant_in_bits < 1 || quant_out_bits < 1)
      throw std::domain_error("reservoir: bit depths must be >= 1");
  }
};

using ReservoirState = Eigen::VectorXd;
using InputMask = Eigen::MatrixXd;  // N x K, entries in [-beta, +beta]

enum class WStorage { automatic, sparse, dense };

/// N x N interconnection matrix: diagonal = alpha (feedback), a fraction rho
/// of the off-diagonal entries = gamma, the rest zero. Stored sparse
/// (row-compressed) when rho <= 1/8, dense otherwise; both applications
/// accumulate row terms in ascending column order so they agree bit-for-bit
/// on the nonnegative state vectors the reservoir produces.
class InterconnectionMatrix {
 public:
  int size() const { return n_; }
  bool sparse_storage() const { return sparse_; }
  double diagonal_value() const { return alpha_; }
  double offdiagonal_value() const { return gamma_; }

  /// Realized fraction of nonzero off-diagonal entries.
  double density() const {
    const double off = static_cast<double>(n_) * (n_ - 1);
    return off == 0.0 ? 0.0 : static_cast<double>(nnz_off_) / off;
  }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    if (x.size() != n_) throw std::domain_error("W apply: state size mismatch");
    out.resize(n_);
    if (sparse_) {
      for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
          acc += vals_[k] * x[cols_[k]];
        out[i] = acc;
      }
    } else {
      for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += dense_(i, j) * x[j];
        out[i] = acc;
      }
    }
  }

  Eigen::MatrixXd dense() const {
    if (!sparse_) return dense_;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        m(i, cols_[k]) = vals_[k];
    return m;
  }

  static InterconnectionMatrix from_entries(int n, double alpha, double gamma,
                                            const std::vector<std::vector<int>>& offdiag_cols,
                                            WStorage storage) {
    InterconnectionMatrix w;
    w.n_ = n;
    w.alpha_ = alpha;
    w.gamma_ = gamma;
    std::size_t nnz_off = 0;
    for (const auto& row : offdiag_cols) nnz_off += row.size();
    w.nnz_off_ = nnz_off;
    const double per_row = n > 0 ? static_cast<double>(nnz_off) / n : 0.0;
    const bool use_sparse = storage == WStorage::automatic
                                ? per_row <= static_cast<double>(n) / 8.0
                                : storage == WStorage::sparse;
    w.sparse_ = use_sparse;
    if (use_sparse) {
      w.row_ptr_.assign(n + 1, 0);
      w.cols_.reserve(nnz_off + n);
      w.vals_.reserve(nnz_off + n);
      for (int i = 0; i < n; ++i) {
        w.row_ptr_[i] = static_cast<int>(w.cols_.size());
        bool diag_done = false;
        for (int j : offdiag_cols[i]) {
          if (!diag_done && j > i) {
            w.cols_.push_back(i);
            w.vals_.push_back(alpha);
            diag_done = true;
          }
          w.cols_.push_back(j);
          w.vals_.push_back(gamma);
        }
        if (!diag_done) {
          w.cols_.push_back(i);
          w.vals_.push_back(alpha);
        }
      }
      w.row_ptr_[n] = static_cast<int>(w.cols_.size());
    } else {
      w.dense_ = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        w.dense_(i, i) = alpha;
        for (int j : offdiag_cols[i]) w.dense_(i, j) = gamma;
      }
    }
    return w;
  }

 private:
  int n_ = 0;
  double alpha_ = 0.0;
  double gamma_ = 0.0;
  std::size_t nnz_off_ = 0;
  bool sparse_ = true;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
  Eigen::MatrixXd dense_;
};

/// Input mask entries are i.i.d. uniform on [-1, 1] from the "input-mask"
/// substream of the config seed, then scaled by beta. Deterministic per seed.
inline InputMask generate_input_mask(const ReservoirConfig& cfg) {
  cfg.validate();
  Rng rng = Rng::substream(cfg.rng_seed, "input-mask");
  InputMask b(cfg.n_nodes, cfg.n_inputs);
  for (int i = 0; i < cfg.n_nodes; ++i)
    for (int k = 0; k < cfg.n_inputs; ++k)
      b(i, k) = cfg.point.beta * rng.uniform(-1.0, 1.0);
  return b;
}

/// Each off-diagonal entry is set to gamma independently with probability rho
/// from the "interconnection" substream; diagonal entries all equal alpha.
/// The draw sequence is fixed (row-major over off-diagonal entries), so the
/// realized sparsity pattern is independent of the storage choice.
inline InterconnectionMatrix generate_interconnection(
    const ReservoirConfig& cfg, WStorage storage = WStorage::automatic) {
  cfg.validate();
  Rng rng = Rng::substream(cfg.rng_seed, "interconnection");
  const int n = cfg.n_nodes;
  std::vector<std::vector<int>> offdiag(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform() < cfg.point.rho) offdiag[i].push_back(j);
    }
  if (storage == WStorage::automatic) {
    // rho * N expected nonzeros per row; keep sparse up to N/8 of them.
    storage = cfg.point.rho <= 0.125 ? WStorage::sparse : WStorage::dense;
  }
  return InterconnectionMatrix::from_entries(n, cfg.point.alpha,
                                             cfg.point.gamma, offdiag, storage);
}

namespace detail {

/// Phase quantiser: clamp to [0, 2*pi), snap to the nearest of 2^bits levels.
inline double quantise_phase(double x, int bits) {
  const double levels = std::ldexp(1.0, bits);
  const double width = kTwoPi / levels;
  double xc = x < 0.0 ? 0.0 : x;
  if (xc > kTwoPi) xc = kTwoPi;
  double idx = std::floor(xc / width + 0.5);
  if (idx > levels - 1.0) idx = levels - 1.0;
  return idx * width;
}

/// Intensity quantiser: truncate y/i0 onto 2^bits levels over [0, 1].
inline double quantise_intensity(double y, double i0, int bits) {
  const double levels = std::ldexp(1.0, bits);
  double rel = y / i0;
  if (rel < 0.0) rel = 0.0;
  if (rel > 1.0) rel = 1.0;
  double idx = std::floor(rel * levels);
  if (idx > levels - 1.0) idx = levels - 1.0;
  return i0 * idx / levels;
}

}  // namespace detail

/// Elementwise transfer function: i0 * sin^2 of the (quantised) pre-activation,
/// then quantised to the camera lattice. With quantisation disabled both
/// quantisers are identities.
inline ReservoirState nonlinearity(const Eigen::VectorXd& pre,
                                   const ReservoirConfig& cfg) {
  ReservoirState out(pre.size());
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    const double x = pre[i];
    if (!std::isfinite(x))
      throw std::runtime_error("nonlinearity: non-finite pre-activation");
    if (cfg.quantisation_enabled) {
      const double phase = detail::quantise_phase(x, cfg.quant_in_bits);
      const double s = std::sin(phase);
      out[i] = detail::quantise_intensity(cfg.i0 * s * s, cfg.i0,
                                          cfg.quant_out_bits);
    } else {
      const double s = std::sin(x);
      out[i] = cfg.i0 * s * s;
    }
  }
  return out;
}

/// One reservoir update: f_nl(W x + b u). The mask product accumulates in
/// ascending input order, matching a naive loop evaluation exactly.
inline ReservoirState step(const ReservoirState& x, const Eigen::VectorXd& u,
                           const InterconnectionMatrix& w, const InputMask& b,
                           const ReservoirConfig& cfg) {
  if (x.size() != cfg.n_nodes || b.rows() != cfg.n_nodes ||
      b.cols() != cfg.n_inputs || u.size() != cfg.n_inputs ||
      w.size() != cfg.n_nodes)
    throw std::domain_error("step: shape mismatch");
  Eigen::VectorXd pre;
  w.apply(x, pre);
  for (int i = 0; i < cfg.n_nodes; ++i) {
    double acc = pre[i];
    for (int k = 0; k < cfg.n_inputs; ++k) acc += b(i, k) * u[k];
    pre[i] = acc;
  }
  return nonlinearity(pre, cfg);
}

inline ReservoirState zero_state(const ReservoirConfig& cfg) {
  return ReservoirState::Zero(cfg.n_nodes);
}

/// Runs a whole input sequence (rows of `inputs`); row t of the result is the
/// state after consuming input row t. Strictly sequential in t.
inline Eigen::MatrixXd run_sequence(const ReservoirConfig& cfg,
                                    const InterconnectionMatrix& w,
                                    const InputMask& b,
                                    const Eigen::MatrixXd& inputs,
                                    const ReservoirState& x0) {
  if (inputs.cols() != cfg.n_inputs)
    throw std::domain_error("run_sequence: input width mismatch");
  const Eigen::Index t_steps = inputs.rows();
  Eigen::MatrixXd trajectory(t_steps, cfg.n_nodes);
  ReservoirState x = x0;
  for (Eigen::Index t = 0; t < t_steps; ++t) {
    x = step(x, inputs.row(t).transpose(), w, b, cfg);
    trajectory.row(t) = x.transpose();
  }
  return trajectory;
}

}  // namespace rcbo
