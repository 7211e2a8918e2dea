#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace rcbo {

struct TrainingConfig {
  double ridge_lambda = 1e-4;
  bool include_bias = false;
  bool tune_lambda = false;  // pick ridge_lambda on a validation split
  std::vector<double> lambda_grid = {1e-8, 1e-6, 1e-4, 1e-2, 1.0};

  void validate() const {
    if (!(ridge_lambda >= 0.0))
      throw std::domain_error("training: ridge_lambda must be >= 0");
  }
};

/// Linear readout weights, one column per output channel. When trained with a
/// bias the extra coefficient row sits last.
struct ReadoutWeights {
  Eigen::MatrixXd w;  // (N [+1]) x C
  bool has_bias = false;
};

namespace detail {

inline Eigen::MatrixXd with_bias_column(const Eigen::MatrixXd& states) {
  Eigen::MatrixXd s(states.rows(), states.cols() + 1);
  s.leftCols(states.cols()) = states;
  s.col(states.cols()).setOnes();
  return s;
}

}  // namespace detail

/// Ridge regression: w = argmin |S w - D|^2 + lambda |w|^2, solved through the
/// symmetric positive-definite system (S^T S + lambda I) w = S^T D.
inline ReadoutWeights ridge_train(const Eigen::MatrixXd& states,
                                  const Eigen::MatrixXd& targets,
                                  const TrainingConfig& cfg) {
  cfg.validate();
  if (states.rows() < 1) throw std::domain_error("ridge: need at least one row");
  if (states.rows() != targets.rows())
    throw std::domain_error("ridge: states/targets row mismatch");
  if (!states.allFinite() || !targets.allFinite())
    throw std::domain_error("ridge: non-finite inputs");

  const Eigen::MatrixXd s =
      cfg.include_bias ? detail::with_bias_column(states) : states;
  const Eigen::Index n = s.cols();
  Eigen::MatrixXd gram = s.transpose() * s;
  gram.diagonal().array() += cfg.ridge_lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    // Guard against a numerically semidefinite Gram matrix slipping through.
    const auto& l = llt.matrixLLT();
    const double scale = gram.diagonal().maxCoeff();
    for (Eigen::Index i = 0; i < n && ok; ++i)
      ok = l(i, i) > 0.0 && l(i, i) * l(i, i) > 1e-13 * scale;
  }
  if (!ok)
    throw std::runtime_error(
        "ridge: normal equations are singular; use ridge_lambda > 0");
  ReadoutWeights out;
  out.w = llt.solve(s.transpose() * targets);
  out.has_bias = cfg.include_bias;
  return out;
}

/// Evaluates the readout on a block of states (rows = frames).
inline Eigen::MatrixXd apply_readout(const ReadoutWeights& weights,
                                     const Eigen::MatrixXd& states) {
  const Eigen::MatrixXd s =
      weights.has_bias ? detail::with_bias_column(states) : states;
  if (s.cols() != weights.w.rows())
    throw std::domain_error("readout: state width mismatch");
  return s * weights.w;
}

/// Mean squared error normalised by the variance of the target.
inline double nmse(const Eigen::VectorXd& y, const Eigen::VectorXd& d) {
  if (y.size() != d.size()) throw std::domain_error("nmse: length mismatch");
  if (y.size() < 2) throw std::domain_error("nmse: need at least two samples");
  const double mean_d = d.mean();
  const double var_d = (d.array() - mean_d).square().mean();
  if (var_d == 0.0) throw std::domain_error("nmse: target is constant");
  const double mse = (y - d).array().square().mean();
  return mse / var_d;
}

/// Winner-takes-all over C output channels: per-frame argmax, then the most
/// frequent per-frame class. All ties break toward the lowest class index.
inline int classify_sequence(const Eigen::MatrixXd& frame_outputs) {
  const Eigen::Index t_steps = frame_outputs.rows();
  const Eigen::Index classes = frame_outputs.cols();
  if (t_steps < 1) throw std::domain_error("classify: need at least one frame");
  if (classes < 2) throw std::domain_error("classify: need at least two classes");
  std::vector<int> votes(classes, 0);
  for (Eigen::Index t = 0; t < t_steps; ++t) {
    int arg = 0;
    for (Eigen::Index c = 1; c < classes; ++c)
      if (frame_outputs(t, c) > frame_outputs(t, arg)) arg = static_cast<int>(c);
    ++votes[arg];
  }
  int winner = 0;
  for (int c = 1; c < static_cast<int>(classes); ++c)
    if (votes[c] > votes[winner]) winner = c;
  return winner;
}

/// Fraction of exact label matches.
inline double accuracy(const std::vector<int>& predicted,
                       const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw std::domain_error("accuracy: length mismatch");
  if (predicted.empty()) throw std::domain_error("accuracy: empty lists");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace rcbo
