#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcbo/hyperspace.hpp"
#include "rcbo/matrix_io.hpp"
#include "rcbo/readout.hpp"
#include "rcbo/reservoir.hpp"
#include "rcbo/rng.hpp"

namespace rcbo {

struct LabeledSequence {
  Eigen::MatrixXd features;  // frames x K
  int label = 0;
  bool train = true;
  std::string name;
};

/// Labelled feature sequences with a train/test split.
struct Dataset {
  std::vector<LabeledSequence> sequences;
  int k = 0;  // feature dimension
  int c = 0;  // class count

  void validate() const {
    if (sequences.empty()) throw std::domain_error("dataset: no sequences");
    bool has_train = false, has_test = false;
    for (const auto& s : sequences) {
      if (s.features.cols() != k)
        throw std::domain_error("dataset: sequence '" + s.name +
                                "' has inconsistent feature dimension");
      if (s.label < 0 || s.label >= c)
        throw std::domain_error("dataset: sequence '" + s.name +
                                "' has label outside [0, classes)");
      (s.train ? has_train : has_test) = true;
    }
    if (!has_train || !has_test)
      throw std::domain_error("dataset: both splits must be nonempty");
  }
};

/// Desk-scale synthetic stand-in for video-feature classification: each class
/// gets a random mean direction; sequences are AR(1)-smoothed noisy
/// trajectories around their class mean.
struct SyntheticTaskSpec {
  int k = 20;
  int c = 6;
  int sequences_per_class = 20;
  int min_length = 24;
  int max_length = 60;
  double class_separation = 1.0;
  double temporal_correlation = 0.6;
  double noise = 0.3;
  double train_fraction = 0.75;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1 || c < 2) throw std::domain_error("synthetic: need k >= 1, c >= 2");
    if (sequences_per_class < 2)
      throw std::domain_error("synthetic: need >= 2 sequences per class");
    if (min_length < 2 || max_length < min_length)
      throw std::domain_error("synthetic: lengths must satisfy 2 <= min <= max");
    if (!(class_separation >= 0.0))
      throw std::domain_error("synthetic: separation must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw std::domain_error("synthetic: train_fraction must be in (0, 1)");
  }
};

inline Dataset generate_synthetic(const SyntheticTaskSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.k = spec.k;
  ds.c = spec.c;

  Rng mean_rng = Rng::substream(spec.seed, "class-means");
  std::vector<Eigen::VectorXd> means(spec.c);
  for (int c = 0; c < spec.c; ++c) {
    Eigen::VectorXd g(spec.k);
    for (int d = 0; d < spec.k; ++d) g[d] = mean_rng.normal();
    const double norm = g.norm();
    means[c] = Eigen::VectorXd::Zero(spec.k);
    if (norm > 0.0 && spec.class_separation > 0.0)
      means[c] = spec.class_separation * g / norm;
  }

  const int train_count = std::max(
      1, std::min(spec.sequences_per_class - 1,
                  static_cast<int>(std::ceil(spec.train_fraction *
                                             spec.sequences_per_class))));
  int index = 0;
  for (int c = 0; c < spec.c; ++c) {
    for (int s = 0; s < spec.sequences_per_class; ++s, ++index) {
      Rng rng = Rng::substream(spec.seed, "sequence", static_cast<std::uint64_t>(index));
      const int len = spec.min_length +
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(
                          spec.max_length - spec.min_length + 1)));
      LabeledSequence seq;
      seq.label = c;
      seq.train = s < train_count;
      {
        std::ostringstream name;
        name << "seq_" << index;
        seq.name = name.str();
      }
      seq.features.resize(len, spec.k);
      Eigen::VectorXd e = Eigen::VectorXd::Zero(spec.k);
      for (int t = 0; t < len; ++t) {
        for (int d = 0; d < spec.k; ++d)
          e[d] = spec.temporal_correlation * e[d] + spec.noise * rng.normal();
        seq.features.row(t) = (means[c] + e).transpose();
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  ds.validate();
  return ds;
}

// Dataset directory layout:
//   <dir>/manifest.txt
//     rcbo-dataset v1
//     k <K>
//     classes <C>
//     sequence <relative-file> <label> <train|test>   (one line each)
//   one matrix file per sequence (rows = frames, cols = features)

inline void export_dataset(const Dataset& ds, const std::string& dir) {
  ds.validate();
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write manifest in '" + dir + "'");
  manifest << "rcbo-dataset v1\n";
  manifest << "k " << ds.k << "\n";
  manifest << "classes " << ds.c << "\n";
  int index = 0;
  for (const auto& seq : ds.sequences) {
    std::ostringstream file;
    file << "seq_" << index++ << ".txt";
    manifest << "sequence " << file.str() << ' ' << seq.label << ' '
             << (seq.train ? "train" : "test") << "\n";
    write_matrix_file((fs::path(dir) / file.str()).string(), seq.features);
  }
}

inline Dataset load_features(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream is(manifest_path);
  if (!is) throw std::runtime_error("cannot open manifest '" + manifest_path + "'");
  std::string magic, version;
  is >> magic >> version;
  if (magic != "rcbo-dataset" || version != "v1")
    throw std::runtime_error("'" + manifest_path + "' is not a v1 dataset manifest");

  Dataset ds;
  const fs::path base = fs::path(manifest_path).parent_path();
  std::string key;
  while (is >> key) {
    if (key == "k") {
      is >> ds.k;
    } else if (key == "classes") {
      is >> ds.c;
    } else if (key == "sequence") {
      std::string file, split;
      int label = 0;
      if (!(is >> file >> label >> split))
        throw std::runtime_error("manifest: malformed sequence entry");
      if (split != "train" && split != "test")
        throw std::runtime_error("manifest: unknown split '" + split +
                                 "' for sequence '" + file + "'");
      if (label < 0 || label >= ds.c)
        throw std::runtime_error("manifest: unknown label for sequence '" +
                                 file + "'");
      LabeledSequence seq;
      seq.name = file;
      seq.label = label;
      seq.train = split == "train";
      const std::string path = (base / file).string();
      try {
        seq.features = read_matrix_file(path);
      } catch (const std::exception& e) {
        throw std::runtime_error("sequence '" + file + "': " + e.what());
      }
      if (seq.features.cols() != ds.k)
        throw std::runtime_error("sequence '" + file +
                                 "': feature dimension mismatch");
      ds.sequences.push_back(std::move(seq));
    } else {
      throw std::runtime_error("manifest: unknown directive '" + key + "'");
    }
  }
  ds.validate();
  return ds;
}

namespace detail {

inline ReadoutWeights train_readout_on(const Dataset& ds,
                                       const std::vector<const LabeledSequence*>& train,
                                       const ReservoirConfig& cfg,
                                       const InterconnectionMatrix& w,
                                       const InputMask& b,
                                       const TrainingConfig& tc) {
  Eigen::Index total_rows = 0;
  for (const auto* seq : train) total_rows += seq->features.rows();
  Eigen::MatrixXd states(total_rows, cfg.n_nodes);
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(total_rows, ds.c);
  Eigen::Index row = 0;
  for (const auto* seq : train) {
    const Eigen::MatrixXd traj =
        run_sequence(cfg, w, b, seq->features, zero_state(cfg));
    states.middleRows(row, traj.rows()) = traj;
    targets.block(row, seq->label, traj.rows(), 1).setOnes();
    row += traj.rows();
  }
  return ridge_train(states, targets, tc);
}

inline double test_accuracy_on(const Dataset& ds,
                               const std::vector<const LabeledSequence*>& test,
                               const ReservoirConfig& cfg,
                               const InterconnectionMatrix& w,
                               const InputMask& b,
                               const ReadoutWeights& weights) {
  std::vector<int> predicted, truth;
  predicted.reserve(test.size());
  truth.reserve(test.size());
  for (const auto* seq : test) {
    const Eigen::MatrixXd traj =
        run_sequence(cfg, w, b, seq->features, zero_state(cfg));
    predicted.push_back(classify_sequence(apply_readout(weights, traj)));
    truth.push_back(seq->label);
  }
  return accuracy(predicted, truth);
}

}  // namespace detail

/// End-to-end objective: builds the seeded mask/interconnection for the given
/// hyper-parameter point, runs every sequence from a zero state, trains the
/// readout on the concatenated train-split states against one-hot targets and
/// returns winner-takes-all accuracy on the test split.
inline double evaluate_objective(const Dataset& ds, const HyperPoint& point,
                                 const ReservoirConfig& reservoir,
                                 const TrainingConfig& tc) {
  ds.validate();
  if (reservoir.n_inputs != ds.k)
    throw std::domain_error("objective: reservoir n_inputs must equal dataset k");
  ReservoirConfig cfg = reservoir;
  cfg.point = point;
  const InputMask b = generate_input_mask(cfg);
  const InterconnectionMatrix w = generate_interconnection(cfg);

  std::vector<const LabeledSequence*> train, test;
  for (const auto& s : ds.sequences) (s.train ? train : test).push_back(&s);
  // Canonical processing order, so permuting the dataset's sequence list
  // cannot perturb the readout solve.
  auto by_name = [](const LabeledSequence* a, const LabeledSequence* b) {
    return a->name != b->name ? a->name < b->name
                              : (a->label != b->label ? a->label < b->label
                                                      : a->features.rows() <
                                                            b->features.rows());
  };
  std::stable_sort(train.begin(), train.end(), by_name);
  std::stable_sort(test.begin(), test.end(), by_name);

  TrainingConfig effective = tc;
  if (tc.tune_lambda && train.size() >= 4) {
    // Hold out the tail quarter of the train split per class as validation.
    std::vector<int> seen(ds.c, 0), totals(ds.c, 0);
    for (const auto* s : train) ++totals[s->label];
    std::vector<const LabeledSequence*> fit_part, val_part;
    for (const auto* s : train) {
      ++seen[s->label];
      const int cut = std::max(1, (3 * totals[s->label]) / 4);
      (seen[s->label] <= cut ? fit_part : val_part).push_back(s);
    }
    if (!val_part.empty() && !fit_part.empty()) {
      double best_acc = -1.0;
      double best_lambda = tc.ridge_lambda;
      for (double lambda : tc.lambda_grid) {
        TrainingConfig probe = tc;
        probe.tune_lambda = false;
        probe.ridge_lambda = lambda;
        try {
          const ReadoutWeights wr =
              detail::train_readout_on(ds, fit_part, cfg, w, b, probe);
          const double acc = detail::test_accuracy_on(ds, val_part, cfg, w, b, wr);
          if (acc > best_acc) {
            best_acc = acc;
            best_lambda = lambda;
          }
        } catch (const std::exception&) {
          // Singular at this lambda; skip it.
        }
      }
      effective.ridge_lambda = best_lambda;
    }
    effective.tune_lambda = false;
  }

  const ReadoutWeights weights =
      detail::train_readout_on(ds, train, cfg, w, b, effective);
  return detail::test_accuracy_on(ds, test, cfg, w, b, weights);
}

// Analytic toy surfaces over the unit cube (minimisation targets). Extra
// coordinates beyond each surface's intrinsic dimension are ignored, so any
// surface can stand in for a full 4-parameter objective.
namespace toy {

// double_min_1d(u) = min(6 (u0 - 0.2)^2 + 0.3, 10 (u0 - 0.75)^2):
// local minimum 0.3 at u0 = 0.2, global minimum 0 at u0 = 0.75. Values below
// the local minimum occur only inside the global basin |u0 - 0.75| < sqrt(0.03).
inline constexpr double kDoubleMinGlobalArg = 0.75;
inline constexpr double kDoubleMinGlobalValue = 0.0;
inline constexpr double kDoubleMinLocalArg = 0.2;
inline constexpr double kDoubleMinLocalValue = 0.3;

// pit_2d(u) = 1 + 4 max(0, 1 - u0/0.3)^3
//               - 0.9 exp(-((u0-0.7)^2 + (u1-0.35)^2) / (2 * 0.08^2)):
// a steep wall along u0 = 0 (exactly zero for u0 >= 0.3), a plateau at 1, and
// a Gaussian pit with its minimum of 0.1 exactly at (0.7, 0.35).
inline constexpr double kPitCenterU0 = 0.7;
inline constexpr double kPitCenterU1 = 0.35;
inline constexpr double kPitMinValue = 0.1;
inline constexpr double kPitPlateau = 1.0;
inline constexpr double kPitDepth = 0.9;
inline constexpr double kPitSigma = 0.08;

// sensitive_2of4_4d(u) = (u0 - 0.3)^2 + (u1 - 0.6)^2: a bowl in the first two
// coordinates, exactly constant along the last two.
inline constexpr double kBowlArgU0 = 0.3;
inline constexpr double kBowlArgU1 = 0.6;

}  // namespace toy

inline double toy_surface(const std::string& name, const Unit4& u) {
  if (name == "double_min_1d") {
    const double a = 6.0 * (u[0] - toy::kDoubleMinLocalArg) *
                         (u[0] - toy::kDoubleMinLocalArg) +
                     toy::kDoubleMinLocalValue;
    const double b = 10.0 * (u[0] - toy::kDoubleMinGlobalArg) *
                     (u[0] - toy::kDoubleMinGlobalArg);
    return std::min(a, b);
  }
  if (name == "pit_2d") {
    const double wall = std::max(0.0, 1.0 - u[0] / 0.3);
    const double dx = u[0] - toy::kPitCenterU0;
    const double dy = u[1] - toy::kPitCenterU1;
    const double pit = toy::kPitDepth *
                       std::exp(-(dx * dx + dy * dy) /
                                (2.0 * toy::kPitSigma * toy::kPitSigma));
    return toy::kPitPlateau + 4.0 * wall * wall * wall - pit;
  }
  if (name == "sensitive_2of4_4d") {
    const double dx = u[0] - toy::kBowlArgU0;
    const double dy = u[1] - toy::kBowlArgU1;
    return dx * dx + dy * dy;
  }
  throw std::domain_error("unknown toy surface '" + name + "'");
}

inline bool is_toy_surface(const std::string& name) {
  return name == "double_min_1d" || name == "pit_2d" ||
         name == "sensitive_2of4_4d";
}

}  // namespace rcbo
