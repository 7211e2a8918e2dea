#include <catch2/catch_amalgamated.hpp>

#include "properties.hpp"
#include "support.hpp"

using namespace rcbo;

TEST_CASE("noise-free synthetic sequences sit exactly on their class means") {
  SyntheticTaskSpec spec;
  spec.k = 6;
  spec.c = 3;
  spec.sequences_per_class = 4;
  spec.min_length = 5;
  spec.max_length = 9;
  spec.noise = 0.0;
  spec.temporal_correlation = 0.0;
  spec.seed = 11;
  const Dataset ds = generate_synthetic(spec);
  REQUIRE(ds.sequences.size() == 12);

  for (const auto& seq : ds.sequences)
    for (int t = 1; t < seq.features.rows(); ++t)
      REQUIRE(seq.features.row(t) == seq.features.row(0));

  // A separable noise-free task is classified perfectly.
  ReservoirConfig cfg;
  cfg.n_nodes = 32;
  cfg.n_inputs = ds.k;
  cfg.point = {0.8, 0.5, 0.01, 0.01};
  cfg.rng_seed = 7;
  const double acc = evaluate_objective(ds, cfg.point, cfg, TrainingConfig{});
  CHECK(acc == 1.0);
}

TEST_CASE("zero separation collapses to chance accuracy") {
  SyntheticTaskSpec spec;
  spec.k = 8;
  spec.c = 4;
  spec.sequences_per_class = 12;
  spec.class_separation = 0.0;
  spec.noise = 0.3;
  spec.seed = 13;
  const Dataset ds = generate_synthetic(spec);

  ReservoirConfig cfg;
  cfg.n_nodes = 24;
  cfg.n_inputs = ds.k;
  cfg.point = {0.8, 0.3, 0.01, 0.05};
  cfg.rng_seed = 17;
  const double acc = evaluate_objective(ds, cfg.point, cfg, TrainingConfig{});
  // 3 test sequences per class -> 12 test decisions at chance 1/4.
  const double sigma = std::sqrt(0.25 * 0.75 / 12.0);
  CHECK(std::abs(acc - 0.25) <= 3.0 * sigma);
}

TEST_CASE("generation is deterministic per seed") {
  SyntheticTaskSpec spec;
  spec.seed = 5;
  spec.sequences_per_class = 3;
  const Dataset a = generate_synthetic(spec);
  const Dataset b = generate_synthetic(spec);
  REQUIRE(a.sequences.size() == b.sequences.size());
  for (std::size_t i = 0; i < a.sequences.size(); ++i)
    REQUIRE(a.sequences[i].features == b.sequences[i].features);
}

TEST_CASE("manifest loading validates its inputs") {
  testgen::TempDir dir("manifest");

  {
    std::ofstream manifest(dir.str("manifest.txt"));
    manifest << "rcbo-dataset v1\nk 3\nclasses 2\n";
    manifest << "sequence a.txt 0 train\n";
    manifest << "sequence b.txt 1 test\n";
  }
  Eigen::MatrixXd a(4, 3), b(2, 3);
  a.setConstant(0.5);
  b.setConstant(-0.25);
  write_matrix_file(dir.str("a.txt"), a);
  write_matrix_file(dir.str("b.txt"), b);

  const Dataset ds = load_features(dir.str("manifest.txt"));
  REQUIRE(ds.sequences.size() == 2);
  CHECK(ds.k == 3);
  CHECK(ds.sequences[0].train);
  CHECK_FALSE(ds.sequences[1].train);
  CHECK(ds.sequences[1].features == b);

  // Wrong column count is reported with the file name.
  Eigen::MatrixXd wide(2, 4);
  wide.setZero();
  write_matrix_file(dir.str("b.txt"), wide);
  CHECK_THROWS_WITH(load_features(dir.str("manifest.txt")),
                    Catch::Matchers::ContainsSubstring("b.txt"));

  // Missing file is reported with the sequence name.
  std::filesystem::remove(dir.str("b.txt"));
  CHECK_THROWS_WITH(load_features(dir.str("manifest.txt")),
                    Catch::Matchers::ContainsSubstring("b.txt"));

  // Unknown label.
  {
    std::ofstream manifest(dir.str("manifest.txt"));
    manifest << "rcbo-dataset v1\nk 3\nclasses 2\n";
    manifest << "sequence a.txt 7 train\n";
  }
  CHECK_THROWS_WITH(load_features(dir.str("manifest.txt")),
                    Catch::Matchers::ContainsSubstring("label"));
}

TEST_CASE("export then load is the identity") {
  SyntheticTaskSpec spec;
  spec.k = 4;
  spec.c = 2;
  spec.sequences_per_class = 3;
  spec.min_length = 3;
  spec.max_length = 7;
  spec.seed = 23;
  const Dataset ds = generate_synthetic(spec);

  testgen::TempDir dir("roundtrip");
  export_dataset(ds, dir.str());
  const Dataset loaded = load_features(dir.str("manifest.txt"));
  REQUIRE(loaded.sequences.size() == ds.sequences.size());
  CHECK(loaded.k == ds.k);
  CHECK(loaded.c == ds.c);
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    CHECK(loaded.sequences[i].label == ds.sequences[i].label);
    CHECK(loaded.sequences[i].train == ds.sequences[i].train);
    CHECK(loaded.sequences[i].features == ds.sequences[i].features);
  }
}

TEST_CASE("single forced-correct test sequence scores 1.0") {
  SyntheticTaskSpec spec;
  spec.k = 4;
  spec.c = 2;
  spec.sequences_per_class = 2;  // one train + one test per class
  spec.min_length = 6;
  spec.max_length = 6;
  spec.noise = 0.0;
  spec.temporal_correlation = 0.0;
  spec.train_fraction = 0.5;
  spec.seed = 31;
  Dataset ds = generate_synthetic(spec);
  // Keep a single test sequence.
  ds.sequences.erase(
      std::remove_if(ds.sequences.begin(), ds.sequences.end(),
                     [](const LabeledSequence& s) {
                       return !s.train && s.label != 0;
                     }),
      ds.sequences.end());

  ReservoirConfig cfg;
  cfg.n_nodes = 16;
  cfg.n_inputs = ds.k;
  cfg.point = {0.8, 0.5, 0.01, 0.01};
  cfg.rng_seed = 3;
  CHECK(evaluate_objective(ds, cfg.point, cfg, TrainingConfig{}) == 1.0);
}

TEST_CASE("input-blind reservoir scores at chance") {
  SyntheticTaskSpec spec;
  spec.k = 6;
  spec.c = 3;
  spec.sequences_per_class = 8;
  spec.seed = 37;
  const Dataset ds = generate_synthetic(spec);

  ReservoirConfig cfg;
  cfg.n_nodes = 16;
  cfg.n_inputs = ds.k;
  cfg.rng_seed = 5;
  const HyperPoint blind{0.8, 0.0, 0.01, 0.05};  // beta = 0
  const double acc = evaluate_objective(ds, blind, cfg, TrainingConfig{});
  // 2 test sequences per class -> 6 decisions at chance 1/3.
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 6.0);
  CHECK(std::abs(acc - 1.0 / 3.0) <= 3.0 * sigma);

  // Deterministic on repeat.
  CHECK(evaluate_objective(ds, blind, cfg, TrainingConfig{}) == acc);
}

TEST_CASE("objective rejects mismatched input width") {
  SyntheticTaskSpec spec;
  spec.k = 4;
  spec.sequences_per_class = 2;
  const Dataset ds = generate_synthetic(spec);
  ReservoirConfig cfg;
  cfg.n_inputs = 5;
  CHECK_THROWS_AS(evaluate_objective(ds, cfg.point, cfg, TrainingConfig{}),
                  std::domain_error);
}

TEST_CASE("toy surfaces have their documented optima") {
  // double_min_1d: global minimum exactly 0 at u0 = 0.75, verified against a
  // dense scan.
  CHECK(toy_surface("double_min_1d", {toy::kDoubleMinGlobalArg, 0, 0, 0}) ==
        toy::kDoubleMinGlobalValue);
  double scan_best = 1e300;
  double scan_arg = -1.0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = i / 100000.0;
    const double v = toy_surface("double_min_1d", {x, 0, 0, 0});
    if (v < scan_best) {
      scan_best = v;
      scan_arg = x;
    }
  }
  CHECK(scan_best >= toy::kDoubleMinGlobalValue);
  CHECK(std::abs(scan_arg - toy::kDoubleMinGlobalArg) <= 1e-5);
  // Local minimum at 0.2 has value 0.3.
  CHECK(toy_surface("double_min_1d", {toy::kDoubleMinLocalArg, 0, 0, 0}) ==
        Catch::Approx(toy::kDoubleMinLocalValue));

  // pit_2d: documented minimum and plateau.
  CHECK(toy_surface("pit_2d", {toy::kPitCenterU0, toy::kPitCenterU1, 0, 0}) ==
        Catch::Approx(toy::kPitMinValue).margin(1e-12));
  CHECK(toy_surface("pit_2d", {0.95, 0.95, 0, 0}) ==
        Catch::Approx(toy::kPitPlateau).margin(1e-6));

  // sensitive_2of4_4d ignores its last two coordinates exactly.
  Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    const double v1 = toy_surface("sensitive_2of4_4d",
                                  {a, b, rng.uniform(), rng.uniform()});
    const double v2 = toy_surface("sensitive_2of4_4d",
                                  {a, b, rng.uniform(), rng.uniform()});
    REQUIRE(v1 == v2);
  }

  CHECK_THROWS_AS(toy_surface("no_such_surface", {0, 0, 0, 0}),
                  std::domain_error);
}

TEST_CASE("tasks property suite") {
  const auto failures = props::tasks_properties(100, 7606);
  for (const auto& f : failures) UNSCOPED_INFO(f);
  CHECK(failures.empty());
}
