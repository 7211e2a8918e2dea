#include <catch2/catch_amalgamated.hpp>

#include "properties.hpp"
#include "support.hpp"

using namespace rcbo;

namespace {

ObjectiveFn toy_objective(const HyperSpace& space, const std::string& name) {
  return [&space, name](const HyperPoint& p) {
    return toy_surface(name, to_unit(space, p));
  };
}

bool is_corner(const Unit4& u) {
  for (int d = 0; d < kDims; ++d)
    if (u[d] != 0.0 && u[d] != 1.0) return false;
  return true;
}

bool is_center(const Unit4& u) {
  for (int d = 0; d < kDims; ++d)
    if (u[d] != 0.5) return false;
  return true;
}

}  // namespace

TEST_CASE("initial design: corners plus center") {
  const HyperSpace space = HyperSpace::defaults();
  Rng rng(101);
  const auto design = initial_design(space, 8, rng);
  REQUIRE(design.size() == 8);

  int corners = 0, centers = 0;
  for (const auto& p : design) {
    const Unit4 u = to_unit(space, p);
    if (is_corner(u)) ++corners;
    if (is_center(u)) ++centers;
  }
  CHECK(corners == 7);
  CHECK(centers == 1);

  for (std::size_t a = 0; a < design.size(); ++a)
    for (std::size_t b = a + 1; b < design.size(); ++b)
      REQUIRE_FALSE(is_duplicate(space, design[a], {design[b]}, 1e-6));
}

TEST_CASE("initial design edge counts") {
  const HyperSpace space = HyperSpace::defaults();
  Rng rng(102);
  const auto minimal = initial_design(space, 2, rng);
  REQUIRE(minimal.size() == 2);
  CHECK(is_corner(to_unit(space, minimal[0])));
  CHECK(is_center(to_unit(space, minimal[1])));
  // The greedy scan starts from the all-low corner.
  CHECK(to_unit(space, minimal[0]) == Unit4{0.0, 0.0, 0.0, 0.0});

  const auto big = initial_design(space, 20, rng);
  REQUIRE(big.size() == 20);
  int corners = 0;
  for (const auto& p : big)
    if (is_corner(to_unit(space, p))) ++corners;
  CHECK(corners == 16);

  CHECK_THROWS_AS(initial_design(space, 1, rng), std::domain_error);
}

TEST_CASE("bayesian budget accounting and determinism") {
  const HyperSpace space = HyperSpace::defaults();
  const auto objective = toy_objective(space, "double_min_1d");

  BayesOptions opts;
  opts.seed = 404;
  opts.budget = 8;
  opts.init_count = 8;
  opts.direction = Direction::minimize;
  const auto log = run_bayesian(objective, space, opts);
  REQUIRE(log.observations.size() == 8);
  CHECK(log.snapshots.empty());
  for (const auto& o : log.observations) CHECK(o.method == Method::initial);

  opts.budget = 14;
  opts.acquisition.candidate_pool_size = 512;
  opts.gp.random_starts = 3;
  const auto longer = run_bayesian(objective, space, opts);
  REQUIRE(longer.observations.size() == 14);
  CHECK(longer.snapshots.size() == 6);
  for (int i = 8; i < 14; ++i)
    CHECK(longer.observations[i].method == Method::bayes);

  const auto replay = run_bayesian(objective, space, opts);
  for (std::size_t i = 0; i < longer.observations.size(); ++i) {
    REQUIRE(replay.observations[i].point.to_array() ==
            longer.observations[i].point.to_array());
    REQUIRE(replay.observations[i].objective ==
            longer.observations[i].objective);
  }

  CHECK_THROWS_AS([&] {
    BayesOptions bad;
    bad.budget = 3;
    bad.init_count = 8;
    return run_bayesian(objective, space, bad);
  }(), std::domain_error);
}

TEST_CASE("failed evaluations are recorded and skipped by the surrogate") {
  const HyperSpace space = HyperSpace::defaults();
  int calls = 0;
  const ObjectiveFn flaky = [&](const HyperPoint& p) {
    if (++calls % 3 == 0) throw std::runtime_error("evaluation failed");
    return toy_surface("double_min_1d", to_unit(space, p));
  };
  BayesOptions opts;
  opts.seed = 17;
  opts.budget = 12;
  opts.init_count = 4;
  opts.direction = Direction::minimize;
  opts.acquisition.candidate_pool_size = 256;
  opts.gp.random_starts = 2;
  const auto log = run_bayesian(flaky, space, opts);
  REQUIRE(log.observations.size() == 12);
  int failed = 0;
  for (const auto& o : log.observations) {
    if (!o.ok) {
      ++failed;
      CHECK(std::isnan(o.objective));
    }
  }
  CHECK(failed == 4);
  CHECK_NOTHROW(best(log));
}

TEST_CASE("grid campaign covers the grid in order") {
  const HyperSpace space = HyperSpace::defaults();
  const auto objective = toy_objective(space, "pit_2d");

  GridOptions opts;
  opts.direction = Direction::minimize;
  const auto log = run_grid(objective, space, GridSpec::defaults(), opts);
  REQUIRE(log.observations.size() == 54);
  const auto expected = grid_points(space, GridSpec::defaults());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(log.observations[i].iteration == static_cast<int>(i) + 1);
    CHECK(log.observations[i].point.to_array() == expected[i].to_array());
    CHECK(log.observations[i].method == Method::grid);
  }

  GridSpec one;
  one.values = {{{0.8}, {0.01}, {0.01}, {0.01}}};
  CHECK(run_grid(objective, space, one, opts).observations.size() == 1);

  // Workers do not change content or order.
  GridOptions parallel = opts;
  parallel.workers = 4;
  const auto par = run_grid(objective, space, GridSpec::defaults(), parallel);
  REQUIRE(par.observations.size() == 54);
  for (std::size_t i = 0; i < par.observations.size(); ++i)
    CHECK(par.observations[i].objective == log.observations[i].objective);

  // The exhaustive best matches a direct scan of the grid values.
  double direct = std::numeric_limits<double>::infinity();
  for (const auto& p : expected)
    direct = std::min(direct, objective(p));
  CHECK(best(log).objective == direct);
}

TEST_CASE("best observation selection") {
  CampaignLog log;
  log.direction = Direction::maximize;
  CHECK_THROWS_AS(best(log), std::domain_error);

  log.observations.push_back({1, Method::grid, {0.6, 0.01, 0.01, 0.01}, 0.5, true, 0.0});
  CHECK(best(log).iteration == 1);

  log.observations.push_back({2, Method::grid, {0.8, 0.01, 0.01, 0.01}, 0.5, true, 0.0});
  CHECK(best(log).iteration == 1);  // tie -> earliest

  log.observations.push_back({3, Method::grid, {1.0, 0.01, 0.01, 0.01}, 0.9, true, 0.0});
  CHECK(best(log).iteration == 3);

  // Failed observations never win.
  Observation bad;
  bad.iteration = 4;
  bad.ok = false;
  log.observations.push_back(bad);
  CHECK(best(log).iteration == 3);

  // Linear-scan oracle on random logs.
  Rng rng(300);
  for (int trial = 0; trial < 50; ++trial) {
    CampaignLog random_log;
    random_log.direction = trial % 2 ? Direction::maximize : Direction::minimize;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i)
      random_log.observations.push_back(
          {i + 1, Method::grid, {0.6, 0.01, 0.01, 0.01}, rng.normal(), true, 0.0});
    const Observation* expected = &random_log.observations[0];
    for (const auto& o : random_log.observations) {
      const bool better =
          random_log.direction == Direction::maximize
              ? o.objective > expected->objective
              : o.objective < expected->objective;
      if (better) expected = &o;
    }
    CHECK(best(random_log).iteration == expected->iteration);
  }
}

TEST_CASE("sensitivity report flags the inert dimensions") {
  const HyperSpace space = HyperSpace::defaults();
  Rng rng(555);

  // 200 observations of a bowl in (u0, u1); u2, u3 are noise dimensions.
  CampaignLog log;
  log.direction = Direction::minimize;
  log.space = space;
  for (int i = 0; i < 200; ++i) {
    Unit4 u = testgen::unit_point(rng);
    if (i % 4 == 0) {  // plant a cluster of good points with scattered u2/u3
      u[0] = 0.3 + 0.01 * rng.uniform(-1.0, 1.0);
      u[1] = 0.6 + 0.01 * rng.uniform(-1.0, 1.0);
    }
    Observation o;
    o.iteration = i + 1;
    o.point = from_unit(space, u);
    o.objective = toy_surface("sensitive_2of4_4d", u);
    log.observations.push_back(o);
  }
  const auto report = sensitivity_report(log, 0.1);
  CHECK(report.top_count == 20);
  CHECK(report.dims[0].flag == DimensionSensitivity::Flag::sensitive);
  CHECK(report.dims[1].flag == DimensionSensitivity::Flag::sensitive);
  CHECK(report.dims[2].flag == DimensionSensitivity::Flag::insensitive);
  CHECK(report.dims[3].flag == DimensionSensitivity::Flag::insensitive);

  // All-identical points: zero spread everywhere.
  CampaignLog identical;
  identical.direction = Direction::maximize;
  identical.space = space;
  for (int i = 0; i < 12; ++i)
    identical.observations.push_back(
        {i + 1, Method::grid, {0.8, 0.01, 0.01, 0.01}, 0.5, true, 0.0});
  const auto zero = sensitivity_report(identical, 0.5);
  for (int d = 0; d < kDims; ++d) CHECK(zero.dims[d].spread == 0.0);

  // top_fraction = 1 reports the full observed ranges.
  const auto full = sensitivity_report(log, 1.0);
  CHECK(full.top_count == 200);
  for (int d = 0; d < kDims; ++d) {
    double lo = 1.0, hi = 0.0;
    for (const auto& o : log.observations) {
      const Unit4 u = to_unit(space, o.point);
      lo = std::min(lo, u[d]);
      hi = std::max(hi, u[d]);
    }
    CHECK(full.dims[d].min_u == lo);
    CHECK(full.dims[d].max_u == hi);
  }

  CHECK_THROWS_AS(sensitivity_report(identical, 0.0), std::domain_error);
  CampaignLog tiny;
  tiny.observations.push_back({1, Method::grid, {0.8, 0.01, 0.01, 0.01}, 0.5, true, 0.0});
  CHECK_THROWS_AS(sensitivity_report(tiny, 0.5), std::domain_error);
}

TEST_CASE("iterations_to_within scans the running best") {
  CampaignLog log;
  log.direction = Direction::maximize;
  for (int i = 0; i < 3; ++i)
    log.observations.push_back(
        {i + 1, Method::grid, {0.8, 0.01, 0.01, 0.01}, 0.5 + 0.1 * i, true, 0.0});

  CHECK(iterations_to_within(log, 0.0) == 3);
  CHECK(iterations_to_within(log, 0.1) == 2);
  CHECK(iterations_to_within(log, 10.0) == 1);

  CampaignLog empty;
  CHECK_THROWS_AS(iterations_to_within(empty, 0.0), std::domain_error);
}

TEST_CASE("early stop on target and patience") {
  const HyperSpace space = HyperSpace::defaults();
  const auto objective = toy_objective(space, "double_min_1d");

  BayesOptions opts;
  opts.seed = 88;
  opts.budget = 30;
  opts.init_count = 4;
  opts.direction = Direction::minimize;
  opts.acquisition.candidate_pool_size = 512;
  opts.gp.random_starts = 2;
  opts.target = 0.65;  // every corner scores at least this; reached quickly
  const auto log = run_bayesian(objective, space, opts);
  CHECK(log.observations.size() < 30);
  CHECK(best(log).objective <= 0.65);

  BayesOptions patient = opts;
  patient.target.reset();
  patient.patience = 3;
  const auto plog = run_bayesian(objective, space, patient);
  CHECK(plog.observations.size() <= 30);
}

TEST_CASE("campaign property suite") {
  const auto failures = props::campaign_properties(100, 7707);
  for (const auto& f : failures) UNSCOPED_INFO(f);
  CHECK(failures.empty());
}
