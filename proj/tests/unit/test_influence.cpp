#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "tptest/estimation.hpp"
#include "tptest/influence.hpp"
#include "tptest/missingness.hpp"
#include "tptest/simulation.hpp"

using namespace tptest;
using namespace tptest::testutil;

namespace {

std::vector<std::size_t> all_indices(const EventGrid& grid, double start) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (grid.times[k] > start && grid.times[k] <= grid.tau) out.push_back(k);
  return out;
}

// Intensity with one pooled jump but an all-zero at-risk matrix; exercises
// the empty-risk guard inside the influence recursions.
CumulativeIntensityMatrix inconsistent_intensity() {
  EventGrid grid{{1.0}, 1.0};
  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(3, 3);
  inc(0, 1) = 0.5;
  inc(0, 0) = -0.5;
  return CumulativeIntensityMatrix(grid, 3, 2, {inc},
                                   Eigen::MatrixXi::Zero(1, 3),
                                   {{{1, 2}}});
}

WeightedProcesses empty_risk_processes() {
  return WeightedProcesses{StateSpace(3, {3}), 2, {{1.0, 1, 2, 1.0, 0}},
                           {}, Variant::standard, 0.0};
}

}  // namespace

TEST_CASE("martingale residual increments match hand values") {
  const EventHistorySample sample = three_subject_sample();
  const CountingProcessSet cps(sample);
  const CumulativeIntensityMatrix A =
      nelson_aalen(cps, pooled_event_grid({&sample}));
  const MartingaleResidualSet rs = martingale_residuals(cps, A);

  CHECK(rs.sample_size() == 3);
  CHECK(rs.increment(0, 1, 2, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rs.increment(1, 1, 2, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(rs.increment(2, 1, 2, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(rs.increment(0, 1, 3, 0) == 0.0);
  CHECK(rs.increment(0, 1, 1, 0) ==
        doctest::Approx(-2.0 / 3.0).epsilon(1e-15));

  CHECK(rs.increment(0, 1, 3, 1) == 0.0);  // subject left state 1 at t=1
  CHECK(rs.increment(1, 1, 3, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rs.increment(2, 1, 3, 1) == doctest::Approx(-0.5).epsilon(1e-15));

  CHECK(rs.value(1, 1, 3, 0.5) == 0.0);
  CHECK(rs.value(1, 1, 3, 2.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rs.value(2, 1, 2, 3.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(rs.increment(3, 1, 2, 0), ArgumentError);
  CHECK_THROWS_AS(rs.increment(0, 1, 2, 2), ArgumentError);
  CHECK_THROWS_AS(rs.increment(0, 0, 2, 0), ArgumentError);
  CHECK_THROWS_AS(rs.increment(0, 3, 1, 0), ArgumentError);
}

TEST_CASE("residual increments sum to zero over subjects") {
  const EventHistorySample sample = four_state_random_sample(25, 7, 0.3);
  const CountingProcessSet cps(sample);
  const WeightedProcesses wp = npmple_processes(
      cps, MissingnessModel::supplied(sample.space(), {0.4, 0.6}));
  const EventGrid grid = pooled_event_grid({&sample});
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  const MartingaleResidualSet rs(wp, A);
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (int l : sample.space().transient())
      for (int m = 1; m <= 4; ++m) {
        double total = 0.0;
        for (int i = 0; i < 25; ++i) total += rs.increment(i, l, m, k);
        CHECK(std::abs(total) <= 1e-12);
      }
}

TEST_CASE("influence curves of the worked example match hand values") {
  const EventHistorySample sample = three_subject_sample();
  const InfluenceCurveSet g12 = influence_curves(sample, 1, 2, 0.0);

  CHECK(g12.from_state() == 1);
  CHECK(g12.to_state() == 2);
  CHECK(g12.start() == 0.0);
  CHECK(g12.variant() == Variant::standard);
  CHECK(g12.sample_size() == 3);
  CHECK_FALSE(g12.beta_variance_ignored());
  CHECK(g12.grid().times == std::vector<double>{1.0, 2.0});

  // gamma(s, s) region is identically zero.
  CHECK(g12.value(0, 0.0) == 0.0);
  CHECK(g12.value(0, 0.999) == 0.0);

  for (double t : {1.0, 2.0, 2.5}) {
    CHECK(g12.value(0, t) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(g12.value(1, t) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(g12.value(2, t) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  }

  const InfluenceCurveSet g13 = influence_curves(sample, 1, 3, 0.0);
  CHECK(g13.value(0, 1.0) == 0.0);
  CHECK(g13.value(1, 1.0) == 0.0);
  CHECK(g13.value(0, 2.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(g13.value(1, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(g13.value(2, 2.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(g12.value(3, 1.0), ArgumentError);
}

TEST_CASE("influence curves sum to zero across subjects") {
  const EventHistorySample sample = simulate_illness_death({30, 0.6, 0.5, 0.25}, 41);
  for (auto [from, to] : std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}}) {
    const InfluenceCurveSet g = influence_curves(sample, from, to, 0.0);
    const Eigen::RowVectorXd sums = g.matrix().colwise().sum();
    CHECK(sums.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("engine agrees with the materialized product-rule oracle") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const EventHistorySample sample =
        simulate_illness_death({12, 0.7, 0.4, 0.3}, seed);
    const CountingProcessSet cps(sample);
    const WeightedProcesses wp = standard_processes(cps);
    const EventGrid grid = pooled_event_grid({&sample});
    const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
    for (auto [from, to] :
         std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}}) {
      const Eigen::MatrixXd engine =
          influence_matrix(wp, A, from, to, 0.0, all_indices(grid, 0.0), -1);
      const Eigen::MatrixXd oracle = brute_influence(wp, A, from, to, 0.0);
      CHECK(max_abs_diff(engine.rightCols(engine.cols() - 1), oracle) <= 1e-11);
      CHECK(engine.col(0).isZero(0.0));
    }
  }
}

TEST_CASE("engine matches the oracle on landmark-modified processes") {
  const double s = 0.6;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const EventHistorySample sample =
        simulate_illness_death({12, 0.7, 0.4, 0.3}, seed);
    const CountingProcessSet cps(sample);
    const WeightedProcesses wp = landmark_processes(cps, s, 1);
    const EventGrid grid = pooled_event_grid({&sample});
    const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
    for (auto [from, to] :
         std::vector<std::pair<int, int>>{{1, 2}, {1, 3}}) {
      const Eigen::MatrixXd engine =
          influence_matrix(wp, A, from, to, s, all_indices(grid, s), -1);
      const Eigen::MatrixXd oracle = brute_influence(wp, A, from, to, s);
      CHECK(max_abs_diff(engine.rightCols(engine.cols() - 1), oracle) <= 1e-11);
    }
  }
}

TEST_CASE("engine matches the oracle on fractional-atom processes") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const EventHistorySample sample = four_state_random_sample(12, seed, 0.4);
    const CountingProcessSet cps(sample);
    const WeightedProcesses wp = npmple_processes(
        cps, MissingnessModel::supplied(sample.space(), {0.4, 0.6}));
    const EventGrid grid = pooled_event_grid({&sample});
    const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
    for (auto [from, to] :
         std::vector<std::pair<int, int>>{{1, 3}, {2, 4}}) {
      const Eigen::MatrixXd engine =
          influence_matrix(wp, A, from, to, 0.0, all_indices(grid, 0.0), -1);
      const Eigen::MatrixXd oracle = brute_influence(wp, A, from, to, 0.0);
      CHECK(max_abs_diff(engine.rightCols(engine.cols() - 1), oracle) <= 1e-11);
    }
  }
}

TEST_CASE("captured columns are a bitwise subset of the full sweep") {
  const EventHistorySample sample = simulate_illness_death({20, 0.6, 0.5, 0.25}, 99);
  const CountingProcessSet cps(sample);
  const WeightedProcesses wp = standard_processes(cps);
  const EventGrid grid = pooled_event_grid({&sample});
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  const std::vector<std::size_t> all = all_indices(grid, 0.0);
  REQUIRE(all.size() >= 5);

  const Eigen::MatrixXd full = influence_matrix(wp, A, 1, 2, 0.0, all, -1);
  const std::vector<std::size_t> capture{all[2], all[4]};
  const Eigen::MatrixXd part =
      influence_matrix(wp, A, 1, 2, 0.0, capture, static_cast<std::ptrdiff_t>(all[1]));

  CHECK(bitwise_equal(part.col(0), full.col(2)));  // carry = all[1]
  CHECK(bitwise_equal(part.col(1), full.col(3)));
  CHECK(bitwise_equal(part.col(2), full.col(5)));
}

TEST_CASE("influence argument validation") {
  const EventHistorySample sample = three_subject_sample();
  const CountingProcessSet cps(sample);
  const WeightedProcesses wp = standard_processes(cps);
  const EventGrid grid = pooled_event_grid({&sample});
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);

  CHECK_THROWS_AS(influence_matrix(wp, A, 3, 1, 0.0, {}, -1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 0, 2, 0.0, {}, -1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 1, 2, -0.5, {}, -1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 1, 2, 1.0, {0}, -1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 1, 2, 0.0, {1, 0}, -1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 1, 2, 0.0, {5}, -1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 1, 2, 0.0, {1}, 1), ArgumentError);
  CHECK_THROWS_AS(influence_matrix(wp, A, 1, 2, 0.0, {1}, 5), ArgumentError);

  WeightedProcesses other = wp;
  other.n = 5;
  CHECK_THROWS_WITH_AS(influence_matrix(other, A, 1, 2, 0.0, {}, -1),
                       doctest::Contains("different sample"), ArgumentError);

  // Grid missing one of the atom times.
  const EventHistorySample comp = companion_sample();
  const CountingProcessSet cps2(comp);
  const CumulativeIntensityMatrix A2 =
      intensity_from_processes(standard_processes(cps2),
                               pooled_event_grid({&comp}));
  CHECK_THROWS_WITH_AS(influence_matrix(wp, A2, 1, 2, 0.0, {}, -1),
                       doctest::Contains("does not cover a jump"),
                       ArgumentError);
}

TEST_CASE("capture times past the horizon are rejected after the sweep") {
  const EventHistorySample sample = three_subject_sample();
  const CountingProcessSet cps(sample);
  const WeightedProcesses wp = standard_processes(cps);
  const EventGrid padded{{1.0, 2.0, 3.0}, 2.0};  // grid point past tau
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, padded);
  CHECK_THROWS_WITH_AS(influence_matrix(wp, A, 1, 2, 0.0, {2}, -1),
                       doctest::Contains("beyond the grid horizon"),
                       ArgumentError);
  const Eigen::MatrixXd xi = Eigen::MatrixXd::Ones(1, 3);
  CHECK_THROWS_WITH_AS(
      influence_multiplier_aggregate(wp, A, 1, 2, 0.0, {2}, -1, xi),
      doctest::Contains("beyond the grid horizon"), ArgumentError);
}

TEST_CASE("a pooled jump with an empty risk set stops the recursion") {
  const CumulativeIntensityMatrix A = inconsistent_intensity();
  const WeightedProcesses wp = empty_risk_processes();
  CHECK_THROWS_WITH_AS(influence_matrix(wp, A, 1, 2, 0.0, {0}, -1),
                       doctest::Contains("empty risk set"), EstimationError);
  CHECK_THROWS_WITH_AS(
      influence_multiplier_aggregate(wp, A, 1, 2, 0.0, {0}, -1,
                                     Eigen::MatrixXd::Ones(2, 2)),
      doctest::Contains("empty risk set"), EstimationError);
}

TEST_CASE("multiplier aggregation equals multiplying the full matrix") {
  const EventHistorySample sample = simulate_illness_death({25, 0.6, 0.5, 0.25}, 57);
  const CountingProcessSet cps(sample);
  const WeightedProcesses wp = standard_processes(cps);
  const EventGrid grid = pooled_event_grid({&sample});
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  const std::vector<std::size_t> all = all_indices(grid, 0.0);
  REQUIRE(all.size() >= 4);
  const std::vector<std::size_t> capture(all.begin() + 2, all.end());
  const std::ptrdiff_t carry = static_cast<std::ptrdiff_t>(all[0]);

  RngStream rng(4242);
  Eigen::MatrixXd xi(3, 25);
  for (Eigen::Index r = 0; r < xi.rows(); ++r)
    for (Eigen::Index i = 0; i < xi.cols(); ++i) xi(r, i) = rng.normal();

  const Eigen::MatrixXd agg =
      influence_multiplier_aggregate(wp, A, 1, 2, 0.0, capture, carry, xi);
  const Eigen::MatrixXd full =
      influence_matrix(wp, A, 1, 2, 0.0, capture, carry);
  CHECK(max_abs_diff(agg, xi * full) <= 1e-9);

  CHECK_THROWS_WITH_AS(
      influence_multiplier_aggregate(wp, A, 1, 2, 0.0, capture, carry,
                                     Eigen::MatrixXd::Ones(3, 7)),
      doctest::Contains("one column per subject"), ArgumentError);
}

TEST_CASE("npmple influence curves flag the plug-in destination model") {
  const EventHistorySample sample = four_subject_missing_sample();
  const CountingProcessSet cps(sample);
  const WeightedProcesses wp = npmple_processes(
      cps, MissingnessModel::supplied(sample.space(), {0.5, 0.5}));
  const EventGrid grid = pooled_event_grid({&sample});
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  const InfluenceCurveSet g = influence_curves(wp, A, 1, 3, 0.0);
  CHECK(g.variant() == Variant::npmple);
  CHECK(g.beta_variance_ignored());
  const Eigen::RowVectorXd sums = g.matrix().colwise().sum();
  CHECK(sums.cwiseAbs().maxCoeff() <= 1e-12);
}
