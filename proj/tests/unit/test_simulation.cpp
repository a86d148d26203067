#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "tptest/estimation.hpp"
#include "tptest/rng.hpp"
#include "tptest/simulation.hpp"

using namespace tptest;
using namespace tptest::testutil;

namespace {

// Composite Simpson on P12(s, t) = int_s^t P11(s, u) a1 P22(u, t) du for the
// linear-intensity illness-death model; independent of the closed form.
double simpson_p12(double a1, double a2, double s, double t) {
  const int n = 2000;  // even
  const double h = (t - s) / n;
  auto f = [&](double u) {
    return a1 * std::exp(-(a1 + kHealthyDirectDeathRate) * (u - s)) *
           std::exp(-a2 * (t - u));
  };
  double acc = f(s) + f(t);
  for (int k = 1; k < n; ++k) acc += f(s + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

bool rows_identical(const RejectionRateRow& a, const RejectionRateRow& b) {
  return a.n1 == b.n1 && a.n2 == b.n2 && a.method == b.method &&
         a.alpha == b.alpha && a.rejections == b.rejections &&
         a.used == b.used && a.failed == b.failed && a.rate == b.rate &&
         a.mc_se == b.mc_se;
}

}  // namespace

TEST_CASE("closed-form transition probability matches numeric integration") {
  const std::vector<std::array<double, 4>> cases{
      {0.6, 0.5, 0.0, 2.0},
      {1.5, 1.6, 0.0, 1.7},
      {0.35, 0.065, 0.4, 2.0},
      {1.2, 0.5, 0.0, 1.0},
      {0.25, 0.75, 0.0, 1.5},  // removable singularity: a1 - a2 + 1/2 = 0
  };
  for (const auto& [a1, a2, s, t] : cases)
    CHECK(true_p12(a1, a2, s, t) ==
          doctest::Approx(simpson_p12(a1, a2, s, t)).epsilon(1e-9));

  CHECK(true_p12(0.6, 0.5, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(true_p12(0.6, 0.5, -0.1, 1.0), ArgumentError);
  CHECK_THROWS_AS(true_p12(0.6, 0.5, 2.0, 1.0), ArgumentError);
}

TEST_CASE("crossing finder locates a sign change or reports none") {
  const auto crossing = find_p12_crossing(1.5, 1.6, 0.35, 0.065, 2.0);
  REQUIRE(crossing.has_value());
  auto diff = [](double t) {
    return true_p12(1.5, 1.6, 0.0, t) - true_p12(0.35, 0.065, 0.0, t);
  };
  CHECK(std::abs(diff(*crossing)) <= 1e-10);
  CHECK(*crossing == doctest::Approx(1.0675).epsilon(2e-3));
  CHECK(diff(*crossing - 0.05) * diff(*crossing + 0.05) < 0.0);

  // Uniformly ordered curves never cross.
  CHECK_FALSE(find_p12_crossing(0.6, 0.5, 1.2, 0.5, 2.0).has_value());
  // Identical parameters: the difference is identically zero, not a crossing.
  CHECK_FALSE(find_p12_crossing(0.6, 0.5, 0.6, 0.5, 2.0).has_value());
  CHECK_THROWS_AS(find_p12_crossing(0.6, 0.5, 1.2, 0.5, 0.0), ArgumentError);
}

TEST_CASE("simulator is deterministic in (config, seed) and labels groups") {
  const IllnessDeathConfig cfg{50, 0.6, 0.5, 0.25};
  const EventHistorySample a = simulate_illness_death(cfg, 11, 1);
  const EventHistorySample b = simulate_illness_death(cfg, 11, 1);
  CHECK(a == b);
  CHECK(a.size() == 50);
  CHECK(a.group() == "1");
  CHECK(a.space() == illness_death_space());
  CHECK_FALSE(a == simulate_illness_death(cfg, 12, 1));
  CHECK(simulate_illness_death(cfg, 11, 2).group() == "2");

  for (const SubjectRecord& rec : a.subjects()) {
    CHECK(rec.entry_time == 0.0);
    CHECK(rec.entry_state == 1);
    CHECK((rec.censor_time.has_value() ||
           a.space().is_absorbing(rec.final_state())));
  }

  // Zero censoring rate: follow-up never ends early, everyone absorbs.
  const EventHistorySample full =
      simulate_illness_death({20, 0.5, 0.5, 0.0}, 3);
  for (const SubjectRecord& rec : full.subjects())
    CHECK(rec.final_state() == 3);

  CHECK_THROWS_AS(simulate_illness_death({0, 0.5, 0.5, 0.25}, 1),
                  ArgumentError);
  CHECK_THROWS_AS(simulate_illness_death({5, -0.5, 0.5, 0.25}, 1),
                  ArgumentError);
  CHECK_THROWS_AS(
      simulate_illness_death(
          {5, 0.5, 0.5, std::numeric_limits<double>::quiet_NaN()}, 1),
      ArgumentError);
}

TEST_CASE("estimator tracks the closed form on a large simulated sample") {
  const EventHistorySample sample =
      simulate_illness_death({4000, 0.6, 0.5, 0.25}, 7);
  const CountingProcessSet cps(sample);
  const TransitionProbabilityCurve P =
      aalen_johansen(nelson_aalen(cps, pooled_event_grid({&sample})), 0.0);
  for (double t : {0.5, 1.0, 2.0})
    CHECK(std::abs(P.value_at(t, 1, 2) - true_p12(0.6, 0.5, 0.0, t)) <= 0.03);
}

TEST_CASE("rejection table layout, reproducibility, and thread invariance") {
  ScenarioConfig cfg;
  cfg.group1 = {0.6, 0.5, 0.25};
  cfg.group2 = {0.6, 0.5, 0.25};
  cfg.sizes = {{25, 25}};
  cfg.replications = 30;
  cfg.multiplier_draws = 40;
  cfg.alphas = {0.1, 0.05};
  cfg.seed = 9;

  const RejectionRateTable table = run_scenario(cfg, 1);
  REQUIRE(table.rows.size() == 6);
  CHECK(table.config.replications == 30);

  const std::array<TestMethod, 3> methods{TestMethod::linear, TestMethod::l2,
                                          TestMethod::ks};
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t a = 0; a < 2; ++a) {
      const RejectionRateRow& row = table.rows[m * 2 + a];
      CHECK(row.method == methods[m]);
      CHECK(row.alpha == cfg.alphas[a]);
      CHECK(row.n1 == 25);
      CHECK(row.used + row.failed == 30);
      CHECK(row.rejections <= row.used);
      if (row.used > 0) {
        CHECK(row.rate == static_cast<double>(row.rejections) / row.used);
        CHECK(row.mc_se ==
              doctest::Approx(std::sqrt(row.rate * (1.0 - row.rate) / row.used))
                  .epsilon(1e-15));
      }
    }

  const RejectionRateTable threaded = run_scenario(cfg, 3);
  REQUIRE(threaded.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    CHECK(rows_identical(table.rows[i], threaded.rows[i]));

  // Replay the replication loop by hand for the l2 test at alpha = 0.1.
  int manual = 0, manual_failed = 0;
  for (std::uint64_t r = 0; r < 30; ++r) {
    const EventHistorySample g1 = simulate_illness_death(
        {25, 0.6, 0.5, 0.25}, mix64(mix64(mix64(9, 0), r), 1), 1);
    const EventHistorySample g2 = simulate_illness_death(
        {25, 0.6, 0.5, 0.25}, mix64(mix64(mix64(9, 0), r), 2), 2);
    try {
      const AllTestResults all =
          run_all_tests(g1, g2, 1, 2, ComparisonOptions{}, 40,
                        mix64(mix64(mix64(9, 0), r), 3));
      if (all.l2.p_value <= 0.1) ++manual;
    } catch (const Error&) {
      ++manual_failed;
    }
  }
  CHECK(table.rows[2].rejections == manual);
  CHECK(table.rows[2].failed == manual_failed);
}

TEST_CASE("replications whose test fails are excluded, not fabricated") {
  ScenarioConfig cfg;
  cfg.group1 = {0.6, 0.5, 0.25};
  cfg.group2 = {0.6, 0.5, 0.25};
  cfg.sizes = {{10, 10}};
  cfg.replications = 5;
  cfg.multiplier_draws = 10;
  cfg.seed = 4;
  cfg.interval = Interval{0.0, 50.0};  // beyond every simulated horizon

  const RejectionRateTable table = run_scenario(cfg, 1);
  for (const RejectionRateRow& row : table.rows) {
    CHECK(row.failed == 5);
    CHECK(row.used == 0);
    CHECK(row.rejections == 0);
    CHECK(row.rate == 0.0);
    CHECK(row.mc_se == 0.0);
  }
}

TEST_CASE("scenario configuration is validated up front") {
  ScenarioConfig good;
  good.group1 = {0.6, 0.5, 0.25};
  good.group2 = {0.6, 0.5, 0.25};
  good.sizes = {{5, 5}};
  good.replications = 1;
  good.multiplier_draws = 2;
  good.seed = 1;

  {
    ScenarioConfig bad = good;
    bad.replications = 0;
    CHECK_THROWS_AS(run_scenario(bad, 1), ArgumentError);
  }
  {
    ScenarioConfig bad = good;
    bad.multiplier_draws = 0;
    CHECK_THROWS_AS(run_scenario(bad, 1), ArgumentError);
  }
  {
    ScenarioConfig bad = good;
    bad.sizes.clear();
    CHECK_THROWS_AS(run_scenario(bad, 1), ArgumentError);
  }
  {
    ScenarioConfig bad = good;
    bad.alphas = {0.0};
    CHECK_THROWS_AS(run_scenario(bad, 1), ArgumentError);
  }
  {
    ScenarioConfig bad = good;
    bad.sizes = {{0, 5}};
    CHECK_THROWS_AS(run_scenario(bad, 1), ArgumentError);
  }
}
