#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tptest/event_history.hpp"
#include "tptest/two_sample.hpp"

namespace tptest {

// Illness-death model without recovery: 1 healthy, 2 ill, 3 dead.
// Cumulative intensities are linear: A12(t) = alpha1*t, A13(t) = t/2,
// A23(t) = alpha2*t, so sojourn times are exponential.
inline constexpr double kHealthyDirectDeathRate = 0.5;

StateSpace illness_death_space();

struct IllnessDeathConfig {
  int n = 0;
  double alpha1 = 0.0;  // 1 -> 2 rate
  double alpha2 = 0.0;  // 2 -> 3 rate
  double censor_rate = 0.25;
};

// Inverse-transform exponential paths truncated by independent censoring.
// Ties (probability zero): censoring at exactly an event time censors; equal
// competing exit times from state 1 go to state 2.
EventHistorySample simulate_illness_death(const IllnessDeathConfig& config,
                                          std::uint64_t seed, int group = 0);

// Closed-form P12(s, t) for the model above; the removable singularity at
// alpha1 - alpha2 + 1/2 = 0 uses the limit form.
double true_p12(double alpha1, double alpha2, double s, double t);

// Smallest t in (0, horizon] where the two groups' P12(0, .) curves cross
// with a sign change, located by scan plus bisection on the closed form.
std::optional<double> find_p12_crossing(double alpha1_a, double alpha2_a,
                                        double alpha1_b, double alpha2_b,
                                        double horizon);

struct GroupSpec {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double censor_rate = 0.25;
};

struct ScenarioConfig {
  GroupSpec group1;
  GroupSpec group2;
  std::vector<std::pair<int, int>> sizes;
  int replications = 1000;
  int multiplier_draws = 1000;
  std::vector<double> alphas{0.01, 0.05};
  WeightKind weight = WeightKind::unit;
  std::uint64_t seed = 0;
  int from = 1;
  int to = 2;
  std::optional<Interval> interval;
};

struct RejectionRateRow {
  int n1 = 0;
  int n2 = 0;
  TestMethod method = TestMethod::linear;
  double alpha = 0.0;
  int rejections = 0;
  int used = 0;    // replications contributing to the rate
  int failed = 0;  // replications excluded because a test raised an error
  double rate = 0.0;
  double mc_se = 0.0;
};

struct RejectionRateTable {
  ScenarioConfig config;
  std::vector<RejectionRateRow> rows;
};

// Runs every replication of every size pair with its own derived RNG stream;
// results are identical for any thread count. Rejection rule: p <= alpha.
RejectionRateTable run_scenario(const ScenarioConfig& config, int threads = 1);

}  // namespace tptest
