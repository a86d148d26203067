#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tptest/estimation.hpp"
#include "tptest/event_history.hpp"
#include "tptest/missingness.hpp"
#include "tptest/step_math.hpp"

namespace tptest {

enum class WeightKind { unit, at_risk_product };
enum class TestMethod { linear, l2, ks };

// Half-open comparison window (start, end].
struct Interval {
  double start = 0.0;
  double end = 0.0;
};

struct ComparisonOptions {
  WeightKind weight = WeightKind::unit;
  std::optional<Interval> interval;  // default: (start_time, min group horizon]
  double start_time = 0.0;           // estimation start s (landmark time)
  Variant variant = Variant::standard;
  // Shared supplied missingness model; when absent under the npmple variant a
  // logistic model is fitted per group from its complete cases.
  std::optional<MissingnessModel> model;
};

// Everything the multiplier aggregation needs to replay the influence
// recursion per group without the n x K matrices.
struct ComparisonEngine {
  WeightedProcesses wp1, wp2;
  CumulativeIntensityMatrix a1, a2;
  std::vector<std::size_t> capture;
  std::ptrdiff_t carry = -1;
};

// Shared ingredients of the three tests for one from -> to comparison.
// Everything is laid out over the restricted window: column 0 carries the
// value at interval.start, columns 1..K sit on the pooled event times inside
// (interval.start, interval.end], and seg_len holds the quadrature segment
// lengths (closing at interval.end).
struct PreparedComparison {
  int from = 0;
  int to = 0;
  double start = 0.0;
  Interval interval;
  int n1 = 0;
  int n2 = 0;
  WeightKind weight = WeightKind::unit;
  Variant variant = Variant::standard;
  bool beta_variance_ignored = false;
  std::vector<double> times;
  Eigen::VectorXd seg_len;       // size 1 + times.size()
  Eigen::VectorXd weight_value;  // weight at interval.start and at each time
  Eigen::VectorXd difference;    // weighted difference, same layout
  Eigen::MatrixXd weighted_influence1;  // n1 x (1 + K)
  Eigen::MatrixXd weighted_influence2;  // n2 x (1 + K)
  std::shared_ptr<const ComparisonEngine> engine;

  double scale() const;  // sqrt(n1 n2 / (n1 + n2))
  StepProcess difference_process() const;
};

struct DifferenceProcess {
  StepProcess process;
  int n1 = 0;
  int n2 = 0;
  double scale = 0.0;
};

struct ResamplingSummary {
  int draws = 0;
  std::uint64_t seed = 0;
  double null_mean = 0.0;
  double null_sd = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double q99 = 0.0;
};

struct TestResult {
  TestMethod method = TestMethod::linear;
  double statistic = 0.0;         // raw Z, Q1 or Q2
  double scaled_statistic = 0.0;  // standardized Z; scaled Q1/Q2
  std::optional<double> variance; // omega^2, linear test only
  double p_value = 1.0;
  std::optional<ResamplingSummary> resampling;
  int from = 0;
  int to = 0;
  int n1 = 0;
  int n2 = 0;
  WeightKind weight = WeightKind::unit;
  Interval interval;
  Variant variant = Variant::standard;
  bool beta_variance_ignored = false;
};

struct NullSample {
  std::vector<double> l2;
  std::vector<double> ks;
};

struct AllTestResults {
  TestResult linear;
  TestResult l2;
  TestResult ks;
};

PreparedComparison prepare_comparison(const EventHistorySample& group1,
                                      const EventHistorySample& group2,
                                      int from, int to,
                                      const ComparisonOptions& options = {});

DifferenceProcess weighted_difference(const PreparedComparison& prep);

// Exact step-function quadrature / supremum over the window.
double linear_statistic(const StepProcess& difference);
double l2_statistic(const StepProcess& difference);
double ks_statistic(const StepProcess& difference);

double variance_estimate(const PreparedComparison& prep);

// R multiplier draws of the null limit process, reduced to the L2 and
// sup statistics. Draw r uses its own stream derived from (seed, r): n1
// standard normals for group 1 then n2 for group 2.
NullSample multiplier_null_sample(const PreparedComparison& prep, int draws,
                                  std::uint64_t seed);

TestResult linear_test(const PreparedComparison& prep);
TestResult omnibus_test(const PreparedComparison& prep, TestMethod method,
                        int draws, std::uint64_t seed);

TestResult linear_test(const EventHistorySample& group1,
                       const EventHistorySample& group2, int from, int to,
                       const ComparisonOptions& options = {});
TestResult omnibus_test(const EventHistorySample& group1,
                        const EventHistorySample& group2, int from, int to,
                        TestMethod method, int draws, std::uint64_t seed,
                        const ComparisonOptions& options = {});

// One shared preparation and one shared null sample for all three tests.
AllTestResults run_all_tests(const PreparedComparison& prep, int draws,
                             std::uint64_t seed);
AllTestResults run_all_tests(const EventHistorySample& group1,
                             const EventHistorySample& group2, int from,
                             int to, const ComparisonOptions& options,
                             int draws, std::uint64_t seed);

std::string to_string(TestMethod method);
std::string to_string(WeightKind kind);
std::string to_string(Variant variant);

}  // namespace tptest
