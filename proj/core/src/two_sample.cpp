#include "tptest/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tptest/influence.hpp"
#include "tptest/rng.hpp"

namespace tptest {

namespace {

int risk_count(const std::vector<RiskInterval>& risk, int state, double t) {
  int count = 0;
  for (const RiskInterval& r : risk)
    if (r.state == state && r.start < t && t <= r.end) ++count;
  return count;
}

WeightedProcesses make_processes(const EventHistorySample& sample,
                                 const ComparisonOptions& options, int from) {
  const CountingProcessSet cps(sample);
  switch (options.variant) {
    case Variant::standard:
      return standard_processes(cps);
    case Variant::landmark:
      return landmark_processes(cps, options.start_time, from);
    case Variant::npmple: {
      if (options.model) return npmple_processes(cps, *options.model);
      return npmple_processes(cps, fit_logistic_missingness(sample));
    }
  }
  throw ArgumentError("unknown estimator variant");
}

double sorted_quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  const std::size_t r = values.size();
  std::size_t k = static_cast<std::size_t>(
      std::ceil(prob * static_cast<double>(r)));
  if (k < 1) k = 1;
  if (k > r) k = r;
  return values[k - 1];
}

ResamplingSummary summarize_null(const std::vector<double>& null_sample,
                                 int draws, std::uint64_t seed) {
  ResamplingSummary s;
  s.draws = draws;
  s.seed = seed;
  double mean = 0.0;
  for (double v : null_sample) mean += v;
  mean /= static_cast<double>(null_sample.size());
  double ss = 0.0;
  for (double v : null_sample) ss += (v - mean) * (v - mean);
  s.null_mean = mean;
  s.null_sd = null_sample.size() > 1
                  ? std::sqrt(ss / static_cast<double>(null_sample.size() - 1))
                  : 0.0;
  s.q90 = sorted_quantile(null_sample, 0.90);
  s.q95 = sorted_quantile(null_sample, 0.95);
  s.q99 = sorted_quantile(null_sample, 0.99);
  return s;
}

TestResult base_result(const PreparedComparison& prep, TestMethod method) {
  TestResult r;
  r.method = method;
  r.from = prep.from;
  r.to = prep.to;
  r.n1 = prep.n1;
  r.n2 = prep.n2;
  r.weight = prep.weight;
  r.interval = prep.interval;
  r.variant = prep.variant;
  r.beta_variance_ignored = prep.beta_variance_ignored;
  return r;
}

}  // namespace

double PreparedComparison::scale() const {
  return std::sqrt(static_cast<double>(n1) * static_cast<double>(n2) /
                   static_cast<double>(n1 + n2));
}

StepProcess PreparedComparison::difference_process() const {
  StepProcess sp;
  sp.t_start = interval.start;
  sp.t_end = interval.end;
  sp.initial_value = difference(0);
  sp.times = times;
  sp.values.assign(difference.data() + 1,
                   difference.data() + difference.size());
  return sp;
}

PreparedComparison prepare_comparison(const EventHistorySample& group1,
                                      const EventHistorySample& group2,
                                      int from, int to,
                                      const ComparisonOptions& options) {
  if (!(group1.space() == group2.space()))
    throw ArgumentError("the two groups use different state spaces");
  const StateSpace& space = group1.space();
  if (!space.contains(from) || !space.contains(to))
    throw ArgumentError("tested transition lies outside the state space");
  if (!space.is_transient(from))
    throw ArgumentError("tested transition must start in a transient state");
  const double s = options.start_time;
  if (s < 0.0) throw ArgumentError("start time must be >= 0");

  const double tau =
      std::min(group1.max_observed_time(), group2.max_observed_time());
  double t1 = s, t2 = tau;
  if (options.interval) {
    t1 = options.interval->start;
    t2 = options.interval->end;
    if (!(t1 >= s))
      throw ArgumentError("comparison interval must start at or after s");
    if (!(t2 > t1))
      throw ArgumentError("comparison interval start must precede its end");
    if (!(t2 <= tau))
      throw ArgumentError(
          "comparison interval extends beyond the smaller group horizon");
  } else if (!(t1 < t2)) {
    throw EstimationError("no events in comparison interval");
  }

  const WeightedProcesses wp1 = make_processes(group1, options, from);
  const WeightedProcesses wp2 = make_processes(group2, options, from);

  const EventGrid grid = pooled_event_grid(
      {&group1, &group2}, std::make_pair(0.0, t2));
  const CumulativeIntensityMatrix a1 = intensity_from_processes(wp1, grid);
  const CumulativeIntensityMatrix a2 = intensity_from_processes(wp2, grid);
  const TransitionProbabilityCurve p1 = aalen_johansen(a1, s);
  const TransitionProbabilityCurve p2 = aalen_johansen(a2, s);

  std::vector<std::size_t> capture;
  std::ptrdiff_t carry = -1;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double u = grid.times[k];
    if (u <= s) continue;
    if (u <= t1)
      carry = static_cast<std::ptrdiff_t>(k);
    else
      capture.push_back(k);
  }
  if (capture.empty())
    throw EstimationError("no events in comparison interval");

  PreparedComparison prep;
  prep.from = from;
  prep.to = to;
  prep.start = s;
  prep.interval = {t1, t2};
  prep.n1 = wp1.n;
  prep.n2 = wp2.n;
  prep.weight = options.weight;
  prep.variant = options.variant;
  prep.beta_variance_ignored = options.variant == Variant::npmple;

  const std::size_t K = capture.size();
  prep.times.resize(K);
  for (std::size_t c = 0; c < K; ++c) prep.times[c] = grid.times[capture[c]];

  prep.seg_len.resize(static_cast<Eigen::Index>(K) + 1);
  prep.seg_len(0) = prep.times.front() - t1;
  for (std::size_t c = 1; c < K; ++c)
    prep.seg_len(static_cast<Eigen::Index>(c)) =
        prep.times[c] - prep.times[c - 1];
  prep.seg_len(static_cast<Eigen::Index>(K)) = t2 - prep.times.back();

  // Weight columns: left-continuous per-group at-risk averages in the source
  // state, combined as y1*y2/(y1+y2) (0 when nobody is at risk), or 1.
  Eigen::VectorXd w(static_cast<Eigen::Index>(K) + 1);
  if (options.weight == WeightKind::unit) {
    w.setOnes();
  } else {
    auto combine = [](double y1, double y2) {
      const double denom = y1 + y2;
      return denom > 0.0 ? y1 * y2 / denom : 0.0;
    };
    w(0) = combine(
        static_cast<double>(risk_count(wp1.risk, from, t1)) / wp1.n,
        static_cast<double>(risk_count(wp2.risk, from, t1)) / wp2.n);
    for (std::size_t c = 0; c < K; ++c)
      w(static_cast<Eigen::Index>(c) + 1) =
          combine(a1.at_risk_average(capture[c], from),
                  a2.at_risk_average(capture[c], from));
  }

  prep.difference.resize(static_cast<Eigen::Index>(K) + 1);
  prep.difference(0) =
      w(0) * (p1.value_at(t1, from, to) - p2.value_at(t1, from, to));
  for (std::size_t c = 0; c < K; ++c)
    prep.difference(static_cast<Eigen::Index>(c) + 1) =
        w(static_cast<Eigen::Index>(c) + 1) *
        (p1.value_at(prep.times[c], from, to) -
         p2.value_at(prep.times[c], from, to));
  prep.weight_value = w;

  prep.weighted_influence1 =
      influence_matrix(wp1, a1, from, to, s, capture, carry);
  prep.weighted_influence2 =
      influence_matrix(wp2, a2, from, to, s, capture, carry);
  if (options.weight != WeightKind::unit) {
    for (Eigen::Index c = 0; c < w.size(); ++c) {
      prep.weighted_influence1.col(c) *= w(c);
      prep.weighted_influence2.col(c) *= w(c);
    }
  }
  prep.engine = std::make_shared<ComparisonEngine>(
      ComparisonEngine{wp1, wp2, a1, a2, capture, carry});
  return prep;
}

DifferenceProcess weighted_difference(const PreparedComparison& prep) {
  return {prep.difference_process(), prep.n1, prep.n2, prep.scale()};
}

double linear_statistic(const StepProcess& difference) {
  return difference.integrate();
}

double l2_statistic(const StepProcess& difference) {
  return std::sqrt(difference.integrate_squared());
}

double ks_statistic(const StepProcess& difference) {
  return difference.sup_abs();
}

double variance_estimate(const PreparedComparison& prep) {
  const double n1 = prep.n1, n2 = prep.n2, total = n1 + n2;
  const Eigen::VectorXd q1 = prep.weighted_influence1 * prep.seg_len;
  const Eigen::VectorXd q2 = prep.weighted_influence2 * prep.seg_len;
  return n2 / (total * n1) * q1.squaredNorm() +
         n1 / (total * n2) * q2.squaredNorm();
}

NullSample multiplier_null_sample(const PreparedComparison& prep, int draws,
                                  std::uint64_t seed) {
  if (draws < 1) throw ArgumentError("multiplier draw count must be >= 1");
  if (!prep.engine)
    throw ArgumentError("comparison was prepared without its engine inputs");
  const ComparisonEngine& eng = *prep.engine;
  const int n1 = prep.n1, n2 = prep.n2;
  const double total = n1 + n2;
  const double lambda = n1 / total;
  const double c1 = std::sqrt((1.0 - lambda) / n1);
  const double c2 = std::sqrt(lambda / n2);

  Eigen::MatrixXd xi1(draws, n1), xi2(draws, n2);
  for (int r = 0; r < draws; ++r) {
    RngStream stream(seed, static_cast<std::uint64_t>(r));
    for (int i = 0; i < n1; ++i) xi1(r, i) = stream.normal();
    for (int i = 0; i < n2; ++i) xi2(r, i) = stream.normal();
  }

  // Aggregated influence recursion per group: draws x (1 + K) at a cost
  // linear in draws x grid, instead of the draws x n x grid inner product
  // over materialized influence matrices.
  Eigen::MatrixXd b =
      c1 * influence_multiplier_aggregate(eng.wp1, eng.a1, prep.from, prep.to,
                                          prep.start, eng.capture, eng.carry,
                                          xi1) -
      c2 * influence_multiplier_aggregate(eng.wp2, eng.a2, prep.from, prep.to,
                                          prep.start, eng.capture, eng.carry,
                                          xi2);

  NullSample out;
  out.l2.resize(static_cast<std::size_t>(draws));
  out.ks.resize(static_cast<std::size_t>(draws));
  for (int r = 0; r < draws; ++r) {
    double ss = 0.0, sup = 0.0;
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      const double v = b(r, c) * prep.weight_value(c);
      ss += v * v * prep.seg_len(c);
      sup = std::max(sup, std::abs(v));
    }
    out.l2[static_cast<std::size_t>(r)] = std::sqrt(ss);
    out.ks[static_cast<std::size_t>(r)] = sup;
  }
  return out;
}

TestResult linear_test(const PreparedComparison& prep) {
  TestResult r = base_result(prep, TestMethod::linear);
  const double z_raw = linear_statistic(prep.difference_process());
  const double omega2 = variance_estimate(prep);
  r.statistic = z_raw;
  r.variance = omega2;
  const double omega = std::sqrt(omega2);
  if (omega == 0.0) {
    if (z_raw != 0.0)
      throw EstimationError(
          "degenerate variance: zero estimated variance with a nonzero "
          "weighted-difference area");
    r.scaled_statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.scaled_statistic = prep.scale() * z_raw / omega;
  r.p_value = std::erfc(std::abs(r.scaled_statistic) / std::sqrt(2.0));
  return r;
}

TestResult omnibus_test(const PreparedComparison& prep, TestMethod method,
                        int draws, std::uint64_t seed) {
  if (method == TestMethod::linear)
    throw ArgumentError("the linear test does not use multiplier resampling");
  const NullSample null_sample = multiplier_null_sample(prep, draws, seed);
  const std::vector<double>& nulls =
      method == TestMethod::l2 ? null_sample.l2 : null_sample.ks;

  TestResult r = base_result(prep, method);
  const StepProcess d = prep.difference_process();
  r.statistic = method == TestMethod::l2 ? l2_statistic(d) : ks_statistic(d);
  r.scaled_statistic = prep.scale() * r.statistic;
  int count = 0;
  for (double v : nulls)
    if (v >= r.scaled_statistic) ++count;
  r.p_value = static_cast<double>(count) / static_cast<double>(draws);
  r.resampling = summarize_null(nulls, draws, seed);
  return r;
}

TestResult linear_test(const EventHistorySample& group1,
                       const EventHistorySample& group2, int from, int to,
                       const ComparisonOptions& options) {
  return linear_test(prepare_comparison(group1, group2, from, to, options));
}

TestResult omnibus_test(const EventHistorySample& group1,
                        const EventHistorySample& group2, int from, int to,
                        TestMethod method, int draws, std::uint64_t seed,
                        const ComparisonOptions& options) {
  return omnibus_test(prepare_comparison(group1, group2, from, to, options),
                      method, draws, seed);
}

AllTestResults run_all_tests(const EventHistorySample& group1,
                             const EventHistorySample& group2, int from,
                             int to, const ComparisonOptions& options,
                             int draws, std::uint64_t seed) {
  return run_all_tests(prepare_comparison(group1, group2, from, to, options),
                       draws, seed);
}

AllTestResults run_all_tests(const PreparedComparison& prep, int draws,
                             std::uint64_t seed) {
  AllTestResults all;
  all.linear = linear_test(prep);

  const NullSample null_sample = multiplier_null_sample(prep, draws, seed);
  const StepProcess d = prep.difference_process();
  for (TestMethod method : {TestMethod::l2, TestMethod::ks}) {
    TestResult r = base_result(prep, method);
    const std::vector<double>& nulls =
        method == TestMethod::l2 ? null_sample.l2 : null_sample.ks;
    r.statistic = method == TestMethod::l2 ? l2_statistic(d) : ks_statistic(d);
    r.scaled_statistic = prep.scale() * r.statistic;
    int count = 0;
    for (double v : nulls)
      if (v >= r.scaled_statistic) ++count;
    r.p_value = static_cast<double>(count) / static_cast<double>(draws);
    r.resampling = summarize_null(nulls, draws, seed);
    (method == TestMethod::l2 ? all.l2 : all.ks) = r;
  }
  return all;
}

std::string to_string(TestMethod method) {
  switch (method) {
    case TestMethod::linear: return "linear";
    case TestMethod::l2: return "l2";
    case TestMethod::ks: return "ks";
  }
  return "unknown";
}

std::string to_string(WeightKind kind) {
  return kind == WeightKind::unit ? "unit" : "at-risk-product";
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::standard: return "standard";
    case Variant::landmark: return "landmark";
    case Variant::npmple: return "npmple";
  }
  return "unknown";
}

}  // namespace tptest
