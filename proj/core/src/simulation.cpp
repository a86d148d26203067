#include "tptest/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tptest/parallel.hpp"
#include "tptest/rng.hpp"

namespace tptest {

StateSpace illness_death_space() { return StateSpace(3, {3}); }

EventHistorySample simulate_illness_death(const IllnessDeathConfig& config,
                                          std::uint64_t seed, int group) {
  if (config.n < 1) throw ArgumentError("sample size must be >= 1");
  for (double rate : {config.alpha1, config.alpha2, config.censor_rate})
    if (!(rate >= 0.0) || !std::isfinite(rate))
      throw ArgumentError("rates must be finite and >= 0");

  RngStream stream(seed);
  std::vector<SubjectRecord> subjects;
  subjects.reserve(static_cast<std::size_t>(config.n));
  for (int i = 0; i < config.n; ++i) {
    const double t12 = stream.exponential(config.alpha1);
    const double t13 = stream.exponential(kHealthyDirectDeathRate);
    const double c = stream.exponential(config.censor_rate);

    SubjectRecord rec;
    rec.id = "s" + std::to_string(i + 1);
    rec.entry_time = 0.0;
    rec.entry_state = 1;

    const double first = std::min(t12, t13);
    if (c <= first) {
      rec.censor_time = c;
    } else if (t12 <= t13) {
      rec.transitions.push_back({t12, 1, 2});
      const double death = t12 + stream.exponential(config.alpha2);
      if (c <= death)
        rec.censor_time = c;
      else
        rec.transitions.push_back({death, 2, 3});
    } else {
      rec.transitions.push_back({t13, 1, 3});
    }
    subjects.push_back(std::move(rec));
  }
  return EventHistorySample(illness_death_space(), std::move(subjects),
                            std::to_string(group));
}

double true_p12(double alpha1, double alpha2, double s, double t) {
  if (!(s >= 0.0) || !(t >= s))
    throw ArgumentError("true_p12 needs 0 <= s <= t");
  const double d = s - t;  // <= 0
  const double denom = alpha1 - alpha2 + kHealthyDirectDeathRate;
  if (std::abs(denom) < 1e-12)
    return alpha1 * (t - s) *
           std::exp(-(alpha1 + kHealthyDirectDeathRate) * (t - s));
  return alpha1 *
         (std::exp(alpha2 * d) -
          std::exp((alpha1 + kHealthyDirectDeathRate) * d)) /
         denom;
}

std::optional<double> find_p12_crossing(double alpha1_a, double alpha2_a,
                                        double alpha1_b, double alpha2_b,
                                        double horizon) {
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be > 0");
  auto diff = [&](double t) {
    return true_p12(alpha1_a, alpha2_a, 0.0, t) -
           true_p12(alpha1_b, alpha2_b, 0.0, t);
  };
  const int steps = 1000;
  double prev_t = horizon / steps;
  double prev_f = diff(prev_t);
  for (int k = 2; k <= steps; ++k) {
    const double t = horizon * k / steps;
    const double f = diff(t);
    if (prev_f != 0.0 && f != 0.0 && ((prev_f < 0.0) != (f < 0.0))) {
      double lo = prev_t, hi = t, flo = prev_f;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = diff(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_t = t;
    prev_f = f;
  }
  return std::nullopt;
}

RejectionRateTable run_scenario(const ScenarioConfig& config, int threads) {
  if (config.replications < 1)
    throw ArgumentError("replication count must be >= 1");
  if (config.multiplier_draws < 1)
    throw ArgumentError("multiplier draw count must be >= 1");
  if (config.sizes.empty())
    throw ArgumentError("scenario needs at least one sample-size pair");
  for (double a : config.alphas)
    if (!(a > 0.0) || !(a < 1.0))
      throw ArgumentError("significance levels must lie in (0, 1)");
  for (const auto& [n1, n2] : config.sizes)
    if (n1 < 1 || n2 < 1) throw ArgumentError("sample sizes must be >= 1");

  RejectionRateTable table;
  table.config = config;

  const int reps = config.replications;
  for (std::size_t pair_idx = 0; pair_idx < config.sizes.size(); ++pair_idx) {
    const auto [n1, n2] = config.sizes[pair_idx];

    // Slot-indexed per-replication p-values (linear, l2, ks); parallel order
    // cannot change the outcome because each replication owns derived
    // streams keyed by (seed, pair, replication).
    std::vector<std::optional<std::array<double, 3>>> pvals(
        static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
      const auto rep = static_cast<std::uint64_t>(r);
      const auto pair_k = static_cast<std::uint64_t>(pair_idx);
      IllnessDeathConfig c1{n1, config.group1.alpha1, config.group1.alpha2,
                            config.group1.censor_rate};
      IllnessDeathConfig c2{n2, config.group2.alpha1, config.group2.alpha2,
                            config.group2.censor_rate};
      try {
        const EventHistorySample g1 = simulate_illness_death(
            c1, mix64(mix64(mix64(config.seed, pair_k), rep), 1), 1);
        const EventHistorySample g2 = simulate_illness_death(
            c2, mix64(mix64(mix64(config.seed, pair_k), rep), 2), 2);
        ComparisonOptions options;
        options.weight = config.weight;
        options.interval = config.interval;
        const AllTestResults all = run_all_tests(
            g1, g2, config.from, config.to, options, config.multiplier_draws,
            mix64(mix64(mix64(config.seed, pair_k), rep), 3));
        pvals[r] = {all.linear.p_value, all.l2.p_value, all.ks.p_value};
      } catch (const Error&) {
        pvals[r] = std::nullopt;
      }
    });

    int failed = 0;
    for (const auto& p : pvals)
      if (!p) ++failed;
    const int used = reps - failed;

    const std::array<TestMethod, 3> methods{TestMethod::linear, TestMethod::l2,
                                            TestMethod::ks};
    for (std::size_t m = 0; m < methods.size(); ++m) {
      for (double alpha : config.alphas) {
        RejectionRateRow row;
        row.n1 = n1;
        row.n2 = n2;
        row.method = methods[m];
        row.alpha = alpha;
        row.failed = failed;
        row.used = used;
        for (const auto& p : pvals)
          if (p && (*p)[m] <= alpha) ++row.rejections;
        if (used > 0) {
          row.rate = static_cast<double>(row.rejections) / used;
          row.mc_se = std::sqrt(row.rate * (1.0 - row.rate) / used);
        }
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

}  // namespace tptest
