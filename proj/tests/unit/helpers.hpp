#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tptest/estimation.hpp"
#include "tptest/event_history.hpp"
#include "tptest/influence.hpp"
#include "tptest/rng.hpp"

namespace tptest::testutil {

// Worked three-subject example used across the suites: everyone enters
// state 1 at time 0; a1 moves 1->2 at t=1 and is censored in 2 at t=3,
// a2 moves 1->3 at t=2, a3 is censored in 1 at t=3.
inline EventHistorySample three_subject_sample(const std::string& group = "1") {
  StateSpace space(3, {3});
  std::vector<SubjectRecord> subs(3);
  subs[0].id = "a1";
  subs[0].transitions.push_back({1.0, 1, 2});
  subs[0].censor_time = 3.0;
  subs[1].id = "a2";
  subs[1].transitions.push_back({2.0, 1, 3});
  subs[2].id = "a3";
  subs[2].censor_time = 3.0;
  return EventHistorySample(space, std::move(subs), group);
}

// Companion group: one 1->2 at t=2, two censored in 1 at t=3.
inline EventHistorySample companion_sample(const std::string& group = "2") {
  StateSpace space(3, {3});
  std::vector<SubjectRecord> subs(3);
  subs[0].id = "b1";
  subs[0].transitions.push_back({2.0, 1, 2});
  subs[0].censor_time = 3.0;
  subs[1].id = "b2";
  subs[1].censor_time = 3.0;
  subs[2].id = "b3";
  subs[2].censor_time = 3.0;
  return EventHistorySample(space, std::move(subs), group);
}

// Like three_subject_sample but with no 1->3 event at all; paired with
// companion_sample it makes the 1->3 comparison fully degenerate.
inline EventHistorySample illness_only_sample(const std::string& group = "1") {
  StateSpace space(3, {3});
  std::vector<SubjectRecord> subs(3);
  subs[0].id = "c1";
  subs[0].transitions.push_back({1.0, 1, 2});
  subs[0].censor_time = 3.0;
  subs[1].id = "c2";
  subs[1].censor_time = 3.0;
  subs[2].id = "c3";
  subs[2].censor_time = 3.0;
  return EventHistorySample(space, std::move(subs), group);
}

// Four absorptions at t = 1..4; the ones at t=2 and t=4 have an unrecorded
// destination.  With pi = (1/2, 1/2) the fractional intensities are
// dA13 = (1/4, 1/6, 0, 1/2) and dA14 = (0, 1/6, 1/2, 1/2).
inline EventHistorySample four_subject_missing_sample() {
  StateSpace space(4, {3, 4});
  std::vector<SubjectRecord> subs(4);
  subs[0].id = "m1";
  subs[0].transitions.push_back({1.0, 1, 3});
  subs[1].id = "m2";
  subs[1].transitions.push_back({2.0, 1, kAbsorbedUnknown});
  subs[1].absorb_observed = false;
  subs[2].id = "m3";
  subs[2].transitions.push_back({3.0, 1, 4});
  subs[3].id = "m4";
  subs[3].transitions.push_back({4.0, 1, kAbsorbedUnknown});
  subs[3].absorb_observed = false;
  return EventHistorySample(space, std::move(subs), "1");
}

// Random four-state sample (1 -> {2,3,4}, 2 -> {3,4}) with one covariate and
// an optional missing-destination fraction; absorbing states are 3 and 4.
inline EventHistorySample four_state_random_sample(
    int n, std::uint64_t seed, double missing_prob,
    const std::string& group = "1") {
  StateSpace space(4, {3, 4});
  RngStream rng(seed);
  std::vector<SubjectRecord> subs;
  subs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SubjectRecord rec;
    rec.id = group + "_r" + std::to_string(i + 1);
    const double x = rng.uniform01();
    rec.covariates = {x};
    const double t12 = rng.exponential(0.7);
    const double t13 = rng.exponential(0.3);
    const double t14 = rng.exponential(0.2);
    const double c = rng.exponential(0.3);
    auto absorb = [&](double time, int from, int dest) {
      if (rng.uniform01() < missing_prob) {
        rec.transitions.push_back({time, from, kAbsorbedUnknown});
        rec.absorb_observed = false;
      } else {
        rec.transitions.push_back({time, from, dest});
      }
    };
    const double first = std::min({t12, t13, t14});
    if (c <= first) {
      rec.censor_time = c;
    } else if (t12 <= t13 && t12 <= t14) {
      rec.transitions.push_back({t12, 1, 2});
      const double t23 = rng.exponential(0.5 + x);
      const double t24 = rng.exponential(0.4);
      const double death = t12 + std::min(t23, t24);
      if (c <= death)
        rec.censor_time = c;
      else
        absorb(death, 2, t23 <= t24 ? 3 : 4);
    } else {
      absorb(std::min(t13, t14), 1, t13 <= t14 ? 3 : 4);
    }
    subs.push_back(std::move(rec));
  }
  return EventHistorySample(space, std::move(subs), group);
}

// Materialized product-rule oracle for the influence engine:
//   gamma_i(s, t) = sum_{s < u_k <= t} sum_{l transient} sum_{m}
//       Lprev_k(h, l) * R_k(m, j) * dM_ilm(u_k) / ybar_l(u_k)
// with Lprev_k / R_k the matrix products of (I + dA) before / after step k,
// summing m over all states so the diagonal residual convention supplies the
// -R_k(l, j) part.  Quadratic in the grid; for cross-checks only.
inline Eigen::MatrixXd brute_influence(const WeightedProcesses& wp,
                                       const CumulativeIntensityMatrix& A,
                                       int from, int to, double start) {
  const int q = A.num_states();
  const int n = wp.n;
  const MartingaleResidualSet rs(wp, A);
  const EventGrid& grid = A.grid();

  std::vector<std::size_t> steps;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (grid.times[k] > start && grid.times[k] <= grid.tau) steps.push_back(k);

  std::vector<Eigen::MatrixXd> prefix(steps.size() + 1);
  prefix[0] = Eigen::MatrixXd::Identity(q, q);
  for (std::size_t j = 0; j < steps.size(); ++j)
    prefix[j + 1] =
        prefix[j] * (Eigen::MatrixXd::Identity(q, q) + A.increment(steps[j]));

  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(steps.size()));
  const std::vector<int> transient = wp.space.transient();
  for (std::size_t jt = 0; jt < steps.size(); ++jt) {
    Eigen::MatrixXd suffix = Eigen::MatrixXd::Identity(q, q);
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    for (std::size_t j = jt + 1; j-- > 0;) {
      const std::size_t k = steps[j];
      for (int l : transient) {
        const double ybar = A.at_risk_average(k, l);
        if (!(ybar > 0.0)) continue;
        for (int m = 1; m <= q; ++m) {
          const double w =
              prefix[j](from - 1, l - 1) * suffix(m - 1, to - 1) / ybar;
          if (w == 0.0) continue;
          for (int i = 0; i < n; ++i) col(i) += w * rs.increment(i, l, m, k);
        }
      }
      suffix = (Eigen::MatrixXd::Identity(q, q) + A.increment(k)) * suffix;
    }
    out.col(static_cast<Eigen::Index>(jt)) = col;
  }
  return out;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

}  // namespace tptest::testutil
