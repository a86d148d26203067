#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tptest/estimation.hpp"
#include "tptest/event_history.hpp"

namespace tptest {

// Per-subject residuals dM_i,lm(u) = dN_i,lm(u) - Y_il(u) dA_lm(u) on the
// intensity grid, with the diagonal closed as dM_i,ll = -sum_{m != l} dM_i,lm.
// Meant for small-sample checks; the influence engine below recomputes the
// increments on the fly instead of materializing them.
class MartingaleResidualSet {
 public:
  MartingaleResidualSet(const CountingProcessSet& cps,
                        const CumulativeIntensityMatrix& A);
  MartingaleResidualSet(const WeightedProcesses& processes,
                        const CumulativeIntensityMatrix& A);

  const EventGrid& grid() const noexcept { return A_.grid(); }
  int sample_size() const noexcept { return n_; }
  int num_states() const noexcept { return A_.num_states(); }

  // dM at grid index k; `from` must be transient, `from == to` uses the
  // diagonal convention above.
  double increment(int subject, int from, int to, std::size_t k) const;
  // Cumulative residual M(t), summing increments at grid times <= t.
  double value(int subject, int from, int to, double t) const;

 private:
  CumulativeIntensityMatrix A_;
  StateSpace space_;
  int n_ = 0;
  // Atoms bucketed by grid index, and risk intervals bucketed by subject.
  std::vector<std::vector<JumpAtom>> atoms_;
  std::vector<std::vector<RiskInterval>> risk_;
};

// Estimated influence curves of the transition-probability estimate
// P_hat_{from,to}(start, t), one step function per subject on the grid times
// in (start, tau]. Rows of matrix() are subjects, columns grid times.
class InfluenceCurveSet {
 public:
  InfluenceCurveSet(int from, int to, double start, Variant variant,
                    EventGrid grid, Eigen::MatrixXd curves,
                    bool beta_variance_ignored = false);

  int from_state() const noexcept { return from_; }
  int to_state() const noexcept { return to_; }
  double start() const noexcept { return start_; }
  Variant variant() const noexcept { return variant_; }
  const EventGrid& grid() const noexcept { return grid_; }
  int sample_size() const noexcept { return static_cast<int>(curves_.rows()); }
  bool beta_variance_ignored() const noexcept { return beta_flag_; }

  const Eigen::MatrixXd& matrix() const noexcept { return curves_; }
  // gamma_i(start, t); zero for t at or before the first jump time.
  double value(int subject, double t) const;

 private:
  int from_, to_;
  double start_;
  Variant variant_;
  EventGrid grid_;
  Eigen::MatrixXd curves_;
  bool beta_flag_;
};

// Engine: forward recursion over the grid, one pass per (from, to, start).
// Column selection lets callers capture a restricted interval without
// materializing all n x K values: `capture` lists grid indices (ascending,
// times > start) written to output columns 1..capture.size(); column 0 holds
// the value at grid index `carry` (-1 for zeros, i.e. no events yet).
Eigen::MatrixXd influence_matrix(const WeightedProcesses& processes,
                                 const CumulativeIntensityMatrix& A, int from,
                                 int to, double start,
                                 const std::vector<std::size_t>& capture,
                                 std::ptrdiff_t carry);

// Multiplier aggregation: row r of the result equals
// sum_i xi(r, i) * influence_matrix(...) row i, column layout as above.
// Same recursion as influence_matrix with the per-subject state collapsed to
// one row per draw, so the cost is independent of the sample size except for
// maintaining per-state running sums of xi over the at-risk sets.  This is
// what makes resampling with thousands of draws linear in (draws x grid).
Eigen::MatrixXd influence_multiplier_aggregate(
    const WeightedProcesses& processes, const CumulativeIntensityMatrix& A,
    int from, int to, double start, const std::vector<std::size_t>& capture,
    std::ptrdiff_t carry, const Eigen::MatrixXd& xi);

// Influence curves over the full grid restricted to (start, tau].
InfluenceCurveSet influence_curves(const WeightedProcesses& processes,
                                   const CumulativeIntensityMatrix& A,
                                   int from, int to, double start);

// Convenience for a single sample: standard estimator on its own event grid.
InfluenceCurveSet influence_curves(const EventHistorySample& sample, int from,
                                   int to, double start);

MartingaleResidualSet martingale_residuals(const CountingProcessSet& cps,
                                           const CumulativeIntensityMatrix& A);

}  // namespace tptest
