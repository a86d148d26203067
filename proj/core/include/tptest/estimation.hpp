#pragma once

/* Nonparametric estimation for nonhomogeneous Markov processes:
 * Nelson-Aalen cumulative transition intensities, the Aalen-Johansen
 * product-integral transition matrix, a landmark variant conditioning on
 * the state occupied at a fixed time s, a missing-destination variant that
 * splits unrecorded absorptions across absorbing states, and state
 * occupation probabilities.
 *
 * All estimators run on a shared internal representation: a list of
 * weighted jump atoms plus at-risk intervals (WeightedProcesses).  The
 * landmark variant multiplies N and Y by the indicator of occupying h at
 * time s instead of subsetting records, which keeps sample size, influence
 * curves, and zero-sum identities coherent; the missing-destination
 * variant replaces each unrecorded absorption by fractional atoms into
 * every absorbing state.
 */

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "tptest/event_history.hpp"
#include "tptest/missingness.hpp"

namespace tptest {

enum class Variant { standard, landmark, npmple };

struct WeightedProcesses {
  StateSpace space;
  int n = 0;                         // full sample size, including subjects
                                     // whose modified processes vanish
  std::vector<JumpAtom> atoms;       // sorted by (time, subject, from, to)
  std::vector<RiskInterval> risk;
  Variant variant = Variant::standard;
  double landmark_time = 0.0;
};

WeightedProcesses standard_processes(const CountingProcessSet& processes);

// N~ = N * 1{X(s) = h}, Y~ = Y * 1{X(s) = h}, restricted to (s, inf).
// Errors if nobody occupies h at s.
WeightedProcesses landmark_processes(const CountingProcessSet& processes,
                                     double s, int h);

// Recorded absorptions keep weight 1; each unrecorded one is split into
// fractional atoms pi_j across the absorbing states.
WeightedProcesses npmple_processes(const CountingProcessSet& processes,
                                   const MissingnessModel& model);

class CumulativeIntensityMatrix {
 public:
  CumulativeIntensityMatrix(EventGrid grid, int num_states, int sample_size,
                            std::vector<Eigen::MatrixXd> increments,
                            Eigen::MatrixXi at_risk,
                            std::vector<std::vector<std::pair<int, int>>> jumps);

  const EventGrid& grid() const noexcept { return grid_; }
  int num_states() const noexcept { return q_; }
  int sample_size() const noexcept { return n_; }

  // dA(u_k): off-diagonal dN_hj/Y_h (0/0 := 0), diagonal -row sum.
  const Eigen::MatrixXd& increment(std::size_t k) const { return inc_[k]; }
  // Cumulative A_hj(t) = sum of increments at grid times <= t.
  double cumulative(int from, int to, double t) const;

  // Subjects at risk in `state` just before grid time u_k.
  int at_risk_count(std::size_t k, int state) const {
    return at_risk_(static_cast<Eigen::Index>(k), state - 1);
  }
  double at_risk_average(std::size_t k, int state) const {
    return static_cast<double>(at_risk_count(k, state)) / n_;
  }

  // (from, to) pairs with a positive jump mass at u_k.
  const std::vector<std::pair<int, int>>& jump_pairs(std::size_t k) const {
    return jumps_[k];
  }
  bool has_jumps(std::size_t k) const { return !jumps_[k].empty(); }

 private:
  EventGrid grid_;
  int q_ = 0;
  int n_ = 0;
  std::vector<Eigen::MatrixXd> inc_;
  Eigen::MatrixXi at_risk_;  // grid size x q
  std::vector<std::vector<std::pair<int, int>>> jumps_;
};

// Nelson-Aalen increments on the grid.  The grid must contain every jump
// time <= tau; jumps beyond tau are outside the estimation horizon.
CumulativeIntensityMatrix nelson_aalen(const CountingProcessSet& processes,
                                       const EventGrid& grid);

// Variant-agnostic core shared by all intensity estimators.
CumulativeIntensityMatrix intensity_from_processes(const WeightedProcesses& wp,
                                                   const EventGrid& grid);

// Missing-destination intensities; with every destination recorded this is
// bit-identical to nelson_aalen.
CumulativeIntensityMatrix npmple_intensities(const EventHistorySample& sample,
                                             const MissingnessModel& model,
                                             const EventGrid& grid);

class TransitionProbabilityCurve {
 public:
  TransitionProbabilityCurve(double start, EventGrid grid, int num_states,
                             std::vector<Eigen::MatrixXd> values,
                             Variant variant = Variant::standard);

  double start() const noexcept { return s_; }
  const EventGrid& grid() const noexcept { return grid_; }
  int num_states() const noexcept { return q_; }
  Variant variant() const noexcept { return variant_; }

  const Eigen::MatrixXd& at_index(std::size_t k) const { return values_[k]; }
  // P(s, t); identity for t <= s or before the first event after s.
  Eigen::MatrixXd value_at(double t) const;
  double value_at(double t, int from, int to) const;

 private:
  double s_ = 0.0;
  EventGrid grid_;  // times restricted to (s, tau]
  int q_ = 0;
  std::vector<Eigen::MatrixXd> values_;
  Variant variant_ = Variant::standard;
};

// Product integral P(s, u) = prod_{v in (s, u]} (I + dA(v)), evaluated by
// the exact ordered finite product over grid jumps.
TransitionProbabilityCurve aalen_johansen(const CumulativeIntensityMatrix& A,
                                          double s);

// Aalen-Johansen on indicator-modified processes given occupancy of h at s.
TransitionProbabilityCurve landmark_aalen_johansen(
    const EventHistorySample& sample, double s, int h);
TransitionProbabilityCurve landmark_aalen_johansen(
    const EventHistorySample& sample, double s, int h, const EventGrid& grid);

struct OccupationCurves {
  EventGrid grid;
  std::vector<double> initial;  // occupation at time 0, length q
  Eigen::MatrixXd values;       // grid size x q
  double value_at(int state, double t) const;
};

// P_j(t) = sum_h initial_h P_hj(0, t); requires a curve started at s = 0
// and an `initial` probability vector over all q states.
OccupationCurves state_occupation(const TransitionProbabilityCurve& curve,
                                  const std::vector<double>& initial);

}  // namespace tptest
