#pragma once

/* Model for the destination of absorptions whose terminal state was not
 * recorded.  pi_j(O_i) is the probability that a missing absorption landed
 * in absorbing state j given subject covariates O_i; the fit uses complete
 * cases only (subjects observed to absorb with a recorded destination),
 * which is valid when missingness depends on O_i but not on the
 * destination itself.
 */

#include <Eigen/Dense>
#include <vector>

#include "tptest/event_history.hpp"

namespace tptest {

class MissingnessModel {
 public:
  enum class Kind { supplied, logistic };

  // Fixed probabilities over the absorbing states (sorted by label),
  // applied to every missing-destination subject.
  static MissingnessModel supplied(const StateSpace& space,
                                   std::vector<double> probabilities);

  // Multinomial-logistic coefficients: one row per non-reference absorbing
  // state (reference = smallest label), columns = intercept + covariates.
  static MissingnessModel logistic(const StateSpace& space,
                                   Eigen::MatrixXd coefficients);

  Kind kind() const noexcept { return kind_; }
  int covariate_dim() const noexcept { return covariate_dim_; }
  const std::vector<int>& absorbing_states() const noexcept { return states_; }
  const Eigen::MatrixXd& coefficients() const;

  // pi over the absorbing states (sorted by label) for one subject.
  std::vector<double> probabilities(const std::vector<double>& covariates) const;

 private:
  MissingnessModel() = default;

  Kind kind_ = Kind::supplied;
  std::vector<int> states_;       // absorbing labels, ascending
  std::vector<double> pi_;        // supplied kind
  Eigen::MatrixXd beta_;          // logistic kind
  int covariate_dim_ = 0;
};

// Fit the multinomial-logistic destination model on complete cases by
// Newton-Raphson (gradient sup-norm <= 1e-9, at most 100 iterations).
// Separation or an empty destination class is an estimation error.
MissingnessModel fit_logistic_missingness(const EventHistorySample& sample);

}  // namespace tptest
