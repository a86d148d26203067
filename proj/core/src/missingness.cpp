#include "tptest/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tptest {

namespace {

// Softmax over (0, eta_1, ..., eta_{C-1}) with max subtraction; stable for
// the large linear predictors that show up near separation.
std::vector<double> softmax_with_reference(const Eigen::VectorXd& eta) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < eta.size(); ++c) m = std::max(m, eta(c));
  double denom = std::exp(-m);
  std::vector<double> out(static_cast<std::size_t>(eta.size()) + 1);
  for (Eigen::Index c = 0; c < eta.size(); ++c) {
    out[static_cast<std::size_t>(c) + 1] = std::exp(eta(c) - m);
    denom += out[static_cast<std::size_t>(c) + 1];
  }
  out[0] = std::exp(-m) / denom;
  for (Eigen::Index c = 0; c < eta.size(); ++c)
    out[static_cast<std::size_t>(c) + 1] /= denom;
  return out;
}

}  // namespace

MissingnessModel MissingnessModel::supplied(const StateSpace& space,
                                            std::vector<double> probabilities) {
  if (space.absorbing().empty())
    throw ArgumentError("missingness model needs absorbing states");
  if (probabilities.size() != space.absorbing().size())
    throw ArgumentError(
        "supplied probabilities must match the number of absorbing states");
  double total = 0.0;
  for (double p : probabilities) {
    if (p < 0.0)
      throw ArgumentError("supplied probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ArgumentError("supplied probabilities must sum to 1");

  MissingnessModel m;
  m.kind_ = Kind::supplied;
  m.states_ = space.absorbing();
  m.pi_ = std::move(probabilities);
  m.covariate_dim_ = 0;
  return m;
}

MissingnessModel MissingnessModel::logistic(const StateSpace& space,
                                            Eigen::MatrixXd coefficients) {
  const auto& absorbing = space.absorbing();
  if (absorbing.size() < 2)
    throw ArgumentError("logistic missingness needs >= 2 absorbing states");
  if (coefficients.rows() != static_cast<Eigen::Index>(absorbing.size()) - 1 ||
      coefficients.cols() < 1)
    throw ArgumentError("coefficient matrix has the wrong shape");

  MissingnessModel m;
  m.kind_ = Kind::logistic;
  m.states_ = absorbing;
  m.beta_ = std::move(coefficients);
  m.covariate_dim_ = static_cast<int>(m.beta_.cols()) - 1;
  return m;
}

const Eigen::MatrixXd& MissingnessModel::coefficients() const {
  if (kind_ != Kind::logistic)
    throw ArgumentError("supplied-probability model has no coefficients");
  return beta_;
}

std::vector<double> MissingnessModel::probabilities(
    const std::vector<double>& covariates) const {
  if (kind_ == Kind::supplied) return pi_;
  if (static_cast<int>(covariates.size()) != covariate_dim_)
    throw DataError("subject covariates have dimension " +
                    std::to_string(covariates.size()) + ", model expects " +
                    std::to_string(covariate_dim_));
  Eigen::VectorXd x(covariate_dim_ + 1);
  x(0) = 1.0;
  for (int d = 0; d < covariate_dim_; ++d)
    x(d + 1) = covariates[static_cast<std::size_t>(d)];
  return softmax_with_reference(beta_ * x);
}

MissingnessModel fit_logistic_missingness(const EventHistorySample& sample) {
  const StateSpace& space = sample.space();
  const auto& absorbing = space.absorbing();
  if (absorbing.size() < 2)
    throw ArgumentError(
        "destination model needs at least two absorbing states");
  const int C = static_cast<int>(absorbing.size());

  // Complete cases: recorded absorptions.
  std::vector<const SubjectRecord*> cases;
  for (const SubjectRecord& s : sample.subjects()) {
    if (!s.absorb_observed) continue;
    const int fin = s.final_state();
    if (space.is_absorbing(fin)) cases.push_back(&s);
  }
  if (cases.empty())
    throw EstimationError("no complete cases to fit the destination model");

  const int d = static_cast<int>(cases.front()->covariates.size());
  std::vector<int> klass(cases.size());
  std::vector<int> class_count(static_cast<std::size_t>(C), 0);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (static_cast<int>(cases[i]->covariates.size()) != d)
      throw DataError("subject '" + cases[i]->id +
                      "': covariate dimension differs across subjects");
    const int fin = cases[i]->final_state();
    const auto it = std::lower_bound(absorbing.begin(), absorbing.end(), fin);
    klass[i] = static_cast<int>(it - absorbing.begin());
    ++class_count[static_cast<std::size_t>(klass[i])];
  }
  for (int c = 0; c < C; ++c)
    if (class_count[static_cast<std::size_t>(c)] == 0)
      throw EstimationError("no complete case absorbed into state " +
                            std::to_string(absorbing[static_cast<std::size_t>(c)]) +
                            "; destination model is not identifiable");

  const int p = d + 1;              // intercept + covariates
  const int dim = (C - 1) * p;      // stacked parameter vector
  Eigen::MatrixXd X(static_cast<Eigen::Index>(cases.size()), p);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (int a = 0; a < d; ++a)
      X(static_cast<Eigen::Index>(i), a + 1) =
          cases[i]->covariates[static_cast<std::size_t>(a)];
  }

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(C - 1, p);
  double grad_norm = 0.0;
  int iter = 0;
  for (; iter < 100; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd neg_hess = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(i)).transpose();
      const std::vector<double> pi = softmax_with_reference(beta * x);
      for (int c = 1; c < C; ++c) {
        const double resid =
            (klass[i] == c ? 1.0 : 0.0) - pi[static_cast<std::size_t>(c)];
        grad.segment((c - 1) * p, p) += resid * x;
        for (int c2 = 1; c2 < C; ++c2) {
          const double w = pi[static_cast<std::size_t>(c)] *
                           ((c == c2 ? 1.0 : 0.0) -
                            pi[static_cast<std::size_t>(c2)]);
          if (w != 0.0)
            neg_hess.block((c - 1) * p, (c2 - 1) * p, p, p) +=
                w * (x * x.transpose());
        }
      }
    }
    grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm <= 1e-9) break;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
    if (ldlt.info() != Eigen::Success)
      throw EstimationError(
          "destination model: singular information matrix (constant or "
          "collinear covariates)");
    const Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite())
      throw EstimationError("destination model: Newton step not finite");
    for (int c = 1; c < C; ++c)
      beta.row(c - 1) += step.segment((c - 1) * p, p).transpose();

    if (beta.lpNorm<Eigen::Infinity>() > 50.0) {
      std::ostringstream msg;
      msg << "destination model: separation suspected (|beta|max = "
          << beta.lpNorm<Eigen::Infinity>() << " after " << iter + 1
          << " iterations, gradient sup-norm " << grad_norm << ")";
      throw EstimationError(msg.str());
    }
  }
  if (grad_norm > 1e-9) {
    std::ostringstream msg;
    msg << "destination model did not converge in 100 Newton iterations "
           "(gradient sup-norm "
        << grad_norm << ", |beta|max " << beta.lpNorm<Eigen::Infinity>()
        << "); data may be separated";
    throw EstimationError(msg.str());
  }

  return MissingnessModel::logistic(space, std::move(beta));
}

}  // namespace tptest
