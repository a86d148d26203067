#include "tptest/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tptest/errors.hpp"
#include "tptest/step_math.hpp"

namespace tptest {

namespace {

void check_processes_match(const WeightedProcesses& wp,
                           const CumulativeIntensityMatrix& A) {
  if (A.sample_size() != wp.n)
    throw ArgumentError("intensity matrix was built from a different sample");
  if (A.num_states() != wp.space.num_states())
    throw ArgumentError("intensity matrix state count does not match");
  for (const JumpAtom& a : wp.atoms) {
    if (a.time > A.grid().tau) continue;
    if (A.grid().index_at(a.time) < 0)
      throw ArgumentError("intensity grid does not cover a jump at t = " +
                          std::to_string(a.time));
  }
}

void check_influence_args(const WeightedProcesses& wp,
                          const CumulativeIntensityMatrix& A, int from, int to,
                          double start,
                          const std::vector<std::size_t>& capture,
                          std::ptrdiff_t carry) {
  check_processes_match(wp, A);
  const StateSpace& space = wp.space;
  if (!space.contains(from) || !space.contains(to))
    throw ArgumentError("transition outside the state space");
  if (!space.is_transient(from))
    throw ArgumentError("influence curves need a transient source state");
  if (start < 0.0) throw ArgumentError("start time must be >= 0");

  const auto& times = A.grid().times;
  for (std::size_t c = 0; c < capture.size(); ++c) {
    if (capture[c] >= times.size() || times[capture[c]] <= start)
      throw ArgumentError("capture index outside (start, tau]");
    if (c > 0 && capture[c] <= capture[c - 1])
      throw ArgumentError("capture indices must be ascending");
  }
  if (carry >= 0) {
    if (static_cast<std::size_t>(carry) >= times.size() ||
        times[static_cast<std::size_t>(carry)] <= start)
      throw ArgumentError("carry index outside (start, tau]");
    if (!capture.empty() && static_cast<std::size_t>(carry) >= capture.front())
      throw ArgumentError("carry index must precede captured indices");
  }
}

// At-risk walker shared by the per-subject and aggregated recursions.
// Y_il(u) = 1 iff start < u <= end, so an endpoint takes effect at the first
// step time strictly after it; exits fire before entries at equal timestamps
// (a transition leaves one state before joining the next).
struct RiskEndpointWalker {
  struct Endpoint {
    double time;
    int subject;
    int state;
  };
  std::vector<Endpoint> entries, exits;
  std::size_t ep = 0, xp = 0;

  explicit RiskEndpointWalker(const std::vector<RiskInterval>& risk) {
    entries.reserve(risk.size());
    for (const RiskInterval& r : risk) {
      entries.push_back({r.start, r.subject, r.state});
      if (std::isfinite(r.end)) exits.push_back({r.end, r.subject, r.state});
    }
    auto by_time = [](const Endpoint& a, const Endpoint& b) {
      return a.time < b.time;
    };
    std::stable_sort(entries.begin(), entries.end(), by_time);
    std::stable_sort(exits.begin(), exits.end(), by_time);
  }

  template <class OnExit, class OnEnter>
  void advance(double u, OnExit on_exit, OnEnter on_enter) {
    while (true) {
      const double te = xp < exits.size()
                            ? exits[xp].time
                            : std::numeric_limits<double>::infinity();
      const double tn = ep < entries.size()
                            ? entries[ep].time
                            : std::numeric_limits<double>::infinity();
      if (te < u && te <= tn) {
        on_exit(exits[xp++]);
      } else if (tn < u) {
        on_enter(entries[ep++]);
      } else {
        break;
      }
    }
  }
};

}  // namespace

MartingaleResidualSet::MartingaleResidualSet(const WeightedProcesses& wp,
                                             const CumulativeIntensityMatrix& A)
    : A_(A), space_(wp.space), n_(wp.n) {
  check_processes_match(wp, A);
  atoms_.resize(A_.grid().size());
  for (const JumpAtom& a : wp.atoms) {
    if (a.time > A_.grid().tau) continue;
    atoms_[static_cast<std::size_t>(A_.grid().index_at(a.time))].push_back(a);
  }
  risk_.resize(static_cast<std::size_t>(n_));
  for (const RiskInterval& r : wp.risk)
    risk_[static_cast<std::size_t>(r.subject)].push_back(r);
}

MartingaleResidualSet::MartingaleResidualSet(const CountingProcessSet& cps,
                                             const CumulativeIntensityMatrix& A)
    : MartingaleResidualSet(standard_processes(cps), A) {}

double MartingaleResidualSet::increment(int subject, int from, int to,
                                        std::size_t k) const {
  if (subject < 0 || subject >= n_)
    throw ArgumentError("subject index out of range");
  if (k >= A_.grid().size()) throw ArgumentError("grid index out of range");
  if (!space_.contains(from) || !space_.contains(to))
    throw ArgumentError("state outside the state space");
  if (!space_.is_transient(from))
    throw ArgumentError("residuals are defined for transient source states");

  if (from == to) {
    double total = 0.0;
    for (int m = 1; m <= space_.num_states(); ++m)
      if (m != from) total -= increment(subject, from, m, k);
    return total;
  }

  double dn = 0.0;
  for (const JumpAtom& a : atoms_[k])
    if (a.subject == subject && a.from == from && a.to == to) dn += a.weight;

  const double u = A_.grid().times[k];
  double y = 0.0;
  for (const RiskInterval& r : risk_[static_cast<std::size_t>(subject)])
    if (r.state == from && r.start < u && u <= r.end) {
      y = 1.0;
      break;
    }
  return dn - y * A_.increment(k)(from - 1, to - 1);
}

double MartingaleResidualSet::value(int subject, int from, int to,
                                    double t) const {
  double total = 0.0;
  for (std::size_t k = 0; k < A_.grid().size(); ++k) {
    if (A_.grid().times[k] > t) break;
    total += increment(subject, from, to, k);
  }
  return total;
}

MartingaleResidualSet martingale_residuals(const CountingProcessSet& cps,
                                           const CumulativeIntensityMatrix& A) {
  return MartingaleResidualSet(cps, A);
}

InfluenceCurveSet::InfluenceCurveSet(int from, int to, double start,
                                     Variant variant, EventGrid grid,
                                     Eigen::MatrixXd curves,
                                     bool beta_variance_ignored)
    : from_(from),
      to_(to),
      start_(start),
      variant_(variant),
      grid_(std::move(grid)),
      curves_(std::move(curves)),
      beta_flag_(beta_variance_ignored) {
  if (curves_.cols() != static_cast<Eigen::Index>(grid_.size()))
    throw ArgumentError("influence matrix does not match its grid");
}

double InfluenceCurveSet::value(int subject, double t) const {
  if (subject < 0 || subject >= sample_size())
    throw ArgumentError("subject index out of range");
  const std::ptrdiff_t k = step_index(grid_.times, t);
  if (k < 0) return 0.0;
  return curves_(subject, static_cast<Eigen::Index>(k));
}

Eigen::MatrixXd influence_matrix(const WeightedProcesses& wp,
                                 const CumulativeIntensityMatrix& A, int from,
                                 int to, double start,
                                 const std::vector<std::size_t>& capture,
                                 std::ptrdiff_t carry) {
  check_influence_args(wp, A, from, to, start, capture, carry);
  const int n = wp.n;
  const int q = wp.space.num_states();
  const auto& times = A.grid().times;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      n, 1 + static_cast<Eigen::Index>(capture.size()));
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, q);
  Eigen::RowVectorXd prow = Eigen::RowVectorXd::Zero(q);
  prow(from - 1) = 1.0;

  // Per-state intrusive membership lists driven by the shared walker.
  RiskEndpointWalker walker(wp.risk);
  std::vector<int> head(static_cast<std::size_t>(q) + 1, -1);
  std::vector<int> nxt(static_cast<std::size_t>(n), -1);
  std::vector<int> prv(static_cast<std::size_t>(n), -1);
  auto advance_walker = [&](double u) {
    walker.advance(
        u,
        [&](const RiskEndpointWalker::Endpoint& e) {
          if (prv[e.subject] >= 0)
            nxt[prv[e.subject]] = nxt[e.subject];
          else
            head[static_cast<std::size_t>(e.state)] = nxt[e.subject];
          if (nxt[e.subject] >= 0) prv[nxt[e.subject]] = prv[e.subject];
          nxt[e.subject] = prv[e.subject] = -1;
        },
        [&](const RiskEndpointWalker::Endpoint& e) {
          const int old = head[static_cast<std::size_t>(e.state)];
          head[static_cast<std::size_t>(e.state)] = e.subject;
          nxt[e.subject] = old;
          prv[e.subject] = -1;
          if (old >= 0) prv[old] = e.subject;
        });
  };

  // Scratch reused across steps.
  Eigen::MatrixXd oldcols(n, q);
  Eigen::RowVectorXd oldprow(q);
  std::vector<double> coef(static_cast<std::size_t>(q) + 1, 0.0);
  std::vector<int> jstates;
  jstates.reserve(static_cast<std::size_t>(q));

  std::size_t ap = 0;  // atoms sorted by time
  while (ap < wp.atoms.size() && wp.atoms[ap].time <= start) ++ap;
  std::size_t cp = 0;

  for (std::size_t k = 0; k < times.size(); ++k) {
    const double u = times[k];
    if (u <= start) continue;
    if (u > A.grid().tau) break;

    const auto& pairs = A.jump_pairs(k);
    if (!pairs.empty()) {
      advance_walker(u);
      const Eigen::MatrixXd& inc = A.increment(k);

      jstates.clear();
      for (const auto& [l, m] : pairs) {
        (void)m;
        if (jstates.empty() || jstates.back() != l) jstates.push_back(l);
      }
      for (int l : jstates) {
        const double ybar = A.at_risk_average(k, l);
        if (!(ybar > 0.0))
          throw EstimationError(
              "influence recursion: jump with empty risk set at t = " +
              std::to_string(u));
        coef[static_cast<std::size_t>(l)] = prow(l - 1) / ybar;
        oldcols.col(l - 1) = S.col(l - 1);
        oldprow(l - 1) = prow(l - 1);
      }

      // Product part: S <- S (I + dA), sources taken from the old columns.
      for (const auto& [l, m] : pairs) {
        const double da = inc(l - 1, m - 1);
        S.col(m - 1) += da * oldcols.col(l - 1);
        S.col(l - 1) -= da * oldcols.col(l - 1);
      }

      // Compensator part of the new residual term at u.
      for (int l : jstates) {
        const double c = coef[static_cast<std::size_t>(l)];
        const double rowsum = -inc(l - 1, l - 1);
        for (int i = head[static_cast<std::size_t>(l)]; i >= 0; i = nxt[i]) {
          S(i, l - 1) += c * rowsum;
          for (const auto& [pl, m] : pairs)
            if (pl == l) S(i, m - 1) -= c * inc(l - 1, m - 1);
        }
      }

      // Counting part: observed (possibly fractional) jumps at u.
      for (; ap < wp.atoms.size() && wp.atoms[ap].time == u; ++ap) {
        const JumpAtom& a = wp.atoms[ap];
        if (a.weight == 0.0) continue;
        const double c = coef[static_cast<std::size_t>(a.from)];
        S(a.subject, a.to - 1) += c * a.weight;
        S(a.subject, a.from - 1) -= c * a.weight;
      }

      // Left-limit row of the estimate, advanced after its use above.
      for (const auto& [l, m] : pairs) {
        const double da = inc(l - 1, m - 1);
        prow(m - 1) += da * oldprow(l - 1);
        prow(l - 1) -= da * oldprow(l - 1);
      }
    } else {
      // No jump mass: I + dA = I, but fractional atoms of weight zero may
      // still sit at u and must be consumed.
      while (ap < wp.atoms.size() && wp.atoms[ap].time == u) ++ap;
    }

    if (carry >= 0 && static_cast<std::size_t>(carry) == k)
      out.col(0) = S.col(to - 1);
    if (cp < capture.size() && capture[cp] == k) {
      out.col(static_cast<Eigen::Index>(cp) + 1) = S.col(to - 1);
      ++cp;
    }
  }
  if (cp != capture.size())
    throw ArgumentError("capture index beyond the grid horizon");
  return out;
}

Eigen::MatrixXd influence_multiplier_aggregate(
    const WeightedProcesses& wp, const CumulativeIntensityMatrix& A, int from,
    int to, double start, const std::vector<std::size_t>& capture,
    std::ptrdiff_t carry, const Eigen::MatrixXd& xi) {
  check_influence_args(wp, A, from, to, start, capture, carry);
  if (xi.cols() != wp.n)
    throw ArgumentError("multiplier matrix needs one column per subject");
  const Eigen::Index draws = xi.rows();
  const int q = wp.space.num_states();
  const auto& times = A.grid().times;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      draws, 1 + static_cast<Eigen::Index>(capture.size()));
  // V = sum_i xi(., i) * S_i: the subject recursion is linear in its atom and
  // compensator loads and the column operations are subject-independent, so
  // the aggregate obeys the same recursion with Z(., l) = sum of xi over the
  // subjects currently at risk in l replacing the membership lists.
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(draws, q);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(draws, q);
  Eigen::RowVectorXd prow = Eigen::RowVectorXd::Zero(q);
  prow(from - 1) = 1.0;

  RiskEndpointWalker walker(wp.risk);
  auto advance_walker = [&](double u) {
    walker.advance(
        u,
        [&](const RiskEndpointWalker::Endpoint& e) {
          Z.col(e.state - 1) -= xi.col(e.subject);
        },
        [&](const RiskEndpointWalker::Endpoint& e) {
          Z.col(e.state - 1) += xi.col(e.subject);
        });
  };

  Eigen::MatrixXd oldV(draws, q);
  Eigen::RowVectorXd oldprow(q);
  std::vector<double> coef(static_cast<std::size_t>(q) + 1, 0.0);
  std::vector<int> jstates;
  jstates.reserve(static_cast<std::size_t>(q));

  std::size_t ap = 0;
  while (ap < wp.atoms.size() && wp.atoms[ap].time <= start) ++ap;
  std::size_t cp = 0;

  for (std::size_t k = 0; k < times.size(); ++k) {
    const double u = times[k];
    if (u <= start) continue;
    if (u > A.grid().tau) break;

    const auto& pairs = A.jump_pairs(k);
    if (!pairs.empty()) {
      advance_walker(u);
      const Eigen::MatrixXd& inc = A.increment(k);

      jstates.clear();
      for (const auto& [l, m] : pairs) {
        (void)m;
        if (jstates.empty() || jstates.back() != l) jstates.push_back(l);
      }
      for (int l : jstates) {
        const double ybar = A.at_risk_average(k, l);
        if (!(ybar > 0.0))
          throw EstimationError(
              "influence recursion: jump with empty risk set at t = " +
              std::to_string(u));
        coef[static_cast<std::size_t>(l)] = prow(l - 1) / ybar;
        oldV.col(l - 1) = V.col(l - 1);
        oldprow(l - 1) = prow(l - 1);
      }

      for (const auto& [l, m] : pairs) {
        const double da = inc(l - 1, m - 1);
        V.col(m - 1) += da * oldV.col(l - 1);
        V.col(l - 1) -= da * oldV.col(l - 1);
      }

      for (int l : jstates) {
        const double c = coef[static_cast<std::size_t>(l)];
        const double rowsum = -inc(l - 1, l - 1);
        V.col(l - 1) += (c * rowsum) * Z.col(l - 1);
        for (const auto& [pl, m] : pairs)
          if (pl == l) V.col(m - 1) -= (c * inc(l - 1, m - 1)) * Z.col(l - 1);
      }

      for (; ap < wp.atoms.size() && wp.atoms[ap].time == u; ++ap) {
        const JumpAtom& a = wp.atoms[ap];
        if (a.weight == 0.0) continue;
        const double c = coef[static_cast<std::size_t>(a.from)];
        V.col(a.to - 1) += (c * a.weight) * xi.col(a.subject);
        V.col(a.from - 1) -= (c * a.weight) * xi.col(a.subject);
      }

      for (const auto& [l, m] : pairs) {
        const double da = inc(l - 1, m - 1);
        prow(m - 1) += da * oldprow(l - 1);
        prow(l - 1) -= da * oldprow(l - 1);
      }
    } else {
      while (ap < wp.atoms.size() && wp.atoms[ap].time == u) ++ap;
    }

    if (carry >= 0 && static_cast<std::size_t>(carry) == k)
      out.col(0) = V.col(to - 1);
    if (cp < capture.size() && capture[cp] == k) {
      out.col(static_cast<Eigen::Index>(cp) + 1) = V.col(to - 1);
      ++cp;
    }
  }
  if (cp != capture.size())
    throw ArgumentError("capture index beyond the grid horizon");
  return out;
}

InfluenceCurveSet influence_curves(const WeightedProcesses& wp,
                                   const CumulativeIntensityMatrix& A,
                                   int from, int to, double start) {
  EventGrid sub;
  sub.tau = A.grid().tau;
  std::vector<std::size_t> capture;
  for (std::size_t k = 0; k < A.grid().size(); ++k)
    if (A.grid().times[k] > start && A.grid().times[k] <= A.grid().tau) {
      capture.push_back(k);
      sub.times.push_back(A.grid().times[k]);
    }
  Eigen::MatrixXd full =
      influence_matrix(wp, A, from, to, start, capture, -1);
  Eigen::MatrixXd curves = full.rightCols(full.cols() - 1);
  const bool beta_flag = wp.variant == Variant::npmple;
  return InfluenceCurveSet(from, to, start, wp.variant, std::move(sub),
                           std::move(curves), beta_flag);
}

InfluenceCurveSet influence_curves(const EventHistorySample& sample, int from,
                                   int to, double start) {
  const CountingProcessSet cps = build_counting_processes(sample);
  const WeightedProcesses wp = standard_processes(cps);
  const EventGrid grid = pooled_event_grid({&sample});
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  return influence_curves(wp, A, from, to, start);
}

}  // namespace tptest
