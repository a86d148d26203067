#include "tptest/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace tptest {

WeightedProcesses standard_processes(const CountingProcessSet& processes) {
  WeightedProcesses wp{processes.space(), processes.num_subjects(), {}, {},
                       Variant::standard, 0.0};
  wp.risk = processes.risk_intervals();
  for (const JumpAtom& e : processes.events())
    if (e.to != kAbsorbedUnknown) wp.atoms.push_back(e);
  return wp;
}

WeightedProcesses landmark_processes(const CountingProcessSet& processes,
                                     double s, int h) {
  const StateSpace& space = processes.space();
  if (!space.is_transient(h))
    throw ArgumentError("landmark state must be transient");
  if (s < 0.0) throw ArgumentError("landmark time must be >= 0");

  // X(s) = h iff some occupancy interval (a, b] of state h has a <= s < b;
  // the right-open end matches cadlag paths (a transition at exactly s puts
  // the subject in the new state).
  std::vector<char> in_set(static_cast<std::size_t>(processes.num_subjects()), 0);
  for (const RiskInterval& r : processes.risk_intervals())
    if (r.state == h && r.start <= s && s < r.end)
      in_set[static_cast<std::size_t>(r.subject)] = 1;
  if (std::find(in_set.begin(), in_set.end(), 1) == in_set.end())
    throw EstimationError("empty landmark set: no subject occupies state " +
                          std::to_string(h) + " at time " + std::to_string(s));

  WeightedProcesses wp{space, processes.num_subjects(), {}, {},
                       Variant::landmark, s};
  for (const JumpAtom& e : processes.events())
    if (e.time > s && in_set[static_cast<std::size_t>(e.subject)] &&
        e.to != kAbsorbedUnknown)
      wp.atoms.push_back(e);
  for (const RiskInterval& r : processes.risk_intervals()) {
    if (!in_set[static_cast<std::size_t>(r.subject)]) continue;
    if (r.end <= s) continue;
    wp.risk.push_back({r.subject, r.state, std::max(r.start, s), r.end});
  }
  return wp;
}

WeightedProcesses npmple_processes(const CountingProcessSet& processes,
                                   const MissingnessModel& model) {
  const StateSpace& space = processes.space();
  if (model.absorbing_states() != space.absorbing())
    throw ArgumentError(
        "missingness model covers a different set of absorbing states");

  WeightedProcesses wp{space, processes.num_subjects(), {}, {},
                       Variant::npmple, 0.0};
  wp.risk = processes.risk_intervals();
  const auto& meta = processes.meta();
  for (const JumpAtom& e : processes.events()) {
    if (e.to != kAbsorbedUnknown) {
      wp.atoms.push_back(e);
      continue;
    }
    const auto& subject = meta[static_cast<std::size_t>(e.subject)];
    std::vector<double> pi;
    try {
      pi = model.probabilities(subject.covariates);
    } catch (const Error& err) {
      throw DataError("subject '" + subject.id + "': " + err.what());
    }
    const auto& absorbing = space.absorbing();
    for (std::size_t a = 0; a < absorbing.size(); ++a)
      wp.atoms.push_back({e.time, e.from, absorbing[a], pi[a], e.subject});
  }
  std::sort(wp.atoms.begin(), wp.atoms.end(),
            [](const JumpAtom& a, const JumpAtom& b) {
              if (a.time != b.time) return a.time < b.time;
              if (a.subject != b.subject) return a.subject < b.subject;
              if (a.from != b.from) return a.from < b.from;
              return a.to < b.to;
            });
  return wp;
}

CumulativeIntensityMatrix::CumulativeIntensityMatrix(
    EventGrid grid, int num_states, int sample_size,
    std::vector<Eigen::MatrixXd> increments, Eigen::MatrixXi at_risk,
    std::vector<std::vector<std::pair<int, int>>> jumps)
    : grid_(std::move(grid)),
      q_(num_states),
      n_(sample_size),
      inc_(std::move(increments)),
      at_risk_(std::move(at_risk)),
      jumps_(std::move(jumps)) {}

double CumulativeIntensityMatrix::cumulative(int from, int to, double t) const {
  if (from < 1 || from > q_ || to < 1 || to > q_)
    throw ArgumentError("cumulative: state outside the state space");
  double acc = 0.0;
  const std::ptrdiff_t last = grid_.index_at(t);
  for (std::ptrdiff_t k = 0; k <= last; ++k)
    acc += inc_[static_cast<std::size_t>(k)](from - 1, to - 1);
  return acc;
}

CumulativeIntensityMatrix intensity_from_processes(const WeightedProcesses& wp,
                                                   const EventGrid& grid) {
  const int q = wp.space.num_states();
  const std::size_t K = grid.size();

  // At-risk counts per (grid time, state): #{intervals with start < u <= end}
  // via merged sweeps of interval starts and ends against the grid.
  Eigen::MatrixXi at_risk = Eigen::MatrixXi::Zero(
      static_cast<Eigen::Index>(K), q);
  for (int state = 1; state <= q; ++state) {
    std::vector<double> starts, ends;
    for (const RiskInterval& r : wp.risk) {
      if (r.state != state) continue;
      starts.push_back(r.start);
      ends.push_back(r.end);
    }
    if (starts.empty()) continue;
    std::sort(starts.begin(), starts.end());
    std::sort(ends.begin(), ends.end());
    std::size_t si = 0, ei = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double u = grid.times[k];
      while (si < starts.size() && starts[si] < u) ++si;
      while (ei < ends.size() && ends[ei] < u) ++ei;
      at_risk(static_cast<Eigen::Index>(k), state - 1) =
          static_cast<int>(si - ei);
    }
  }

  std::vector<Eigen::MatrixXd> inc(K, Eigen::MatrixXd::Zero(q, q));
  std::vector<std::vector<std::pair<int, int>>> jumps(K);

  // Accumulate jump mass; atoms are time-sorted so a single sweep suffices.
  std::size_t k = 0;
  for (const JumpAtom& a : wp.atoms) {
    if (a.time > grid.tau) continue;
    while (k < K && grid.times[k] < a.time) ++k;
    if (k == K || grid.times[k] != a.time)
      throw ArgumentError("grid does not cover a jump at t = " +
                          std::to_string(a.time));
    inc[k](a.from - 1, a.to - 1) += a.weight;
  }

  for (std::size_t g = 0; g < K; ++g) {
    Eigen::MatrixXd& m = inc[g];
    for (int from = 1; from <= q; ++from) {
      double total = 0.0;
      for (int to = 1; to <= q; ++to) {
        if (to == from) continue;
        const double mass = m(from - 1, to - 1);
        if (mass <= 0.0) continue;
        const int y = at_risk(static_cast<Eigen::Index>(g), from - 1);
        if (y <= 0)
          throw EstimationError(
              "jump with an empty risk set at t = " +
              std::to_string(grid.times[g]) + " from state " +
              std::to_string(from));
        const double d = mass / static_cast<double>(y);
        m(from - 1, to - 1) = d;
        total += d;
        jumps[g].emplace_back(from, to);
      }
      m(from - 1, from - 1) = -total;
    }
  }

  return CumulativeIntensityMatrix(grid, q, wp.n, std::move(inc),
                                   std::move(at_risk), std::move(jumps));
}

CumulativeIntensityMatrix nelson_aalen(const CountingProcessSet& processes,
                                       const EventGrid& grid) {
  return intensity_from_processes(standard_processes(processes), grid);
}

CumulativeIntensityMatrix npmple_intensities(const EventHistorySample& sample,
                                             const MissingnessModel& model,
                                             const EventGrid& grid) {
  const CountingProcessSet processes(sample);
  return intensity_from_processes(npmple_processes(processes, model), grid);
}

TransitionProbabilityCurve::TransitionProbabilityCurve(
    double start, EventGrid grid, int num_states,
    std::vector<Eigen::MatrixXd> values, Variant variant)
    : s_(start),
      grid_(std::move(grid)),
      q_(num_states),
      values_(std::move(values)),
      variant_(variant) {}

Eigen::MatrixXd TransitionProbabilityCurve::value_at(double t) const {
  const std::ptrdiff_t k = grid_.index_at(t);
  if (k < 0) return Eigen::MatrixXd::Identity(q_, q_);
  return values_[static_cast<std::size_t>(k)];
}

double TransitionProbabilityCurve::value_at(double t, int from, int to) const {
  if (from < 1 || from > q_ || to < 1 || to > q_)
    throw ArgumentError("value_at: state outside the state space");
  const std::ptrdiff_t k = grid_.index_at(t);
  if (k < 0) return from == to ? 1.0 : 0.0;
  return values_[static_cast<std::size_t>(k)](from - 1, to - 1);
}

TransitionProbabilityCurve aalen_johansen(const CumulativeIntensityMatrix& A,
                                          double s) {
  if (s < 0.0) throw ArgumentError("start time must be >= 0");
  if (!(s < A.grid().tau))
    throw ArgumentError("start time must lie before the grid horizon");

  const int q = A.num_states();
  EventGrid sub;
  sub.tau = A.grid().tau;
  std::vector<std::size_t> source;
  for (std::size_t k = 0; k < A.grid().size(); ++k)
    if (A.grid().times[k] > s) {
      sub.times.push_back(A.grid().times[k]);
      source.push_back(k);
    }

  std::vector<Eigen::MatrixXd> values;
  values.reserve(sub.times.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(q, q);
  for (std::size_t k = 0; k < source.size(); ++k) {
    if (A.has_jumps(source[k])) {
      const Eigen::MatrixXd step =
          Eigen::MatrixXd::Identity(q, q) + A.increment(source[k]);
      P = P * step;
    }
    values.push_back(P);
  }
  return TransitionProbabilityCurve(s, std::move(sub), q, std::move(values));
}

TransitionProbabilityCurve landmark_aalen_johansen(
    const EventHistorySample& sample, double s, int h, const EventGrid& grid) {
  const CountingProcessSet processes(sample);
  const WeightedProcesses wp = landmark_processes(processes, s, h);
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  const TransitionProbabilityCurve curve = aalen_johansen(A, s);
  std::vector<Eigen::MatrixXd> values;
  values.reserve(curve.grid().size());
  for (std::size_t k = 0; k < curve.grid().size(); ++k)
    values.push_back(curve.at_index(k));
  return TransitionProbabilityCurve(curve.start(), curve.grid(),
                                    curve.num_states(), std::move(values),
                                    Variant::landmark);
}

TransitionProbabilityCurve landmark_aalen_johansen(
    const EventHistorySample& sample, double s, int h) {
  return landmark_aalen_johansen(sample, s, h,
                                 pooled_event_grid({&sample}));
}

OccupationCurves state_occupation(const TransitionProbabilityCurve& curve,
                                  const std::vector<double>& initial) {
  if (curve.start() != 0.0)
    throw ArgumentError("state occupation needs a curve started at s = 0");
  const int q = curve.num_states();
  if (static_cast<int>(initial.size()) != q)
    throw ArgumentError("initial distribution has wrong length");
  double total = 0.0;
  for (double p : initial) {
    if (p < 0.0) throw ArgumentError("initial distribution must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ArgumentError("initial distribution must sum to 1");

  Eigen::RowVectorXd init(q);
  for (int j = 0; j < q; ++j) init(j) = initial[static_cast<std::size_t>(j)];

  OccupationCurves out;
  out.grid = curve.grid();
  out.initial = initial;
  out.values.resize(static_cast<Eigen::Index>(curve.grid().size()), q);
  for (std::size_t k = 0; k < curve.grid().size(); ++k)
    out.values.row(static_cast<Eigen::Index>(k)) = init * curve.at_index(k);
  return out;
}

double OccupationCurves::value_at(int state, double t) const {
  const int q = static_cast<int>(initial.size());
  if (state < 1 || state > q)
    throw ArgumentError("value_at: state outside the state space");
  const std::ptrdiff_t k = grid.index_at(t);
  if (k < 0) return initial[static_cast<std::size_t>(state - 1)];
  return values(static_cast<Eigen::Index>(k), state - 1);
}

}  // namespace tptest
