#include "tptest/event_history.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tptest {

namespace {

[[noreturn]] void fail_subject(const std::string& id, const std::string& what) {
  throw DataError("subject '" + id + "': " + what);
}

}  // namespace

StateSpace::StateSpace(int num_states, std::vector<int> absorbing)
    : q_(num_states), absorbing_(std::move(absorbing)) {
  if (q_ < 1) throw ArgumentError("state space needs at least one state");
  std::sort(absorbing_.begin(), absorbing_.end());
  absorbing_.erase(std::unique(absorbing_.begin(), absorbing_.end()),
                   absorbing_.end());
  for (int s : absorbing_)
    if (!contains(s))
      throw ArgumentError("absorbing state " + std::to_string(s) +
                          " outside 1.." + std::to_string(q_));
  if (static_cast<int>(absorbing_.size()) == q_)
    throw ArgumentError("at least one state must be transient");
}

bool StateSpace::is_absorbing(int state) const noexcept {
  return std::binary_search(absorbing_.begin(), absorbing_.end(), state);
}

std::vector<int> StateSpace::transient() const {
  std::vector<int> out;
  for (int s = 1; s <= q_; ++s)
    if (!is_absorbing(s)) out.push_back(s);
  return out;
}

EventHistorySample::EventHistorySample(StateSpace space,
                                       std::vector<SubjectRecord> subjects,
                                       std::string group)
    : space_(std::move(space)),
      subjects_(std::move(subjects)),
      group_(std::move(group)) {
  for (const SubjectRecord& s : subjects_) {
    if (s.entry_time < 0.0 || !std::isfinite(s.entry_time))
      fail_subject(s.id, "entry_time must be finite and >= 0");
    if (!space_.contains(s.entry_state))
      fail_subject(s.id, "entry_state " + std::to_string(s.entry_state) +
                             " outside the state space");
    if (!space_.is_transient(s.entry_state))
      fail_subject(s.id, "entry_state must be transient");

    int at = s.entry_state;
    double clock = s.entry_time;
    for (std::size_t k = 0; k < s.transitions.size(); ++k) {
      const Transition& tr = s.transitions[k];
      if (!std::isfinite(tr.time) || tr.time <= clock)
        fail_subject(s.id,
                     "transition times must be finite and strictly increasing "
                     "from entry (offending time " +
                         std::to_string(tr.time) + ")");
      if (tr.from != at)
        fail_subject(s.id, "transition " + std::to_string(k + 1) +
                               " departs state " + std::to_string(tr.from) +
                               " but the subject occupies " +
                               std::to_string(at));
      if (!space_.is_transient(tr.from))
        fail_subject(s.id, "transition departs an absorbing state");
      if (tr.to == kAbsorbedUnknown) {
        if (s.absorb_observed)
          fail_subject(s.id,
                       "absorbed-unknown destination requires absorb_observed "
                       "== false");
        if (k + 1 != s.transitions.size())
          fail_subject(s.id, "absorbed-unknown must be the final transition");
        if (space_.absorbing().empty())
          fail_subject(s.id, "absorbed-unknown used but no absorbing states");
      } else {
        if (!space_.contains(tr.to))
          fail_subject(s.id, "transition into unknown state " +
                                 std::to_string(tr.to));
        if (tr.to == tr.from)
          fail_subject(s.id, "self-transitions are not representable");
      }
      at = tr.to;
      clock = tr.time;
    }

    if (!s.absorb_observed) {
      if (s.transitions.empty() ||
          s.transitions.back().to != kAbsorbedUnknown)
        fail_subject(s.id,
                     "absorb_observed == false requires a final "
                     "absorbed-unknown transition");
    }

    const bool ended_absorbed =
        at == kAbsorbedUnknown || space_.is_absorbing(at);
    if (ended_absorbed) {
      if (s.censor_time && *s.censor_time < clock)
        fail_subject(s.id, "censor_time precedes the final transition");
    } else {
      if (!s.censor_time)
        fail_subject(s.id,
                     "record ends in a transient state without a censoring "
                     "time");
      if (!std::isfinite(*s.censor_time) || *s.censor_time < clock)
        fail_subject(s.id, "censor_time must be finite and >= the last "
                           "transition time");
    }
  }
}

double EventHistorySample::max_observed_time() const {
  double m = 0.0;
  for (const SubjectRecord& s : subjects_)
    m = std::max(m, s.last_observed_time());
  return m;
}

CountingProcessSet::CountingProcessSet(const EventHistorySample& sample)
    : space_(sample.space()), n_(static_cast<int>(sample.size())) {
  meta_.reserve(sample.size());
  for (int i = 0; i < n_; ++i) {
    const SubjectRecord& s = sample.subjects()[static_cast<std::size_t>(i)];
    meta_.push_back({s.id, s.absorb_observed, s.covariates});

    double at_since = s.entry_time;
    int at = s.entry_state;
    for (const Transition& tr : s.transitions) {
      events_.push_back({tr.time, tr.from, tr.to, 1.0, i});
      intervals_.push_back({i, at, at_since, tr.time});
      at = tr.to;
      at_since = tr.time;
    }
    if (at == kAbsorbedUnknown || space_.is_absorbing(at)) {
      // Absorbed: occupies the terminal state from the event on.  The
      // unknown destination contributes no occupancy interval at all.
      if (at != kAbsorbedUnknown)
        intervals_.push_back(
            {i, at, at_since, std::numeric_limits<double>::infinity()});
    } else {
      intervals_.push_back({i, at, at_since, *s.censor_time});
    }
    max_observed_ = std::max(max_observed_, s.last_observed_time());
  }
  std::sort(events_.begin(), events_.end(),
            [](const JumpAtom& a, const JumpAtom& b) {
              if (a.time != b.time) return a.time < b.time;
              if (a.subject != b.subject) return a.subject < b.subject;
              if (a.from != b.from) return a.from < b.from;
              return a.to < b.to;
            });
}

double CountingProcessSet::counting(int subject, int from, int to,
                                    double t) const {
  if (subject < 0 || subject >= n_)
    throw ArgumentError("subject index out of range");
  if (!space_.contains(from) || !space_.contains(to))
    throw ArgumentError("counting: state outside the state space");
  double acc = 0.0;
  for (const JumpAtom& e : events_) {
    if (e.time > t) break;
    if (e.subject == subject && e.from == from && e.to == to) acc += e.weight;
  }
  return acc;
}

int CountingProcessSet::at_risk(int subject, int state, double t) const {
  if (subject < 0 || subject >= n_)
    throw ArgumentError("subject index out of range");
  if (!space_.contains(state))
    throw ArgumentError("at_risk: state outside the state space");
  for (const RiskInterval& r : intervals_)
    if (r.subject == subject && r.state == state && r.start < t && t <= r.end)
      return 1;
  return 0;
}

CountingProcessSet build_counting_processes(const EventHistorySample& sample) {
  return CountingProcessSet(sample);
}

int at_risk_total(const CountingProcessSet& processes, int state, double t) {
  if (!processes.space().contains(state))
    throw ArgumentError("at_risk_total: state " + std::to_string(state) +
                        " outside the state space");
  int count = 0;
  for (const RiskInterval& r : processes.risk_intervals())
    if (r.state == state && r.start < t && t <= r.end) ++count;
  return count;
}

std::ptrdiff_t EventGrid::index_at(double t) const {
  std::ptrdiff_t lo = 0, hi = static_cast<std::ptrdiff_t>(times.size()) - 1,
                 ans = -1;
  while (lo <= hi) {
    const std::ptrdiff_t mid = lo + (hi - lo) / 2;
    if (times[static_cast<std::size_t>(mid)] <= t) {
      ans = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return ans;
}

EventGrid pooled_event_grid(
    const std::vector<const EventHistorySample*>& samples,
    std::optional<std::pair<double, double>> interval) {
  if (samples.empty()) throw ArgumentError("pooled_event_grid: no samples");
  double tau;
  if (interval) {
    if (!(interval->first < interval->second))
      throw ArgumentError("pooled_event_grid: interval start must precede end");
    tau = interval->second;
  } else {
    tau = std::numeric_limits<double>::infinity();
    for (const EventHistorySample* s : samples)
      tau = std::min(tau, s->max_observed_time());
  }

  std::vector<double> times;
  for (const EventHistorySample* s : samples)
    for (const SubjectRecord& subj : s->subjects())
      for (const Transition& tr : subj.transitions) {
        if (tr.time > tau) continue;
        if (interval && tr.time < interval->first) continue;
        times.push_back(tr.time);
      }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return EventGrid{std::move(times), tau};
}

}  // namespace tptest
