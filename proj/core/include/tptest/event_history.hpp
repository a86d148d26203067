#pragma once

/* Event-history data model for finite-state processes under right censoring
 * and left truncation.
 *
 * A subject is a path through states 1..q: entry at entry_time in
 * entry_state, a time-ordered list of observed transitions, and either a
 * censoring time (if follow-up ended in a transient state) or absorption.
 * A subject whose terminal event is known to be an absorption but whose
 * destination was not recorded carries the reserved pseudo-label
 * kAbsorbedUnknown as the final to_state and absorb_observed == false;
 * only the missing-destination estimator consumes that information.
 *
 * Counting-process views follow the usual conventions: N_ihj(t) counts
 * i's h->j transitions in (0, t] (right-continuous), and Y_ih(t) indicates
 * occupancy of h just before t while under observation (left-continuous),
 * i.e. Y = 1 exactly on (interval start, interval end].
 */

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tptest/errors.hpp"

namespace tptest {

// Reserved destination pseudo-label: absorbed, state unrecorded.
inline constexpr int kAbsorbedUnknown = 0;

class StateSpace {
 public:
  StateSpace(int num_states, std::vector<int> absorbing);

  int num_states() const noexcept { return q_; }
  bool contains(int state) const noexcept { return state >= 1 && state <= q_; }
  bool is_absorbing(int state) const noexcept;
  bool is_transient(int state) const noexcept {
    return contains(state) && !is_absorbing(state);
  }
  const std::vector<int>& absorbing() const noexcept { return absorbing_; }
  std::vector<int> transient() const;

  bool operator==(const StateSpace&) const = default;

 private:
  int q_;
  std::vector<int> absorbing_;  // sorted, unique
};

struct Transition {
  double time = 0.0;
  int from = 0;
  int to = 0;  // may be kAbsorbedUnknown on the final transition
  bool operator==(const Transition&) const = default;
};

struct SubjectRecord {
  std::string id;
  double entry_time = 0.0;
  int entry_state = 1;
  std::vector<Transition> transitions;
  std::optional<double> censor_time;
  bool absorb_observed = true;        // R_i
  std::vector<double> covariates;     // O_i, used by the missingness model

  bool operator==(const SubjectRecord&) const = default;

  int final_state() const noexcept {
    return transitions.empty() ? entry_state : transitions.back().to;
  }
  // Largest time at which the subject is known about at all.
  double last_observed_time() const noexcept {
    double t = entry_time;
    if (!transitions.empty()) t = transitions.back().time;
    if (censor_time && *censor_time > t) t = *censor_time;
    return t;
  }
};

// Validates every record on construction; immutable afterwards.
class EventHistorySample {
 public:
  EventHistorySample(StateSpace space, std::vector<SubjectRecord> subjects,
                     std::string group = "");

  const StateSpace& space() const noexcept { return space_; }
  const std::vector<SubjectRecord>& subjects() const noexcept { return subjects_; }
  const std::string& group() const noexcept { return group_; }
  std::size_t size() const noexcept { return subjects_.size(); }

  // Largest observed (event or censoring) time across subjects.
  double max_observed_time() const;

  bool operator==(const EventHistorySample&) const = default;

 private:
  StateSpace space_;
  std::vector<SubjectRecord> subjects_;
  std::string group_;
};

// One observed transition as a weighted point mass; the estimators consume
// flat, time-sorted lists of these.  weight == 1 for raw data, fractional
// for missing-destination reweighting.
struct JumpAtom {
  double time = 0.0;
  int from = 0;
  int to = 0;
  double weight = 1.0;
  int subject = -1;
};

// Y_ih = 1 exactly on (start, end]; end is +infinity once absorbed.
struct RiskInterval {
  int subject = -1;
  int state = 0;
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();
};

class CountingProcessSet {
 public:
  explicit CountingProcessSet(const EventHistorySample& sample);

  struct SubjectMeta {
    std::string id;
    bool absorb_observed = true;
    std::vector<double> covariates;
  };

  const StateSpace& space() const noexcept { return space_; }
  int num_subjects() const noexcept { return n_; }

  // N_ihj(t): observed h->j transitions of subject i in (0, t].
  double counting(int subject, int from, int to, double t) const;
  // Y_ih(t): 1 if subject occupies h just before t while under observation.
  int at_risk(int subject, int state, double t) const;

  const std::vector<JumpAtom>& events() const noexcept { return events_; }
  const std::vector<RiskInterval>& risk_intervals() const noexcept {
    return intervals_;
  }
  const std::vector<SubjectMeta>& meta() const noexcept { return meta_; }

  double max_observed_time() const noexcept { return max_observed_; }

 private:
  StateSpace space_;
  int n_ = 0;
  std::vector<JumpAtom> events_;        // sorted by (time, subject, from, to)
  std::vector<RiskInterval> intervals_; // grouped by subject
  std::vector<SubjectMeta> meta_;
  double max_observed_ = 0.0;
};

CountingProcessSet build_counting_processes(const EventHistorySample& sample);

// Number of subjects at risk in `state` just before time t.
int at_risk_total(const CountingProcessSet& processes, int state, double t);

struct EventGrid {
  std::vector<double> times;  // strictly increasing, within (0, tau]
  double tau = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  // Index of the last grid time <= t, or -1.
  std::ptrdiff_t index_at(double t) const;

  bool operator==(const EventGrid&) const = default;
};

// Union of all observed transition times across samples.  Without an
// interval, tau is the smallest per-sample largest observed time and the
// grid keeps times <= tau; with [t1, t2], tau = t2 and times are clipped
// to the closed interval.
EventGrid pooled_event_grid(
    const std::vector<const EventHistorySample*>& samples,
    std::optional<std::pair<double, double>> interval = std::nullopt);

}  // namespace tptest
