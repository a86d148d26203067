#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tptest/estimation.hpp"
#include "tptest/event_history.hpp"
#include "tptest/influence.hpp"
#include "tptest/simulation.hpp"
#include "tptest/two_sample.hpp"

namespace tptest {

// Event-history CSV: one row per transition or censoring. Header columns
//   subject_id, group?, entry_time?, entry_state, time, from_state,
//   to_state, r_indicator?, cov_*...
// to_state accepts the reserved tokens "censored" and "absorbed-unknown";
// r_indicator must be 0 on absorbed-unknown rows and 1 (or empty) elsewhere.
struct IngestOptions {
  bool lenient = false;  // skip bad rows/subjects, fail if > 5% dropped
  std::optional<StateSpace> space;  // inferred from the file when absent
};

struct IngestReport {
  std::size_t rows_read = 0;     // data rows seen
  std::size_t rows_dropped = 0;  // lenient mode only
  bool has_group_column = false;
  bool has_r_indicator = false;
  std::vector<std::string> covariate_columns;
  std::vector<std::string> messages;  // one per dropped row or subject
};

// One sample per distinct group label, ascending; at most two groups.
std::vector<EventHistorySample> ingest_csv(const std::string& path,
                                           const IngestOptions& options = {},
                                           IngestReport* report = nullptr);

void export_sample_csv(const EventHistorySample& sample,
                       const std::string& path);
// Several groups into one file (shared header; covariate dims must agree).
void export_samples_csv(const std::vector<const EventHistorySample*>& samples,
                        const std::string& path);

// Tidy curve/table writers; doubles are printed with 17 significant digits
// so re-parsing is exact.
void write_curve_csv(const TransitionProbabilityCurve& curve,
                     const std::string& path);
void write_occupation_csv(const OccupationCurves& curves,
                          const std::string& path);
void write_influence_csv(const InfluenceCurveSet& set,
                         const std::string& path);
void write_null_sample_csv(const NullSample& nulls, const std::string& path);
void write_rejection_table_csv(const RejectionRateTable& table,
                               const std::string& path);

// JSON payloads (serialized with sorted keys; stable across runs).
std::string test_result_json(const TestResult& result);
std::string all_results_json(const AllTestResults& all);
std::string rejection_table_json(const RejectionRateTable& table);
std::string scenario_config_json(const ScenarioConfig& config);

// Scenario config file: JSON, schema documented in the repository README and
// versioned via the optional schema_version key.
ScenarioConfig parse_scenario_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex_digest(std::uint64_t digest);

// Run manifest; wall_clock_seconds is the only field allowed to vary between
// identical runs.
std::string manifest_json(const std::string& command,
                          const std::string& config_digest,
                          const std::string& input_digest, std::uint64_t seed,
                          double wall_clock_seconds);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace tptest
