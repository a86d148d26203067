// Command-line front end: estimate transition probabilities, run two-sample
// tests on a transition, drive the simulation harness, generate fixtures.
// Exit codes: 0 ok, 2 argument, 3 data validation, 4 estimation/test, 5 I/O.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tptest/estimation.hpp"
#include "tptest/event_history.hpp"
#include "tptest/influence.hpp"
#include "tptest/io.hpp"
#include "tptest/missingness.hpp"
#include "tptest/rng.hpp"
#include "tptest/simulation.hpp"
#include "tptest/two_sample.hpp"
#include "tptest/version.hpp"

namespace {

using nlohmann::json;
using namespace tptest;

int env_threads() {
  const char* raw = std::getenv("TPTEST_THREADS");
  if (!raw) return 1;
  const int n = std::atoi(raw);
  return n >= 1 ? n : 1;
}

std::vector<double> parse_double_list(const std::string& csv,
                                      const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
      throw ArgumentError(std::string("bad ") + what + " entry '" + tok + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& csv, const char* what) {
  std::vector<int> out;
  for (double v : parse_double_list(csv, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ArgumentError(std::string("bad ") + what + " entry: not an int");
    out.push_back(i);
  }
  return out;
}

struct IngestArgs {
  std::string input;
  bool lenient = false;
  int states = 0;
  std::string absorbing;
};

void add_ingest_flags(CLI::App* sub, IngestArgs& args) {
  sub->add_option("--input", args.input, "event-history CSV")->required();
  sub->add_flag("--lenient", args.lenient,
                "skip bad rows instead of failing (at most 5%)");
  sub->add_option("--states", args.states,
                  "number of states (otherwise inferred)");
  sub->add_option("--absorbing", args.absorbing,
                  "comma-separated absorbing state labels");
}

std::vector<EventHistorySample> run_ingest(const IngestArgs& args,
                                           IngestReport& report) {
  IngestOptions options;
  options.lenient = args.lenient;
  if (args.states > 0) {
    std::vector<int> absorbing;
    if (!args.absorbing.empty())
      absorbing = parse_int_list(args.absorbing, "--absorbing");
    options.space = StateSpace(args.states, absorbing);
  } else if (!args.absorbing.empty()) {
    throw ArgumentError("--absorbing requires --states");
  }
  return ingest_csv(args.input, options, &report);
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void write_output(const std::filesystem::path& dir, const std::string& name,
                  const std::string& contents) {
  write_text_file((dir / name).string(), contents);
}

// ----- estimate ------------------------------------------------------------

struct EstimateArgs {
  IngestArgs ingest;
  std::string out_dir;
  double start_time = 0.0;
  int landmark_state = 0;
  bool npmple = false;
  std::string npmple_pi;
  std::string occupation;
  std::vector<int> dump_influence;
  std::string group;
  bool has_group = false;
};

int run_estimate(const EstimateArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  IngestReport report;
  const std::vector<EventHistorySample> samples =
      run_ingest(args.ingest, report);

  const EventHistorySample* sample = nullptr;
  if (samples.size() == 1) {
    sample = &samples.front();
  } else {
    if (!args.has_group)
      throw ArgumentError("input has several groups; pick one with --group");
    for (const EventHistorySample& s : samples)
      if (s.group() == args.group) sample = &s;
    if (!sample) throw ArgumentError("no group labeled '" + args.group + "'");
  }
  const StateSpace& space = sample->space();

  if (args.npmple && args.landmark_state > 0)
    throw ArgumentError("--npmple and --landmark cannot be combined");
  if (!args.npmple_pi.empty() && !args.npmple)
    throw ArgumentError("--npmple-pi requires --npmple");
  if (args.npmple && !report.has_r_indicator)
    throw ArgumentError("--npmple needs an r_indicator column in the input");

  Variant variant = Variant::standard;
  std::optional<MissingnessModel> model;
  if (args.npmple) {
    variant = Variant::npmple;
    if (!args.npmple_pi.empty())
      model = MissingnessModel::supplied(
          space, parse_double_list(args.npmple_pi, "--npmple-pi"));
    else
      model = fit_logistic_missingness(*sample);
  } else if (args.landmark_state > 0) {
    variant = Variant::landmark;
  }

  const CountingProcessSet cps(*sample);
  const EventGrid grid = pooled_event_grid({sample});
  WeightedProcesses wp = [&]() {
    switch (variant) {
      case Variant::landmark:
        return landmark_processes(cps, args.start_time, args.landmark_state);
      case Variant::npmple:
        return npmple_processes(cps, *model);
      default:
        return standard_processes(cps);
    }
  }();
  const CumulativeIntensityMatrix A = intensity_from_processes(wp, grid);
  TransitionProbabilityCurve curve = [&]() {
    TransitionProbabilityCurve raw = aalen_johansen(A, args.start_time);
    if (variant == Variant::standard) return raw;
    std::vector<Eigen::MatrixXd> values;
    values.reserve(raw.grid().size());
    for (std::size_t k = 0; k < raw.grid().size(); ++k)
      values.push_back(raw.at_index(k));
    return TransitionProbabilityCurve(raw.start(), raw.grid(),
                                      raw.num_states(), std::move(values),
                                      variant);
  }();

  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  write_curve_csv(curve, (dir / "curve.csv").string());

  if (!args.occupation.empty()) {
    const std::vector<double> initial =
        parse_double_list(args.occupation, "--occupation");
    const OccupationCurves occ = state_occupation(curve, initial);
    write_occupation_csv(occ, (dir / "occupation.csv").string());
  }
  if (!args.dump_influence.empty()) {
    const InfluenceCurveSet set =
        influence_curves(wp, A, args.dump_influence[0], args.dump_influence[1],
                         args.start_time);
    write_influence_csv(set, (dir / "influence.csv").string());
  }

  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["command"] = "estimate";
  meta["estimator"] = to_string(variant);
  meta["start_time"] = args.start_time;
  if (variant == Variant::landmark)
    meta["landmark_state"] = args.landmark_state;
  if (variant == Variant::npmple)
    meta["npmple_beta_variance_ignored"] = args.npmple_pi.empty();
  meta["n"] = static_cast<int>(sample->subjects().size());
  meta["group"] = sample->group();
  meta["num_states"] = space.num_states();
  meta["absorbing"] = space.absorbing();
  meta["grid_size"] = grid.size();
  meta["tau"] = grid.tau;
  meta["rows_read"] = report.rows_read;
  meta["rows_dropped"] = report.rows_dropped;
  write_output(dir, "metadata.json", meta.dump(2) + "\n");

  json cfg;
  cfg["command"] = "estimate";
  cfg["estimator"] = to_string(variant);
  cfg["start_time"] = args.start_time;
  cfg["landmark_state"] = args.landmark_state;
  cfg["npmple_pi"] = args.npmple_pi;
  cfg["occupation"] = args.occupation;
  cfg["dump_influence"] = args.dump_influence;
  cfg["lenient"] = args.ingest.lenient;
  write_output(dir, "manifest.json",
               manifest_json("estimate", hex_digest(fnv1a64(cfg.dump())),
                             hex_digest(fnv1a64_file(args.ingest.input)), 0,
                             elapsed_seconds(t0)));
  return 0;
}

// ----- test ----------------------------------------------------------------

struct TestArgs {
  IngestArgs ingest;
  std::string out_dir;
  std::vector<int> transition{1, 2};
  std::string method = "all";
  std::string weight = "unit";
  std::vector<double> interval;
  int reps = 1000;
  std::uint64_t seed = 0;
  double start_time = 0.0;
  bool landmark = false;
  bool npmple = false;
  std::string npmple_pi;
  std::string dump_null;
};

int run_test(const TestArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  IngestReport report;
  const std::vector<EventHistorySample> samples =
      run_ingest(args.ingest, report);
  if (samples.size() != 2)
    throw ArgumentError("two groups required (input has " +
                        std::to_string(samples.size()) + ")");

  if (args.landmark && args.npmple)
    throw ArgumentError("--landmark and --npmple cannot be combined");
  if (!args.npmple_pi.empty() && !args.npmple)
    throw ArgumentError("--npmple-pi requires --npmple");
  if (args.npmple && !report.has_r_indicator)
    throw ArgumentError("--npmple needs an r_indicator column in the input");
  if (args.reps < 1) throw ArgumentError("--reps must be >= 1");

  ComparisonOptions options;
  options.weight = args.weight == "unit" ? WeightKind::unit
                   : args.weight == "atrisk"
                       ? WeightKind::at_risk_product
                       : throw ArgumentError("unknown --weight '" +
                                             args.weight + "'");
  options.start_time = args.start_time;
  if (!args.interval.empty())
    options.interval = Interval{args.interval[0], args.interval[1]};
  if (args.landmark) options.variant = Variant::landmark;
  if (args.npmple) {
    options.variant = Variant::npmple;
    if (!args.npmple_pi.empty())
      options.model = MissingnessModel::supplied(
          samples[0].space(),
          parse_double_list(args.npmple_pi, "--npmple-pi"));
  }

  const int from = args.transition[0], to = args.transition[1];
  const PreparedComparison prep =
      prepare_comparison(samples[0], samples[1], from, to, options);

  std::string payload;
  if (args.method == "all") {
    payload = all_results_json(run_all_tests(prep, args.reps, args.seed));
  } else if (args.method == "linear") {
    payload = test_result_json(linear_test(prep));
  } else if (args.method == "l2" || args.method == "ks") {
    payload = test_result_json(
        omnibus_test(prep,
                     args.method == "l2" ? TestMethod::l2 : TestMethod::ks,
                     args.reps, args.seed));
  } else {
    throw ArgumentError("unknown --method '" + args.method + "'");
  }

  if (!args.dump_null.empty()) {
    if (args.method == "linear")
      throw ArgumentError("--dump-null needs a resampling method");
    write_null_sample_csv(multiplier_null_sample(prep, args.reps, args.seed),
                          args.dump_null);
  }

  if (args.out_dir.empty()) {
    std::cout << payload;
  } else {
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    write_output(dir, "result.json", payload);
    json cfg;
    cfg["command"] = "test";
    cfg["transition"] = args.transition;
    cfg["method"] = args.method;
    cfg["weight"] = args.weight;
    cfg["interval"] = args.interval;
    cfg["reps"] = args.reps;
    cfg["seed"] = args.seed;
    cfg["start_time"] = args.start_time;
    cfg["landmark"] = args.landmark;
    cfg["npmple"] = args.npmple;
    cfg["npmple_pi"] = args.npmple_pi;
    cfg["lenient"] = args.ingest.lenient;
    write_output(dir, "manifest.json",
                 manifest_json("test", hex_digest(fnv1a64(cfg.dump())),
                               hex_digest(fnv1a64_file(args.ingest.input)),
                               args.seed, elapsed_seconds(t0)));
  }
  return 0;
}

// ----- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_dir;
  int threads = 0;
};

int run_simulate(const SimulateArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioConfig config = parse_scenario_config(args.config);
  const int threads = args.threads >= 1 ? args.threads : env_threads();
  const RejectionRateTable table = run_scenario(config, threads);

  const std::filesystem::path dir(args.out_dir);
  std::filesystem::create_directories(dir);
  write_rejection_table_csv(table, (dir / "rejection_table.csv").string());
  write_output(dir, "rejection_table.json", rejection_table_json(table));
  write_output(dir, "manifest.json",
               manifest_json("simulate",
                             hex_digest(fnv1a64(scenario_config_json(config))),
                             hex_digest(fnv1a64_file(args.config)),
                             config.seed, elapsed_seconds(t0)));
  return 0;
}

// ----- generate ------------------------------------------------------------

struct GenerateArgs {
  std::string out;
  int n = 0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double censor_rate = 0.25;
  std::uint64_t seed = 0;
  int group = 1;
  int n2 = 0;
  double alpha1_2 = -1.0;
  double alpha2_2 = -1.0;
  double censor_rate_2 = -1.0;
};

int run_generate(const GenerateArgs& args) {
  IllnessDeathConfig c1{args.n, args.alpha1, args.alpha2, args.censor_rate};
  if (args.n2 <= 0) {
    export_sample_csv(simulate_illness_death(c1, args.seed, args.group),
                      args.out);
    return 0;
  }
  IllnessDeathConfig c2{args.n2,
                        args.alpha1_2 >= 0.0 ? args.alpha1_2 : args.alpha1,
                        args.alpha2_2 >= 0.0 ? args.alpha2_2 : args.alpha2,
                        args.censor_rate_2 >= 0.0 ? args.censor_rate_2
                                                  : args.censor_rate};
  const EventHistorySample g1 =
      simulate_illness_death(c1, mix64(args.seed, 1), 1);
  const EventHistorySample g2 =
      simulate_illness_death(c2, mix64(args.seed, 2), 2);
  export_samples_csv({&g1, &g2}, args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transition-probability estimation and two-sample tests for "
               "right-censored multistate event histories"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* cmd_est = app.add_subcommand(
      "estimate", "transition-probability curves from one sample");
  add_ingest_flags(cmd_est, est.ingest);
  cmd_est->add_option("--out", est.out_dir, "output directory")->required();
  cmd_est->add_option("--start-time", est.start_time, "estimation start s");
  cmd_est->add_option("--landmark", est.landmark_state,
                      "condition on occupying this state at --start-time");
  cmd_est->add_flag("--npmple", est.npmple,
                    "weight unknown absorptions by a missingness model");
  cmd_est->add_option("--npmple-pi", est.npmple_pi,
                      "supplied destination probabilities (comma list)");
  cmd_est->add_option("--occupation", est.occupation,
                      "initial distribution; also write occupation curves");
  cmd_est->add_option("--dump-influence", est.dump_influence,
                      "write influence curves for transition H J")
      ->expected(2);
  CLI::Option* grp =
      cmd_est->add_option("--group", est.group, "group label to estimate");

  TestArgs tst;
  CLI::App* cmd_tst = app.add_subcommand(
      "test", "two-sample tests on one transition");
  add_ingest_flags(cmd_tst, tst.ingest);
  cmd_tst->add_option("--out", tst.out_dir,
                      "output directory (default: print JSON)");
  cmd_tst->add_option("--transition", tst.transition, "tested transition H J")
      ->expected(2);
  cmd_tst->add_option("--method", tst.method, "linear|l2|ks|all");
  cmd_tst->add_option("--weight", tst.weight, "unit|atrisk");
  cmd_tst->add_option("--interval", tst.interval, "restrict to (T1, T2]")
      ->expected(2);
  cmd_tst->add_option("--reps", tst.reps, "multiplier draws");
  cmd_tst->add_option("--seed", tst.seed, "RNG seed");
  cmd_tst->add_option("--start-time", tst.start_time, "estimation start s");
  cmd_tst->add_flag("--landmark", tst.landmark,
                    "condition on the source state at --start-time");
  cmd_tst->add_flag("--npmple", tst.npmple,
                    "weight unknown absorptions by a missingness model");
  cmd_tst->add_option("--npmple-pi", tst.npmple_pi,
                      "supplied destination probabilities (comma list)");
  cmd_tst->add_option("--dump-null", tst.dump_null,
                      "write the multiplier null sample CSV here");

  SimulateArgs sim;
  CLI::App* cmd_sim = app.add_subcommand(
      "simulate", "rejection-rate study from a scenario config");
  cmd_sim->add_option("--config", sim.config, "scenario JSON")->required();
  cmd_sim->add_option("--out", sim.out_dir, "output directory")->required();
  cmd_sim->add_option("--threads", sim.threads,
                      "worker threads (default $TPTEST_THREADS or 1)");

  GenerateArgs gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "generate", "simulate illness-death samples to CSV");
  cmd_gen->add_option("--out", gen.out, "output CSV path")->required();
  cmd_gen->add_option("--n", gen.n, "subjects in group 1")->required();
  cmd_gen->add_option("--alpha1", gen.alpha1, "1->2 rate")->required();
  cmd_gen->add_option("--alpha2", gen.alpha2, "2->3 rate")->required();
  cmd_gen->add_option("--censor-rate", gen.censor_rate, "censoring rate");
  cmd_gen->add_option("--seed", gen.seed, "RNG seed");
  cmd_gen->add_option("--group", gen.group, "group label (single group)");
  cmd_gen->add_option("--n2", gen.n2, "subjects in group 2 (two-group file)");
  cmd_gen->add_option("--alpha1-2", gen.alpha1_2, "group 2 1->2 rate");
  cmd_gen->add_option("--alpha2-2", gen.alpha2_2, "group 2 2->3 rate");
  cmd_gen->add_option("--censor-rate-2", gen.censor_rate_2,
                      "group 2 censoring rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    est.has_group = grp->count() > 0;
    if (cmd_est->parsed()) return run_estimate(est);
    if (cmd_tst->parsed()) return run_test(tst);
    if (cmd_sim->parsed()) return run_simulate(sim);
    if (cmd_gen->parsed()) return run_generate(gen);
    throw ArgumentError("no subcommand");
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
