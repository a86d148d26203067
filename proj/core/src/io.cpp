#include "tptest/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tptest/version.hpp"

namespace tptest {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(pos)));
      break;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

double parse_double_field(const std::string& s, const char* what, long line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw DataError("line " + std::to_string(line) + ": bad " + what + " '" +
                    s + "'");
  return v;
}

long parse_int_field(const std::string& s, const char* what, long line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw DataError("line " + std::to_string(line) + ": bad " + what + " '" +
                    s + "'");
  return v;
}

struct SubjectBuilder {
  std::string id;
  int group = 0;
  double entry_time = 0.0;
  int entry_state = 0;
  std::vector<Transition> transitions;
  std::optional<double> censor_time;
  bool absorb_observed = true;
  std::vector<double> covariates;
  int current_state = 0;
  std::size_t rows = 0;
  bool ended = false;
};

SubjectRecord finish_subject(const SubjectBuilder& b) {
  SubjectRecord rec;
  rec.id = b.id;
  rec.entry_time = b.entry_time;
  rec.entry_state = b.entry_state;
  rec.transitions = b.transitions;
  rec.censor_time = b.censor_time;
  rec.absorb_observed = b.absorb_observed;
  rec.covariates = b.covariates;
  return rec;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

json interval_json(const Interval& interval) {
  return json{{"start", interval.start}, {"end", interval.end}};
}

json result_body_json(const TestResult& r) {
  json j;
  j["statistic"] = r.statistic;
  j["scaled_statistic"] = r.scaled_statistic;
  j["p_value"] = r.p_value;
  if (r.variance) j["variance"] = *r.variance;
  if (r.resampling) {
    const ResamplingSummary& s = *r.resampling;
    j["resampling"] = json{{"draws", s.draws},     {"seed", s.seed},
                           {"null_mean", s.null_mean}, {"null_sd", s.null_sd},
                           {"q90", s.q90},         {"q95", s.q95},
                           {"q99", s.q99}};
  }
  return j;
}

json group_spec_json(const GroupSpec& g) {
  return json{{"alpha1", g.alpha1},
              {"alpha2", g.alpha2},
              {"censor_rate", g.censor_rate}};
}

GroupSpec parse_group_spec(const json& j, const std::string& key) {
  if (!j.is_object())
    throw ArgumentError("config: '" + key + "' must be an object");
  GroupSpec g;
  bool saw1 = false, saw2 = false;
  for (const auto& [k, v] : j.items()) {
    if (k == "alpha1") {
      g.alpha1 = v.get<double>();
      saw1 = true;
    } else if (k == "alpha2") {
      g.alpha2 = v.get<double>();
      saw2 = true;
    } else if (k == "censor_rate") {
      g.censor_rate = v.get<double>();
    } else {
      throw ArgumentError("config: unknown key '" + key + "." + k + "'");
    }
  }
  if (!saw1 || !saw2)
    throw ArgumentError("config: '" + key + "' needs alpha1 and alpha2");
  return g;
}

WeightKind parse_weight_name(const std::string& name) {
  if (name == "unit") return WeightKind::unit;
  if (name == "atrisk" || name == "at-risk-product")
    return WeightKind::at_risk_product;
  throw ArgumentError("unknown weight '" + name +
                      "' (expected unit or atrisk)");
}

}  // namespace

std::vector<EventHistorySample> ingest_csv(const std::string& path,
                                           const IngestOptions& options,
                                           IngestReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = IngestReport{};

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  const std::vector<std::string> header = split_line(line);

  // Column layout; -1 means absent.
  long c_subject = -1, c_group = -1, c_entry_time = -1, c_entry_state = -1,
       c_time = -1, c_from = -1, c_to = -1, c_r = -1;
  std::vector<long> c_cov;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    const long idx = static_cast<long>(i);
    if (name == "subject_id") c_subject = idx;
    else if (name == "group") c_group = idx;
    else if (name == "entry_time") c_entry_time = idx;
    else if (name == "entry_state") c_entry_state = idx;
    else if (name == "time") c_time = idx;
    else if (name == "from_state") c_from = idx;
    else if (name == "to_state") c_to = idx;
    else if (name == "r_indicator") c_r = idx;
    else if (name.rfind("cov_", 0) == 0) {
      c_cov.push_back(idx);
      rep.covariate_columns.push_back(name);
    } else {
      throw DataError("unknown column '" + name + "' in " + path);
    }
  }
  for (const auto& [col, name] :
       std::initializer_list<std::pair<long, const char*>>{
           {c_subject, "subject_id"},
           {c_entry_state, "entry_state"},
           {c_time, "time"},
           {c_from, "from_state"},
           {c_to, "to_state"}})
    if (col < 0)
      throw DataError("missing required column '" + std::string(name) +
                      "' in " + path);
  rep.has_group_column = c_group >= 0;
  rep.has_r_indicator = c_r >= 0;

  std::map<std::pair<int, std::string>, std::size_t> slot;
  std::vector<SubjectBuilder> builders;
  std::vector<int> state_labels;  // every concrete label seen
  std::vector<int> source_labels; // labels occupied at some point

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++rep.rows_read;
    try {
      const std::vector<std::string> f = split_line(line);
      if (f.size() != header.size())
        throw DataError("line " + std::to_string(line_no) +
                        ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(f.size()));
      const std::string id = f[static_cast<std::size_t>(c_subject)];
      if (id.empty())
        throw DataError("line " + std::to_string(line_no) +
                        ": empty subject_id");
      const int group =
          c_group >= 0
              ? static_cast<int>(parse_int_field(
                    f[static_cast<std::size_t>(c_group)], "group", line_no))
              : 0;
      const double entry_time =
          c_entry_time >= 0
              ? parse_double_field(f[static_cast<std::size_t>(c_entry_time)],
                                   "entry_time", line_no)
              : 0.0;
      const int entry_state = static_cast<int>(parse_int_field(
          f[static_cast<std::size_t>(c_entry_state)], "entry_state", line_no));
      const double time = parse_double_field(
          f[static_cast<std::size_t>(c_time)], "time", line_no);
      const int from = static_cast<int>(parse_int_field(
          f[static_cast<std::size_t>(c_from)], "from_state", line_no));
      const std::string to_token = f[static_cast<std::size_t>(c_to)];
      std::string r_field =
          c_r >= 0 ? f[static_cast<std::size_t>(c_r)] : std::string();
      if (entry_state < 1 || from < 1)
        throw DataError("line " + std::to_string(line_no) +
                        ": state labels must be >= 1");

      std::vector<double> covs;
      covs.reserve(c_cov.size());
      for (std::size_t ci = 0; ci < c_cov.size(); ++ci)
        covs.push_back(
            parse_double_field(f[static_cast<std::size_t>(c_cov[ci])],
                               rep.covariate_columns[ci].c_str(), line_no));

      const auto key = std::make_pair(group, id);
      auto it = slot.find(key);
      if (it == slot.end()) {
        it = slot.emplace(key, builders.size()).first;
        SubjectBuilder b;
        b.id = id;
        b.group = group;
        b.entry_time = entry_time;
        b.entry_state = entry_state;
        b.covariates = covs;
        b.current_state = entry_state;
        builders.push_back(std::move(b));
      }
      SubjectBuilder& b = builders[it->second];
      if (b.entry_time != entry_time || b.entry_state != entry_state)
        throw DataError("line " + std::to_string(line_no) + ": subject '" +
                        id + "' changes its entry row");
      if (b.covariates != covs)
        throw DataError("line " + std::to_string(line_no) + ": subject '" +
                        id + "' changes its covariates");
      if (b.ended)
        throw DataError("line " + std::to_string(line_no) + ": subject '" +
                        id + "' has a row after its path ended");
      if (from != b.current_state)
        throw DataError("line " + std::to_string(line_no) + ": subject '" +
                        id + "' is in state " +
                        std::to_string(b.current_state) + ", row says " +
                        std::to_string(from));

      if (to_token == "censored") {
        if (!r_field.empty() && r_field != "1")
          throw DataError("line " + std::to_string(line_no) +
                          ": r_indicator must be 1 or empty on a censoring "
                          "row");
        b.censor_time = time;
        b.ended = true;
      } else if (to_token == "absorbed-unknown") {
        if (c_r >= 0 && r_field != "0")
          throw DataError("line " + std::to_string(line_no) +
                          ": r_indicator must be 0 on an absorbed-unknown "
                          "row");
        b.transitions.push_back({time, from, kAbsorbedUnknown});
        b.absorb_observed = false;
        b.ended = true;
      } else {
        const int to = static_cast<int>(
            parse_int_field(to_token, "to_state", line_no));
        if (to < 1)
          throw DataError("line " + std::to_string(line_no) +
                          ": state labels must be >= 1");
        if (!r_field.empty() && r_field != "1")
          throw DataError("line " + std::to_string(line_no) +
                          ": r_indicator must be 1 or empty when the "
                          "destination is recorded");
        b.transitions.push_back({time, from, to});
        b.current_state = to;
        state_labels.push_back(to);
      }
      b.rows += 1;
      state_labels.push_back(entry_state);
      state_labels.push_back(from);
      source_labels.push_back(entry_state);
      source_labels.push_back(from);
    } catch (const DataError& e) {
      if (!options.lenient) throw;
      ++rep.rows_dropped;
      rep.messages.push_back(e.what());
    }
  }
  if (rep.rows_read == 0) throw DataError("no data rows in " + path);

  StateSpace space = [&]() {
    if (options.space) return *options.space;
    if (state_labels.empty())
      throw DataError("cannot infer the state space from " + path);
    const int q = *std::max_element(state_labels.begin(), state_labels.end());
    std::sort(source_labels.begin(), source_labels.end());
    std::vector<int> absorbing;
    std::sort(state_labels.begin(), state_labels.end());
    state_labels.erase(std::unique(state_labels.begin(), state_labels.end()),
                       state_labels.end());
    for (int label : state_labels)
      if (!std::binary_search(source_labels.begin(), source_labels.end(),
                              label))
        absorbing.push_back(label);
    return StateSpace(q, absorbing);
  }();

  // Group subjects, preserving file order inside each group.
  std::vector<int> group_labels;
  for (const SubjectBuilder& b : builders)
    if (std::find(group_labels.begin(), group_labels.end(), b.group) ==
        group_labels.end())
      group_labels.push_back(b.group);
  std::sort(group_labels.begin(), group_labels.end());
  if (group_labels.size() > 2)
    throw DataError("found " + std::to_string(group_labels.size()) +
                    " group labels; at most two groups are supported");

  std::vector<EventHistorySample> samples;
  for (int label : group_labels) {
    std::vector<SubjectRecord> records;
    for (const SubjectBuilder& b : builders) {
      if (b.group != label) continue;
      SubjectRecord rec = finish_subject(b);
      if (options.lenient) {
        try {
          EventHistorySample probe(space, {rec}, std::to_string(label));
        } catch (const DataError& e) {
          rep.rows_dropped += b.rows;
          rep.messages.push_back(e.what());
          continue;
        }
      }
      records.push_back(std::move(rec));
    }
    if (records.empty())
      throw DataError("group " + std::to_string(label) +
                      ": no valid subjects");
    samples.emplace_back(space, std::move(records), std::to_string(label));
  }

  if (options.lenient && rep.rows_read > 0) {
    const double frac = static_cast<double>(rep.rows_dropped) /
                        static_cast<double>(rep.rows_read);
    if (frac > 0.05)
      throw DataError("lenient ingestion dropped " +
                      std::to_string(rep.rows_dropped) + " of " +
                      std::to_string(rep.rows_read) + " rows (> 5%)");
  }
  return samples;
}

void export_samples_csv(const std::vector<const EventHistorySample*>& samples,
                        const std::string& path) {
  if (samples.empty()) throw ArgumentError("no samples to export");
  std::size_t cov_dim = 0;
  for (const EventHistorySample* sample : samples)
    for (const SubjectRecord& s : sample->subjects()) {
      if (s.covariates.empty()) continue;
      if (cov_dim == 0) cov_dim = s.covariates.size();
      if (s.covariates.size() != cov_dim)
        throw DataError("subject '" + s.id +
                        "': covariate dimension differs across subjects");
    }

  std::ofstream out = open_out(path);
  out << "subject_id,group,entry_time,entry_state,time,from_state,to_state,"
         "r_indicator";
  for (std::size_t d = 1; d <= cov_dim; ++d) out << ",cov_" << d;
  out << "\n";

  for (const EventHistorySample* sample : samples) {
    const std::string group =
        sample->group().empty() ? "0" : sample->group();
    for (const SubjectRecord& s : sample->subjects()) {
      auto prefix = [&](double time, int from) {
        out << s.id << ',' << group << ',' << format_double(s.entry_time)
            << ',' << s.entry_state << ',' << format_double(time) << ','
            << from << ',';
      };
      auto covs = [&]() {
        for (std::size_t d = 0; d < cov_dim; ++d)
          out << ','
              << format_double(s.covariates.empty() ? 0.0 : s.covariates[d]);
        out << "\n";
      };
      for (const Transition& tr : s.transitions) {
        prefix(tr.time, tr.from);
        if (tr.to == kAbsorbedUnknown)
          out << "absorbed-unknown,0";
        else
          out << tr.to << ",1";
        covs();
      }
      if (s.censor_time) {
        prefix(*s.censor_time, s.final_state());
        out << "censored,1";
        covs();
      }
    }
  }
  if (!out) throw IoError("failed writing " + path);
}

void export_sample_csv(const EventHistorySample& sample,
                       const std::string& path) {
  export_samples_csv({&sample}, path);
}

void write_curve_csv(const TransitionProbabilityCurve& curve,
                     const std::string& path) {
  std::ofstream out = open_out(path);
  out << "time,from,to,estimate\n";
  const int q = curve.num_states();
  auto block = [&](double t, const Eigen::MatrixXd& m) {
    for (int from = 1; from <= q; ++from)
      for (int to = 1; to <= q; ++to)
        out << format_double(t) << ',' << from << ',' << to << ','
            << format_double(m(from - 1, to - 1)) << "\n";
  };
  block(curve.start(), Eigen::MatrixXd::Identity(q, q));
  for (std::size_t k = 0; k < curve.grid().size(); ++k)
    block(curve.grid().times[k], curve.at_index(k));
  if (!out) throw IoError("failed writing " + path);
}

void write_occupation_csv(const OccupationCurves& curves,
                          const std::string& path) {
  std::ofstream out = open_out(path);
  out << "time,state,estimate\n";
  const int q = static_cast<int>(curves.initial.size());
  for (int state = 1; state <= q; ++state)
    out << format_double(0.0) << ',' << state << ','
        << format_double(curves.initial[static_cast<std::size_t>(state - 1)])
        << "\n";
  for (std::size_t k = 0; k < curves.grid.size(); ++k)
    for (int state = 1; state <= q; ++state)
      out << format_double(curves.grid.times[k]) << ',' << state << ','
          << format_double(curves.values(static_cast<Eigen::Index>(k),
                                         state - 1))
          << "\n";
  if (!out) throw IoError("failed writing " + path);
}

void write_influence_csv(const InfluenceCurveSet& set,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  out << "subject,time,value\n";
  for (int i = 0; i < set.sample_size(); ++i)
    for (std::size_t k = 0; k < set.grid().size(); ++k)
      out << i << ',' << format_double(set.grid().times[k]) << ','
          << format_double(set.matrix()(i, static_cast<Eigen::Index>(k)))
          << "\n";
  if (!out) throw IoError("failed writing " + path);
}

void write_null_sample_csv(const NullSample& nulls, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "draw,l2,ks\n";
  for (std::size_t r = 0; r < nulls.l2.size(); ++r)
    out << r + 1 << ',' << format_double(nulls.l2[r]) << ','
        << format_double(nulls.ks[r]) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

void write_rejection_table_csv(const RejectionRateTable& table,
                               const std::string& path) {
  std::ofstream out = open_out(path);
  out << "n1,n2,test,alpha,rejections,used,failed,rate,mc_se\n";
  for (const RejectionRateRow& r : table.rows)
    out << r.n1 << ',' << r.n2 << ',' << to_string(r.method) << ','
        << format_double(r.alpha) << ',' << r.rejections << ',' << r.used
        << ',' << r.failed << ',' << format_double(r.rate) << ','
        << format_double(r.mc_se) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

std::string test_result_json(const TestResult& r) {
  json j = result_body_json(r);
  j["schema_version"] = kSchemaVersion;
  j["method"] = to_string(r.method);
  j["from_state"] = r.from;
  j["to_state"] = r.to;
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  j["weight"] = to_string(r.weight);
  j["estimator"] = to_string(r.variant);
  j["interval"] = interval_json(r.interval);
  j["npmple_beta_variance_ignored"] = r.beta_variance_ignored;
  return j.dump(2) + "\n";
}

std::string all_results_json(const AllTestResults& all) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["from_state"] = all.linear.from;
  j["to_state"] = all.linear.to;
  j["n1"] = all.linear.n1;
  j["n2"] = all.linear.n2;
  j["weight"] = to_string(all.linear.weight);
  j["estimator"] = to_string(all.linear.variant);
  j["interval"] = interval_json(all.linear.interval);
  j["npmple_beta_variance_ignored"] = all.linear.beta_variance_ignored;
  j["tests"] = json{{"linear", result_body_json(all.linear)},
                    {"l2", result_body_json(all.l2)},
                    {"ks", result_body_json(all.ks)}};
  return j.dump(2) + "\n";
}

std::string scenario_config_json(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["group1"] = group_spec_json(c.group1);
  j["group2"] = group_spec_json(c.group2);
  json sizes = json::array();
  for (const auto& [n1, n2] : c.sizes) sizes.push_back(json::array({n1, n2}));
  j["sizes"] = sizes;
  j["replications"] = c.replications;
  j["multiplier_draws"] = c.multiplier_draws;
  j["alphas"] = c.alphas;
  j["weight"] = to_string(c.weight);
  j["seed"] = c.seed;
  j["transition"] = json{{"from", c.from}, {"to", c.to}};
  if (c.interval) j["interval"] = interval_json(*c.interval);
  return j.dump(2) + "\n";
}

std::string rejection_table_json(const RejectionRateTable& table) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = json::parse(scenario_config_json(table.config));
  json rows = json::array();
  for (const RejectionRateRow& r : table.rows) {
    rows.push_back(json{{"n1", r.n1},
                        {"n2", r.n2},
                        {"test", to_string(r.method)},
                        {"alpha", r.alpha},
                        {"rejections", r.rejections},
                        {"used", r.used},
                        {"failed", r.failed},
                        {"rate", r.rate},
                        {"mc_se", r.mc_se}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

ScenarioConfig parse_scenario_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");

  ScenarioConfig c;
  bool saw_g1 = false, saw_g2 = false, saw_sizes = false;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "schema_version") {
        if (v.get<int>() != kSchemaVersion)
          throw ArgumentError("unsupported config schema_version");
      } else if (k == "group1") {
        c.group1 = parse_group_spec(v, "group1");
        saw_g1 = true;
      } else if (k == "group2") {
        c.group2 = parse_group_spec(v, "group2");
        saw_g2 = true;
      } else if (k == "sizes") {
        if (!v.is_array() || v.empty())
          throw ArgumentError("config: sizes must be a non-empty array");
        for (const auto& pair : v) {
          if (!pair.is_array() || pair.size() != 2)
            throw ArgumentError("config: each size entry must be [n1, n2]");
          c.sizes.emplace_back(pair[0].get<int>(), pair[1].get<int>());
        }
        saw_sizes = true;
      } else if (k == "replications") {
        c.replications = v.get<int>();
      } else if (k == "multiplier_draws") {
        c.multiplier_draws = v.get<int>();
      } else if (k == "alphas") {
        c.alphas = v.get<std::vector<double>>();
      } else if (k == "weight") {
        c.weight = parse_weight_name(v.get<std::string>());
      } else if (k == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (k == "transition") {
        c.from = v.at("from").get<int>();
        c.to = v.at("to").get<int>();
        if (v.size() != 2)
          throw ArgumentError("config: transition takes only from and to");
      } else if (k == "interval") {
        Interval iv;
        iv.start = v.at("start").get<double>();
        iv.end = v.at("end").get<double>();
        if (v.size() != 2)
          throw ArgumentError("config: interval takes only start and end");
        c.interval = iv;
      } else {
        throw ArgumentError("config: unknown key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ArgumentError("config error in " + path + ": " + e.what());
  }
  if (!saw_g1 || !saw_g2 || !saw_sizes)
    throw ArgumentError("config needs group1, group2 and sizes");
  return c;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

std::string hex_digest(std::uint64_t digest) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

std::string manifest_json(const std::string& command,
                          const std::string& config_digest,
                          const std::string& input_digest, std::uint64_t seed,
                          double wall_clock_seconds) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["input_digest"] = input_digest;
  j["seed"] = seed;
  j["version"] = kVersion;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out = open_out(path);
  out << contents;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace tptest
