#include "loboost/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "loboost/diagnostics.hpp"
#include "loboost/errors.hpp"
#include "loboost/rng.hpp"

namespace loboost {

void PipelineConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  boost.validate();
  split.validate();
  if (m_part < 1) throw ConfigError("m_part must be at least 1");
  if (m_merge < 1) throw ConfigError("m_merge must be at least 1");
  if (weights.kind == WeightScheme::Kind::kExponential &&
      !(weights.rho > 0.0 && weights.rho < 1.0)) {
    throw ConfigError("exponential rho must lie in (0, 1)");
  }
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep) {
  return RngStream(seed).derive("replication:" + std::to_string(rep)).next_u64();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void add_segment_coverage(EvaluationReport& report,
                          const std::vector<PredictionInterval>& intervals, const Dataset& test,
                          const std::vector<std::string>& labels) {
  report.per_group_coverage = conditional_coverage(intervals, test.targets(), labels);
}

}  // namespace

ReplicationResult run_replication(const Dataset& data, const PipelineConfig& config,
                                  std::uint64_t seed, std::optional<synth::Setting> setting) {
  config.validate();
  SplitSpec split_spec = config.split;
  split_spec.seed = RngStream(seed).derive("split-seed").next_u64();
  const DataSplit parts = split(data, split_spec, /*native=*/true);

  BoostConfig boost = config.boost;
  boost.seed = RngStream(seed).derive("boost-seed").next_u64();
  const BoostedEnsemble model = fit(parts.train, boost);

  ReplicationResult out;
  out.n_trees = model.n_trees();
  out.n_cal = parts.cal.rows();
  out.n_test = parts.test.rows();

  auto start = Clock::now();
  const GlobalCalibrator global = calibrate_global(model, parts.cal, config.alpha);
  const double icp_seconds = seconds_since(start);

  start = Clock::now();
  const auto paths = model.leaf_paths(parts.cal);
  const PartitionModel raw = build_partition(paths, config.m_part);
  const auto weights = compute_tree_weights(model, parts.cal, config.weights);
  PartitionModel merged = merge_regions(raw, config.m_merge, weights);
  const LocalCalibrator local = calibrate_local(model, merged, parts.cal, config.alpha);
  const double local_seconds = seconds_since(start);

  const auto icp_intervals = predict_intervals(global, model, parts.test);
  const auto local_intervals = predict_intervals(local, model, parts.test);
  out.icp = evaluate(icp_intervals, parts.test.targets(), config.alpha);
  out.icp.calibration_seconds = icp_seconds;
  out.loboost = evaluate(local_intervals, parts.test.targets(), config.alpha);
  out.loboost.calibration_seconds = local_seconds;

  out.n_regions_pre = raw.n_regions();
  out.n_regions_post = merged.n_regions();
  out.n_merged = out.n_regions_pre - out.n_regions_post;

  if (setting) {
    std::vector<std::string> labels(parts.test.rows());
    std::vector<PredictionInterval> oracle(parts.test.rows());
    for (std::size_t i = 0; i < parts.test.rows(); ++i) {
      const double x = parts.test.feature(i, 0);
      labels[i] = synth::segment_label(*setting, x);
      oracle[i] = synth::oracle_interval(*setting, x, config.alpha);
    }
    add_segment_coverage(out.icp, icp_intervals, parts.test, labels);
    add_segment_coverage(out.loboost, local_intervals, parts.test, labels);
    EvaluationReport oracle_report = evaluate(oracle, parts.test.targets(), config.alpha);
    add_segment_coverage(oracle_report, oracle, parts.test, labels);
    out.oracle = std::move(oracle_report);
  }
  out.partition = std::move(merged);
  return out;
}

ReplicationResult simulate_replication(const ExperimentConfig& config, std::size_t rep) {
  const std::uint64_t seed = replication_seed(config.seed, rep);
  const Dataset data =
      synth::sample({config.dgp, config.n, RngStream(seed).derive("dgp").next_u64()});
  return run_replication(data, config.pipeline, seed, config.dgp);
}

Command parse_command(const std::string& text) {
  if (text == "simulate") return Command::kSimulate;
  if (text == "run-csv") return Command::kRunCsv;
  if (text == "diagnose") return Command::kDiagnose;
  if (text == "partition-dump") return Command::kPartitionDump;
  throw ConfigError("unknown command '" + text + "'");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::kSimulate:
      return "simulate";
    case Command::kRunCsv:
      return "run-csv";
    case Command::kDiagnose:
      return "diagnose";
    case Command::kPartitionDump:
      return "partition-dump";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  pipeline.validate();
  if (replications < 1) throw ConfigError("replications must be at least 1");
  const bool needs_csv = command == Command::kRunCsv;
  if (needs_csv && csv.empty()) throw ConfigError("run-csv needs --csv");
  if (!needs_csv && command != Command::kPartitionDump && n < 10) {
    throw ConfigError("sample size must be at least 10");
  }
}

std::string ExperimentConfig::hash() const {
  std::ostringstream s;
  s.precision(17);
  const auto& b = pipeline.boost;
  s << command_name(command) << '|' << synth::setting_name(dgp) << '|' << n << '|'
    << csv.string() << '|' << target << '|' << pipeline.alpha << '|' << b.n_estimators << '|'
    << b.learning_rate << '|' << b.max_depth << '|' << b.min_samples_leaf << '|'
    << b.subsample << '|' << b.validation_fraction << '|' << b.n_iter_no_change << '|'
    << pipeline.m_part << '|' << pipeline.m_merge << '|'
    << static_cast<int>(pipeline.weights.kind) << '|' << pipeline.weights.rho << '|'
    << pipeline.split.train_frac << '|' << pipeline.split.cal_frac << '|'
    << pipeline.split.test_frac << '|' << pipeline.split.native_cal_transfer << '|'
    << replications << '|' << seed << '|' << k;
  for (double r : reference_points) s << '|' << r;
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(s.str());
  return hex.str();
}

std::vector<double> default_reference_points(synth::Setting s) {
  std::vector<double> refs;
  for (int j = 1; j <= 4; ++j) refs.push_back(synth::x_quantile(s, j / 5.0));
  return refs;
}

std::vector<DiagnoseResult> diagnose(const ExperimentConfig& config) {
  const std::vector<double> refs = config.reference_points.empty()
                                       ? default_reference_points(config.dgp)
                                       : config.reference_points;
  for (double x : refs) {
    if (!synth::in_support(config.dgp, x)) {
      throw SupportError("reference point " + std::to_string(x) +
                         " is outside the support of setting " +
                         synth::setting_name(config.dgp));
    }
  }
  std::vector<std::vector<DecayCurve>> curves(refs.size());
  for (std::size_t rep = 0; rep < config.replications; ++rep) {
    const RngStream root(replication_seed(config.seed, rep));
    const Dataset train =
        synth::sample({config.dgp, config.n, root.derive("diagnose:train").next_u64()});
    const Dataset eval =
        synth::sample({config.dgp, config.n, root.derive("diagnose:eval").next_u64()});
    BoostConfig boost = config.pipeline.boost;
    boost.seed = root.derive("diagnose:boost").next_u64();
    const BoostedEnsemble model = fit(train, boost);
    if (config.k >= model.n_trees()) {
      throw ConfigError("k = " + std::to_string(config.k) + " leaves no trees to inspect (" +
                        std::to_string(model.n_trees()) + " fitted)");
    }
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const std::vector<double> x{refs[j]};
      try {
        curves[j].push_back(decay_curve(model, eval, x, config.k));
      } catch (const EmptyRegion&) {
        // This replication has no evaluation point in R_k(x); skip it.
      }
    }
  }
  std::vector<DiagnoseResult> out;
  for (std::size_t j = 0; j < refs.size(); ++j) {
    if (curves[j].empty()) {
      throw EmptyRegion("no replication produced a region around x = " +
                        std::to_string(refs[j]));
    }
    DiagnoseResult r;
    r.curve = average_curves(curves[j]);
    r.fit = fit_exponential(r.curve);
    r.reps_used = curves[j].size();
    out.push_back(std::move(r));
  }
  return out;
}

MeanCi mean_ci(const std::vector<double>& values) {
  MeanCi out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

struct MethodRow {
  std::string method;
  const EvaluationReport* report;
};

class RunWriter {
 public:
  RunWriter(const ExperimentConfig& config, std::vector<std::string> groups)
      : config_(config),
        hash_(config.hash()),
        groups_(std::move(groups)),
        runs_(open_out(config.out_dir / "runs.csv")),
        timing_(open_out(config.out_dir / "timing.csv")) {
    runs_ << "command,seed,replication,config_hash,method,amc,il,smis,mse,n_regions_pre,"
             "n_regions_post,n_merged,n_infinite,n_trees";
    for (const auto& g : groups_) runs_ << ",cov_" << g;
    runs_ << '\n';
    timing_ << "command,seed,replication,config_hash,method,cal_seconds\n";
  }

  void write(std::size_t rep, const ReplicationResult& r) {
    std::vector<MethodRow> rows{{"icp", &r.icp}, {"loboost", &r.loboost}};
    if (r.oracle) rows.push_back({"oracle", &*r.oracle});
    for (const auto& [method, rep_report] : rows) {
      const EvaluationReport& e = *rep_report;
      runs_ << command_name(config_.command) << ',' << config_.seed << ',' << rep << ','
            << hash_ << ',' << method << ',' << num(e.amc) << ','
            << num(e.mean_interval_length) << ',' << num(e.smis) << ',' << num(e.mse) << ','
            << r.n_regions_pre << ',' << r.n_regions_post << ',' << r.n_merged << ','
            << e.n_infinite << ',' << r.n_trees;
      for (const auto& g : groups_) {
        auto it = e.per_group_coverage.find(g);
        runs_ << ',' << (it == e.per_group_coverage.end() ? std::string() : num(it->second));
      }
      runs_ << '\n';
      if (method != "oracle") {
        timing_ << command_name(config_.command) << ',' << config_.seed << ',' << rep << ','
                << hash_ << ',' << method << ',' << num(e.calibration_seconds) << '\n';
      }
      auto& acc = stats_[method];
      acc["amc"].push_back(e.amc);
      acc["il"].push_back(e.mean_interval_length);
      acc["smis"].push_back(e.smis);
      acc["mse"].push_back(e.mse);
      if (method != "oracle") acc["cal_seconds"].push_back(e.calibration_seconds);
      for (const auto& [g, cov] : e.per_group_coverage) acc["cov_" + g].push_back(cov);
    }
    auto& parts = stats_["partition"];
    parts["n_regions_pre"].push_back(static_cast<double>(r.n_regions_pre));
    parts["n_regions_post"].push_back(static_cast<double>(r.n_regions_post));
    parts["n_merged"].push_back(static_cast<double>(r.n_merged));
  }

  void write_summary() {
    auto out = open_out(config_.out_dir / "summary.csv");
    out << "command,seed,config_hash,method,metric,mean,half_width_95,n_reps\n";
    for (const auto& [method, metrics] : stats_) {
      for (const auto& [metric, values] : metrics) {
        const MeanCi ci = mean_ci(values);
        out << command_name(config_.command) << ',' << config_.seed << ',' << hash_ << ','
            << method << ',' << metric << ',' << num(ci.mean) << ',' << num(ci.half_width)
            << ',' << values.size() << '\n';
      }
    }
  }

 private:
  const ExperimentConfig& config_;
  std::string hash_;
  std::vector<std::string> groups_;
  std::ofstream runs_;
  std::ofstream timing_;
  std::map<std::string, std::map<std::string, std::vector<double>>> stats_;
};

void write_partition(const ExperimentConfig& config, const PartitionModel& partition) {
  auto out = open_out(config.out_dir / "partition.txt");
  out << "# command " << command_name(config.command) << " seed " << config.seed
      << " config_hash " << config.hash() << '\n';
  out << partition.dump();
}

std::vector<std::string> segment_labels(synth::Setting s) {
  if (s == synth::Setting::kHeteroscedastic) return {"seg1", "seg2", "seg3", "seg4"};
  return {"branch1", "branch2"};
}

int run_replications(const ExperimentConfig& config, std::ostream& log) {
  std::optional<Dataset> csv_data;
  std::vector<std::string> groups;
  if (config.command == Command::kRunCsv) {
    csv_data = load_csv(config.csv, config.target);
  } else {
    groups = segment_labels(config.dgp);
  }

  RunWriter writer(config, groups);
  std::size_t failures = 0;
  for (std::size_t rep = 0; rep < config.replications; ++rep) {
    const std::uint64_t seed = replication_seed(config.seed, rep);
    try {
      const ReplicationResult result =
          csv_data ? run_replication(*csv_data, config.pipeline, seed)
                   : simulate_replication(config, rep);
      writer.write(rep, result);
      if (rep == 0) write_partition(config, result.partition);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      ++failures;
      log << "replication " << rep << " failed: " << e.what() << '\n';
    }
  }
  writer.write_summary();
  log << command_name(config.command) << ": " << config.replications - failures << '/'
      << config.replications << " replications succeeded, output in "
      << config.out_dir.string() << '\n';
  return failures == 0 ? kExitOk : kExitPartial;
}

int run_partition_dump(const ExperimentConfig& config, std::ostream& log) {
  const std::uint64_t seed = replication_seed(config.seed, 0);
  const Dataset data =
      config.csv.empty()
          ? synth::sample({config.dgp, config.n, RngStream(seed).derive("dgp").next_u64()})
          : load_csv(config.csv, config.target);
  const ReplicationResult result = run_replication(data, config.pipeline, seed);
  write_partition(config, result.partition);
  log << "partition-dump: " << result.n_regions_pre << " regions before merge, "
      << result.n_regions_post << " after\n";
  return kExitOk;
}

int run_diagnose(const ExperimentConfig& config, std::ostream& log) {
  const auto result = diagnose(config);
  auto summary = open_out(config.out_dir / "decay_summary.csv");
  summary << "command,seed,config_hash,ref_id,x,k,reps_used,horizon,c,rho,r_squared,"
             "n_points_used,n_zero_excluded,decaying\n";
  const std::string hash = config.hash();
  for (std::size_t j = 0; j < result.size(); ++j) {
    const auto& r = result[j];
    auto out = open_out(config.out_dir / ("decay_" + std::to_string(j) + ".csv"));
    out << decay_csv(r.curve, r.fit);
    summary << "diagnose," << config.seed << ',' << hash << ',' << j << ','
            << num(r.curve.reference_x[0]) << ',' << config.k << ',' << r.reps_used << ','
            << r.curve.v_values.size() << ',' << num(r.fit.c) << ',' << num(r.fit.rho) << ','
            << num(r.fit.r_squared) << ',' << r.fit.n_points_used << ','
            << r.fit.n_zero_excluded << ',' << (r.fit.decaying() ? 1 : 0) << '\n';
    log << "x=" << num(r.curve.reference_x[0]) << " reps=" << r.reps_used
        << " rho=" << num(r.fit.rho) << " R2=" << num(r.fit.r_squared) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  try {
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    switch (config.command) {
      case Command::kSimulate:
      case Command::kRunCsv:
        return run_replications(config, log);
      case Command::kDiagnose:
        return run_diagnose(config, log);
      case Command::kPartitionDump:
        return run_partition_dump(config, log);
    }
  } catch (const ConfigError& e) {
    log << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    log << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    log << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    log << e.what() << '\n';
    return kExitConfig;
  } catch (const SupportError& e) {
    log << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "IoError: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << e.what() << '\n';
    return kExitPartial;
  }
  return kExitConfig;
}

}  // namespace loboost
