#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loboost/conformal.hpp"
#include "loboost/data.hpp"
#include "loboost/diagnostics.hpp"
#include "loboost/gbm.hpp"
#include "loboost/metrics.hpp"
#include "loboost/partition.hpp"
#include "loboost/synth.hpp"

namespace loboost {

/// Everything one fit-partition-calibrate-evaluate pass needs.
struct PipelineConfig {
  double alpha = 0.1;
  BoostConfig boost;
  std::size_t m_part = 200;
  std::size_t m_merge = 200;
  WeightScheme weights = WeightScheme::variance();
  SplitSpec split;

  void validate() const;
};

struct ReplicationResult {
  EvaluationReport icp;
  EvaluationReport loboost;
  std::optional<EvaluationReport> oracle;  // synthetic data only
  std::size_t n_trees = 0;
  std::size_t n_regions_pre = 0;
  std::size_t n_regions_post = 0;
  std::size_t n_merged = 0;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  PartitionModel partition;
};

/// Splits with the native protocol, fits one ensemble shared by both
/// methods, calibrates global and local conformal intervals and scores
/// them on the test rows. With `setting`, coverage is also broken down by
/// noise segment and the oracle interval is scored.
ReplicationResult run_replication(const Dataset& data, const PipelineConfig& config,
                                  std::uint64_t seed,
                                  std::optional<synth::Setting> setting = std::nullopt);

/// Seed used for replication `rep` of a run seeded with `seed`.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep);

enum class Command { kSimulate, kRunCsv, kDiagnose, kPartitionDump };

Command parse_command(const std::string& text);
std::string command_name(Command c);

struct ExperimentConfig {
  Command command = Command::kSimulate;
  synth::Setting dgp = synth::Setting::kHeteroscedastic;
  std::size_t n = 3000;
  std::filesystem::path csv;
  std::string target;
  PipelineConfig pipeline;
  std::size_t replications = 50;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::size_t k = 3;
  std::vector<double> reference_points;

  void validate() const;
  /// Hex digest of every field that affects results (not out_dir).
  std::string hash() const;
};

/// Replication `rep` of the simulate command: a fresh sample from the
/// configured setting followed by run_replication.
ReplicationResult simulate_replication(const ExperimentConfig& config, std::size_t rep);

/// Exit status convention: 0 all replications succeeded, 1 some failed,
/// 2 configuration or input error.
enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitConfig = 2 };

int run_experiment(const ExperimentConfig& config, std::ostream& log);

struct DiagnoseResult {
  DecayCurve curve;  // averaged over replications
  DecayFit fit;
  std::size_t reps_used = 0;
};

/// Population quantiles 0.2, 0.4, 0.6, 0.8 of the setting's X.
std::vector<double> default_reference_points(synth::Setting s);

/// Decay curves at fixed reference points, each replication drawing fresh
/// training and evaluation samples of size n and refitting; V(t) is
/// averaged across replications before the exponential fit.
std::vector<DiagnoseResult> diagnose(const ExperimentConfig& config);

/// Mean and 95% normal-approximation half-width.
struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};
MeanCi mean_ci(const std::vector<double>& values);

}  // namespace loboost
