#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loboost/data.hpp"
#include "loboost/gbm.hpp"
#include "loboost/partition.hpp"

namespace loboost {

struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0;

  double length() const { return upper - lower; }
  bool finite() const;
  bool contains(double y) const { return lower <= y && y <= upper; }
};

/// Order-statistic rank ceil((m + 1)(1 - alpha)); may exceed m.
std::size_t conformal_rank(std::size_t m, double alpha);

/// The rank-th smallest score, or +inf when the rank exceeds the sample
/// size. Throws EmptyScores on an empty input and ConfigError when alpha is
/// outside (0, 1).
double conformal_quantile(std::span<const double> scores, double alpha);

/// Absolute residuals |y - g(x)| of the model on `data`.
std::vector<double> absolute_residuals(const BoostedEnsemble& model, const Dataset& data);

struct GlobalCalibrator {
  double quantile = 0.0;
  double alpha = 0.1;
  std::size_t n_cal = 0;
};

GlobalCalibrator calibrate_global(const BoostedEnsemble& model, const Dataset& cal,
                                  double alpha);

struct LocalCalibrator {
  PartitionModel partition;
  std::vector<double> region_quantiles;  // indexed by RegionId, may be +inf
  std::vector<std::size_t> region_counts;
  double alpha = 0.1;
  double global_quantile = 0.0;

  std::size_t n_infinite_regions() const;
};

/// Region-wise conformal quantiles using the partition's own membership
/// lists, which must index rows of `cal`.
LocalCalibrator calibrate_local(const BoostedEnsemble& model, const PartitionModel& partition,
                                const Dataset& cal, double alpha);

/// Same, but every calibration row is routed through locate(). Use this
/// when the partition was built from a different sample than `cal`.
LocalCalibrator calibrate_local_routed(const BoostedEnsemble& model,
                                       const PartitionModel& partition, const Dataset& cal,
                                       double alpha);

/// Symmetric interval around `center` with the given half-width.
PredictionInterval make_interval(double center, double half_width);

PredictionInterval predict_interval(const GlobalCalibrator& cal, const BoostedEnsemble& model,
                                    std::span<const double> x);
PredictionInterval predict_interval(const LocalCalibrator& cal, const BoostedEnsemble& model,
                                    std::span<const double> x);

std::vector<PredictionInterval> predict_intervals(const GlobalCalibrator& cal,
                                                  const BoostedEnsemble& model,
                                                  const Dataset& data);
std::vector<PredictionInterval> predict_intervals(const LocalCalibrator& cal,
                                                  const BoostedEnsemble& model,
                                                  const Dataset& data);

}  // namespace loboost
