#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loboost/conformal.hpp"

namespace loboost {

struct EvaluationReport {
  double amc = 0.0;
  double mean_interval_length = 0.0;
  double smis = 0.0;
  double mse = 0.0;
  double calibration_seconds = 0.0;
  std::size_t n_infinite = 0;
  std::map<std::string, double> per_group_coverage;
};

/// Fraction of targets inside their closed interval.
double amc(std::span<const PredictionInterval> intervals, std::span<const double> y);

double mean_interval_length(std::span<const PredictionInterval> intervals);

/// Winkler/Gneiting interval score; +inf for an unbounded interval.
double interval_score(const PredictionInterval& interval, double y, double alpha);

double smis(std::span<const PredictionInterval> intervals, std::span<const double> y,
            double alpha);

double mse(std::span<const double> predictions, std::span<const double> y);

/// Coverage within each label; labels with no points do not appear.
std::map<std::string, double> conditional_coverage(
    std::span<const PredictionInterval> intervals, std::span<const double> y,
    std::span<const std::string> groups);

/// Everything except timing and group coverage, which the caller fills.
EvaluationReport evaluate(std::span<const PredictionInterval> intervals,
                          std::span<const double> y, double alpha);

struct RelativeMetrics {
  double smis_efficiency_pct = 0.0;
  double speedup = 0.0;
  double mse_improvement_pct = 0.0;
};

/// Compares `ours` against the strongest baseline `best`:
/// 100 * SMIS(best) / SMIS(ours), Time(best) / Time(ours), and
/// 100 * (MSE(best) / MSE(ours) - 1).
RelativeMetrics relative_metrics(const EvaluationReport& ours, const EvaluationReport& best);

}  // namespace loboost
