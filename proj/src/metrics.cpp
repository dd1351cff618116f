#include "loboost/metrics.hpp"

#include <cmath>
#include <limits>

#include "loboost/errors.hpp"

namespace loboost {

namespace {
void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw LengthMismatch(std::to_string(a) + " intervals vs " + std::to_string(b) + " targets");
  }
  if (a == 0) throw EmptyInput("no test points");
}
}  // namespace

double amc(std::span<const PredictionInterval> intervals, std::span<const double> y) {
  check_lengths(intervals.size(), y.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += intervals[i].contains(y[i]);
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

double mean_interval_length(std::span<const PredictionInterval> intervals) {
  if (intervals.empty()) throw EmptyInput("no intervals");
  double s = 0.0;
  for (const auto& iv : intervals) s += iv.length();
  return s / static_cast<double>(intervals.size());
}

double interval_score(const PredictionInterval& interval, double y, double alpha) {
  if (!interval.finite()) return std::numeric_limits<double>::infinity();
  double score = interval.upper - interval.lower;
  if (y < interval.lower) score += (2.0 / alpha) * (interval.lower - y);
  if (y > interval.upper) score += (2.0 / alpha) * (y - interval.upper);
  return score;
}

double smis(std::span<const PredictionInterval> intervals, std::span<const double> y,
            double alpha) {
  check_lengths(intervals.size(), y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += interval_score(intervals[i], y[i], alpha);
  return s / static_cast<double>(y.size());
}

double mse(std::span<const double> predictions, std::span<const double> y) {
  check_lengths(predictions.size(), y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = predictions[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

std::map<std::string, double> conditional_coverage(
    std::span<const PredictionInterval> intervals, std::span<const double> y,
    std::span<const std::string> groups) {
  check_lengths(intervals.size(), y.size());
  if (groups.size() != y.size()) {
    throw LengthMismatch(std::to_string(groups.size()) + " labels vs " +
                         std::to_string(y.size()) + " targets");
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& [hit, total] = tally[groups[i]];
    hit += intervals[i].contains(y[i]);
    ++total;
  }
  std::map<std::string, double> out;
  for (const auto& [label, counts] : tally) {
    out[label] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return out;
}

EvaluationReport evaluate(std::span<const PredictionInterval> intervals,
                          std::span<const double> y, double alpha) {
  EvaluationReport r;
  r.amc = amc(intervals, y);
  r.mean_interval_length = mean_interval_length(intervals);
  r.smis = smis(intervals, y, alpha);
  std::vector<double> centers(intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    centers[i] = intervals[i].center;
    r.n_infinite += !intervals[i].finite();
  }
  r.mse = mse(centers, y);
  return r;
}

RelativeMetrics relative_metrics(const EvaluationReport& ours, const EvaluationReport& best) {
  if (!(ours.smis > 0.0)) throw DivisionByZero("SMIS of the compared method is not positive");
  if (!(ours.calibration_seconds > 0.0)) {
    throw DivisionByZero("calibration time of the compared method is not positive");
  }
  if (!(ours.mse > 0.0)) throw DivisionByZero("MSE of the compared method is not positive");
  return {100.0 * best.smis / ours.smis, best.calibration_seconds / ours.calibration_seconds,
          100.0 * (best.mse / ours.mse - 1.0)};
}

}  // namespace loboost
