#include "loboost/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loboost/errors.hpp"

namespace loboost {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}
}  // namespace

bool PredictionInterval::finite() const {
  return std::isfinite(lower) && std::isfinite(upper);
}

std::size_t conformal_rank(std::size_t m, double alpha) {
  check_alpha(alpha);
  // (m + 1)(1 - alpha) is often an integer in exact arithmetic (e.g. 10 *
  // 0.9); the slack keeps a one-ulp overshoot from bumping the rank.
  const double level = static_cast<double>(m + 1) * (1.0 - alpha);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(level - 1e-9)));
}

double conformal_quantile(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw EmptyScores("no calibration scores");
  const std::size_t r = conformal_rank(scores.size(), alpha);
  if (r > scores.size()) return kInf;
  std::vector<double> work(scores.begin(), scores.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(r - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

std::vector<double> absolute_residuals(const BoostedEnsemble& model, const Dataset& data) {
  std::vector<double> s(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    s[i] = std::abs(data.target(i) - model.predict(data.row(i)));
  }
  return s;
}

GlobalCalibrator calibrate_global(const BoostedEnsemble& model, const Dataset& cal,
                                  double alpha) {
  const auto scores = absolute_residuals(model, cal);
  return {conformal_quantile(scores, alpha), alpha, cal.rows()};
}

std::size_t LocalCalibrator::n_infinite_regions() const {
  return static_cast<std::size_t>(std::count_if(region_quantiles.begin(), region_quantiles.end(),
                                                [](double q) { return std::isinf(q); }));
}

namespace {

LocalCalibrator finish(const PartitionModel& partition, std::span<const double> scores,
                       const std::vector<std::vector<std::size_t>>& members, double alpha) {
  LocalCalibrator out;
  out.partition = partition;
  out.alpha = alpha;
  out.global_quantile = conformal_quantile(scores, alpha);
  out.region_quantiles.resize(members.size());
  out.region_counts.resize(members.size());
  std::vector<double> local;
  for (std::size_t r = 0; r < members.size(); ++r) {
    out.region_counts[r] = members[r].size();
    if (members[r].empty()) {
      out.region_quantiles[r] = kInf;
      continue;
    }
    local.clear();
    for (std::size_t i : members[r]) local.push_back(scores[i]);
    out.region_quantiles[r] = conformal_quantile(local, alpha);
  }
  return out;
}

}  // namespace

LocalCalibrator calibrate_local(const BoostedEnsemble& model, const PartitionModel& partition,
                                const Dataset& cal, double alpha) {
  check_alpha(alpha);
  if (partition.total_members() != cal.rows()) {
    throw DimensionError("partition holds " + std::to_string(partition.total_members()) +
                         " rows but calibration set has " + std::to_string(cal.rows()));
  }
  const auto scores = absolute_residuals(model, cal);
  std::vector<std::vector<std::size_t>> members;
  members.reserve(partition.n_regions());
  for (const auto& region : partition.regions()) {
    for (std::size_t i : region.members) {
      if (i >= cal.rows()) throw IndexError("partition member outside calibration set");
    }
    members.push_back(region.members);
  }
  return finish(partition, scores, members, alpha);
}

LocalCalibrator calibrate_local_routed(const BoostedEnsemble& model,
                                       const PartitionModel& partition, const Dataset& cal,
                                       double alpha) {
  check_alpha(alpha);
  const auto scores = absolute_residuals(model, cal);
  std::vector<std::vector<std::size_t>> members(partition.n_regions());
  for (std::size_t i = 0; i < cal.rows(); ++i) {
    members[locate(partition, model.leaf_path(cal.row(i)))].push_back(i);
  }
  return finish(partition, scores, members, alpha);
}

PredictionInterval make_interval(double center, double half_width) {
  if (std::isinf(half_width) && half_width > 0) return {-kInf, kInf, center};
  return {center - half_width, center + half_width, center};
}

PredictionInterval predict_interval(const GlobalCalibrator& cal, const BoostedEnsemble& model,
                                    std::span<const double> x) {
  return make_interval(model.predict(x), cal.quantile);
}

PredictionInterval predict_interval(const LocalCalibrator& cal, const BoostedEnsemble& model,
                                    std::span<const double> x) {
  const double center = model.predict(x);
  const RegionId r = locate(cal.partition, model.leaf_path(x));
  return make_interval(center, cal.region_quantiles[r]);
}

std::vector<PredictionInterval> predict_intervals(const GlobalCalibrator& cal,
                                                  const BoostedEnsemble& model,
                                                  const Dataset& data) {
  std::vector<PredictionInterval> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = predict_interval(cal, model, data.row(i));
  return out;
}

std::vector<PredictionInterval> predict_intervals(const LocalCalibrator& cal,
                                                  const BoostedEnsemble& model,
                                                  const Dataset& data) {
  std::vector<PredictionInterval> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = predict_interval(cal, model, data.row(i));
  return out;
}

}  // namespace loboost
