#include "loboost/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "loboost/errors.hpp"

namespace loboost {

std::vector<std::size_t> fixed_k_region(std::span<const LeafPath> paths,
                                        std::span<const int> x_path, std::size_t k) {
  if (k > x_path.size()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds path length " +
                      std::to_string(x_path.size()));
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].size() < k) throw DimensionError("leaf path shorter than k");
    bool same = true;
    for (std::size_t t = 0; t < k && same; ++t) same = paths[i][t] == x_path[t];
    if (same) out.push_back(i);
  }
  return out;
}

DecayCurve decay_curve(const BoostedEnsemble& model, const Dataset& eval,
                       std::span<const double> x, std::size_t k) {
  if (k > model.n_trees()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " +
                      std::to_string(model.n_trees()) + " fitted trees");
  }
  const auto paths = model.leaf_paths(eval);
  const auto members = fixed_k_region(paths, model.leaf_path(x), k);
  if (members.empty()) throw EmptyRegion("no evaluation point shares the first k leaves of x");

  DecayCurve curve;
  curve.reference_x.assign(x.begin(), x.end());
  curve.k = k;
  curve.n_region = members.size();
  for (std::size_t t = k + 1; t <= model.n_trees(); ++t) {
    const double at_x = model.tree_contribution(t, x);
    double s = 0.0;
    for (std::size_t i : members) {
      const double d = model.tree_contribution(t, eval.row(i)) - at_x;
      s += d * d;
    }
    curve.t_values.push_back(t);
    curve.v_values.push_back(s / static_cast<double>(members.size()));
  }
  return curve;
}

DecayCurve average_curves(std::span<const DecayCurve> curves) {
  if (curves.empty()) throw EmptyInput("no decay curves to average");
  std::size_t horizon = curves.front().v_values.size();
  for (const auto& c : curves) {
    if (c.k != curves.front().k) throw ConfigError("cannot average curves with different k");
    horizon = std::min(horizon, c.v_values.size());
  }
  DecayCurve out;
  out.reference_x = curves.front().reference_x;
  out.k = curves.front().k;
  out.t_values.assign(curves.front().t_values.begin(),
                      curves.front().t_values.begin() + static_cast<std::ptrdiff_t>(horizon));
  out.v_values.assign(horizon, 0.0);
  for (const auto& c : curves) {
    out.n_region += c.n_region;
    for (std::size_t i = 0; i < horizon; ++i) out.v_values[i] += c.v_values[i];
  }
  for (double& v : out.v_values) v /= static_cast<double>(curves.size());
  return out;
}

DecayFit fit_exponential(const DecayCurve& curve) {
  std::vector<double> ts;
  std::vector<double> logs;
  DecayFit fit;
  for (std::size_t i = 0; i < curve.v_values.size(); ++i) {
    if (curve.v_values[i] > 0.0) {
      ts.push_back(static_cast<double>(curve.t_values[i]));
      logs.push_back(std::log(curve.v_values[i]));
    } else {
      ++fit.n_zero_excluded;
    }
  }
  if (ts.size() < 2) {
    throw InsufficientData("need at least 2 positive V(t) values, have " +
                           std::to_string(ts.size()));
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += logs[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0;
  double stl = 0.0;
  double sll = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (logs[i] - ml);
    sll += (logs[i] - ml) * (logs[i] - ml);
  }
  const double slope = stl / stt;
  const double intercept = ml - slope * mt;
  double sse = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double e = logs[i] - (intercept + slope * ts[i]);
    sse += e * e;
  }
  fit.c = std::exp(intercept);
  fit.rho = std::exp(slope);
  // A flat log-curve is fitted exactly.
  fit.r_squared = sll > 0.0 ? 1.0 - sse / sll : 1.0;
  fit.n_points_used = ts.size();
  return fit;
}

std::string decay_csv(const DecayCurve& curve, const DecayFit& fit) {
  std::ostringstream out;
  out.precision(17);
  out << "t,v,fitted\n";
  for (std::size_t i = 0; i < curve.t_values.size(); ++i) {
    const double t = static_cast<double>(curve.t_values[i]);
    out << curve.t_values[i] << ',' << curve.v_values[i] << ','
        << fit.c * std::pow(fit.rho, t) << '\n';
  }
  return out.str();
}

}  // namespace loboost
