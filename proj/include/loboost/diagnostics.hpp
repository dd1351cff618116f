#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "loboost/data.hpp"
#include "loboost/gbm.hpp"

namespace loboost {

/// Indices i with paths[i][t] == x_path[t] for all t < k. k = 0 selects
/// everything. Plain prefix agreement, no tunneling.
std::vector<std::size_t> fixed_k_region(std::span<const LeafPath> paths,
                                        std::span<const int> x_path, std::size_t k);

/// Within-region second moment of tree outputs around a reference point:
/// V(t) = mean over region members X_i of (h_t(X_i) - h_t(x))^2, t > k.
struct DecayCurve {
  std::vector<double> reference_x;
  std::size_t k = 0;
  std::vector<std::size_t> t_values;
  std::vector<double> v_values;
  std::size_t n_region = 0;
};

DecayCurve decay_curve(const BoostedEnsemble& model, const Dataset& eval,
                       std::span<const double> x, std::size_t k);

/// Pointwise mean of several curves for the same reference point over
/// their common horizon (t up to the shortest curve). Throws EmptyInput on
/// an empty list.
DecayCurve average_curves(std::span<const DecayCurve> curves);

/// Log-linear least squares of ln V(t) on t over the positive entries;
/// V(t) ~= C * rho^t.
struct DecayFit {
  double c = 0.0;
  double rho = 0.0;
  double r_squared = 0.0;
  std::size_t n_points_used = 0;
  std::size_t n_zero_excluded = 0;

  bool decaying() const { return rho > 0.0 && rho < 1.0; }
};

DecayFit fit_exponential(const DecayCurve& curve);

/// CSV with columns t, v, fitted.
std::string decay_csv(const DecayCurve& curve, const DecayFit& fit);

}  // namespace loboost
