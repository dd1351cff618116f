#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loboost/data.hpp"

namespace loboost {

/// One node of a regression tree. Internal nodes route left iff
/// x[feature] <= threshold; leaves carry a dense depth-first index.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_index = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  /// Takes ownership of `nodes` (root at index 0) and assigns leaf indices
  /// in depth-first, left-before-right order.
  explicit RegressionTree(std::vector<TreeNode> nodes);

  const TreeNode& leaf_for(std::span<const double> x) const;
  double value(std::span<const double> x) const { return leaf_for(x).value; }
  int leaf_index(std::span<const double> x) const { return leaf_for(x).leaf_index; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int num_leaves() const { return num_leaves_; }

 private:
  std::vector<TreeNode> nodes_;
  int num_leaves_ = 0;
};

struct BoostConfig {
  int n_estimators = 300;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 20;
  double subsample = 0.8;
  double validation_fraction = 0.1;
  int n_iter_no_change = 15;
  std::uint64_t seed = 0;

  void validate() const;
};

using LeafPath = std::vector<int>;

/// Additive squared-loss ensemble: base + learning_rate * sum_t tree_t(x).
class BoostedEnsemble {
 public:
  BoostedEnsemble() = default;
  BoostedEnsemble(double base_value, double learning_rate,
                  std::vector<RegressionTree> trees, std::size_t n_features);

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Dataset& data) const;

  LeafPath leaf_path(std::span<const double> x) const;
  std::vector<LeafPath> leaf_paths(const Dataset& data) const;

  /// Raw (unshrunk) output of tree t, 1-based as in the additive formula.
  double tree_contribution(std::size_t t, std::span<const double> x) const;

  double base_value() const { return base_value_; }
  double learning_rate() const { return learning_rate_; }
  std::size_t n_trees() const { return trees_.size(); }
  std::size_t n_features() const { return n_features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  /// Validation MSE after each fitted tree; empty when early stopping was
  /// disabled.
  const std::vector<double>& validation_curve() const { return validation_curve_; }
  void set_validation_curve(std::vector<double> curve) {
    validation_curve_ = std::move(curve);
  }

  /// Versioned plain-text format, one line per node.
  void save(std::ostream& out) const;
  static BoostedEnsemble load(std::istream& in);
  std::string to_string() const;

 private:
  void check_dims(std::span<const double> x) const;

  double base_value_ = 0.0;
  double learning_rate_ = 1.0;
  std::vector<RegressionTree> trees_;
  std::size_t n_features_ = 0;
  std::vector<double> validation_curve_;
};

/// Stochastic gradient boosting with exact greedy CART trees.
///
/// The last floor(validation_fraction * n) rows are held out for early
/// stopping when n_iter_no_change > 0. A constant target yields a
/// zero-tree ensemble.
BoostedEnsemble fit(const Dataset& train, const BoostConfig& config);

}  // namespace loboost
