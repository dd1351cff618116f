#include "loboost/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "loboost/errors.hpp"
#include "loboost/rng.hpp"

namespace loboost {

// ---------------------------------------------------------------------------
// RegressionTree

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw EmptyInput("tree needs at least one node");
  // Depth-first, left before right. Explicit stack; push right first.
  std::vector<int> stack{0};
  int next_leaf = 0;
  std::vector<bool> seen(nodes_.size(), false);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size() || seen[id]) {
      throw Error("malformed tree: bad or repeated node id " + std::to_string(id));
    }
    seen[id] = true;
    TreeNode& node = nodes_[id];
    if (node.is_leaf()) {
      node.leaf_index = next_leaf++;
    } else {
      node.leaf_index = -1;
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  num_leaves_ = next_leaf;
}

const TreeNode& RegressionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes_[0];
  while (!node->is_leaf()) {
    node = &nodes_[x[node->feature] <= node->threshold ? node->left : node->right];
  }
  return *node;
}

// ---------------------------------------------------------------------------
// BoostedEnsemble

BoostedEnsemble::BoostedEnsemble(double base_value, double learning_rate,
                                 std::vector<RegressionTree> trees, std::size_t n_features)
    : base_value_(base_value),
      learning_rate_(learning_rate),
      trees_(std::move(trees)),
      n_features_(n_features) {}

void BoostedEnsemble::check_dims(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw DimensionError("expected " + std::to_string(n_features_) + " features, got " +
                         std::to_string(x.size()));
  }
}

double BoostedEnsemble::predict(std::span<const double> x) const {
  check_dims(x);
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.value(x);
  return base_value_ + learning_rate_ * sum;
}

std::vector<double> BoostedEnsemble::predict(const Dataset& data) const {
  std::vector<double> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = predict(data.row(i));
  return out;
}

LeafPath BoostedEnsemble::leaf_path(std::span<const double> x) const {
  check_dims(x);
  LeafPath path(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) path[t] = trees_[t].leaf_index(x);
  return path;
}

std::vector<LeafPath> BoostedEnsemble::leaf_paths(const Dataset& data) const {
  std::vector<LeafPath> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = leaf_path(data.row(i));
  return out;
}

double BoostedEnsemble::tree_contribution(std::size_t t, std::span<const double> x) const {
  if (t < 1 || t > trees_.size()) {
    throw IndexError("tree " + std::to_string(t) + " not in 1.." +
                     std::to_string(trees_.size()));
  }
  check_dims(x);
  return trees_[t - 1].value(x);
}

namespace {
constexpr const char* kFormatTag = "loboost-ensemble";
constexpr int kFormatVersion = 1;

std::string fmt_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}
}  // namespace

void BoostedEnsemble::save(std::ostream& out) const {
  out << kFormatTag << ' ' << kFormatVersion << '\n';
  out << "n_features " << n_features_ << '\n';
  out << "base_value " << fmt_double(base_value_) << '\n';
  out << "learning_rate " << fmt_double(learning_rate_) << '\n';
  out << "n_trees " << trees_.size() << '\n';
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto& nodes = trees_[t].nodes();
    out << "tree " << t << " n_nodes " << nodes.size() << '\n';
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      const TreeNode& n = nodes[id];
      out << t << ' ' << id << ' ';
      if (n.is_leaf()) {
        out << "leaf " << n.leaf_index << ' ' << fmt_double(n.value) << '\n';
      } else {
        out << "split " << n.feature << ' ' << fmt_double(n.threshold) << ' ' << n.left
            << ' ' << n.right << '\n';
      }
    }
  }
}

std::string BoostedEnsemble::to_string() const {
  std::ostringstream s;
  save(s);
  return s.str();
}

BoostedEnsemble BoostedEnsemble::load(std::istream& in) {
  auto expect = [&in](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
      throw ParseError("model file: expected '" + word + "', got '" + got + "'");
    }
  };
  expect(kFormatTag);
  int version = 0;
  if (!(in >> version) || version != kFormatVersion) {
    throw ParseError("model file: unsupported version " + std::to_string(version));
  }
  std::size_t n_features = 0;
  std::size_t n_trees = 0;
  double base = 0.0;
  double lr = 0.0;
  expect("n_features");
  in >> n_features;
  expect("base_value");
  in >> base;
  expect("learning_rate");
  in >> lr;
  expect("n_trees");
  in >> n_trees;
  std::vector<RegressionTree> trees;
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::size_t tree_id = 0;
    std::size_t n_nodes = 0;
    expect("tree");
    in >> tree_id;
    expect("n_nodes");
    in >> n_nodes;
    std::vector<TreeNode> nodes(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      std::size_t t_id = 0;
      std::size_t node_id = 0;
      std::string kind;
      in >> t_id >> node_id >> kind;
      if (!in || t_id != t || node_id >= n_nodes) throw ParseError("model file: bad node line");
      TreeNode& n = nodes[node_id];
      if (kind == "leaf") {
        in >> n.leaf_index >> n.value;
      } else if (kind == "split") {
        in >> n.feature >> n.threshold >> n.left >> n.right;
      } else {
        throw ParseError("model file: unknown node kind '" + kind + "'");
      }
    }
    if (!in) throw ParseError("model file: truncated tree " + std::to_string(t));
    trees.emplace_back(std::move(nodes));
  }
  return BoostedEnsemble(base, lr, std::move(trees), n_features);
}

// ---------------------------------------------------------------------------
// Fitting

void BoostConfig::validate() const {
  if (n_estimators < 1) throw ConfigError("n_estimators must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must lie in (0, 1]");
  }
  if (max_depth < 1) throw ConfigError("max_depth must be positive");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be positive");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("subsample must lie in (0, 1]");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  if (n_iter_no_change < 0) throw ConfigError("n_iter_no_change must be nonnegative");
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const double> residuals, int max_depth,
              int min_leaf)
      : data_(data), residuals_(residuals), max_depth_(max_depth), min_leaf_(min_leaf) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(std::move(rows), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    for (std::size_t r : rows) sum += residuals_[r];
    const double mean = sum / static_cast<double>(rows.size());

    SplitChoice best;
    if (depth < max_depth_ && rows.size() >= 2 * static_cast<std::size_t>(min_leaf_)) {
      best = find_split(rows, sum);
    }
    if (best.feature < 0) {
      nodes_[id].value = mean;
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (data_.feature(r, best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    nodes_[id].left = l;
    nodes_[id].right = rr;
    return id;
  }

  // Exact greedy search over midpoints of sorted unique values. Features
  // and thresholds are scanned in ascending order and only a strictly
  // larger gain replaces the incumbent, which gives the lowest-feature,
  // smallest-threshold tie-break.
  SplitChoice find_split(const std::vector<std::size_t>& rows, double total) const {
    const std::size_t n = rows.size();
    const double nd = static_cast<double>(n);
    const double parent_term = total * total / nd;
    SplitChoice best;
    std::vector<std::pair<double, double>> sorted(n);
    for (std::size_t j = 0; j < data_.cols(); ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        sorted[k] = {data_.feature(rows[k], j), residuals_[rows[k]]};
      }
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      const auto min_leaf = static_cast<std::size_t>(min_leaf_);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += sorted[k].second;
        const std::size_t n_left = k + 1;
        if (sorted[k].first == sorted[k + 1].first) continue;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n - n_left) -
                            parent_term;
        if (gain > best.gain) {
          double mid = 0.5 * (sorted[k].first + sorted[k + 1].first);
          if (!(mid < sorted[k + 1].first)) mid = sorted[k].first;
          best = {static_cast<int>(j), mid, gain};
        }
      }
    }
    // Gains within rounding noise of zero are not real splits.
    double sse_scale = 0.0;
    for (std::size_t r : rows) sse_scale += residuals_[r] * residuals_[r];
    if (best.gain <= 1e-12 * (sse_scale + 1e-300)) best.feature = -1;
    return best;
  }

  const Dataset& data_;
  std::span<const double> residuals_;
  int max_depth_;
  int min_leaf_;
  std::vector<TreeNode> nodes_;
};

double mse_of(std::span<const double> y, std::span<const double> pred) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - pred[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

BoostedEnsemble fit(const Dataset& train, const BoostConfig& config) {
  config.validate();
  const std::size_t n = train.rows();
  if (n < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
    throw ConfigError("training set of " + std::to_string(n) +
                      " rows is smaller than 2 * min_samples_leaf");
  }

  std::size_t n_valid = 0;
  if (config.n_iter_no_change > 0 && config.validation_fraction > 0.0) {
    n_valid = static_cast<std::size_t>(
        std::floor(config.validation_fraction * static_cast<double>(n) + 1e-9));
    if (n - n_valid < 2 * static_cast<std::size_t>(config.min_samples_leaf)) n_valid = 0;
  }
  const std::size_t n_fit = n - n_valid;
  auto y = train.targets();

  double base = 0.0;
  for (std::size_t i = 0; i < n_fit; ++i) base += y[i];
  base /= static_cast<double>(n_fit);

  const bool constant =
      std::all_of(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_fit),
                  [&](double v) { return v == y[0]; });
  if (constant) return BoostedEnsemble(y[0], config.learning_rate, {}, train.cols());

  std::vector<double> pred(n, base);
  std::vector<double> residual(n, 0.0);
  std::vector<RegressionTree> trees;
  std::vector<double> curve;
  double best_valid = std::numeric_limits<double>::infinity();
  int since_best = 0;

  const auto n_sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(config.subsample * static_cast<double>(n_fit) + 1e-9)));
  const RngStream root(config.seed);
  TreeBuilder builder(train, residual, config.max_depth, config.min_samples_leaf);

  std::vector<std::size_t> pool(n_fit);
  for (int t = 0; t < config.n_estimators; ++t) {
    for (std::size_t i = 0; i < n_fit; ++i) residual[i] = y[i] - pred[i];

    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<std::size_t> rows;
    if (n_sub >= n_fit) {
      rows = pool;
    } else {
      RngStream rng = root.derive("tree-subsample:" + std::to_string(t + 1));
      for (std::size_t k = 0; k < n_sub; ++k) {
        std::swap(pool[k], pool[k + rng.uniform_index(n_fit - k)]);
      }
      rows.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_sub));
      std::sort(rows.begin(), rows.end());
    }

    RegressionTree tree = builder.build(std::move(rows));
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += config.learning_rate * tree.value(train.row(i));
    }
    trees.push_back(std::move(tree));

    if (n_valid > 0) {
      const double v = mse_of(y.subspan(n_fit), std::span<const double>(pred).subspan(n_fit));
      curve.push_back(v);
      if (v < best_valid) {
        best_valid = v;
        since_best = 0;
      } else if (++since_best >= config.n_iter_no_change) {
        break;
      }
    }
  }

  BoostedEnsemble model(base, config.learning_rate, std::move(trees), train.cols());
  model.set_validation_curve(std::move(curve));
  return model;
}

}  // namespace loboost
