#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loboost/data.hpp"
#include "loboost/gbm.hpp"

namespace loboost {

using RegionId = int;

/// Leaf-index prefix of a region. Positions whose tree was tunneled are
/// marked invalid and never take part in distances or matching.
struct Prefix {
  std::vector<int> leaves;
  std::vector<bool> valid;

  std::size_t size() const { return leaves.size(); }
  /// A fully valid prefix, e.g. a point's complete leaf path.
  static Prefix from_path(std::span<const int> path);
  /// Leaf indices with '*' at tunneled positions, e.g. "0,*,1".
  std::string to_string() const;
};

/// Sum of w[t] over positions valid in both prefixes where the leaves
/// differ. Throws DimensionError if `w` is shorter than either prefix.
double weighted_hamming(const Prefix& a, const Prefix& b, std::span<const double> w);

struct PartitionNode {
  enum class Kind { kTerminal, kSplit, kTunnel };

  Kind kind = Kind::kTerminal;
  /// 0-based index of the tree this node inspects (== prefix length).
  std::size_t depth = 0;
  std::map<int, int> children;  // kSplit: leaf index -> node id
  int pass_through = -1;        // kTunnel
  RegionId terminal_region = -1;  // kTerminal, pre-merge id
  std::size_t member_count = 0;
};

struct Region {
  Prefix prefix;
  std::vector<std::size_t> members;  // calibration row ids
};

/// Output of the tree-path partitioning: a trie over leaf paths whose
/// terminal nodes are regions, plus the merge bookkeeping.
class PartitionModel {
 public:
  const std::vector<PartitionNode>& nodes() const { return nodes_; }
  const std::vector<Region>& regions() const { return regions_; }
  std::size_t n_regions() const { return regions_.size(); }
  std::size_t n_regions_pre_merge() const { return merged_from_.size(); }
  std::size_t n_trees() const { return n_trees_; }
  std::size_t n_part() const { return n_part_; }
  std::size_t n_merge() const { return n_merge_; }
  bool is_merged() const { return merged_; }
  const std::vector<double>& tree_weights() const { return tree_weights_; }
  /// Pre-merge region id -> current region id.
  const std::vector<RegionId>& merged_from() const { return merged_from_; }
  std::size_t total_members() const;

  /// Plain-text dump, one line per region.
  std::string dump() const;

  friend PartitionModel build_partition(std::span<const LeafPath> paths, std::size_t n_part);
  friend PartitionModel merge_regions(const PartitionModel& model, std::size_t n_merge,
                                      std::span<const double> weights);

 private:
  std::vector<PartitionNode> nodes_;
  std::vector<Region> regions_;
  std::vector<double> tree_weights_;
  std::vector<RegionId> merged_from_;
  std::size_t n_trees_ = 0;
  std::size_t n_part_ = 0;
  std::size_t n_merge_ = 0;
  bool merged_ = false;
};

/// Groups calibration paths tree by tree. A group with fewer than n_part
/// rows becomes terminal; a group whose rows share one leaf at the current
/// tree tunnels past it; any other group splits by leaf index. Groups
/// still active after the last tree become terminal. Region ids follow
/// creation order.
PartitionModel build_partition(std::span<const LeafPath> paths, std::size_t n_part);

/// Repeatedly folds the smallest region below n_merge members (ties by id)
/// into the nearest region under weighted Hamming distance. Among equally
/// near candidates, one that already has n_merge members wins, then the
/// lowest id. Stops when every region is large enough or one region is
/// left. Region ids are renumbered
/// densely afterwards; merged_from() maps original ids to the new ones.
PartitionModel merge_regions(const PartitionModel& model, std::size_t n_merge,
                             std::span<const double> weights);

/// Region for a leaf path. Paths that leave the trie go to the nearest
/// region by weighted Hamming distance (lowest id on ties). Uniform weights
/// are used if the model carries none.
RegionId locate(const PartitionModel& model, std::span<const int> path);

struct WeightScheme {
  enum class Kind { kVariance, kExponential };
  Kind kind = Kind::kVariance;
  double rho = 0.5;

  static WeightScheme variance() { return {Kind::kVariance, 0.0}; }
  static WeightScheme exponential(double rho) { return {Kind::kExponential, rho}; }
  /// "variance" or "exp:RHO".
  static WeightScheme parse(const std::string& text);
};

/// Per-tree weights: population variance of tree t's raw output over the
/// calibration rows, or rho^t for t = 1..T.
std::vector<double> compute_tree_weights(const BoostedEnsemble& model, const Dataset& cal,
                                         const WeightScheme& scheme);

}  // namespace loboost
