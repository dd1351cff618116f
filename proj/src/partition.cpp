#include "loboost/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "loboost/errors.hpp"

namespace loboost {

Prefix Prefix::from_path(std::span<const int> path) {
  Prefix p;
  p.leaves.assign(path.begin(), path.end());
  p.valid.assign(path.size(), true);
  return p;
}

std::string Prefix::to_string() const {
  std::string out;
  for (std::size_t t = 0; t < leaves.size(); ++t) {
    if (t) out += ',';
    out += valid[t] ? std::to_string(leaves[t]) : std::string("*");
  }
  return out.empty() ? std::string("-") : out;
}

double weighted_hamming(const Prefix& a, const Prefix& b, std::span<const double> w) {
  if (w.size() < std::max(a.size(), b.size())) {
    throw DimensionError("weights (" + std::to_string(w.size()) +
                         ") shorter than prefixes (" +
                         std::to_string(std::max(a.size(), b.size())) + ")");
  }
  const std::size_t k = std::min(a.size(), b.size());
  double d = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    if (a.valid[t] && b.valid[t] && a.leaves[t] != b.leaves[t]) d += w[t];
  }
  return d;
}

std::size_t PartitionModel::total_members() const {
  std::size_t s = 0;
  for (const auto& r : regions_) s += r.members.size();
  return s;
}

std::string PartitionModel::dump() const {
  std::ostringstream out;
  out << "# loboost-partition 1 regions " << regions_.size() << " pre_merge "
      << merged_from_.size() << " trees " << n_trees_ << " n_part " << n_part_
      << " n_merge " << n_merge_ << '\n';
  std::vector<std::vector<RegionId>> sources(regions_.size());
  for (std::size_t pre = 0; pre < merged_from_.size(); ++pre) {
    sources[merged_from_[pre]].push_back(static_cast<RegionId>(pre));
  }
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    out << r << ' ' << regions_[r].prefix.to_string() << ' ' << regions_[r].members.size()
        << ' ';
    for (std::size_t k = 0; k < sources[r].size(); ++k) {
      out << (k ? "," : "") << sources[r][k];
    }
    out << '\n';
  }
  return out.str();
}

namespace {

PartitionNode make_node(std::size_t depth, std::size_t member_count) {
  PartitionNode node;
  node.depth = depth;
  node.member_count = member_count;
  return node;
}

struct ActiveGroup {
  std::vector<std::size_t> rows;
  int node = 0;
  Prefix prefix;
};

}  // namespace

PartitionModel build_partition(std::span<const LeafPath> paths, std::size_t n_part) {
  if (paths.empty()) throw EmptyInput("no calibration paths");
  if (n_part < 1) throw ConfigError("n_part must be at least 1");
  const std::size_t n_trees = paths.front().size();
  for (const auto& p : paths) {
    if (p.size() != n_trees) throw DimensionError("leaf paths have unequal lengths");
  }

  PartitionModel model;
  model.n_trees_ = n_trees;
  model.n_part_ = n_part;

  auto make_terminal = [&model](ActiveGroup& g) {
    PartitionNode& node = model.nodes_[g.node];
    node.kind = PartitionNode::Kind::kTerminal;
    node.terminal_region = static_cast<RegionId>(model.regions_.size());
    model.regions_.push_back(Region{std::move(g.prefix), std::move(g.rows)});
  };

  std::vector<ActiveGroup> active(1);
  active[0].rows.resize(paths.size());
  std::iota(active[0].rows.begin(), active[0].rows.end(), std::size_t{0});
  model.nodes_.push_back(make_node(0, paths.size()));

  for (std::size_t t = 0; t < n_trees && !active.empty(); ++t) {
    std::vector<ActiveGroup> next;
    for (auto& g : active) {
      model.nodes_[g.node].depth = t;
      if (g.rows.size() < n_part) {
        make_terminal(g);
        continue;
      }
      std::map<int, std::vector<std::size_t>> by_leaf;
      for (std::size_t r : g.rows) by_leaf[paths[r][t]].push_back(r);

      if (by_leaf.size() == 1) {
        const int child = static_cast<int>(model.nodes_.size());
        model.nodes_.push_back(make_node(t + 1, g.rows.size()));
        model.nodes_[g.node].kind = PartitionNode::Kind::kTunnel;
        model.nodes_[g.node].pass_through = child;
        g.prefix.leaves.push_back(by_leaf.begin()->first);
        g.prefix.valid.push_back(false);
        next.push_back(ActiveGroup{std::move(g.rows), child, std::move(g.prefix)});
        continue;
      }

      model.nodes_[g.node].kind = PartitionNode::Kind::kSplit;
      for (auto& [leaf, rows] : by_leaf) {
        const int child = static_cast<int>(model.nodes_.size());
        model.nodes_.push_back(make_node(t + 1, rows.size()));
        model.nodes_[g.node].children.emplace(leaf, child);
        Prefix p = g.prefix;
        p.leaves.push_back(leaf);
        p.valid.push_back(true);
        next.push_back(ActiveGroup{std::move(rows), child, std::move(p)});
      }
    }
    active = std::move(next);
  }
  // Trees exhausted.
  for (auto& g : active) make_terminal(g);

  model.merged_from_.resize(model.regions_.size());
  std::iota(model.merged_from_.begin(), model.merged_from_.end(), RegionId{0});
  return model;
}

PartitionModel merge_regions(const PartitionModel& model, std::size_t n_merge,
                             std::span<const double> weights) {
  if (weights.size() < model.n_trees_) {
    throw DimensionError("need " + std::to_string(model.n_trees_) + " tree weights, got " +
                         std::to_string(weights.size()));
  }
  PartitionModel out = model;
  out.tree_weights_.assign(weights.begin(), weights.end());
  out.n_merge_ = n_merge;
  out.merged_ = true;

  auto& regions = out.regions_;
  const std::size_t k = regions.size();
  std::vector<bool> alive(k, true);
  std::vector<RegionId> absorbed_into(k, -1);
  std::size_t n_alive = k;

  while (n_alive > 1) {
    RegionId small = -1;
    for (std::size_t r = 0; r < k; ++r) {
      if (!alive[r] || regions[r].members.size() >= n_merge) continue;
      if (small < 0 || regions[r].members.size() < regions[small].members.size()) {
        small = static_cast<RegionId>(r);
      }
    }
    if (small < 0) break;

    // Nearest region by weighted Hamming distance; on equal distance an
    // absorber that already has n_merge rows wins, then the lower id.
    RegionId target = -1;
    double best = std::numeric_limits<double>::infinity();
    bool best_adequate = false;
    for (std::size_t r = 0; r < k; ++r) {
      if (!alive[r] || static_cast<RegionId>(r) == small) continue;
      const bool adequate = regions[r].members.size() >= n_merge;
      const double d = weighted_hamming(regions[small].prefix, regions[r].prefix, weights);
      if (d < best || (d == best && adequate && !best_adequate)) {
        best = d;
        best_adequate = adequate;
        target = static_cast<RegionId>(r);
      }
    }

    auto& dst = regions[target].members;
    auto& src = regions[small].members;
    dst.insert(dst.end(), src.begin(), src.end());
    std::sort(dst.begin(), dst.end());
    src.clear();
    alive[small] = false;
    absorbed_into[small] = target;
    --n_alive;
  }

  std::vector<RegionId> renumber(k, -1);
  std::vector<Region> survivors;
  for (std::size_t r = 0; r < k; ++r) {
    if (!alive[r]) continue;
    renumber[r] = static_cast<RegionId>(survivors.size());
    survivors.push_back(std::move(regions[r]));
  }
  auto resolve = [&](RegionId r) {
    while (absorbed_into[r] >= 0) r = absorbed_into[r];
    return renumber[r];
  };
  for (auto& m : out.merged_from_) m = resolve(m);
  regions = std::move(survivors);
  return out;
}

RegionId locate(const PartitionModel& model, std::span<const int> path) {
  if (path.size() != model.n_trees()) {
    throw DimensionError("leaf path has " + std::to_string(path.size()) + " entries, model has " +
                         std::to_string(model.n_trees()) + " trees");
  }
  const auto& nodes = model.nodes();
  int id = 0;
  while (true) {
    const PartitionNode& node = nodes[id];
    switch (node.kind) {
      case PartitionNode::Kind::kTerminal:
        return model.merged_from()[node.terminal_region];
      case PartitionNode::Kind::kTunnel:
        id = node.pass_through;
        continue;
      case PartitionNode::Kind::kSplit: {
        auto it = node.children.find(path[node.depth]);
        if (it != node.children.end()) {
          id = it->second;
          continue;
        }
        break;
      }
    }
    break;
  }

  // Off-trie path: nearest region.
  std::vector<double> uniform;
  std::span<const double> w = model.tree_weights();
  if (w.empty()) {
    uniform.assign(model.n_trees(), 1.0);
    w = uniform;
  }
  const Prefix query = Prefix::from_path(path);
  RegionId best_region = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < model.n_regions(); ++r) {
    const double d = weighted_hamming(query, model.regions()[r].prefix, w);
    if (d < best) {
      best = d;
      best_region = static_cast<RegionId>(r);
    }
  }
  return best_region;
}

WeightScheme WeightScheme::parse(const std::string& text) {
  if (text == "variance") return variance();
  if (text.rfind("exp:", 0) == 0) {
    std::size_t used = 0;
    double rho = 0.0;
    try {
      rho = std::stod(text.substr(4), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 4) {
      throw ConfigError("cannot parse weight scheme '" + text + "'");
    }
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("exponential rho must lie in (0, 1)");
    return exponential(rho);
  }
  throw ConfigError("unknown weight scheme '" + text + "' (use variance or exp:RHO)");
}

std::vector<double> compute_tree_weights(const BoostedEnsemble& model, const Dataset& cal,
                                         const WeightScheme& scheme) {
  const std::size_t n_trees = model.n_trees();
  std::vector<double> w(n_trees, 0.0);
  if (scheme.kind == WeightScheme::Kind::kExponential) {
    if (!(scheme.rho > 0.0 && scheme.rho < 1.0)) {
      throw ConfigError("exponential rho must lie in (0, 1)");
    }
    double v = 1.0;
    for (std::size_t t = 0; t < n_trees; ++t) {
      v *= scheme.rho;
      w[t] = v;
    }
    return w;
  }
  if (cal.rows() < 2) throw InsufficientData("variance weights need at least 2 calibration rows");
  const double n = static_cast<double>(cal.rows());
  for (std::size_t t = 0; t < n_trees; ++t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < cal.rows(); ++i) mean += model.trees()[t].value(cal.row(i));
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < cal.rows(); ++i) {
      const double d = model.trees()[t].value(cal.row(i)) - mean;
      ss += d * d;
    }
    w[t] = ss / n;
  }
  return w;
}

}  // namespace loboost
