#pragma once

// Geometric cluster trees, the standard-admissibility block partition and
// the butterfly plans attached to its admissible leaves.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfly/interp.hpp"

namespace bfly {

/// Basis-function support: a proxy point used for octree membership and a
/// box containing the whole support.
struct Support {
  std::vector<double> proxy;
  Box bbox;
};

struct Cluster {
  std::size_t id = 0;
  int level = 0;
  std::vector<std::size_t> indices;
  /// Tight box around all member supports.
  Box bbox;
  /// Geometric octree cell the cluster was created from.
  Box cell;
  std::vector<std::size_t> sons;
  std::optional<std::size_t> father;
  /// Fixed point x_sigma in bbox (the box center).
  std::vector<double> proxy_point;

  std::size_t size() const { return indices.size(); }
  bool is_leaf() const { return sons.empty(); }
};

class ClusterTree {
 public:
  ClusterTree(std::vector<Cluster> clusters, std::size_t root);

  const Cluster& operator[](std::size_t id) const { return clusters_[id]; }
  const Cluster& root() const { return clusters_[root_]; }
  std::size_t root_id() const { return root_; }
  std::size_t size() const { return clusters_.size(); }
  int depth() const { return depth_; }
  std::span<const std::size_t> level(int l) const { return levels_[static_cast<std::size_t>(l)]; }
  std::size_t index_count() const { return root().size(); }

  /// Ancestor of `id` on level `l` (l <= level(id)).
  std::size_t ancestor(std::size_t id, int l) const;
  /// Descendants of `id` on level `l` (l >= level(id)), in tree order.
  std::vector<std::size_t> descendants_at(std::size_t id, int l) const;
  bool is_ancestor_or_self(std::size_t ancestor_id, std::size_t id) const;

 private:
  std::vector<Cluster> clusters_;
  std::size_t root_;
  int depth_ = 0;
  std::vector<std::vector<std::size_t>> levels_;
};

/// When subdivision of the whole level stops.
enum class StopRule {
  /// first level that contains some cluster with at most leaf_size indices
  any_small,
  /// first level on which every cluster has at most leaf_size indices
  all_small,
};

/// Octree over the proxy points: cells are bisected in all directions, empty
/// cells are dropped, and subdivision stops for the whole level at once, so
/// all leaves share one level. `max_depth` guards degenerate inputs
/// (coinciding proxies).
ClusterTree build_cluster_tree(std::span<const Support> supports, int leaf_size, int max_depth = 30,
                               StopRule rule = StopRule::any_small);

/// max(diam Bs, diam Bt) <= eta1 * dist(Bs, Bt).
bool standard_admissible(const Box& bs, const Box& bt, double eta1);

struct ButterflyPlan {
  std::size_t sigma_hat = 0;
  std::size_t tau_hat = 0;
  /// Level of the standard-admissible block.
  int level = 0;
  /// Number of re-interpolation steps L_ell = floor((depth - level) / 2).
  int steps = 0;
  /// Middle level depth - L_ell.
  int middle_level = 0;
  std::vector<std::pair<std::size_t, std::size_t>> middle_blocks;
};

struct AdmissibleLeaf {
  std::size_t sigma = 0;
  std::size_t tau = 0;
  std::size_t plan = 0;
};

struct BlockPartition {
  std::vector<AdmissibleLeaf> admissible;
  std::vector<std::pair<std::size_t, std::size_t>> inadmissible;
  std::vector<ButterflyPlan> plans;
  double eta1 = 1.0;
};

BlockPartition build_block_partition(const ClusterTree& rows, const ClusterTree& cols, double eta1);

/// Cluster sequences around a middle block. `*_ancestors[l]` is the cluster
/// with index -l (l = 0..L); `*_descendants[l]` lists all clusters with
/// index +l below the middle cluster.
struct ClusterSequences {
  std::vector<std::size_t> sigma_ancestors;
  std::vector<std::size_t> tau_ancestors;
  std::vector<std::vector<std::size_t>> sigma_descendants;
  std::vector<std::vector<std::size_t>> tau_descendants;
};

ClusterSequences cluster_sequence(const ClusterTree& rows, const ClusterTree& cols, const ButterflyPlan& plan,
                                  std::pair<std::size_t, std::size_t> middle_block);

struct Eta2Report {
  /// Smallest eta2 for which the parabolic condition holds on every paired level.
  double eta2 = 0.0;
  /// Largest per-direction son/father diameter ratio inside plan subtrees.
  double qbar = 0.0;
  std::size_t checked_pairs = 0;
  /// Pairs violating the condition for the `eta2_bound` passed in (0 if none given).
  std::size_t violations = 0;
};

Eta2Report check_assumption_eta2(const BlockPartition& partition, const ClusterTree& rows, const ClusterTree& cols,
                                 double kappa, std::optional<double> eta2_bound = std::nullopt);

struct PartitionStats {
  std::size_t admissible_leaves = 0;
  std::size_t inadmissible_leaves = 0;
  std::size_t plans = 0;
  /// Plan count per block level.
  std::vector<std::size_t> plans_per_level;
  std::size_t covered_entries = 0;
};

PartitionStats partition_stats(const BlockPartition& partition, const ClusterTree& rows, const ClusterTree& cols);

/// JSON object with partition statistics and, if given, the eta2/qbar report.
std::string partition_json(const BlockPartition& partition, const ClusterTree& rows, const ClusterTree& cols,
                           const std::optional<Eta2Report>& report = std::nullopt);

}  // namespace bfly
