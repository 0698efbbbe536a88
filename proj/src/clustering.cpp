#include "bfly/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace bfly {

namespace {

// Boxes with (near) zero extent in some direction would make the
// interpolation intervals degenerate.
Box inflate_degenerate(std::vector<double> lo, std::vector<double> hi) {
  double scale = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) scale = std::max({scale, std::abs(lo[i]), std::abs(hi[i])});
  const double min_extent = 1e-12 * (1.0 + scale);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (hi[i] - lo[i] < min_extent) {
      const double mid = 0.5 * (lo[i] + hi[i]);
      lo[i] = mid - 0.5 * min_extent;
      hi[i] = mid + 0.5 * min_extent;
    }
  }
  return Box(std::move(lo), std::move(hi));
}

Box tight_box(std::span<const Support> supports, std::span<const std::size_t> indices) {
  const Box& first = supports[indices.front()].bbox;
  std::vector<double> lo = first.lo();
  std::vector<double> hi = first.hi();
  for (std::size_t idx : indices) {
    const Box& b = supports[idx].bbox;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] = std::min(lo[i], b.lo(i));
      hi[i] = std::max(hi[i], b.hi(i));
    }
  }
  return inflate_degenerate(std::move(lo), std::move(hi));
}

}  // namespace

ClusterTree::ClusterTree(std::vector<Cluster> clusters, std::size_t root)
    : clusters_(std::move(clusters)), root_(root) {
  for (const auto& c : clusters_) {
    depth_ = std::max(depth_, c.level);
  }
  levels_.resize(static_cast<std::size_t>(depth_) + 1);
  for (const auto& c : clusters_) levels_[static_cast<std::size_t>(c.level)].push_back(c.id);
}

std::size_t ClusterTree::ancestor(std::size_t id, int l) const {
  if (l > clusters_[id].level) throw std::invalid_argument("ClusterTree::ancestor: level below cluster");
  while (clusters_[id].level > l) id = *clusters_[id].father;
  return id;
}

std::vector<std::size_t> ClusterTree::descendants_at(std::size_t id, int l) const {
  if (l < clusters_[id].level) throw std::invalid_argument("ClusterTree::descendants_at: level above cluster");
  std::vector<std::size_t> current{id};
  for (int lev = clusters_[id].level; lev < l; ++lev) {
    std::vector<std::size_t> next;
    for (std::size_t c : current) {
      next.insert(next.end(), clusters_[c].sons.begin(), clusters_[c].sons.end());
    }
    current = std::move(next);
  }
  return current;
}

bool ClusterTree::is_ancestor_or_self(std::size_t ancestor_id, std::size_t id) const {
  const int l = clusters_[ancestor_id].level;
  if (clusters_[id].level < l) return false;
  return ancestor(id, l) == ancestor_id;
}

ClusterTree build_cluster_tree(std::span<const Support> supports, int leaf_size, int max_depth, StopRule rule) {
  if (leaf_size < 1) throw std::invalid_argument("build_cluster_tree: leaf_size must be >= 1");
  if (supports.empty()) throw std::invalid_argument("build_cluster_tree: no indices");
  const std::size_t d = supports.front().proxy.size();
  for (const auto& s : supports) {
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(s.proxy[i]) || !std::isfinite(s.bbox.lo(i)) || !std::isfinite(s.bbox.hi(i))) {
        throw std::invalid_argument("build_cluster_tree: non-finite coordinates");
      }
    }
  }

  std::vector<std::size_t> all(supports.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<Cluster> clusters;
  Cluster root;
  root.id = 0;
  root.level = 0;
  root.indices = all;
  root.bbox = tight_box(supports, all);
  {
    // the root cell also has to contain all proxies
    std::vector<double> lo = root.bbox.lo();
    std::vector<double> hi = root.bbox.hi();
    for (const auto& s : supports) {
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], s.proxy[i]);
        hi[i] = std::max(hi[i], s.proxy[i]);
      }
    }
    root.cell = inflate_degenerate(lo, hi);
  }
  root.proxy_point = root.bbox.center();
  clusters.push_back(std::move(root));

  std::vector<std::size_t> current{0};
  const auto leaf_cap = static_cast<std::size_t>(leaf_size);
  for (int level = 0; level < max_depth; ++level) {
    auto small = [&](std::size_t id) { return clusters[id].size() <= leaf_cap; };
    const bool stop = rule == StopRule::any_small ? std::any_of(current.begin(), current.end(), small)
                                                  : std::all_of(current.begin(), current.end(), small);
    if (stop) break;

    std::vector<std::size_t> next;
    for (std::size_t id : current) {
      const Box cell = clusters[id].cell;
      const std::vector<double> mid = cell.center();
      const std::size_t octants = std::size_t{1} << d;
      std::vector<std::vector<std::size_t>> buckets(octants);
      for (std::size_t idx : clusters[id].indices) {
        std::size_t o = 0;
        for (std::size_t i = 0; i < d; ++i) {
          if (supports[idx].proxy[i] >= mid[i]) o |= std::size_t{1} << i;
        }
        buckets[o].push_back(idx);
      }
      for (std::size_t o = 0; o < octants; ++o) {
        if (buckets[o].empty()) continue;
        std::vector<double> lo(d), hi(d);
        for (std::size_t i = 0; i < d; ++i) {
          const bool upper = (o >> i) & 1U;
          lo[i] = upper ? mid[i] : cell.lo(i);
          hi[i] = upper ? cell.hi(i) : mid[i];
        }
        Cluster son;
        son.id = clusters.size();
        son.level = level + 1;
        son.indices = std::move(buckets[o]);
        std::sort(son.indices.begin(), son.indices.end());
        son.bbox = tight_box(supports, son.indices);
        son.cell = Box(std::move(lo), std::move(hi));
        son.father = id;
        son.proxy_point = son.bbox.center();
        clusters[id].sons.push_back(son.id);
        next.push_back(son.id);
        clusters.push_back(std::move(son));
      }
    }
    current = std::move(next);
  }
  return ClusterTree(std::move(clusters), 0);
}

bool standard_admissible(const Box& bs, const Box& bt, double eta1) {
  return std::max(bs.diam(), bt.diam()) <= eta1 * dist(bs, bt);
}

namespace {

void partition_recursive(const ClusterTree& rows, const ClusterTree& cols, std::size_t s, std::size_t t,
                         BlockPartition& out) {
  const Cluster& cs = rows[s];
  const Cluster& ct = cols[t];
  if (standard_admissible(cs.bbox, ct.bbox, out.eta1)) {
    ButterflyPlan plan;
    plan.sigma_hat = s;
    plan.tau_hat = t;
    plan.level = cs.level;
    plan.steps = (rows.depth() - cs.level) / 2;
    plan.middle_level = rows.depth() - plan.steps;
    const auto row_mid = rows.descendants_at(s, plan.middle_level);
    const auto col_mid = cols.descendants_at(t, plan.middle_level);
    const std::size_t plan_id = out.plans.size();
    for (std::size_t a : row_mid) {
      for (std::size_t b : col_mid) {
        plan.middle_blocks.emplace_back(a, b);
        out.admissible.push_back({a, b, plan_id});
      }
    }
    out.plans.push_back(std::move(plan));
    return;
  }
  if (cs.is_leaf() || ct.is_leaf()) {
    out.inadmissible.emplace_back(s, t);
    return;
  }
  for (std::size_t a : cs.sons) {
    for (std::size_t b : ct.sons) partition_recursive(rows, cols, a, b, out);
  }
}

}  // namespace

BlockPartition build_block_partition(const ClusterTree& rows, const ClusterTree& cols, double eta1) {
  if (rows.depth() != cols.depth()) {
    throw std::invalid_argument("build_block_partition: cluster trees have different depths");
  }
  if (!(eta1 > 0.0)) throw std::invalid_argument("build_block_partition: eta1 must be positive");
  BlockPartition out;
  out.eta1 = eta1;
  partition_recursive(rows, cols, rows.root_id(), cols.root_id(), out);
  return out;
}

ClusterSequences cluster_sequence(const ClusterTree& rows, const ClusterTree& cols, const ButterflyPlan& plan,
                                  std::pair<std::size_t, std::size_t> middle_block) {
  const auto [s0, t0] = middle_block;
  const bool member = rows[s0].level == plan.middle_level && cols[t0].level == plan.middle_level &&
                      rows.is_ancestor_or_self(plan.sigma_hat, s0) && cols.is_ancestor_or_self(plan.tau_hat, t0);
  if (!member) throw std::invalid_argument("cluster_sequence: block does not belong to the plan");

  ClusterSequences seq;
  const auto steps = static_cast<std::size_t>(plan.steps);
  seq.sigma_ancestors.resize(steps + 1);
  seq.tau_ancestors.resize(steps + 1);
  seq.sigma_descendants.resize(steps + 1);
  seq.tau_descendants.resize(steps + 1);
  for (std::size_t l = 0; l <= steps; ++l) {
    const int up = plan.middle_level - static_cast<int>(l);
    const int down = plan.middle_level + static_cast<int>(l);
    seq.sigma_ancestors[l] = rows.ancestor(s0, up);
    seq.tau_ancestors[l] = cols.ancestor(t0, up);
    seq.sigma_descendants[l] = rows.descendants_at(s0, down);
    seq.tau_descendants[l] = cols.descendants_at(t0, down);
  }
  return seq;
}

namespace {

double max_shrink_ratio(const ClusterTree& tree, std::size_t root) {
  double q = 0.0;
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    const Cluster& c = tree[id];
    for (std::size_t s : c.sons) {
      for (std::size_t i = 0; i < c.bbox.dim(); ++i) {
        q = std::max(q, tree[s].bbox.diam_i(i) / c.bbox.diam_i(i));
      }
      stack.push_back(s);
    }
  }
  return q;
}

}  // namespace

Eta2Report check_assumption_eta2(const BlockPartition& partition, const ClusterTree& rows, const ClusterTree& cols,
                                 double kappa, std::optional<double> eta2_bound) {
  Eta2Report report;
  for (const auto& plan : partition.plans) {
    const double separation = dist(rows[plan.sigma_hat].bbox, cols[plan.tau_hat].bbox);
    for (int j = 0; j <= plan.steps; ++j) {
      const int lo_level = plan.middle_level - j;
      const int hi_level = plan.middle_level + j;
      // x-side clusters descend while y-side anchors ascend, and vice versa
      for (int flip = 0; flip < 2; ++flip) {
        if (j == 0 && flip == 1) break;
        const int row_level = flip == 0 ? hi_level : lo_level;
        const int col_level = flip == 0 ? lo_level : hi_level;
        for (std::size_t s : rows.descendants_at(plan.sigma_hat, row_level)) {
          for (std::size_t t : cols.descendants_at(plan.tau_hat, col_level)) {
            const double ratio = kappa * rows[s].bbox.diam() * cols[t].bbox.diam() / separation;
            report.eta2 = std::max(report.eta2, ratio);
            ++report.checked_pairs;
            if (eta2_bound && ratio > *eta2_bound) ++report.violations;
          }
        }
      }
    }
    report.qbar = std::max({report.qbar, max_shrink_ratio(rows, plan.sigma_hat), max_shrink_ratio(cols, plan.tau_hat)});
  }
  return report;
}

PartitionStats partition_stats(const BlockPartition& partition, const ClusterTree& rows, const ClusterTree& cols) {
  PartitionStats st;
  st.admissible_leaves = partition.admissible.size();
  st.inadmissible_leaves = partition.inadmissible.size();
  st.plans = partition.plans.size();
  st.plans_per_level.assign(static_cast<std::size_t>(rows.depth()) + 1, 0);
  for (const auto& p : partition.plans) ++st.plans_per_level[static_cast<std::size_t>(p.level)];
  for (const auto& a : partition.admissible) st.covered_entries += rows[a.sigma].size() * cols[a.tau].size();
  for (const auto& [s, t] : partition.inadmissible) st.covered_entries += rows[s].size() * cols[t].size();
  return st;
}

std::string partition_json(const BlockPartition& partition, const ClusterTree& rows, const ClusterTree& cols,
                           const std::optional<Eta2Report>& report) {
  const PartitionStats st = partition_stats(partition, rows, cols);
  nlohmann::json j;
  j["rows"] = rows.index_count();
  j["cols"] = cols.index_count();
  j["depth"] = rows.depth();
  j["eta1"] = partition.eta1;
  j["admissible_leaves"] = st.admissible_leaves;
  j["inadmissible_leaves"] = st.inadmissible_leaves;
  j["plans"] = st.plans;
  j["plans_per_level"] = st.plans_per_level;
  j["covered_entries"] = st.covered_entries;
  nlohmann::json plan_levels = nlohmann::json::array();
  for (const auto& p : partition.plans) {
    plan_levels.push_back({{"level", p.level}, {"steps", p.steps}, {"middle_level", p.middle_level}});
  }
  j["plan_levels"] = std::move(plan_levels);
  if (report) {
    j["eta2"] = report->eta2;
    j["qbar"] = report->qbar;
    j["eta2_checked_pairs"] = report->checked_pairs;
    j["eta2_violations"] = report->violations;
  }
  return j.dump(2);
}

}  // namespace bfly
