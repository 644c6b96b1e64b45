#ifndef LITMINE_CLUSTER_HPP
#define LITMINE_CLUSTER_HPP

#include "litmine/reduce.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace litmine::cluster {

using reduce::Layout;

/// Euclidean distance to the min_samples-th nearest point, the point itself
/// counted first (so min_samples = 1 gives 0).
std::vector<double> core_distances(const Layout& y, std::size_t min_samples);

struct MstEdge {
    std::uint32_t a;
    std::uint32_t b;
    double weight;
};

/// Dense Prim over d_mreach(i, j) = max(core_i, core_j, d(i, j)), started at
/// point 0. Ties pick the lower index. Edges are returned in insertion order.
std::vector<MstEdge> mutual_reachability_mst(const Layout& y, const std::vector<double>& core);

/// One row of the condensed tree: a point or a child cluster leaving `parent`
/// at `lambda` (1 / distance; infinite at distance 0).
struct CondensedEdge {
    std::size_t parent;
    std::size_t child;
    bool child_is_cluster;
    double lambda;
    std::size_t child_size;
};

struct CondensedTree {
    std::size_t n_points = 0;
    std::size_t min_cluster_size = 0;
    /// Cluster 0 is the root; children always have larger ids than parents.
    std::vector<std::int64_t> cluster_parent;
    std::vector<double> lambda_birth;
    std::vector<std::size_t> cluster_size;
    std::vector<CondensedEdge> edges;

    std::size_t cluster_count() const noexcept { return cluster_parent.size(); }
    std::vector<std::size_t> children(std::size_t cluster) const;
    /// Largest lambda at which anything leaves the cluster.
    double lambda_death(std::size_t cluster) const;
};

CondensedTree condense_tree(const std::vector<MstEdge>& mst, std::size_t n_points, std::size_t min_cluster_size);

struct ClusterLabels {
    /// -1 for noise, otherwise 0..K-1 ordered by condensed-tree cluster id.
    std::vector<int> labels;
    std::vector<double> stability;
    /// Condensed-tree id of each output cluster.
    std::vector<std::size_t> tree_cluster;

    std::size_t cluster_count() const noexcept { return stability.size(); }
    std::size_t noise_count() const;
};

/// sum over rows leaving c of (lambda - lambda_birth(c)) * child_size.
std::vector<double> cluster_stability(const CondensedTree& tree);

/// Excess-of-mass selection. The root is a candidate only when it never
/// splits; then it becomes the single cluster when it holds at least
/// min_cluster_size points.
ClusterLabels extract_clusters(const CondensedTree& tree);

ClusterLabels hdbscan(const Layout& y, std::size_t min_cluster_size, std::size_t min_samples = 0);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

nlohmann::json condensed_tree_json(const CondensedTree& tree, const ClusterLabels& labels);

/// CSV `id,topic_label,probability_placeholder`.
void write_labels_csv(std::ostream& out, const std::vector<std::string>& ids, const ClusterLabels& labels);
std::pair<std::vector<std::string>, std::vector<int>> read_labels_csv(std::istream& in);

} // namespace litmine::cluster

#endif
