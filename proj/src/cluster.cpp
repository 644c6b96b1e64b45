#include "litmine/cluster.hpp"

#include "litmine/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace litmine::cluster {

namespace {

double point_distance(const Layout& y, std::size_t i, std::size_t j) {
    return std::sqrt(squared_euclidean(y.row(i), y.row(j)));
}

} // namespace

std::vector<double> core_distances(const Layout& y, std::size_t min_samples) {
    const std::size_t n = y.rows();
    if (min_samples < 1 || min_samples > n) {
        throw Error("min_samples must be in [1, n] (min_samples=" + std::to_string(min_samples) +
                    ", n=" + std::to_string(n) + ")");
    }
    std::vector<double> core(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            d[j] = i == j ? 0.0 : point_distance(y, i, j);
        }
        const auto nth = d.begin() + static_cast<std::ptrdiff_t>(min_samples - 1);
        std::nth_element(d.begin(), nth, d.end());
        core[i] = *nth;
    }
    return core;
}

std::vector<MstEdge> mutual_reachability_mst(const Layout& y, const std::vector<double>& core) {
    const std::size_t n = y.rows();
    if (core.size() != n) {
        throw Error("core distance count does not match the layout");
    }
    std::vector<MstEdge> edges;
    if (n < 2) {
        return edges;
    }
    edges.reserve(n - 1);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, inf);
    std::vector<std::uint32_t> from(n, 0);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        double next_w = inf;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) {
                continue;
            }
            const double w = std::max({core[current], core[j], point_distance(y, current, j)});
            if (w < best[j]) {
                best[j] = w;
                from[j] = static_cast<std::uint32_t>(current);
            }
            if (next == n || best[j] < next_w) {
                next = j;
                next_w = best[j];
            }
        }
        edges.push_back({from[next], static_cast<std::uint32_t>(next), best[next]});
        in_tree[next] = true;
        current = next;
    }
    return edges;
}

std::vector<std::size_t> CondensedTree::children(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (const auto& e : edges) {
        if (e.parent == cluster && e.child_is_cluster) {
            out.push_back(e.child);
        }
    }
    return out;
}

double CondensedTree::lambda_death(std::size_t cluster) const {
    double death = lambda_birth.at(cluster);
    for (const auto& e : edges) {
        if (e.parent == cluster) {
            death = std::max(death, e.lambda);
        }
    }
    return death;
}

namespace {

struct Merge {
    std::size_t left;
    std::size_t right;
    double distance;
    std::size_t size;
};

class UnionFind {
  public:
    explicit UnionFind(std::size_t n) : parent_(n), label_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
        std::iota(label_.begin(), label_.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b, std::size_t label) {
        a = find(a);
        b = find(b);
        parent_[b] = a;
        label_[a] = label;
    }
    std::size_t label(std::size_t x) { return label_[find(x)]; }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> label_;
};

double to_lambda(double distance) {
    return distance > 0.0 ? 1.0 / distance : std::numeric_limits<double>::infinity();
}

} // namespace

CondensedTree condense_tree(const std::vector<MstEdge>& mst, std::size_t n_points, std::size_t min_cluster_size) {
    if (min_cluster_size < 2) {
        throw Error("min_cluster_size must be at least 2");
    }
    if (n_points > 0 && mst.size() != n_points - 1) {
        throw Error("MST must have n - 1 edges");
    }
    CondensedTree tree;
    tree.n_points = n_points;
    tree.min_cluster_size = min_cluster_size;
    tree.cluster_parent.push_back(-1);
    tree.lambda_birth.push_back(0.0);
    tree.cluster_size.push_back(n_points);
    if (n_points < 2) {
        for (std::size_t p = 0; p < n_points; ++p) {
            tree.edges.push_back({0, p, false, std::numeric_limits<double>::infinity(), 1});
        }
        return tree;
    }

    std::vector<MstEdge> sorted = mst;
    std::stable_sort(sorted.begin(), sorted.end(), [](const MstEdge& x, const MstEdge& y) {
        if (x.weight != y.weight) {
            return x.weight < y.weight;
        }
        return std::minmax(x.a, x.b) < std::minmax(y.a, y.b);
    });
    std::vector<Merge> merges;
    merges.reserve(n_points - 1);
    std::vector<std::size_t> sizes(2 * n_points - 1, 1);
    UnionFind uf(n_points);
    for (const auto& e : sorted) {
        const std::size_t la = uf.label(e.a);
        const std::size_t lb = uf.label(e.b);
        const std::size_t node = n_points + merges.size();
        sizes[node] = sizes[la] + sizes[lb];
        merges.push_back({la, lb, e.weight, sizes[node]});
        uf.unite(e.a, e.b, node);
    }

    auto node_children = [&](std::size_t node) -> const Merge& { return merges[node - n_points]; };
    auto collect_points = [&](std::size_t node, std::vector<std::size_t>& out) {
        std::vector<std::size_t> stack{node};
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            if (x < n_points) {
                out.push_back(x);
            } else {
                const auto& m = node_children(x);
                stack.push_back(m.right);
                stack.push_back(m.left);
            }
        }
    };

    const std::size_t root = 2 * n_points - 2;
    std::vector<std::int64_t> relabel(2 * n_points - 1, -1);
    std::vector<bool> ignore(2 * n_points - 1, false);
    relabel[root] = 0;
    std::vector<std::size_t> points;
    for (std::size_t node = root; node >= n_points; --node) {
        if (ignore[node]) {
            continue;
        }
        const auto& m = node_children(node);
        const double lambda = to_lambda(m.distance);
        const auto parent = static_cast<std::size_t>(relabel[node]);
        const std::size_t left_size = sizes[m.left];
        const std::size_t right_size = sizes[m.right];
        auto fall_out = [&](std::size_t child) {
            points.clear();
            collect_points(child, points);
            std::sort(points.begin(), points.end());
            for (std::size_t p : points) {
                tree.edges.push_back({parent, p, false, lambda, 1});
            }
            if (child >= n_points) {
                std::vector<std::size_t> stack{child};
                while (!stack.empty()) {
                    const std::size_t x = stack.back();
                    stack.pop_back();
                    if (x >= n_points) {
                        ignore[x] = true;
                        stack.push_back(node_children(x).left);
                        stack.push_back(node_children(x).right);
                    }
                }
            }
        };
        auto new_cluster = [&](std::size_t child, std::size_t size) {
            const std::size_t id = tree.cluster_parent.size();
            tree.cluster_parent.push_back(static_cast<std::int64_t>(parent));
            tree.lambda_birth.push_back(lambda);
            tree.cluster_size.push_back(size);
            tree.edges.push_back({parent, id, true, lambda, size});
            relabel[child] = static_cast<std::int64_t>(id);
        };
        const bool left_big = left_size >= min_cluster_size;
        const bool right_big = right_size >= min_cluster_size;
        if (left_big && right_big) {
            new_cluster(m.left, left_size);
            new_cluster(m.right, right_size);
        } else if (!left_big && !right_big) {
            fall_out(m.left);
            fall_out(m.right);
        } else if (!left_big) {
            fall_out(m.left);
            relabel[m.right] = static_cast<std::int64_t>(parent);
        } else {
            fall_out(m.right);
            relabel[m.left] = static_cast<std::int64_t>(parent);
        }
    }
    return tree;
}

std::size_t ClusterLabels::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), -1));
}

std::vector<double> cluster_stability(const CondensedTree& tree) {
    std::vector<double> stability(tree.cluster_count(), 0.0);
    for (const auto& e : tree.edges) {
        const double birth = tree.lambda_birth[e.parent];
        const double gain = e.lambda == birth ? 0.0 : e.lambda - birth;
        stability[e.parent] += gain * static_cast<double>(e.child_size);
    }
    return stability;
}

ClusterLabels extract_clusters(const CondensedTree& tree) {
    const std::size_t c = tree.cluster_count();
    ClusterLabels out;
    out.labels.assign(tree.n_points, -1);
    if (tree.n_points < tree.min_cluster_size) {
        return out;
    }
    std::vector<double> stability = cluster_stability(tree);
    std::vector<std::vector<std::size_t>> kids(c);
    for (const auto& e : tree.edges) {
        if (e.child_is_cluster) {
            kids[e.parent].push_back(e.child);
        }
    }
    std::vector<bool> selected(c, false);
    const bool root_splits = !kids[0].empty();
    std::vector<double> subtree = stability;
    for (std::size_t id = c; id-- > 0;) {
        if (id == 0 && root_splits) {
            break;
        }
        double child_sum = 0.0;
        for (std::size_t k : kids[id]) {
            child_sum += subtree[k];
        }
        if (!kids[id].empty() && child_sum > stability[id]) {
            subtree[id] = child_sum;
        } else {
            selected[id] = true;
            std::vector<std::size_t> stack(kids[id].begin(), kids[id].end());
            while (!stack.empty()) {
                const std::size_t x = stack.back();
                stack.pop_back();
                selected[x] = false;
                stack.insert(stack.end(), kids[x].begin(), kids[x].end());
            }
        }
    }

    std::vector<int> label_of_cluster(c, -1);
    for (std::size_t id = 0; id < c; ++id) {
        if (selected[id]) {
            label_of_cluster[id] = static_cast<int>(out.tree_cluster.size());
            out.tree_cluster.push_back(id);
            out.stability.push_back(stability[id]);
        } else if (tree.cluster_parent[id] >= 0) {
            label_of_cluster[id] = label_of_cluster[static_cast<std::size_t>(tree.cluster_parent[id])];
        }
    }
    for (const auto& e : tree.edges) {
        if (!e.child_is_cluster) {
            out.labels[e.child] = label_of_cluster[e.parent];
        }
    }
    return out;
}

ClusterLabels hdbscan(const Layout& y, std::size_t min_cluster_size, std::size_t min_samples) {
    if (min_samples == 0) {
        min_samples = min_cluster_size;
    }
    if (min_cluster_size < 2) {
        throw Error("min_cluster_size must be at least 2");
    }
    const std::size_t n = y.rows();
    if (n == 0) {
        return {};
    }
    const auto core = core_distances(y, std::min(min_samples, n));
    const auto mst = mutual_reachability_mst(y, core);
    return extract_clusters(condense_tree(mst, n, min_cluster_size));
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw Error("adjusted_rand_index: label vectors differ in length");
    }
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0;
    for (const auto& [key, v] : table) {
        index += comb2(v);
    }
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (const auto& [key, v] : rows) {
        sum_a += comb2(v);
    }
    for (const auto& [key, v] : cols) {
        sum_b += comb2(v);
    }
    const double expected = n > 1.0 ? sum_a * sum_b / comb2(n) : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) {
        return 1.0;
    }
    return (index - expected) / (max_index - expected);
}

nlohmann::json condensed_tree_json(const CondensedTree& tree, const ClusterLabels& labels) {
    const auto stability = cluster_stability(tree);
    std::vector<int> label_of(tree.cluster_count(), -1);
    for (std::size_t l = 0; l < labels.tree_cluster.size(); ++l) {
        label_of[labels.tree_cluster[l]] = static_cast<int>(l);
    }
    auto lambda_json = [](double v) -> nlohmann::json {
        if (std::isinf(v)) {
            return "inf";
        }
        return v;
    };
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t id = 0; id < tree.cluster_count(); ++id) {
        clusters.push_back({{"id", id},
                            {"parent", tree.cluster_parent[id]},
                            {"lambda_birth", lambda_json(tree.lambda_birth[id])},
                            {"lambda_death", lambda_json(tree.lambda_death(id))},
                            {"size", tree.cluster_size[id]},
                            {"stability", lambda_json(stability[id])},
                            {"label", label_of[id]}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : tree.edges) {
        edges.push_back({{"parent", e.parent},
                         {"child", e.child},
                         {"child_is_cluster", e.child_is_cluster},
                         {"lambda", lambda_json(e.lambda)},
                         {"child_size", e.child_size}});
    }
    return {{"n_points", tree.n_points},
            {"min_cluster_size", tree.min_cluster_size},
            {"clusters", clusters},
            {"edges", edges}};
}

void write_labels_csv(std::ostream& out, const std::vector<std::string>& ids, const ClusterLabels& labels) {
    if (ids.size() != labels.labels.size()) {
        throw Error("label export: id count does not match label count");
    }
    out << "id,topic_label,probability_placeholder\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << csv::field(ids[i]) << ',' << labels.labels[i] << ',' << (labels.labels[i] < 0 ? "0" : "1") << '\n';
    }
}

std::pair<std::vector<std::string>, std::vector<int>> read_labels_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || csv::split_line(line).size() < 2 || csv::split_line(line)[0] != "id") {
        throw Error("labels CSV must start with an id,topic_label header");
    }
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = csv::split_line(line);
        int v = 0;
        if (cells.size() < 2) {
            throw Error("labels CSV line " + std::to_string(line_no) + " is short");
        }
        const auto [ptr, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), v);
        if (ec != std::errc{} || ptr != cells[1].data() + cells[1].size() || v < -1) {
            throw Error("labels CSV line " + std::to_string(line_no) + ": bad label '" + cells[1] + "'");
        }
        ids.push_back(cells[0]);
        labels.push_back(v);
    }
    return {std::move(ids), std::move(labels)};
}

} // namespace litmine::cluster
