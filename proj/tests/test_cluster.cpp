#include "litmine/cluster.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

using namespace litmine;
using namespace litmine::cluster;

namespace {

// Independent Kruskal over the full mutual-reachability graph.
double kruskal_weight(const Layout& y, const std::vector<double>& core) {
    const std::size_t n = y.rows();
    struct E {
        double w;
        std::size_t a, b;
    };
    std::vector<E> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) {
                d += (y(i, c) - y(j, c)) * (y(i, c) - y(j, c));
            }
            edges.push_back({std::max({core[i], core[j], std::sqrt(d)}), i, j});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const E& p, const E& q) { return p.w < q.w; });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    double total = 0.0;
    for (const auto& e : edges) {
        const auto ra = find(e.a);
        const auto rb = find(e.b);
        if (ra != rb) {
            parent[ra] = rb;
            total += e.w;
        }
    }
    return total;
}

Layout two_blobs(std::size_t per_blob, std::uint64_t seed) {
    Rng rng(seed);
    Layout y(2 * per_blob, 2);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const double cx = i < per_blob ? 0.0 : 50.0;
        y(i, 0) = cx + 0.5 * rng.normal();
        y(i, 1) = 0.5 * rng.normal();
    }
    return y;
}

std::vector<int> blob_truth(std::size_t per_blob, std::size_t blobs) {
    std::vector<int> out;
    for (std::size_t b = 0; b < blobs; ++b) {
        out.insert(out.end(), per_blob, static_cast<int>(b));
    }
    return out;
}

} // namespace

TEST_CASE("core distances") {
    const auto y = testsupport::uniform_points(20, 3, 17);
    for (double v : core_distances(y, 1)) {
        CHECK(v == 0.0);
    }
    for (std::size_t ms : {2u, 5u, 20u}) {
        const auto core = core_distances(y, ms);
        for (std::size_t i = 0; i < y.rows(); ++i) {
            std::vector<double> d;
            for (std::size_t j = 0; j < y.rows(); ++j) {
                d.push_back(std::sqrt(squared_euclidean(y.row(i), y.row(j))));
            }
            std::sort(d.begin(), d.end());
            CHECK(core[i] == d[ms - 1]);
        }
    }
    const auto c3 = core_distances(y, 3);
    const auto c4 = core_distances(y, 4);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        CHECK(c3[i] <= c4[i]);
    }
    Layout dup(3, 1, std::vector<double>{1.0, 1.0, 9.0});
    const auto cd = core_distances(dup, 2);
    CHECK(cd[0] == 0.0);
    CHECK(cd[1] == 0.0);
    CHECK_THROWS_AS(core_distances(dup, 4), Error);
}

TEST_CASE("mutual reachability MST basics") {
    Layout two(2, 1, std::vector<double>{0.0, 3.0});
    const std::vector<double> core{4.0, 1.0};
    const auto mst = mutual_reachability_mst(two, core);
    REQUIRE(mst.size() == 1);
    CHECK(mst[0].weight == 4.0);

    Layout same(6, 2, 1.0);
    const auto zero = mutual_reachability_mst(same, core_distances(same, 3));
    CHECK(zero.size() == 5);
    for (const auto& e : zero) {
        CHECK(e.weight == 0.0);
    }
}

TEST_CASE("MST total weight equals Kruskal on 50 and 500 points") {
    for (std::size_t n : {50u, 500u}) {
        const auto y = testsupport::uniform_points(n, 3, 1000 + n);
        const auto core = core_distances(y, 5);
        const auto mst = mutual_reachability_mst(y, core);
        REQUIRE(mst.size() == n - 1);
        double total = 0.0;
        for (const auto& e : mst) {
            total += e.weight;
            const double d = std::sqrt(squared_euclidean(y.row(e.a), y.row(e.b)));
            CHECK(e.weight >= d);
            CHECK(e.weight >= std::max(core[e.a], core[e.b]));
        }
        // Same multiset of MST weights, summed in different orders.
        CHECK(total == doctest::Approx(kruskal_weight(y, core)).epsilon(1e-12));
    }
}

TEST_CASE("condensed tree of two separated blobs has two clusters under the root") {
    const auto y = two_blobs(10, 5);
    const auto tree = condense_tree(mutual_reachability_mst(y, core_distances(y, 5)), y.rows(), 5);
    CHECK(tree.children(0).size() == 2);
    for (std::size_t id = 0; id < tree.cluster_count(); ++id) {
        CHECK(tree.lambda_death(id) >= tree.lambda_birth[id]);
        CHECK(tree.cluster_size[id] >= 5);
    }
    const auto labels = extract_clusters(tree);
    CHECK(labels.cluster_count() == 2);
    CHECK(adjusted_rand_index(labels.labels, blob_truth(10, 2)) == 1.0);
}

TEST_CASE("small inputs never split") {
    const auto y = two_blobs(4, 9);
    const auto tree = condense_tree(mutual_reachability_mst(y, core_distances(y, 3)), y.rows(), 5);
    CHECK(tree.cluster_count() == 1);
    const auto labels = extract_clusters(tree);
    CHECK(labels.cluster_count() == 1);
    CHECK(labels.noise_count() == 0);
}

TEST_CASE("a uniform chain is a single cluster") {
    Layout y(30, 1);
    for (std::size_t i = 0; i < 30; ++i) {
        y(i, 0) = static_cast<double>(i);
    }
    const auto labels = hdbscan(y, 5);
    CHECK(labels.cluster_count() == 1);
    CHECK(labels.noise_count() == 0);
}

TEST_CASE("scatter smaller than min_cluster_size is all noise") {
    const auto y = testsupport::uniform_points(40, 2, 8);
    const auto labels = hdbscan(y, 50, 5);
    CHECK(labels.cluster_count() == 0);
    CHECK(labels.noise_count() == 40);
}

TEST_CASE("single tight blob and n equal to min_cluster_size") {
    Rng rng(12);
    Layout blob(20, 2);
    for (auto& v : blob.values()) {
        v = 0.1 * rng.normal();
    }
    auto labels = hdbscan(blob, 15);
    CHECK(labels.cluster_count() == 1);
    CHECK(labels.noise_count() == 0);
    Layout exact(15, 2);
    for (auto& v : exact.values()) {
        v = 0.1 * rng.normal();
    }
    labels = hdbscan(exact, 15);
    CHECK(labels.cluster_count() == 1);
    CHECK(labels.noise_count() == 0);
}

TEST_CASE("hdbscan recovers the three-blob fixture") {
    const auto blobs = testsupport::three_blobs();
    const auto y = testsupport::to_double(blobs.points);
    const auto labels = hdbscan(y, 15);
    const auto again = hdbscan(y, 15);
    CHECK(labels.labels == again.labels);
    CHECK(labels.cluster_count() == 3);
    CHECK(adjusted_rand_index(labels.labels, blobs.labels) >= 0.95);
    for (std::size_t c = 0; c < labels.cluster_count(); ++c) {
        CHECK(std::count(labels.labels.begin(), labels.labels.end(), static_cast<int>(c)) >= 15);
    }
}

TEST_CASE("raising min_cluster_size never adds clusters") {
    const auto y = testsupport::to_double(testsupport::make_blobs(40, 4, 3, 1.5, 8.0, 77).points);
    std::size_t previous = 1000;
    for (std::size_t mcs : {5u, 10u, 20u, 40u, 80u, 200u}) {
        const auto labels = hdbscan(y, mcs);
        CHECK(labels.cluster_count() <= previous);
        previous = labels.cluster_count();
        std::set<int> seen(labels.labels.begin(), labels.labels.end());
        seen.erase(-1);
        CHECK(seen.size() == labels.cluster_count());
        for (std::size_t c = 0; c < labels.cluster_count(); ++c) {
            CHECK(seen.count(static_cast<int>(c)) == 1);
            CHECK(static_cast<std::size_t>(std::count(labels.labels.begin(), labels.labels.end(),
                                                      static_cast<int>(c))) >= mcs);
        }
    }
}

TEST_CASE("adjusted rand index") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
    // sklearn.metrics.adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714285715
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 2}) == doctest::Approx(0.5714285714285715));
}

TEST_CASE("labels CSV round-trips and the tree exports") {
    const auto y = two_blobs(10, 5);
    const auto tree = condense_tree(mutual_reachability_mst(y, core_distances(y, 5)), y.rows(), 5);
    const auto labels = extract_clusters(tree);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        ids.push_back("d" + std::to_string(i));
    }
    std::stringstream ss;
    write_labels_csv(ss, ids, labels);
    const auto [back_ids, back] = read_labels_csv(ss);
    CHECK(back_ids == ids);
    CHECK(back == labels.labels);
    const auto j = condensed_tree_json(tree, labels);
    CHECK(j["clusters"].size() == tree.cluster_count());
}
