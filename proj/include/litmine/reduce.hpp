#ifndef LITMINE_REDUCE_HPP
#define LITMINE_REDUCE_HPP

#include "litmine/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace litmine::reduce {

using Layout = DenseMatrix<double>;

enum class Metric { cosine, euclidean };

Metric parse_metric(const std::string& name);
std::string metric_name(Metric metric);

/// k nearest neighbours per point, sorted by (distance, index).
struct NeighborGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> distances;

    std::span<const std::uint32_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
    std::span<const double> dists(std::size_t i) const { return {distances.data() + i * k, k}; }
};

/// Exact all-pairs search. Cosine distance is 1 - cos; a zero row sits at
/// distance 1 from every other row.
template <typename T>
NeighborGraph knn_graph(const DenseMatrix<T>& x, std::size_t k, Metric metric, unsigned threads = 1);

struct Edge {
    std::uint32_t to;
    double weight;
};

struct FuzzyGraph {
    std::size_t n = 0;
    /// Symmetric adjacency lists sorted by target index; no self loops.
    std::vector<std::vector<Edge>> rows;
    std::vector<double> rho;
    std::vector<double> sigma;
    /// Rows whose ties at rho already reach the target; sigma is floored there.
    std::vector<std::size_t> degenerate;

    std::size_t edge_count() const;
    double weight(std::size_t i, std::size_t j) const;
};

/// Solves for sigma_i by bisection so that sum_j exp(-max(0, d_ij - rho_i) / sigma_i)
/// equals `target` (log2(k) when unset), then unions the directed memberships
/// with a + b - ab. Throws naming the point when bisection misses by more than 1e-3.
FuzzyGraph fuzzy_graph(const NeighborGraph& g, double target = 0.0);

/// One-point smooth-kNN solve, exposed for tests: returns sigma.
double solve_sigma(std::span<const double> dists, double rho, double target, bool* degenerate = nullptr);

/// Least-squares fit of 1 / (1 + a d^(2b)) to the min_dist / spread target on
/// 300 evenly spaced points over [0, 3 spread].
std::pair<double, double> fit_curve(double min_dist, double spread = 1.0);

struct OptimizeParams {
    std::size_t epochs = 200;
    double a = 1.0;
    double b = 1.0;
    std::size_t neg_samples = 5;
    double gamma = 1.0;
    double initial_alpha = 1.0;
    std::uint64_t seed = 0;
    /// Values above 1 run Hogwild-style updates and are not reproducible.
    unsigned threads = 1;
};

Layout optimize_layout(const FuzzyGraph& graph, Layout init, const OptimizeParams& params);

enum class InitMode { spectral, random };
std::string init_name(InitMode mode);

bool is_connected(const FuzzyGraph& graph);

/// Leading non-trivial eigenvectors of the normalised graph operator, scaled
/// to [0, 10]. Falls back to uniform random coordinates when the graph is
/// disconnected; `mode` reports which path ran.
Layout initial_layout(const FuzzyGraph& graph, std::size_t k_out, std::uint64_t seed, InitMode* mode = nullptr);

struct UmapParams {
    std::size_t k = 15;
    std::size_t k_out = 5;
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t epochs = 200;
    std::size_t neg_samples = 5;
    Metric metric = Metric::cosine;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct UmapResult {
    Layout layout;
    InitMode init = InitMode::random;
    double a = 0.0;
    double b = 0.0;
    std::size_t degenerate_rows = 0;
};

template <typename T>
UmapResult umap(const DenseMatrix<T>& x, const UmapParams& params);

/// 1 - 2 / (n k (2n - 3k - 1)) * sum_i sum_{j in U_i} (r(i, j) - k), where U_i
/// holds the k nearest neighbours of i in Y that are not among its k nearest
/// in X and r is the rank in X. Requires k < n / 2.
template <typename T>
double trustworthiness(const DenseMatrix<T>& x, const Layout& y, std::size_t k, Metric metric = Metric::euclidean);

/// CSV `id,c1..c_k`.
void write_layout_csv(std::ostream& out, const std::vector<std::string>& ids, const Layout& layout);
std::pair<std::vector<std::string>, Layout> read_layout_csv(std::istream& in);

} // namespace litmine::reduce

#endif
