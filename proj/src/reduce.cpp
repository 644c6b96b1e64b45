#include "litmine/reduce.hpp"

#include "litmine/csv.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <thread>

namespace litmine::reduce {

Metric parse_metric(const std::string& name) {
    if (name == "cosine") {
        return Metric::cosine;
    }
    if (name == "euclidean") {
        return Metric::euclidean;
    }
    throw Error("unknown metric '" + name + "' (expected cosine or euclidean)");
}

std::string metric_name(Metric metric) { return metric == Metric::cosine ? "cosine" : "euclidean"; }

std::string init_name(InitMode mode) { return mode == InitMode::spectral ? "spectral" : "random"; }

namespace {

template <typename T>
class Distance {
  public:
    Distance(const DenseMatrix<T>& x, Metric metric) : x_(x), metric_(metric) {
        if (metric_ == Metric::cosine) {
            norms_.resize(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i) {
                double s = 0.0;
                for (T v : x.row(i)) {
                    s += static_cast<double>(v) * static_cast<double>(v);
                }
                norms_[i] = std::sqrt(s);
            }
        }
    }

    double operator()(std::size_t i, std::size_t j) const {
        const auto u = x_.row(i);
        const auto v = x_.row(j);
        if (metric_ == Metric::euclidean) {
            return std::sqrt(squared_euclidean(u, v));
        }
        if (norms_[i] == 0.0 || norms_[j] == 0.0) {
            return 1.0;
        }
        double dot = 0.0;
        for (std::size_t d = 0; d < u.size(); ++d) {
            dot += static_cast<double>(u[d]) * static_cast<double>(v[d]);
        }
        return std::clamp(1.0 - dot / (norms_[i] * norms_[j]), 0.0, 2.0);
    }

  private:
    const DenseMatrix<T>& x_;
    Metric metric_;
    std::vector<double> norms_;
};

using Candidate = std::pair<double, std::uint32_t>;

template <typename T>
void sorted_candidates(const Distance<T>& dist, std::size_t n, std::size_t i, std::vector<Candidate>& out) {
    out.clear();
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            out.emplace_back(dist(i, j), static_cast<std::uint32_t>(j));
        }
    }
}

template <typename Fn>
void parallel_rows(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n))));
    if (threads == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(n, t * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, t, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace

template <typename T>
NeighborGraph knn_graph(const DenseMatrix<T>& x, std::size_t k, Metric metric, unsigned threads) {
    const std::size_t n = x.rows();
    if (k < 1 || k >= n) {
        throw Error("knn_graph needs 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    const Distance<T> dist(x, metric);
    NeighborGraph g;
    g.n = n;
    g.k = k;
    g.indices.resize(n * k);
    g.distances.resize(n * k);
    parallel_rows(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Candidate> cand;
        for (std::size_t i = begin; i < end; ++i) {
            sorted_candidates(dist, n, i, cand);
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
            for (std::size_t r = 0; r < k; ++r) {
                g.distances[i * k + r] = cand[r].first;
                g.indices[i * k + r] = cand[r].second;
            }
        }
    });
    return g;
}

template NeighborGraph knn_graph(const DenseMatrix<float>&, std::size_t, Metric, unsigned);
template NeighborGraph knn_graph(const DenseMatrix<double>&, std::size_t, Metric, unsigned);

std::size_t FuzzyGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& r : rows) {
        total += r.size();
    }
    return total;
}

double FuzzyGraph::weight(std::size_t i, std::size_t j) const {
    const auto& r = rows.at(i);
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const Edge& e, std::size_t t) { return e.to < t; });
    return it != r.end() && it->to == j ? it->weight : 0.0;
}

namespace {

double membership_sum(std::span<const double> dists, double rho, double sigma) {
    double s = 0.0;
    for (double d : dists) {
        s += std::exp(-std::max(0.0, d - rho) / sigma);
    }
    return s;
}

constexpr double kSigmaTolerance = 1e-9;
constexpr double kSigmaAcceptance = 1e-3;
constexpr int kSigmaIterations = 64;

} // namespace

double solve_sigma(std::span<const double> dists, double rho, double target, bool* degenerate) {
    std::size_t ties = 0;
    double gap_sum = 0.0;
    double dist_sum = 0.0;
    for (double d : dists) {
        dist_sum += d;
        if (d <= rho) {
            ++ties;
        } else {
            gap_sum += d - rho;
        }
    }
    if (static_cast<double>(ties) >= target) {
        if (degenerate) {
            *degenerate = true;
        }
        const double mean = dist_sum / static_cast<double>(dists.size());
        return mean > 0.0 ? 1e-3 * mean : 1.0;
    }
    if (degenerate) {
        *degenerate = false;
    }
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = gap_sum / static_cast<double>(dists.size() - ties);
    double psum = membership_sum(dists, rho, mid);
    for (int it = 0; it < kSigmaIterations && std::abs(psum - target) >= kSigmaTolerance; ++it) {
        if (psum > target) {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
        }
        psum = membership_sum(dists, rho, mid);
    }
    if (!(std::abs(psum - target) <= kSigmaAcceptance)) {
        throw Error("sigma bisection did not converge (sum " + format_double(psum) + ", target " +
                    format_double(target) + ")");
    }
    return mid;
}

FuzzyGraph fuzzy_graph(const NeighborGraph& g, double target) {
    if (g.k < 2) {
        throw Error("fuzzy_graph needs at least 2 neighbours per point");
    }
    if (target <= 0.0) {
        target = std::log2(static_cast<double>(g.k));
    }
    FuzzyGraph fg;
    fg.n = g.n;
    fg.rho.resize(g.n);
    fg.sigma.resize(g.n);
    std::vector<std::vector<Edge>> out(g.n);
    std::vector<std::vector<Edge>> in(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto d = g.dists(i);
        const auto nb = g.neighbors(i);
        fg.rho[i] = d[0];
        bool degenerate = false;
        try {
            fg.sigma[i] = solve_sigma(d, fg.rho[i], target, &degenerate);
        } catch (const Error& e) {
            throw Error("point " + std::to_string(i) + ": " + e.what());
        }
        if (degenerate) {
            fg.degenerate.push_back(i);
        }
        for (std::size_t r = 0; r < g.k; ++r) {
            const double w = std::exp(-std::max(0.0, d[r] - fg.rho[i]) / fg.sigma[i]);
            out[i].push_back({nb[r], w});
        }
        std::sort(out[i].begin(), out[i].end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
    }
    for (std::size_t i = 0; i < g.n; ++i) {
        for (const auto& e : out[i]) {
            in[e.to].push_back({static_cast<std::uint32_t>(i), e.weight});
        }
    }
    fg.rows.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto& a = out[i];
        const auto& b = in[i];
        std::size_t p = 0;
        std::size_t q = 0;
        auto emit = [&](std::uint32_t j, double wa, double wb) {
            const double w = wa + wb - wa * wb;
            if (w > 0.0) {
                fg.rows[i].push_back({j, w});
            }
        };
        while (p < a.size() || q < b.size()) {
            if (q == b.size() || (p < a.size() && a[p].to < b[q].to)) {
                emit(a[p].to, a[p].weight, 0.0);
                ++p;
            } else if (p == a.size() || b[q].to < a[p].to) {
                emit(b[q].to, 0.0, b[q].weight);
                ++q;
            } else {
                emit(a[p].to, a[p].weight, b[q].weight);
                ++p;
                ++q;
            }
        }
    }
    return fg;
}

std::pair<double, double> fit_curve(double min_dist, double spread) {
    if (!(min_dist > 0.0) || !(spread > 0.0) || min_dist > spread * 10.0) {
        throw Error("fit_curve needs min_dist > 0, spread > 0 and min_dist <= 10 spread");
    }
    constexpr std::size_t kGrid = 300;
    std::vector<double> xs(kGrid);
    std::vector<double> ys(kGrid);
    for (std::size_t i = 0; i < kGrid; ++i) {
        xs[i] = 3.0 * spread * static_cast<double>(i) / static_cast<double>(kGrid - 1);
        ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
    }
    auto cost = [&](double a, double b) {
        double c = 0.0;
        for (std::size_t i = 0; i < kGrid; ++i) {
            const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
            c += r * r;
        }
        return c;
    };

    double a = 1.0;
    double b = 1.0;
    double lambda = 1e-3;
    double current = cost(a, b);
    for (int iter = 0; iter < 1000; ++iter) {
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, g0 = 0.0, g1 = 0.0;
        for (std::size_t i = 0; i < kGrid; ++i) {
            const double x = xs[i];
            const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
            const double denom = 1.0 + a * p;
            const double r = 1.0 / denom - ys[i];
            const double da = -p / (denom * denom);
            const double db = x > 0.0 ? -a * p * 2.0 * std::log(x) / (denom * denom) : 0.0;
            jtj00 += da * da;
            jtj01 += da * db;
            jtj11 += db * db;
            g0 += da * r;
            g1 += db * r;
        }
        bool improved = false;
        for (int attempt = 0; attempt < 60; ++attempt) {
            const double m00 = jtj00 * (1.0 + lambda);
            const double m11 = jtj11 * (1.0 + lambda);
            const double det = m00 * m11 - jtj01 * jtj01;
            if (det == 0.0 || !std::isfinite(det)) {
                lambda *= 10.0;
                continue;
            }
            const double step_a = -(m11 * g0 - jtj01 * g1) / det;
            const double step_b = -(m00 * g1 - jtj01 * g0) / det;
            const double na = a + step_a;
            const double nb = b + step_b;
            const double next = (na > 0.0 && nb > 0.0) ? cost(na, nb) : std::numeric_limits<double>::infinity();
            if (std::isfinite(next) && next <= current) {
                const double reduction = current - next;
                a = na;
                b = nb;
                current = next;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = reduction > 1e-16 * std::max(1.0, current) ||
                           std::abs(step_a) > 1e-12 * a || std::abs(step_b) > 1e-12 * b;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) {
            break;
        }
    }
    if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
        throw Error("curve fit diverged");
    }
    return {a, b};
}

namespace {

struct EdgeList {
    std::vector<std::uint32_t> head;
    std::vector<std::uint32_t> tail;
    std::vector<double> epochs_per_sample;
};

EdgeList sampling_schedule(const FuzzyGraph& graph, std::size_t epochs) {
    double wmax = 0.0;
    for (const auto& r : graph.rows) {
        for (const auto& e : r) {
            wmax = std::max(wmax, e.weight);
        }
    }
    EdgeList edges;
    if (wmax == 0.0) {
        return edges;
    }
    const double floor = wmax / static_cast<double>(std::max<std::size_t>(1, epochs));
    for (std::size_t i = 0; i < graph.n; ++i) {
        for (const auto& e : graph.rows[i]) {
            if (e.weight < floor) {
                continue;
            }
            edges.head.push_back(static_cast<std::uint32_t>(i));
            edges.tail.push_back(e.to);
            edges.epochs_per_sample.push_back(wmax / e.weight);
        }
    }
    return edges;
}

double clip(double v) { return std::clamp(v, -4.0, 4.0); }

struct PlainAccess {
    double* data;
    double load(std::size_t i) const { return data[i]; }
    void store(std::size_t i, double v) const { data[i] = v; }
};

struct AtomicAccess {
    double* data;
    double load(std::size_t i) const { return std::atomic_ref<double>(data[i]).load(std::memory_order_relaxed); }
    void store(std::size_t i, double v) const { std::atomic_ref<double>(data[i]).store(v, std::memory_order_relaxed); }
};

struct SampleState {
    std::vector<double> next_sample;
    std::vector<double> per_negative;
    std::vector<double> next_negative;
};

template <typename Access>
void run_edges(const EdgeList& edges, SampleState& state, std::size_t begin, std::size_t end, std::size_t epoch,
               std::size_t n, std::size_t dim, const OptimizeParams& p, double alpha, Rng& rng, Access acc) {
    const double epoch_d = static_cast<double>(epoch);
    std::vector<double> current(dim);
    for (std::size_t e = begin; e < end; ++e) {
        if (state.next_sample[e] > epoch_d) {
            continue;
        }
        const std::size_t j = edges.head[e];
        const std::size_t k = edges.tail[e];
        double dist2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            current[d] = acc.load(j * dim + d);
            const double diff = current[d] - acc.load(k * dim + d);
            dist2 += diff * diff;
        }
        double coeff = 0.0;
        if (dist2 > 0.0) {
            coeff = -2.0 * p.a * p.b * std::pow(dist2, p.b - 1.0) / (p.a * std::pow(dist2, p.b) + 1.0);
        }
        for (std::size_t d = 0; d < dim; ++d) {
            const double other = acc.load(k * dim + d);
            const double grad = clip(coeff * (current[d] - other));
            current[d] += grad * alpha;
            acc.store(j * dim + d, current[d]);
            acc.store(k * dim + d, other - grad * alpha);
        }
        state.next_sample[e] += edges.epochs_per_sample[e];

        if (p.neg_samples > 0) {
            const auto n_neg = static_cast<std::size_t>((epoch_d - state.next_negative[e]) / state.per_negative[e]);
            for (std::size_t s = 0; s < n_neg; ++s) {
                const std::size_t other_idx = static_cast<std::size_t>(rng.below(n));
                double nd2 = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = current[d] - acc.load(other_idx * dim + d);
                    nd2 += diff * diff;
                }
                double rep = 0.0;
                if (nd2 > 0.0) {
                    rep = 2.0 * p.gamma * p.b / ((0.001 + nd2) * (p.a * std::pow(nd2, p.b) + 1.0));
                } else if (other_idx == j) {
                    continue;
                }
                if (rep > 0.0) {
                    for (std::size_t d = 0; d < dim; ++d) {
                        current[d] += clip(rep * (current[d] - acc.load(other_idx * dim + d))) * alpha;
                    }
                }
                for (std::size_t d = 0; d < dim; ++d) {
                    acc.store(j * dim + d, current[d]);
                }
            }
            state.next_negative[e] += static_cast<double>(n_neg) * state.per_negative[e];
        }
        for (std::size_t d = 0; d < dim; ++d) {
            if (!std::isfinite(current[d])) {
                throw Error("non-finite layout update at epoch " + std::to_string(epoch) + ", edge " +
                            std::to_string(j) + "-" + std::to_string(k));
            }
        }
    }
}

} // namespace

Layout optimize_layout(const FuzzyGraph& graph, Layout init, const OptimizeParams& params) {
    if (init.rows() != graph.n) {
        throw Error("initial layout has " + std::to_string(init.rows()) + " rows for a graph of " +
                    std::to_string(graph.n) + " points");
    }
    if (params.epochs == 0) {
        return init;
    }
    const EdgeList edges = sampling_schedule(graph, params.epochs);
    const std::size_t m = edges.head.size();
    if (m == 0) {
        return init;
    }
    SampleState state;
    state.next_sample = edges.epochs_per_sample;
    state.per_negative.resize(m);
    for (std::size_t e = 0; e < m; ++e) {
        state.per_negative[e] = params.neg_samples > 0
                                    ? edges.epochs_per_sample[e] / static_cast<double>(params.neg_samples)
                                    : std::numeric_limits<double>::infinity();
    }
    state.next_negative = state.per_negative;

    const std::size_t n = graph.n;
    const std::size_t dim = init.cols();
    double* data = init.values().data();
    const unsigned threads = std::max(1u, params.threads);

    if (threads == 1) {
        Rng rng(params.seed);
        for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
            const double alpha = params.initial_alpha *
                                 (1.0 - static_cast<double>(epoch) / static_cast<double>(params.epochs));
            run_edges(edges, state, 0, m, epoch, n, dim, params, alpha, rng, PlainAccess{data});
        }
        return init;
    }

    std::vector<Rng> rngs;
    for (unsigned t = 0; t < threads; ++t) {
        rngs.emplace_back(mix64(params.seed + t));
    }
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        const double alpha =
            params.initial_alpha * (1.0 - static_cast<double>(epoch) / static_cast<double>(params.epochs));
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        const std::size_t chunk = (m + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(m, t * chunk);
            const std::size_t end = std::min(m, begin + chunk);
            pool.emplace_back([&, t, begin, end] {
                try {
                    run_edges(edges, state, begin, end, epoch, n, dim, params, alpha, rngs[t], AtomicAccess{data});
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    return init;
}

bool is_connected(const FuzzyGraph& graph) {
    if (graph.n == 0) {
        return true;
    }
    std::vector<bool> seen(graph.n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t i = q.front();
        q.pop();
        for (const auto& e : graph.rows[i]) {
            if (!seen[e.to]) {
                seen[e.to] = true;
                ++count;
                q.push(e.to);
            }
        }
    }
    return count == graph.n;
}

namespace {

// Cyclic Jacobi eigen-decomposition of a small symmetric matrix; columns of
// `vecs` are eigenvectors, eigenvalues end up on the diagonal of `m`.
void jacobi_eigen(std::vector<std::vector<double>>& m, std::vector<std::vector<double>>& vecs) {
    const std::size_t k = m.size();
    vecs.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        vecs[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                off += m[p][q] * m[p][q];
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                if (m[p][q] == 0.0) {
                    continue;
                }
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < k; ++r) {
                    const double mrp = m[r][p];
                    const double mrq = m[r][q];
                    m[r][p] = c * mrp - s * mrq;
                    m[r][q] = s * mrp + c * mrq;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double mpr = m[p][r];
                    const double mqr = m[q][r];
                    m[p][r] = c * mpr - s * mqr;
                    m[q][r] = s * mpr + c * mqr;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double vrp = vecs[r][p];
                    const double vrq = vecs[r][q];
                    vecs[r][p] = c * vrp - s * vrq;
                    vecs[r][q] = s * vrp + c * vrq;
                }
            }
        }
    }
}

void orthonormalize(std::vector<std::vector<double>>& cols, const std::vector<double>& trivial) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto& v = cols[c];
        for (int pass = 0; pass < 2; ++pass) {
            double proj = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                proj += v[i] * trivial[i];
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                v[i] -= proj * trivial[i];
            }
            for (std::size_t p = 0; p < c; ++p) {
                double dot = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    dot += v[i] * cols[p][i];
                }
                for (std::size_t i = 0; i < v.size(); ++i) {
                    v[i] -= dot * cols[p][i];
                }
            }
        }
        double norm = 0.0;
        for (double x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            throw Error("spectral initialisation lost rank");
        }
        for (double& x : v) {
            x /= norm;
        }
    }
}

void rescale_columns(Layout& y) {
    for (std::size_t c = 0; c < y.cols(); ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            lo = std::min(lo, y(i, c));
            hi = std::max(hi, y(i, c));
        }
        const double span = hi - lo;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            y(i, c) = span > 0.0 ? 10.0 * (y(i, c) - lo) / span : 0.0;
        }
    }
}

constexpr int kSubspaceIterations = 300;

Layout spectral_layout(const FuzzyGraph& graph, std::size_t k_out, Rng& rng) {
    const std::size_t n = graph.n;
    std::vector<double> inv_sqrt_deg(n);
    std::vector<double> trivial(n);
    double tnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (const auto& e : graph.rows[i]) {
            deg += e.weight;
        }
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
        trivial[i] = std::sqrt(deg);
        tnorm += deg;
    }
    tnorm = std::sqrt(tnorm);
    for (double& t : trivial) {
        t /= tnorm;
    }
    auto apply = [&](const std::vector<double>& v) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (const auto& e : graph.rows[i]) {
                s += e.weight * inv_sqrt_deg[e.to] * v[e.to];
            }
            out[i] = 0.5 * (v[i] + inv_sqrt_deg[i] * s);
        }
        return out;
    };

    std::vector<std::vector<double>> cols(k_out, std::vector<double>(n));
    for (auto& c : cols) {
        for (double& x : c) {
            x = rng.normal();
        }
    }
    orthonormalize(cols, trivial);
    for (int it = 0; it < kSubspaceIterations; ++it) {
        for (auto& c : cols) {
            c = apply(c);
        }
        orthonormalize(cols, trivial);
    }

    std::vector<std::vector<double>> applied(k_out);
    for (std::size_t c = 0; c < k_out; ++c) {
        applied[c] = apply(cols[c]);
    }
    std::vector<std::vector<double>> h(k_out, std::vector<double>(k_out));
    for (std::size_t p = 0; p < k_out; ++p) {
        for (std::size_t q = 0; q < k_out; ++q) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += cols[p][i] * applied[q][i];
            }
            h[p][q] = s;
        }
    }
    for (std::size_t p = 0; p < k_out; ++p) {
        for (std::size_t q = p + 1; q < k_out; ++q) {
            const double avg = 0.5 * (h[p][q] + h[q][p]);
            h[p][q] = avg;
            h[q][p] = avg;
        }
    }
    std::vector<std::vector<double>> vecs;
    jacobi_eigen(h, vecs);
    std::vector<std::size_t> order(k_out);
    for (std::size_t i = 0; i < k_out; ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return h[x][x] > h[y][y]; });

    Layout y(n, k_out);
    double max_abs = 0.0;
    for (std::size_t c = 0; c < k_out; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t p = 0; p < k_out; ++p) {
                s += cols[p][i] * vecs[p][order[c]];
            }
            y(i, c) = s;
            max_abs = std::max(max_abs, std::abs(s));
        }
    }
    const double expansion = max_abs > 0.0 ? 10.0 / max_abs : 1.0;
    for (double& v : y.values()) {
        v = v * expansion + 1e-4 * rng.normal();
    }
    return y;
}

} // namespace

Layout initial_layout(const FuzzyGraph& graph, std::size_t k_out, std::uint64_t seed, InitMode* mode) {
    if (k_out == 0) {
        throw Error("output dimension must be at least 1");
    }
    Rng rng(seed);
    Layout y;
    InitMode used = InitMode::random;
    if (graph.n > k_out + 1 && is_connected(graph)) {
        y = spectral_layout(graph, k_out, rng);
        used = InitMode::spectral;
    } else {
        y = Layout(graph.n, k_out);
        for (double& v : y.values()) {
            v = -10.0 + 20.0 * rng.uniform();
        }
    }
    rescale_columns(y);
    if (mode) {
        *mode = used;
    }
    return y;
}

template <typename T>
UmapResult umap(const DenseMatrix<T>& x, const UmapParams& params) {
    UmapResult result;
    const auto knn = knn_graph(x, params.k, params.metric, params.threads);
    const auto graph = fuzzy_graph(knn);
    result.degenerate_rows = graph.degenerate.size();
    std::tie(result.a, result.b) = fit_curve(params.min_dist, params.spread);
    Layout init = initial_layout(graph, params.k_out, params.seed, &result.init);
    OptimizeParams opt;
    opt.epochs = params.epochs;
    opt.a = result.a;
    opt.b = result.b;
    opt.neg_samples = params.neg_samples;
    opt.seed = mix64(params.seed ^ 0x5EED);
    opt.threads = params.threads > 1 ? params.threads : 1;
    result.layout = optimize_layout(graph, std::move(init), opt);
    return result;
}

template UmapResult umap(const DenseMatrix<float>&, const UmapParams&);
template UmapResult umap(const DenseMatrix<double>&, const UmapParams&);

template <typename T>
double trustworthiness(const DenseMatrix<T>& x, const Layout& y, std::size_t k, Metric metric) {
    const std::size_t n = x.rows();
    if (y.rows() != n) {
        throw Error("trustworthiness: X and Y differ in row count");
    }
    if (k < 1 || 2 * k >= n) {
        throw Error("trustworthiness needs 1 <= k < n/2");
    }
    const Distance<T> dx(x, metric);
    const Distance<double> dy(y, Metric::euclidean);
    double penalty = 0.0;
    std::vector<Candidate> cand;
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        sorted_candidates(dx, n, i, cand);
        std::sort(cand.begin(), cand.end());
        for (std::size_t r = 0; r < cand.size(); ++r) {
            rank[cand[r].second] = r + 1;
        }
        sorted_candidates(dy, n, i, cand);
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t r = 0; r < k; ++r) {
            const std::size_t j = cand[r].second;
            if (rank[j] > k) {
                penalty += static_cast<double>(rank[j] - k);
            }
        }
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

template double trustworthiness(const DenseMatrix<float>&, const Layout&, std::size_t, Metric);
template double trustworthiness(const DenseMatrix<double>&, const Layout&, std::size_t, Metric);

void write_layout_csv(std::ostream& out, const std::vector<std::string>& ids, const Layout& layout) {
    if (ids.size() != layout.rows()) {
        throw Error("layout export: id count does not match row count");
    }
    out << "id";
    for (std::size_t c = 0; c < layout.cols(); ++c) {
        out << ",c" << (c + 1);
    }
    out << '\n';
    for (std::size_t i = 0; i < layout.rows(); ++i) {
        out << csv::field(ids[i]);
        for (double v : layout.row(i)) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

std::pair<std::vector<std::string>, Layout> read_layout_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("layout CSV is empty");
    }
    const auto header = csv::split_line(line);
    if (header.empty() || header[0] != "id" || header.size() < 2) {
        throw Error("layout CSV header must be id,c1..ck");
    }
    const std::size_t dim = header.size() - 1;
    std::vector<std::string> ids;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = csv::split_line(line);
        if (cells.size() != dim + 1) {
            throw Error("layout CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(dim + 1));
        }
        ids.push_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            const auto* first = cells[c].data();
            const auto* last = first + cells[c].size();
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) {
                throw Error("layout CSV line " + std::to_string(line_no) + ": bad number '" + cells[c] + "'");
            }
            values.push_back(v);
        }
    }
    const std::size_t n = ids.size();
    return {std::move(ids), Layout(n, dim, std::move(values))};
}

} // namespace litmine::reduce
