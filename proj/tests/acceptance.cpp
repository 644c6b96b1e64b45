// Acceptance report: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail id[,id...]]
//
// Exit status is 0 when exactly the listed criteria fail, so a known shortfall
// stays visible in the report without hiding new regressions.

#include "cli.hpp"
#include "litmine/cluster.hpp"
#include "litmine/corpus.hpp"
#include "litmine/csv.hpp"
#include "litmine/embed.hpp"
#include "litmine/filter.hpp"
#include "litmine/llmqa.hpp"
#include "litmine/reduce.hpp"
#include "litmine/textstats.hpp"
#include "litmine/topics.hpp"

#include "support.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace litmine;
namespace fs = std::filesystem;
using testsupport::data_file;
using testsupport::fixture;
using testsupport::slurp;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

struct Criterion {
    std::string id;
    std::string title;
    double time_limit;  // seconds, 0 for none
    std::function<Verdict()> check;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Filter ------------------------------------------------------------------

Verdict filter_oracle() {
    Verdict v;
    const auto store = corpus::load_corpus(data_file("minicorpus.jsonl"));
    const auto patterns =
        filter::compile_patterns(filter::read_pattern_file(data_file("patterns_trading.jsonl")));
    const auto result = filter::filter_corpus(store, patterns, true);
    std::ostringstream out;
    result.table.write_csv(out);
    v.require(out.str() == slurp(data_file("minicorpus_frequency.csv")), "frequency table differs from hand count");
    for (const auto& r : result.table.rows) {
        v.require(std::max(r.abstract_docs, r.title_docs) <= r.both_docs && r.both_docs <= r.abstract_docs + r.title_docs,
                  "union bound violated for " + r.label);
    }
    const auto published = csv::read_file(fixture("keyword_counts_published.csv"));
    for (const auto& row : published.rows) {
        const auto a = std::stoul(row[1]);
        const auto t = std::stoul(row[2]);
        const auto b = std::stoul(row[3]);
        v.require(std::max(a, t) <= b && b <= a + t, "published row violates the union bound: " + row[0]);
    }
    if (v.pass) {
        v.detail = std::to_string(result.table.rows.size()) + " rows equal the hand count, " +
                   std::to_string(published.rows.size()) + " published rows satisfy the bounds";
    }
    return v;
}

// Taxonomy ----------------------------------------------------------------

Verdict taxonomy_fidelity() {
    Verdict v;
    const auto all = textstats::read_taxonomy_file(data_file("taxonomies.jsonl"));
    const auto it = std::find_if(all.begin(), all.end(), [](const auto& t) { return t.name == "model_family"; });
    if (it == all.end()) {
        return {false, "model_family taxonomy missing"};
    }
    std::ifstream in(fixture("taxonomy_snippets.jsonl"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto text = j.at("text").get<std::string>();
        std::set<std::string> fired;
        for (std::size_t c = 0; c < it->size(); ++c) {
            if (textstats::category_matches(*it, c, text)) {
                fired.insert(it->category(c));
            }
        }
        v.require(fired == j.at("fires").get<std::set<std::string>>(), "snippet " + j.at("id").get<std::string>());
        ++n;
    }
    v.require(n == 30, "expected 30 snippets, found " + std::to_string(n));
    if (v.pass) {
        v.detail = "30 snippets fire exactly their intended branches";
    }
    return v;
}

// UMAP --------------------------------------------------------------------

Verdict umap_quality() {
    Verdict v;
    const auto blobs = testsupport::three_blobs();
    reduce::UmapParams p;
    p.seed = 42;
    const auto r1 = reduce::umap(blobs.points, p);
    const auto r2 = reduce::umap(blobs.points, p);
    const double t = reduce::trustworthiness(blobs.points, r1.layout, 15);
    double same = 0.0, cross = 0.0;
    std::size_t ns = 0, nc = 0;
    for (std::size_t i = 0; i < r1.layout.rows(); ++i) {
        for (std::size_t j = i + 1; j < r1.layout.rows(); ++j) {
            const double d = std::sqrt(squared_euclidean(r1.layout.row(i), r1.layout.row(j)));
            (blobs.labels[i] == blobs.labels[j] ? same : cross) += d;
            ++(blobs.labels[i] == blobs.labels[j] ? ns : nc);
        }
    }
    same /= static_cast<double>(ns);
    cross /= static_cast<double>(nc);
    v.require(t >= 0.95, "trustworthiness " + fmt("%.4f", t) + " < 0.95");
    v.require(same < cross, "same-blob distance not below cross-blob distance");
    v.require(r1.layout == r2.layout, "two seeded runs differ");
    v.detail = "trustworthiness " + fmt("%.4f", t) + ", same/cross blob distance " + fmt("%.3f", same) + "/" +
               fmt("%.3f", cross) + ", runs identical: " + (r1.layout == r2.layout ? "yes" : "no") +
               (v.pass ? "" : " (trustworthiness below 0.95)");
    return v;
}

Verdict umap_internals() {
    Verdict v;
    const auto blobs = testsupport::three_blobs();
    const auto rand500 = testsupport::uniform_points(500, 8, 7);
    const auto rand200 = testsupport::uniform_points(200, 5, 99);
    struct Case {
        reduce::NeighborGraph g;
        std::string name;
    };
    std::vector<Case> cases;
    cases.push_back({reduce::knn_graph(blobs.points, 15, reduce::Metric::cosine), "blobs"});
    cases.push_back({reduce::knn_graph(rand500, 15, reduce::Metric::euclidean), "random-500"});
    cases.push_back({reduce::knn_graph(rand500, 15, reduce::Metric::cosine), "random-500-cosine"});
    cases.push_back({reduce::knn_graph(rand200, 10, reduce::Metric::euclidean), "random-200"});
    double worst = 0.0;
    for (const auto& c : cases) {
        const auto fg = reduce::fuzzy_graph(c.g);
        v.require(fg.degenerate.empty(), c.name + " has degenerate rows");
        const double target = std::log2(static_cast<double>(c.g.k));
        for (std::size_t i = 0; i < c.g.n; ++i) {
            double s = 0.0;
            for (double d : c.g.dists(i)) {
                s += std::exp(-std::max(0.0, d - fg.rho[i]) / fg.sigma[i]);
            }
            worst = std::max(worst, std::abs(s - target));
        }
    }
    v.require(worst < 1e-3, "smooth-kNN residual " + fmt("%.2e", worst));

    // Brute-force all pairs, stable on index for ties.
    const auto& g = cases[1].g;
    bool same = true;
    for (std::size_t i = 0; i < rand500.rows() && same; ++i) {
        std::vector<std::pair<double, std::uint32_t>> row;
        for (std::size_t j = 0; j < rand500.rows(); ++j) {
            if (j != i) {
                double d = 0.0;
                for (std::size_t c = 0; c < rand500.cols(); ++c) {
                    d += (rand500(i, c) - rand500(j, c)) * (rand500(i, c) - rand500(j, c));
                }
                row.emplace_back(std::sqrt(d), static_cast<std::uint32_t>(j));
            }
        }
        std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t r = 0; r < g.k; ++r) {
            same = same && g.neighbors(i)[r] == row[r].second && std::abs(g.dists(i)[r] - row[r].first) <= 1e-12;
        }
    }
    v.require(same, "knn graph differs from brute force");
    if (v.pass) {
        v.detail = "max |sum - log2 k| " + fmt("%.2e", worst) + " over 4 fixtures, knn equals brute force on 500 points";
    }
    return v;
}

// HDBSCAN -----------------------------------------------------------------

std::vector<double> kruskal_weights(const reduce::Layout& y, const std::vector<double>& core) {
    const std::size_t n = y.rows();
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) {
                d += (y(i, c) - y(j, c)) * (y(i, c) - y(j, c));
            }
            edges.emplace_back(std::max({core[i], core[j], std::sqrt(d)}), i, j);
        }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            x = parent[x] = parent[parent[x]];
        }
        return x;
    };
    std::vector<double> out;
    for (const auto& [w, a, b] : edges) {
        const auto ra = find(a);
        const auto rb = find(b);
        if (ra != rb) {
            parent[ra] = rb;
            out.push_back(w);
        }
    }
    return out;
}

double sorted_sum(std::vector<double> w) {
    std::sort(w.begin(), w.end());
    return std::accumulate(w.begin(), w.end(), 0.0);
}

Verdict hdbscan_oracle() {
    Verdict v;
    for (std::uint64_t seed : {1500u, 1501u}) {
        const auto y = testsupport::uniform_points(500, 3, seed);
        const auto core = cluster::core_distances(y, 5);
        std::vector<double> mine;
        for (const auto& e : cluster::mutual_reachability_mst(y, core)) {
            mine.push_back(e.weight);
        }
        v.require(sorted_sum(mine) == sorted_sum(kruskal_weights(y, core)), "MST weight differs from Kruskal");
    }
    const auto blobs = testsupport::three_blobs();
    const auto labels = cluster::hdbscan(testsupport::to_double(blobs.points), 15);
    const double ari = cluster::adjusted_rand_index(labels.labels, blobs.labels);
    v.require(ari >= 0.95, "ARI " + fmt("%.4f", ari));
    for (std::size_t c = 0; c < labels.cluster_count(); ++c) {
        v.require(std::count(labels.labels.begin(), labels.labels.end(), static_cast<int>(c)) >= 15,
                  "cluster below min_cluster_size");
    }
    if (v.pass) {
        v.detail = "MST totals equal Kruskal exactly on two 500-point sets, " +
                   std::to_string(labels.cluster_count()) + " clusters, ARI " + fmt("%.4f", ari);
    }
    return v;
}

// Topics ------------------------------------------------------------------

Verdict ctfidf_oracle() {
    Verdict v;
    // Classes {a:2, b:1} and {b:1, c:3}: A = 3.5, f = {a:2, b:2, c:3}.
    const topics::ClassTerms counts{{0, {{"a", 2}, {"b", 1}}}, {1, {{"b", 1}, {"c", 3}}}};
    const auto s = topics::ctfidf(counts, topics::average_class_size(counts));
    const double hand[4] = {2.0 / 3.0 * std::log(1.0 + 3.5 / 2.0), 1.0 / 3.0 * std::log(1.0 + 3.5 / 2.0),
                            1.0 / 4.0 * std::log(1.0 + 3.5 / 2.0), 3.0 / 4.0 * std::log(1.0 + 3.5 / 3.0)};
    const double got[4] = {s.at(0).at("a"), s.at(0).at("b"), s.at(1).at("b"), s.at(1).at("c")};
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        worst = std::max(worst, std::abs(hand[i] - got[i]));
    }
    v.require(worst < 1e-9, "hand arithmetic off by " + fmt("%.2e", worst));
    v.require(s.at(0).count("c") == 0 && s.at(1).count("a") == 0, "absent terms scored");

    const topics::ClassTerms sym{{0, {{"only", 4}, {"shared", 2}}}, {1, {{"shared", 2}, {"other", 4}}}};
    const double avg = topics::average_class_size(sym);
    const auto t = topics::ctfidf(sym, avg);
    v.require(std::abs(t.at(0).at("only") - 4.0 / 6.0 * std::log(1.0 + avg / 4.0)) < 1e-12,
              "single-class term score");
    v.require(t.at(0).at("shared") == t.at(1).at("shared"), "symmetric term scores differ");
    v.require(t.at(0).at("only") == t.at(1).at("other"), "mirrored single-class terms differ");
    if (v.pass) {
        v.detail = "max error " + fmt("%.1e", worst) + ", single-class and symmetric cases hold";
    }
    return v;
}

Verdict merge_conservation() {
    Verdict v;
    std::size_t fixtures = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        topics::TopicModel m;
        std::map<int, std::vector<double>> centre;
        std::map<int, std::size_t> size;
        for (int id = 0; id < 12; ++id) {
            topics::Topic t;
            t.id = id;
            t.size = 1 + rng.below(30);
            t.reduced_centroid = {10.0 * rng.uniform(), 10.0 * rng.uniform(), 10.0 * rng.uniform()};
            t.embedding_centroid = t.reduced_centroid;
            t.term_counts["w" + std::to_string(id)] = 1.0;
            centre[id] = t.reduced_centroid;
            size[id] = t.size;
            for (std::size_t k = 0; k < t.size; ++k) {
                m.labels.push_back(id);
                m.doc_ids.push_back(std::to_string(id) + "-" + std::to_string(k));
            }
            m.topics[id] = t;
        }
        const std::size_t docs = m.labels.size();

        // Brute-force trace: members tracked as sets of the original topics,
        // centroids recomputed from scratch at every step.
        std::map<int, std::vector<int>> members;
        for (int id = 0; id < 12; ++id) {
            members[id] = {id};
        }
        auto centroid = [&](int id) {
            std::vector<double> c(3, 0.0);
            double w = 0.0;
            for (int o : members[id]) {
                for (int d = 0; d < 3; ++d) {
                    c[d] += static_cast<double>(size[o]) * centre[o][d];
                }
                w += static_cast<double>(size[o]);
            }
            for (auto& x : c) {
                x /= w;
            }
            return c;
        };
        auto weight = [&](int id) {
            std::size_t w = 0;
            for (int o : members[id]) {
                w += size[o];
            }
            return w;
        };

        auto model = m;
        for (std::size_t target = 11; target >= 5; --target) {
            const auto before = model.history.size();
            model = topics::merge_topics(model, target);
            v.require(model.topic_count() == target, "topic count did not drop by one");
            v.require(model.history.size() == before + 1, "more than one merge per step");
            std::size_t total = 0;
            for (const auto& [id, t] : model.topics) {
                total += t.size;
            }
            v.require(total == docs && model.labels.size() == docs, "document count not conserved");

            int from = -1;
            for (const auto& [id, _] : members) {
                if (from < 0 || weight(id) < weight(from)) {
                    from = id;
                }
            }
            int into = -1;
            double best = 0.0;
            const auto cf = centroid(from);
            for (const auto& [id, _] : members) {
                if (id == from) {
                    continue;
                }
                const auto c = centroid(id);
                double d = 0.0;
                for (int k = 0; k < 3; ++k) {
                    d += (c[k] - cf[k]) * (c[k] - cf[k]);
                }
                d = std::sqrt(d);
                if (into < 0 || d < best) {
                    into = id;
                    best = d;
                }
            }
            const auto& step = model.history.back();
            v.require(step.from == from && step.into == into && std::abs(step.distance - best) < 1e-9,
                      "seed " + std::to_string(seed) + " departs from the brute-force trace");
            members[into].insert(members[into].end(), members[from].begin(), members[from].end());
            members.erase(from);
        }
        ++fixtures;
    }
    if (v.pass) {
        v.detail = std::to_string(fixtures) + " random 12-topic fixtures merged to 5 follow the brute-force trace";
    }
    return v;
}

Verdict query_matching() {
    Verdict v;
    const std::vector<std::string> a{"stock", "price", "volatility", "option", "hedge"};
    const std::vector<std::string> b{"neural", "network", "layer", "gradient", "tensor"};
    Rng rng(5);
    corpus::DocumentList docs;
    std::vector<int> labels;
    reduce::Layout layout(20, 2);
    std::vector<std::string> ids, texts;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto& vocab = i < 10 ? a : b;
        corpus::Document d;
        d.id = "d" + std::to_string(i);
        for (int w = 0; w < 8; ++w) {
            d.abstract += vocab[rng.below(vocab.size())] + " ";
        }
        d.year = 2020;
        ids.push_back(d.id);
        texts.push_back(textstats::document_text(d));
        docs.push_back(d);
        labels.push_back(i < 10 ? 0 : 1);
        layout(i, 0) = (i < 10 ? 0.0 : 10.0) + rng.uniform();
        layout(i, 1) = rng.uniform();
    }
    const auto emb = embed::fallback_embed(ids, texts, 64, 1).matrix;
    const auto model = topics::build_topics(labels, docs, emb, layout);
    embed::FallbackEmbedder embedder(64, 1);
    const auto qa = topics::match_query(model, "stock price volatility option hedge", embedder);
    const auto qb = topics::match_query(model, "neural network layer gradient tensor", embedder);
    v.require(qa.ranking.front().first == 0, "topic 0 not first for its own vocabulary");
    v.require(qb.ranking.front().first == 1, "topic 1 not first for its own vocabulary");
    for (float scale : {0.01f, 3.7f, 1000.0f}) {
        auto q = embedder.embed("stock price volatility option hedge");
        for (auto& x : q) {
            x *= scale;
        }
        const auto scaled = topics::match_query(model, "scaled", std::span<const float>(q));
        bool same = scaled.ranking.size() == qa.ranking.size();
        for (std::size_t i = 0; same && i < scaled.ranking.size(); ++i) {
            same = scaled.ranking[i].first == qa.ranking[i].first &&
                   std::abs(scaled.ranking[i].second - qa.ranking[i].second) < 1e-6;
        }
        v.require(same, "ranking changes under scaling by " + fmt("%g", scale));
    }
    if (v.pass) {
        v.detail = "own-vocabulary queries rank their topic first (" + fmt("%.3f", qa.ranking.front().second) + ", " +
                   fmt("%.3f", qb.ranking.front().second) + "), ranking scale invariant";
    }
    return v;
}

// Questions ---------------------------------------------------------------

Verdict confusion_fidelity() {
    Verdict v;
    const auto fourO = llmqa::read_records(fixture("qa/abstract_4o.jsonl"));
    const auto three5 = llmqa::read_records(fixture("qa/abstract_35.jsonl"));
    const auto full = llmqa::read_records(fixture("qa/fulltext_4o.jsonl"));
    auto cells = [](const std::size_t (&m)[2][2]) {
        return std::vector<std::size_t>{m[0][0], m[0][1], m[1][0], m[1][1]};
    };
    const auto t5 = llmqa::compare_answers(fourO, three5);
    v.require(cells(t5.a) == std::vector<std::size_t>{47, 98, 6, 25}, "first set cells");
    v.require(cells(t5.b) == std::vector<std::size_t>{64, 48, 35, 29}, "second set cells");
    v.require(t5.total_a() == 176 && t5.total_b() == 176 && t5.total_difference() == 0, "first table totals");
    const auto t6 = llmqa::compare_answers(full, fourO);
    v.require(cells(t6.a) == std::vector<std::size_t>{6, 51, 5, 84}, "full-text cells");
    v.require(cells(t6.b) == std::vector<std::size_t>{47, 98, 6, 25}, "abstract cells");
    v.require(t6.total_a() == 146 && t6.total_b() == 176 && t6.total_difference() == -30, "second table totals");
    std::ostringstream csv_out;
    t5.write_csv(csv_out);
    v.require(csv_out.str().find(",Total Sum,176,176,0\n") != std::string::npos, "CSV total row");
    if (v.pass) {
        v.detail = "(47,98,6,25) vs (64,48,35,29), 176/176, diff 0; (6,51,5,84) vs (47,98,6,25), 146/176, diff -30";
    }
    return v;
}

Verdict baseline_fidelity() {
    Verdict v;
    std::map<std::string, std::string> texts;
    {
        std::ifstream in(fixture("qa/baseline_snippets.jsonl"));
        std::string line;
        while (std::getline(in, line)) {
            const auto j = nlohmann::json::parse(line);
            texts[j.at("id").get<std::string>()] = j.at("text").get<std::string>();
        }
    }
    std::ifstream in(fixture("qa/baseline_expected.jsonl"));
    std::string line;
    std::size_t snippets = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto id = j.at("id").get<std::string>();
        const auto r = llmqa::regex_baseline_text(texts.at(id));
        for (const auto& [key, e] : j.at("expected").items()) {
            v.require(llmqa::verdict_name(r.answer(key).verdict) == e.at("verdict").get<std::string>() &&
                          r.answer(key).elaboration == e.at("elaboration").get<std::string>(),
                      "snippet " + id + " question " + key);
        }
        ++snippets;
    }
    v.require(snippets == 20, "expected 20 snippets");
    const auto table = csv::read_file(fixture("qa/published_bins.csv"));
    std::size_t strings = 0;
    for (const auto& row : table.rows) {
        const auto got = row[0] == "frequency" ? llmqa::bin_frequency(row[1]) : llmqa::group_loss(row[1]);
        v.require(got == row[2], "'" + row[1] + "' went to " + got + ", published " + row[2]);
        ++strings;
    }
    v.require(llmqa::bin_frequency("5-minute intervals") == "Intraday", "5-minute intervals");
    if (v.pass) {
        v.detail = std::to_string(snippets) + " snippets match the reference script, " + std::to_string(strings) +
                   " published strings land in their groups";
    }
    return v;
}

// CLI runs ----------------------------------------------------------------

int litmine_cli(std::vector<std::string> args, std::string* err = nullptr) {
    args.insert(args.begin(), "litmine");
    std::ostringstream out, e;
    const int status = cli::run(args, out, e);
    if (err) {
        *err = e.str();
    }
    return status;
}

/// Every non-metadata file under `dir`, by name.
std::map<std::string, std::string> primary_outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() < 10 || name.substr(name.size() - 10) != ".meta.json") {
            out[name] = slurp(entry.path());
        }
    }
    return out;
}

const char* kBlock = "BEGIN_ANSWERS\nTASK_SUMMARY: Answer five questions about one paper.\n"
                     "Q1_VERDICT: yes\nQ1_ELABORATION: LSTM is compared with ARIMA.\n"
                     "Q2_VERDICT: no\nQ2_ELABORATION:\n"
                     "Q3_VERDICT: yes\nQ3_ANSWER: Daily\nQ3_ELABORATION: daily data\n"
                     "Q4_VERDICT: yes\nQ4_ANSWER: Mean Squared Error\nQ4_ELABORATION: trained on MSE\n"
                     "Q5_VERDICT: yes\nQ5_ANSWER: LSTM\nQ5_ELABORATION: LSTM wins.\nEND_ANSWERS\n";

Verdict qa_determinism() {
    Verdict v;
    const auto dir = testsupport::scratch("acceptance_qa");
    corpus::DocumentList with_body;
    for (const auto& d : corpus::load_corpus(data_file("minicorpus.jsonl")).documents()) {
        if (d.body) {
            with_body.push_back(d);
        }
    }
    corpus::write_corpus(dir / "bodies.jsonl", with_body);
    const auto& flaky = with_body.at(1);
    const auto flaky_hash =
        hash_hex(llmqa::build_prompt(flaky, llmqa::Scope::fulltext, llmqa::default_questions()));
    {
        std::ofstream mock(dir / "mock.jsonl");
        mock << nlohmann::json{{"prompt_hash", flaky_hash}, {"responses", {{{"status", 503}}, {{"status", 502}}, kBlock}}}
                    .dump()
             << '\n'
             << nlohmann::json{{"prompt_hash", "*"}, {"responses", {kBlock}}}.dump() << '\n';
    }
    std::map<std::string, std::string> runs[2];
    for (int i = 0; i < 2; ++i) {
        const auto out = dir / ("run" + std::to_string(i));
        std::string err;
        const int status = litmine_cli({"--output-dir", out.string(), "qa", "run", "--corpus",
                                        (dir / "bodies.jsonl").string(), "--scope", "fulltext", "--mock",
                                        (dir / "mock.jsonl").string(), "--max-in-flight", "4"},
                                       &err);
        if (status != 0) {
            return {false, "qa run failed: " + err};
        }
        runs[i] = primary_outputs(out);
    }
    v.require(runs[0] == runs[1], "two runs differ");
    const auto meta = nlohmann::json::parse(slurp(dir / "run0" / "qa_run.meta.json")).at("details");
    const auto too_large = meta.at("too_large").get<std::vector<std::string>>();
    v.require(too_large == std::vector<std::string>{with_body.front().id}, "over-budget document not excluded");
    std::size_t retried = 0;
    std::istringstream log(runs[0]["qa_log.jsonl"]);
    std::string line;
    while (std::getline(log, line)) {
        const auto e = nlohmann::json::parse(line);
        if (e.at("doc_id") == flaky.id) {
            retried = e.at("retries").get<std::size_t>();
            v.require(e.at("status") == "ok" && e.at("retry_log").size() == 2, "flaky document did not recover");
        }
    }
    v.require(retried == 2, "expected 2 logged retries, found " + std::to_string(retried));
    const auto records = llmqa::read_records(dir / "run0" / "answers.jsonl");
    v.require(records.size() + too_large.size() == with_body.size(), "records missing");
    if (v.pass) {
        v.detail = std::to_string(records.size()) + " records byte-identical across runs, 1 over-budget document "
                   "excluded and counted, 2 retries logged";
    }
    return v;
}

Verdict end_to_end() {
    Verdict v;
    const auto dir = testsupport::scratch("acceptance_e2e");
    std::map<std::string, std::string> runs[2];
    std::size_t topics_found = 0;
    for (int i = 0; i < 2; ++i) {
        const auto out = (dir / ("run" + std::to_string(i))).string();
        const std::vector<std::vector<std::string>> steps = {
            {"filter", "--corpus", data_file("minicorpus.jsonl").string(), "--patterns",
             data_file("patterns_trading.jsonl").string()},
            {"embed", "fallback", "--corpus", out + "/filtered.jsonl"},
            {"reduce", "--embeddings", out + "/embeddings.emb1"},
            {"cluster", "--layout", out + "/layout.csv"},
            {"topics", "build", "--corpus", out + "/filtered.jsonl", "--embeddings", out + "/embeddings.emb1",
             "--layout", out + "/layout.csv", "--labels", out + "/labels.csv"},
            {"topics", "trends", "--model", out + "/topics.json", "--corpus", out + "/filtered.jsonl"},
        };
        for (auto step : steps) {
            step.insert(step.begin(), {"--output-dir", out, "--seed", "7"});
            std::string err;
            if (litmine_cli(step, &err) != 0) {
                return {false, step[4] + " failed: " + err};
            }
        }
        runs[i] = primary_outputs(out);
        topics_found = nlohmann::json::parse(runs[i]["topic_report.json"]).size();
    }
    v.require(runs[0] == runs[1], "outputs differ between seeded runs");
    v.require(runs[0].count("topic_trends.csv") == 1, "no trends written");
    if (v.pass) {
        v.detail = std::to_string(runs[0].size()) + " output files byte-identical across two runs, " +
                   std::to_string(topics_found) + " topics";
    }
    return v;
}

std::set<std::string> split_ids(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (!id.empty()) {
            out.insert(id);
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::string> expected_failures;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) {
            expected_failures = split_ids(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--expect-fail id[,id...]]\n";
            return 2;
        }
    }

    const std::vector<Criterion> criteria = {
        {"filter_oracle", "keyword filter reproduces the hand-counted table", 1.0, filter_oracle},
        {"taxonomy_fidelity", "model-family regexes fire on their intended branches", 1.0, taxonomy_fidelity},
        {"umap_quality", "UMAP on three blobs: trustworthiness >= 0.95, reproducible", 30.0, umap_quality},
        {"umap_internals", "smooth-kNN sigma and knn graph oracles", 0.0, umap_internals},
        {"hdbscan_oracle", "MST equals Kruskal, three blobs recovered", 30.0, hdbscan_oracle},
        {"ctfidf_oracle", "c-TF-IDF matches hand arithmetic", 0.0, ctfidf_oracle},
        {"merge_conservation", "topic merges conserve documents and follow the trace", 0.0, merge_conservation},
        {"query_matching", "queries rank their own topic first", 0.0, query_matching},
        {"confusion_fidelity", "confusion tables reproduce the published cells", 0.0, confusion_fidelity},
        {"baseline_fidelity", "keyword baseline and answer binning", 0.0, baseline_fidelity},
        {"qa_determinism", "qa run is reproducible against the scripted mock", 0.0, qa_determinism},
        {"end_to_end", "filter to trends pipeline is reproducible", 120.0, end_to_end},
    };

    std::set<std::string> failed;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0 && secs >= c.time_limit) {
            v.pass = false;
            v.detail += "; took " + fmt("%.1f", secs) + " s, limit " + fmt("%.0f", c.time_limit) + " s";
        }
        if (!v.pass) {
            failed.insert(c.id);
        }
        std::cout << (v.pass ? "PASS " : "FAIL ") << c.id << ": " << c.title << " -- " << v.detail << " ["
                  << fmt("%.2f", secs) << " s]" << std::endl;
    }
    std::cout << criteria.size() - failed.size() << "/" << criteria.size() << " criteria pass";
    if (!expected_failures.empty()) {
        std::cout << "; known failures:";
        for (const auto& id : expected_failures) {
            std::cout << ' ' << id;
        }
    }
    std::cout << std::endl;
    if (failed != expected_failures) {
        std::cout << "failures differ from the expected set" << std::endl;
        return 1;
    }
    return 0;
}
