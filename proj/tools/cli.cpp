#include "cli.hpp"

#include "litmine/chat.hpp"
#include "litmine/cluster.hpp"
#include "litmine/corpus.hpp"
#include "litmine/csv.hpp"
#include "litmine/embed.hpp"
#include "litmine/filter.hpp"
#include "litmine/http.hpp"
#include "litmine/llmqa.hpp"
#include "litmine/reduce.hpp"
#include "litmine/textstats.hpp"
#include "litmine/topics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

namespace litmine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Nested JSON objects are sections: `{"reduce": {"k": 15}}` sets `reduce --k`.
/// Keys may use `_` in place of `-`.
class JsonConfig final : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) {
            throw CLI::ConversionError("config must be a JSON object");
        }
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

  private:
    static std::string scalar(const json& v) {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_boolean()) {
            return v.get<bool>() ? "true" : "false";
        }
        if (v.is_number() || v.is_null()) {
            return v.dump();
        }
        throw CLI::ConversionError("config values must be scalars or arrays of scalars");
    }

    static void flatten(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
        for (const auto& [raw, value] : obj.items()) {
            std::string key = raw;
            std::replace(key.begin(), key.end(), '_', '-');
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                flatten(value, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) {
                    item.inputs.push_back(scalar(v));
                }
            } else {
                item.inputs.push_back(scalar(value));
            }
            out.push_back(std::move(item));
        }
    }
};

struct Globals {
    std::string output_dir = ".";
    std::uint64_t seed = 42;
};

/// Tracks inputs and outputs of one command so that outputs never overwrite
/// inputs, and writes the metadata file at the end.
class Run {
  public:
    Run(const Globals& g, std::string command, const CLI::App* sub)
        : globals_(g), command_(std::move(command)), sub_(sub), start_(std::chrono::system_clock::now()),
          started_at_(utc_timestamp()) {
        fs::create_directories(g.output_dir);
    }

    const fs::path& input(const std::string& path) {
        if (!fs::exists(path)) {
            throw Error("input not found: " + path);
        }
        inputs_.push_back(fs::weakly_canonical(path));
        return inputs_.back();
    }

    fs::path output(const std::string& name) {
        const fs::path p = fs::path(globals_.output_dir) / name;
        const auto canon = fs::weakly_canonical(p);
        for (const auto& in : inputs_) {
            if (in == canon) {
                throw Error("refusing to overwrite input " + in.string());
            }
        }
        outputs_.push_back(name);
        return p;
    }

    template <typename Fn>
    void write(const std::string& name, Fn&& fn) {
        const auto p = output(name);
        std::ofstream out(p, std::ios::binary);
        if (!out) {
            throw Error("cannot write " + p.string());
        }
        fn(out);
        if (!out) {
            throw Error("write failed for " + p.string());
        }
    }

    void write_json(const std::string& name, const json& j) {
        write(name, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }

    json& extra() { return extra_; }

    void finish() {
        const auto end = std::chrono::system_clock::now();
        json params = json::object();
        for (const auto* opt : sub_->get_options()) {
            const auto& name = opt->get_lnames();
            if (name.empty() || name.front() == "help") {
                continue;
            }
            const auto& results = opt->results();
            if (opt->count() > 0 || !results.empty()) {
                params[name.front()] = results.size() == 1 ? json(results.front()) : json(results);
            } else {
                params[name.front()] = opt->get_default_str();
            }
        }
        json meta = {{"command", command_},
                     {"seed", globals_.seed},
                     {"params", params},
                     {"inputs", json::array()},
                     {"outputs", outputs_},
                     {"started_at", started_at_},
                     {"finished_at", utc_timestamp()},
                     {"wall_seconds", std::chrono::duration<double>(end - start_).count()},
                     {"details", extra_}};
        for (const auto& in : inputs_) {
            meta["inputs"].push_back(in.string());
        }
        std::string file = command_;
        std::replace(file.begin(), file.end(), ' ', '_');
        const fs::path p = fs::path(globals_.output_dir) / (file + ".meta.json");
        std::ofstream out(p, std::ios::binary);
        out << meta.dump(2) << '\n';
    }

  private:
    const Globals& globals_;
    std::string command_;
    const CLI::App* sub_;
    std::chrono::system_clock::time_point start_;
    std::string started_at_;
    std::vector<fs::path> inputs_;
    std::vector<std::string> outputs_;
    json extra_ = json::object();
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

corpus::DocumentList read_corpus(Run& run, const std::string& path) {
    return corpus::load_corpus(run.input(path)).documents();
}

std::vector<std::string> ids_of(const corpus::DocumentList& docs) {
    std::vector<std::string> ids;
    for (const auto& d : docs) {
        ids.push_back(d.id);
    }
    return ids;
}

std::vector<std::string> texts_of(const corpus::DocumentList& docs) {
    std::vector<std::string> texts;
    for (const auto& d : docs) {
        texts.push_back(textstats::document_text(d));
    }
    return texts;
}

topics::TopicModel read_model(Run& run, const std::string& path) {
    return topics::model_from_json(json::parse(slurp(run.input(path))));
}

struct ChatOptions {
    std::string endpoint;
    std::string model;
    std::string mock;

    void add(CLI::App* sub) {
        sub->add_option("--endpoint", endpoint, "Chat completions URL");
        sub->add_option("--llm-model", model, "Model name sent to the endpoint");
        sub->add_option("--mock", mock, "Scripted JSONL responses instead of an endpoint");
    }

    std::unique_ptr<chat::ChatTransport> open(Run& run) const {
        if (!mock.empty()) {
            return std::make_unique<chat::MockChatTransport>(run.input(mock));
        }
        if (endpoint.empty() || model.empty()) {
            throw Error("either --mock or both --endpoint and --llm-model are required");
        }
        return std::make_unique<chat::HttpChatTransport>(endpoint, model, http::token_from_env("LITMINE_LLM_KEY"));
    }
};

struct EmbedOptions {
    std::string endpoint;
    std::string model;
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 1;

    void add(CLI::App* sub) {
        sub->add_option("--embed-endpoint", endpoint, "Embedding endpoint URL");
        sub->add_option("--embed-model", model, "Embedding model name");
        sub->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);
        sub->add_option("--max-in-flight", max_in_flight)->check(CLI::PositiveNumber);
    }

    embed::RemoteConfig config() const {
        embed::RemoteConfig c;
        c.model = model;
        c.batch_size = batch_size;
        c.max_in_flight = max_in_flight;
        return c;
    }
};

void write_counts(Run& run, const std::string& name, const std::vector<std::pair<std::string, std::size_t>>& counts) {
    run.write(name, [&](std::ostream& out) { llmqa::write_counts_csv(out, counts); });
}

// Each command registers its options and returns the action to run once
// parsing (config file included) is complete.
using Action = std::function<void(Run&)>;

struct Command {
    CLI::App* app;
    std::string name;
    Action action;
};

class Registry {
  public:
    CLI::App* add(CLI::App* parent, const std::string& name, const std::string& path, const std::string& help,
                  Action action) {
        auto* sub = parent->add_subcommand(name, help);
        commands_.push_back({sub, path, std::move(action)});
        return sub;
    }

    Command* selected() {
        for (auto& c : commands_) {
            if (c.app->parsed() && c.app->get_subcommands().empty()) {
                return &c;
            }
        }
        return nullptr;
    }

  private:
    std::vector<Command> commands_;
};

struct State {
    Globals g;

    struct {
        std::string corpus, patterns;
        bool keep_without_abstract = false;
        bool skip_bad = false;
        unsigned threads = 1;
    } filter;

    struct {
        std::string corpus;
        std::size_t n = 0;
    } sample;

    struct {
        std::string corpus, taxonomies, taxonomy, gazetteer, universe;
        std::size_t n = 2;
        std::size_t top = 50;
    } stats;

    struct {
        std::string corpus, emb1;
        std::size_t dim = 384;
        EmbedOptions remote;
    } embed;

    struct {
        std::string embeddings;
        reduce::UmapParams p;
        std::string metric = "cosine";
    } reduce;

    struct {
        std::string layout;
        std::size_t min_cluster_size = 15;
        std::size_t min_samples = 0;
    } cluster;

    struct {
        std::string corpus, embeddings, layout, labels, model, queries;
        std::vector<std::string> query;
        std::size_t top_k = 10;
        std::size_t max_ngram = 1;
        std::size_t target = 0;
        std::size_t top = 5;
        EmbedOptions remote;
        ChatOptions chat;
    } topics;

    struct {
        std::string corpus, scope = "abstract", a, b, outer = "hyperparameter_optimization", inner = "comparison",
                            name_a = "A", name_b = "B", answers, key = "data_frequency", table, categories,
                            timestamp;
        std::size_t max_text_chars = 120000;
        std::size_t max_in_flight = 1;
        ChatOptions chat;
    } qa;
};

void add_filter(Registry& r, CLI::App& app, State& s) {
    auto* sub = r.add(&app, "filter", "filter", "Keyword filter with a frequency table", [&s](Run& run) {
        const auto store = corpus::load_corpus(run.input(s.filter.corpus),
                                               s.filter.skip_bad ? corpus::Strictness::skip_bad
                                                                 : corpus::Strictness::strict);
        const auto patterns = filter::compile_patterns(filter::read_pattern_file(run.input(s.filter.patterns)));
        const auto result = filter::filter_corpus(store, patterns, !s.filter.keep_without_abstract, s.filter.threads);
        corpus::write_corpus(run.output("filtered.jsonl"), result.documents);
        run.write("frequency.csv", [&](std::ostream& out) { result.table.write_csv(out); });
        run.extra() = {{"documents", store.doc_count()},
                       {"skipped_lines", store.skipped()},
                       {"matched", result.matched},
                       {"kept", result.documents.size()},
                       {"dropped_without_abstract", result.dropped_without_abstract}};
    });
    sub->add_option("--corpus", s.filter.corpus, "Corpus JSONL")->required();
    sub->add_option("--patterns", s.filter.patterns, "Pattern JSONL")->required();
    sub->add_flag("--keep-without-abstract", s.filter.keep_without_abstract);
    sub->add_flag("--skip-bad", s.filter.skip_bad, "Skip malformed corpus lines instead of failing");
    sub->add_option("--threads", s.filter.threads)->check(CLI::PositiveNumber);
}

void add_sample(Registry& r, CLI::App& app, State& s) {
    auto* sub = r.add(&app, "sample", "sample", "Seeded random sample of a corpus", [&s](Run& run) {
        const auto store = corpus::load_corpus(run.input(s.sample.corpus));
        corpus::write_corpus(run.output("sample.jsonl"), corpus::sample(store, s.sample.n, s.g.seed));
    });
    sub->add_option("--corpus", s.sample.corpus)->required();
    sub->add_option("-n,--n", s.sample.n, "Sample size")->required();
}

void add_stats(Registry& r, CLI::App& app, State& s) {
    auto* stats = app.add_subcommand("stats", "Word statistics over a corpus");
    stats->require_subcommand(1);

    auto* ng = r.add(stats, "ngrams", "stats ngrams", "Most frequent n-grams", [&s](Run& run) {
        const auto docs = read_corpus(run, s.stats.corpus);
        const textstats::PreprocessConfig cfg;
        textstats::NgramCounts counts;
        for (const auto& d : docs) {
            textstats::accumulate_ngrams(counts, textstats::preprocess(textstats::document_text(d), cfg), s.stats.n);
        }
        std::vector<std::pair<std::string, std::size_t>> rows;
        for (const auto& [gram, c] : counts) {
            std::string joined;
            for (const auto& t : gram) {
                joined += (joined.empty() ? "" : " ") + t;
            }
            rows.emplace_back(joined, c);
        }
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        if (s.stats.top > 0 && rows.size() > s.stats.top) {
            rows.resize(s.stats.top);
        }
        run.write("ngrams_" + std::to_string(s.stats.n) + ".csv", [&](std::ostream& out) {
            out << "ngram,count\n";
            for (const auto& [g, c] : rows) {
                out << csv::field(g) << ',' << c << '\n';
            }
        });
        run.extra() = {{"distinct", counts.size()}};
    });
    ng->add_option("--corpus", s.stats.corpus)->required();
    ng->add_option("-n,--n", s.stats.n, "n-gram length")->check(CLI::PositiveNumber);
    ng->add_option("--top", s.stats.top, "Rows to keep, 0 for all");

    auto* tr = r.add(stats, "trends", "stats trends", "Per-year taxonomy counts", [&s](Run& run) {
        const auto docs = read_corpus(run, s.stats.corpus);
        const auto all = textstats::read_taxonomy_file(run.input(s.stats.taxonomies));
        std::size_t written = 0;
        for (const auto& t : all) {
            if (!s.stats.taxonomy.empty() && t.name != s.stats.taxonomy) {
                continue;
            }
            const auto series = textstats::taxonomy_trends(docs, t);
            run.write("trends_" + t.name + ".csv", [&](std::ostream& out) { series.write_csv(out); });
            ++written;
        }
        if (written == 0) {
            throw Error("no taxonomy named " + s.stats.taxonomy);
        }
    });
    tr->add_option("--corpus", s.stats.corpus)->required();
    tr->add_option("--taxonomies", s.stats.taxonomies, "Taxonomy JSONL")->required();
    tr->add_option("--taxonomy", s.stats.taxonomy, "Only this taxonomy");

    auto* gz = r.add(stats, "gazetteer", "stats gazetteer", "Documents per named entity", [&s](Run& run) {
        const auto docs = read_corpus(run, s.stats.corpus);
        const auto gaz = textstats::read_gazetteer_file(run.input(s.stats.gazetteer));
        const auto counts = textstats::gazetteer_entities(docs, gaz);
        run.write("gazetteer.csv", [&](std::ostream& out) {
            out << "entity,documents\n";
            for (const auto& [e, n] : counts) {
                out << csv::field(e) << ',' << n << '\n';
            }
        });
    });
    gz->add_option("--corpus", s.stats.corpus)->required();
    gz->add_option("--gazetteer", s.stats.gazetteer)->required();

    auto* ys = r.add(stats, "yearly-share", "stats yearly-share", "Documents per year in basis points of a universe",
                     [&s](Run& run) {
                         const auto docs = read_corpus(run, s.stats.corpus);
                         const auto table = csv::read_file(run.input(s.stats.universe));
                         textstats::YearCounts universe;
                         textstats::YearCounts subset;
                         const auto yc = table.column("year");
                         const auto cc = table.column("count");
                         for (const auto& row : table.rows) {
                             universe[std::stoi(row.at(yc))] = std::stoull(row.at(cc));
                         }
                         for (const auto& d : docs) {
                             if (d.year) {
                                 ++subset[*d.year];
                             }
                         }
                         const auto share = textstats::yearly_share(subset, universe);
                         run.write("yearly_share.csv", [&](std::ostream& out) {
                             out << "year,documents,universe,basis_points\n";
                             for (const auto& [year, bps] : share) {
                                 const auto it = subset.find(year);
                                 out << year << ',' << (it == subset.end() ? 0 : it->second) << ','
                                     << universe.at(year) << ',' << format_double(bps) << '\n';
                             }
                         });
                     });
    ys->add_option("--corpus", s.stats.corpus)->required();
    ys->add_option("--universe", s.stats.universe, "CSV year,count of all publications")->required();
}

void add_embed(Registry& r, CLI::App& app, State& s) {
    auto* emb = app.add_subcommand("embed", "Document embeddings");
    emb->require_subcommand(1);

    auto* imp = r.add(emb, "import", "embed import", "Validate an EMB1 file against a corpus", [&s](Run& run) {
        const auto m = embed::import_embeddings(run.input(s.embed.emb1));
        if (!s.embed.corpus.empty()) {
            const auto ids = ids_of(read_corpus(run, s.embed.corpus));
            if (ids != m.ids) {
                throw Error("embedding ids do not follow corpus order");
            }
        }
        embed::write_emb1(run.output("embeddings.emb1"), m);
        run.extra() = {{"rows", m.size()}, {"dim", m.dim()}};
    });
    imp->add_option("--emb1", s.embed.emb1, "EMB1 file")->required();
    imp->add_option("--corpus", s.embed.corpus, "Corpus whose order the ids must follow");

    auto* fb = r.add(emb, "fallback", "embed fallback", "Hashed bag-of-words embeddings", [&s](Run& run) {
        const auto docs = read_corpus(run, s.embed.corpus);
        const auto result = embed::fallback_embed(ids_of(docs), texts_of(docs), s.embed.dim, s.g.seed);
        embed::write_emb1(run.output("embeddings.emb1"), result.matrix);
        json zero = json::array();
        for (auto i : result.zero_rows) {
            zero.push_back(docs[i].id);
        }
        run.extra() = {{"rows", result.matrix.size()}, {"dim", s.embed.dim}, {"zero_rows", zero}};
    });
    fb->add_option("--corpus", s.embed.corpus)->required();
    fb->add_option("--dim", s.embed.dim)->check(CLI::PositiveNumber);

    auto* rm = r.add(emb, "remote", "embed remote", "Embeddings from an HTTP endpoint", [&s](Run& run) {
        const auto docs = read_corpus(run, s.embed.corpus);
        if (s.embed.remote.endpoint.empty() || s.embed.remote.model.empty()) {
            throw Error("--embed-endpoint and --embed-model are required");
        }
        http::HttpClientTransport transport(s.embed.remote.endpoint, http::token_from_env("LITMINE_EMBED_KEY"));
        embed::RemoteStats stats;
        const auto m = embed::remote_embed(ids_of(docs), texts_of(docs), transport, s.embed.remote.config(), &stats);
        embed::write_emb1(run.output("embeddings.emb1"), m);
        run.extra() = {{"rows", m.size()},
                       {"dim", m.dim()},
                       {"requests", stats.requests},
                       {"retries", stats.retries},
                       {"retry_log", stats.log}};
    });
    rm->add_option("--corpus", s.embed.corpus)->required();
    s.embed.remote.add(rm);
}

void add_reduce(Registry& r, CLI::App& app, State& s) {
    auto* sub = r.add(&app, "reduce", "reduce", "UMAP layout of embeddings", [&s](Run& run) {
        const auto m = embed::import_embeddings(run.input(s.reduce.embeddings));
        auto p = s.reduce.p;
        p.metric = reduce::parse_metric(s.reduce.metric);
        p.seed = s.g.seed;
        const auto result = reduce::umap(m.vectors, p);
        run.write("layout.csv", [&](std::ostream& out) { reduce::write_layout_csv(out, m.ids, result.layout); });
        run.extra() = {{"init", reduce::init_name(result.init)},
                       {"a", result.a},
                       {"b", result.b},
                       {"epochs", p.epochs},
                       {"degenerate_rows", result.degenerate_rows}};
    });
    sub->add_option("--embeddings", s.reduce.embeddings, "EMB1 file")->required();
    sub->add_option("--k", s.reduce.p.k, "Neighbours")->check(CLI::PositiveNumber);
    sub->add_option("--components", s.reduce.p.k_out, "Output dimensions")->check(CLI::PositiveNumber);
    sub->add_option("--min-dist", s.reduce.p.min_dist);
    sub->add_option("--spread", s.reduce.p.spread);
    sub->add_option("--epochs", s.reduce.p.epochs);
    sub->add_option("--neg-samples", s.reduce.p.neg_samples);
    sub->add_option("--metric", s.reduce.metric)->check(CLI::IsMember({"cosine", "euclidean"}));
    sub->add_option("--threads", s.reduce.p.threads)->check(CLI::PositiveNumber);
}

void add_cluster(Registry& r, CLI::App& app, State& s) {
    auto* sub = r.add(&app, "cluster", "cluster", "HDBSCAN over a layout", [&s](Run& run) {
        std::ifstream in(run.input(s.cluster.layout));
        const auto [ids, y] = reduce::read_layout_csv(in);
        const std::size_t mcs = s.cluster.min_cluster_size;
        if (mcs < 2) {
            throw Error("--min-cluster-size must be at least 2");
        }
        const std::size_t ms = std::min(s.cluster.min_samples == 0 ? mcs : s.cluster.min_samples, ids.size());
        const auto core = cluster::core_distances(y, ms);
        const auto tree = cluster::condense_tree(cluster::mutual_reachability_mst(y, core), ids.size(), mcs);
        const auto labels = cluster::extract_clusters(tree);
        run.write("labels.csv", [&](std::ostream& out) { cluster::write_labels_csv(out, ids, labels); });
        run.write_json("condensed_tree.json", cluster::condensed_tree_json(tree, labels));
        run.extra() = {{"clusters", labels.cluster_count()}, {"noise", labels.noise_count()}, {"min_samples", ms}};
    });
    sub->add_option("--layout", s.cluster.layout, "Layout CSV")->required();
    sub->add_option("--min-cluster-size", s.cluster.min_cluster_size);
    sub->add_option("--min-samples", s.cluster.min_samples, "0 means min-cluster-size");
}

void add_topics(Registry& r, CLI::App& app, State& s) {
    auto* top = app.add_subcommand("topics", "Topic models");
    top->require_subcommand(1);
    auto& t = s.topics;

    auto* build = r.add(top, "build", "topics build", "Topics from cluster labels", [&t](Run& run) {
        const auto docs = read_corpus(run, t.corpus);
        const auto emb = embed::import_embeddings(run.input(t.embeddings));
        std::ifstream lin(run.input(t.layout));
        const auto [layout_ids, layout] = reduce::read_layout_csv(lin);
        std::ifstream cin(run.input(t.labels));
        const auto [label_ids, labels] = cluster::read_labels_csv(cin);
        if (layout_ids != emb.ids || label_ids != emb.ids) {
            throw Error("layout, labels and embeddings must list the same ids in the same order");
        }
        const auto model = topics::build_topics(labels, docs, emb, layout, {t.top_k, t.max_ngram});
        run.write_json("topics.json", topics::to_json(model));
        run.write_json("topic_report.json", topics::topic_report(model));
        run.extra() = {{"topics", model.topic_count()}};
    });
    build->add_option("--corpus", t.corpus)->required();
    build->add_option("--embeddings", t.embeddings)->required();
    build->add_option("--layout", t.layout)->required();
    build->add_option("--labels", t.labels)->required();
    build->add_option("--top-k", t.top_k)->check(CLI::PositiveNumber);
    build->add_option("--max-ngram", t.max_ngram)->check(CLI::PositiveNumber);

    auto* merge = r.add(top, "merge", "topics merge", "Merge the smallest topics into their neighbours",
                        [&t](Run& run) {
                            const auto model = topics::merge_topics(read_model(run, t.model), t.target);
                            run.write_json("topics_merged.json", topics::to_json(model));
                            run.write_json("topic_report_merged.json", topics::topic_report(model));
                            run.extra() = {{"topics", model.topic_count()}, {"steps", model.history.size()}};
                        });
    merge->add_option("--model", t.model, "Topic model JSON")->required();
    merge->add_option("--target", t.target, "Topic count to reach")->required();

    auto* trends = r.add(top, "trends", "topics trends", "Documents per topic and year", [&t](Run& run) {
        const auto model = read_model(run, t.model);
        const auto trend = topics::topic_trends(model, read_corpus(run, t.corpus));
        run.write("topic_trends.csv", [&](std::ostream& out) { trend.write_csv(out); });
    });
    trends->add_option("--model", t.model)->required();
    trends->add_option("--corpus", t.corpus)->required();

    auto* match = r.add(top, "match", "topics match", "Rank topics against queries", [&s, &t](Run& run) {
        const auto model = read_model(run, t.model);
        auto queries = t.query;
        if (!t.queries.empty()) {
            std::ifstream in(run.input(t.queries));
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                if (!line.empty()) {
                    queries.push_back(line);
                }
            }
        }
        if (queries.empty()) {
            throw Error("no queries given");
        }
        std::size_t dim = 0;
        for (const auto& [id, topic] : model.topics) {
            dim = std::max(dim, topic.embedding_centroid.size());
        }
        std::unique_ptr<http::Transport> transport;
        std::unique_ptr<embed::TextEmbedder> embedder;
        if (!t.remote.endpoint.empty()) {
            transport = std::make_unique<http::HttpClientTransport>(t.remote.endpoint,
                                                                    http::token_from_env("LITMINE_EMBED_KEY"));
            embedder = std::make_unique<embed::RemoteEmbedder>(*transport, t.remote.config(), dim);
        } else {
            embedder = std::make_unique<embed::FallbackEmbedder>(dim, s.g.seed);
        }
        std::vector<topics::QueryMatch> matches;
        for (const auto& q : queries) {
            matches.push_back(topics::match_query(model, q, *embedder));
        }
        run.write("matches.csv", [&](std::ostream& out) { topics::write_matches_csv(out, matches, model, t.top); });
        run.extra() = {{"queries", queries.size()},
                       {"embedder", t.remote.endpoint.empty() ? "fallback" : "remote"}};
    });
    match->add_option("--model", t.model)->required();
    match->add_option("--query", t.query, "Query text (repeatable)");
    match->add_option("--queries", t.queries, "File with one query per line");
    match->add_option("--top", t.top, "Topics listed per query");
    t.remote.add(match);

    auto* hier = r.add(top, "hierarchy", "topics hierarchy", "Average-linkage tree over topic centroids",
                       [&t](Run& run) {
                           const auto h = topics::topic_hierarchy(read_model(run, t.model));
                           run.write_json("hierarchy.json", topics::hierarchy_json(h));
                       });
    hier->add_option("--model", t.model)->required();

    auto* label = r.add(top, "label", "topics label", "Short titles for topics from a chat model", [&t](Run& run) {
        auto model = read_model(run, t.model);
        auto transport = t.chat.open(run);
        std::size_t requests = 0;
        json fallbacks = json::array();
        for (auto& [id, topic] : model.topics) {
            if (id == topics::kNoise) {
                continue;
            }
            const auto outcome = topics::label_topic(topic.top_terms, *transport, chat::AskPolicy{});
            topic.title = outcome.title;
            requests += outcome.requests;
            if (outcome.fallback) {
                fallbacks.push_back(id);
            }
        }
        run.write_json("topics_labelled.json", topics::to_json(model));
        run.write("topic_titles.csv", [&](std::ostream& out) {
            out << "topic,title\n";
            for (const auto& [id, topic] : model.topics) {
                if (id != topics::kNoise) {
                    out << id << ',' << csv::field(topic.title.value_or("")) << '\n';
                }
            }
        });
        run.extra() = {{"requests", requests}, {"fallback_topics", fallbacks}};
    });
    label->add_option("--model", t.model)->required();
    t.chat.add(label);
}

void add_qa(Registry& r, CLI::App& app, State& s) {
    auto* qa = app.add_subcommand("qa", "Per-document questions");
    qa->require_subcommand(1);
    auto& q = s.qa;
    const std::vector<std::string> scopes{"abstract", "fulltext"};

    auto* runq = r.add(qa, "run", "qa run", "Ask the question set about every document", [&q](Run& run) {
        const auto docs = read_corpus(run, q.corpus);
        auto transport = q.chat.open(run);
        llmqa::RunOptions opt;
        opt.scope = llmqa::parse_scope(q.scope);
        opt.max_text_chars = q.max_text_chars;
        opt.max_in_flight = q.max_in_flight;
        if (!q.timestamp.empty()) {
            opt.timestamp = q.timestamp;
        }
        const auto result = llmqa::run_questions(docs, llmqa::default_questions(), *transport, opt);
        llmqa::write_records(run.output("answers.jsonl"), result.records);
        run.write("qa_log.jsonl", [&](std::ostream& out) {
            for (const auto& e : result.log) {
                out << llmqa::to_json(e).dump() << '\n';
            }
        });
        run.extra() = {{"documents", docs.size()},
                       {"answered", result.records.size() - result.failed.size() - result.unparsed.size()},
                       {"too_large", result.too_large},
                       {"failed", result.failed},
                       {"unparsed", result.unparsed},
                       {"model", transport->model()}};
    });
    runq->add_option("--corpus", q.corpus)->required();
    runq->add_option("--scope", q.scope)->check(CLI::IsMember(scopes));
    runq->add_option("--max-text-chars", q.max_text_chars, "Documents over this budget are excluded");
    runq->add_option("--max-in-flight", q.max_in_flight)->check(CLI::PositiveNumber);
    runq->add_option("--timestamp", q.timestamp, "Timestamp stored in every record");
    q.chat.add(runq);

    auto* base = r.add(qa, "baseline", "qa baseline", "Keyword baseline answers", [&q](Run& run) {
        const auto docs = read_corpus(run, q.corpus);
        const auto scope = llmqa::parse_scope(q.scope);
        std::vector<llmqa::AnswerRecord> records;
        for (const auto& d : docs) {
            records.push_back(llmqa::regex_baseline(d, scope));
        }
        llmqa::write_records(run.output("baseline.jsonl"), records);
        run.extra() = {{"documents", records.size()}};
    });
    base->add_option("--corpus", q.corpus)->required();
    base->add_option("--scope", q.scope)->check(CLI::IsMember(scopes));

    auto* cmp = r.add(qa, "compare", "qa compare", "Confusion counts of two answer sets", [&q](Run& run) {
        const auto a = llmqa::read_records(run.input(q.a));
        const auto b = llmqa::read_records(run.input(q.b));
        const auto m = llmqa::compare_answers(a, b, q.outer, q.inner, q.name_a, q.name_b);
        run.write("confusion.csv", [&](std::ostream& out) { m.write_csv(out); });
        run.extra() = {{"total_a", m.total_a()}, {"total_b", m.total_b()}, {"difference", m.total_difference()}};
    });
    cmp->add_option("--a", q.a, "First answer set")->required();
    cmp->add_option("--b", q.b, "Second answer set")->required();
    cmp->add_option("--outer", q.outer, "Question splitting the rows");
    cmp->add_option("--inner", q.inner, "Question splitting each group");
    cmp->add_option("--name-a", q.name_a);
    cmp->add_option("--name-b", q.name_b);

    auto* bin = r.add(qa, "bin", "qa bin", "Group free-text answers into bins", [&q](Run& run) {
        const auto records = llmqa::read_records(run.input(q.answers));
        std::optional<llmqa::AliasTable> table;
        if (!q.table.empty()) {
            table = llmqa::AliasTable::read_file(run.input(q.table));
        } else if (q.key == "data_frequency") {
            table = llmqa::default_frequency_bins();
        } else if (q.key == "loss_function") {
            table = llmqa::default_loss_groups();
        } else {
            throw Error("no built-in bins for " + q.key + "; pass --table");
        }
        std::vector<std::string> warnings;
        const auto counts = llmqa::tally(records, q.key, *table, &warnings);
        write_counts(run, "bins_" + q.key + ".csv", counts);
        run.extra() = {{"records", records.size()}, {"warnings", warnings}};
    });
    bin->add_option("--answers", q.answers, "Answer set JSONL")->required();
    bin->add_option("--key", q.key, "Free-text question key");
    bin->add_option("--table", q.table, "Alias table JSON");

    auto* cat = r.add(qa, "categorize", "qa categorize", "Assign best-model answers to categories", [&q](Run& run) {
        const auto records = llmqa::read_records(run.input(q.answers));
        std::vector<std::string> categories = llmqa::default_model_categories();
        if (!q.categories.empty()) {
            categories = json::parse(slurp(run.input(q.categories))).at("categories").get<std::vector<std::string>>();
        }
        auto transport = q.chat.open(run);
        const auto tally = llmqa::categorize_models(records, *transport, chat::AskPolicy{}, categories);
        write_counts(run, "model_categories.csv", tally.counts);
        run.write("categorizations.jsonl", [&](std::ostream& out) {
            for (const auto& c : tally.records) {
                out << json{{"doc_id", c.doc_id}, {"category", c.category}, {"status", c.status}, {"detail", c.detail}}
                           .dump()
                    << '\n';
            }
        });
        run.extra() = {{"records", records.size()}, {"requests", tally.requests}};
    });
    cat->add_option("--answers", q.answers)->required();
    cat->add_option("--categories", q.categories, "JSON {\"categories\": [...]}");
    q.chat.add(cat);
}

/// CLI11 reports a stray word as a missing subcommand; name it instead.
std::optional<std::string> unknown_subcommand(const CLI::App& app, const std::vector<std::string>& args) {
    const CLI::App* level = &app;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--") {
            break;
        }
        if (a.rfind("-", 0) == 0) {
            // Only the global options take a value before a subcommand.
            if (level == &app && a.find('=') == std::string::npos &&
                (a == "--output-dir" || a == "--seed" || a == "--config")) {
                ++i;
            }
            continue;
        }
        const auto subs = level->get_subcommands([](const CLI::App*) { return true; });
        if (subs.empty()) {
            break;
        }
        const auto it = std::find_if(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->check_name(a); });
        if (it == subs.end()) {
            return (level == &app ? "" : level->get_name() + " ") + a;
        }
        level = *it;
    }
    return std::nullopt;
}

std::string one_line(std::string s) {
    for (auto& c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

} // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    State s;
    Registry registry;
    CLI::App app{"Literature mining pipeline", "litmine"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    app.add_option("--output-dir", s.g.output_dir, "Directory for all outputs");
    app.add_option("--seed", s.g.seed, "Seed for every random choice");
    app.set_config("--config", "", "JSON config; flags on the command line win");
    app.config_formatter(std::make_shared<JsonConfig>());
    app.allow_config_extras(CLI::config_extras_mode::error);

    add_filter(registry, app, s);
    add_sample(registry, app, s);
    add_stats(registry, app, s);
    add_embed(registry, app, s);
    add_reduce(registry, app, s);
    add_cluster(registry, app, s);
    add_topics(registry, app, s);
    add_qa(registry, app, s);

    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    if (const auto bad = unknown_subcommand(app, args)) {
        err << "litmine: error: unknown subcommand '" << *bad << "'\n";
        return 2;
    }
    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        std::string what = e.what();
        const std::string ini = "INI was not able to parse ";
        if (what.rfind(ini, 0) == 0) {
            what = "unknown config key " + what.substr(ini.size());
        }
        err << "litmine: error: " << one_line(what) << '\n';
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    auto* cmd = registry.selected();
    if (cmd == nullptr) {
        err << "litmine: error: a subcommand is required\n";
        return 2;
    }
    try {
        Run run(s.g, cmd->name, cmd->app);
        cmd->action(run);
        run.finish();
    } catch (const std::exception& e) {
        err << "litmine: error: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}

} // namespace litmine::cli
