#include "litmine/topics.hpp"

#include "litmine/csv.hpp"
#include "litmine/textstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace litmine::topics {

double average_class_size(const ClassTerms& counts) {
    double total = 0.0;
    std::size_t classes = 0;
    for (const auto& [c, terms] : counts) {
        double size = 0.0;
        for (const auto& [t, v] : terms) {
            size += v;
        }
        if (size > 0.0) {
            total += size;
            ++classes;
        }
    }
    return classes == 0 ? 0.0 : total / static_cast<double>(classes);
}

ClassScores ctfidf(const ClassTerms& counts, double avg_terms_per_class, std::vector<std::string>* warnings) {
    std::map<std::string, double> frequency;
    std::map<int, double> class_size;
    for (const auto& [c, terms] : counts) {
        for (const auto& [t, v] : terms) {
            if (v < 0.0) {
                throw Error("negative count for term '" + t + "'");
            }
            frequency[t] += v;
            class_size[c] += v;
        }
    }
    ClassScores scores;
    for (const auto& [c, terms] : counts) {
        const double size = class_size[c];
        if (size <= 0.0) {
            if (warnings) {
                warnings->push_back("topic " + std::to_string(c) + " has no terms; c-TF-IDF skipped");
            }
            continue;
        }
        auto& out = scores[c];
        for (const auto& [t, v] : terms) {
            if (v > 0.0) {
                out[t] = (v / size) * std::log(1.0 + avg_terms_per_class / frequency[t]);
            }
        }
    }
    return scores;
}

std::vector<ScoredTerm> top_terms(const std::map<std::string, double>& scores, std::size_t k) {
    std::vector<ScoredTerm> all;
    all.reserve(scores.size());
    for (const auto& [t, s] : scores) {
        all.push_back({t, s});
    }
    std::stable_sort(all.begin(), all.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.term < b.term;
    });
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

std::size_t TopicModel::topic_count() const {
    return static_cast<std::size_t>(std::count_if(topics.begin(), topics.end(),
                                                  [](const auto& kv) { return kv.first != kNoise; }));
}

const Topic& TopicModel::topic(int id) const {
    auto it = topics.find(id);
    if (it == topics.end()) {
        throw Error("no topic " + std::to_string(id));
    }
    return it->second;
}

TermCounts document_terms(const corpus::Document& doc, std::size_t max_ngram) {
    static const textstats::PreprocessConfig config;
    const auto tokens = textstats::preprocess(textstats::document_text(doc), config);
    TermCounts out;
    for (std::size_t n = 1; n <= std::max<std::size_t>(1, max_ngram); ++n) {
        for (const auto& [gram, count] : textstats::ngrams(tokens, n)) {
            std::string term;
            for (const auto& part : gram) {
                if (!term.empty()) {
                    term += ' ';
                }
                term += part;
            }
            out[term] += static_cast<double>(count);
        }
    }
    return out;
}

void rescore(TopicModel& model, std::vector<std::string>* warnings) {
    ClassTerms counts;
    for (const auto& [id, topic] : model.topics) {
        counts[id] = topic.term_counts;
    }
    const auto scores = ctfidf(counts, average_class_size(counts), warnings);
    for (auto& [id, topic] : model.topics) {
        auto it = scores.find(id);
        topic.top_terms = it == scores.end() ? std::vector<ScoredTerm>{} : top_terms(it->second, model.top_k);
    }
}

TopicModel build_topics(const std::vector<int>& labels, const corpus::DocumentList& docs,
                        const embed::EmbeddingMatrix& embeddings, const reduce::Layout& layout,
                        const BuildOptions& options) {
    const std::size_t n = labels.size();
    if (docs.size() != n || embeddings.size() != n || layout.rows() != n) {
        throw Error("build_topics: labels (" + std::to_string(n) + "), documents (" + std::to_string(docs.size()) +
                    "), embeddings (" + std::to_string(embeddings.size()) + ") and layout (" +
                    std::to_string(layout.rows()) + ") are not aligned");
    }
    if (options.top_k == 0) {
        throw Error("top_k must be at least 1");
    }
    TopicModel model;
    model.top_k = options.top_k;
    model.max_ngram = std::max<std::size_t>(1, options.max_ngram);
    model.labels = labels;
    for (std::size_t i = 0; i < n; ++i) {
        if (docs[i].id != embeddings.ids[i]) {
            throw Error("build_topics: document " + docs[i].id + " is aligned with embedding " + embeddings.ids[i]);
        }
        if (labels[i] < kNoise) {
            throw Error("invalid label " + std::to_string(labels[i]));
        }
        model.doc_ids.push_back(docs[i].id);
        auto& topic = model.topics[labels[i]];
        if (topic.size == 0) {
            topic.id = labels[i];
            topic.reduced_centroid.assign(layout.cols(), 0.0);
            topic.embedding_centroid.assign(embeddings.dim(), 0.0);
        }
        ++topic.size;
        for (std::size_t c = 0; c < layout.cols(); ++c) {
            topic.reduced_centroid[c] += layout(i, c);
        }
        const auto row = embeddings.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) {
            topic.embedding_centroid[c] += static_cast<double>(row[c]);
        }
        for (const auto& [term, count] : document_terms(docs[i], model.max_ngram)) {
            topic.term_counts[term] += count;
        }
    }
    for (auto& [id, topic] : model.topics) {
        const double s = static_cast<double>(topic.size);
        for (double& v : topic.reduced_centroid) {
            v /= s;
        }
        for (double& v : topic.embedding_centroid) {
            v /= s;
        }
    }
    rescore(model);
    return model;
}

TopicModel merge_topics(const TopicModel& model, std::size_t target_count) {
    if (target_count < 1) {
        throw Error("target topic count must be at least 1");
    }
    const std::size_t current = model.topic_count();
    if (target_count > current) {
        throw Error("target topic count " + std::to_string(target_count) + " exceeds the " +
                    std::to_string(current) + " topics available");
    }
    TopicModel out = model;
    while (out.topic_count() > target_count) {
        const Topic* smallest = nullptr;
        for (const auto& [id, t] : out.topics) {
            if (id != kNoise && (smallest == nullptr || t.size < smallest->size)) {
                smallest = &t;
            }
        }
        const Topic* nearest = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [id, t] : out.topics) {
            if (id == kNoise || id == smallest->id) {
                continue;
            }
            const double d = std::sqrt(squared_euclidean(std::span<const double>(smallest->reduced_centroid),
                                                         std::span<const double>(t.reduced_centroid)));
            if (d < best) {
                best = d;
                nearest = &t;
            }
        }
        const int from = smallest->id;
        const int into = nearest->id;
        Topic source = out.topics.at(from);
        Topic& target = out.topics.at(into);
        out.history.push_back({from, into, best, source.size, target.size});
        const double ws = static_cast<double>(source.size);
        const double wt = static_cast<double>(target.size);
        const double total = ws + wt;
        for (std::size_t c = 0; c < target.reduced_centroid.size(); ++c) {
            target.reduced_centroid[c] = (wt * target.reduced_centroid[c] + ws * source.reduced_centroid[c]) / total;
        }
        for (std::size_t c = 0; c < target.embedding_centroid.size(); ++c) {
            target.embedding_centroid[c] =
                (wt * target.embedding_centroid[c] + ws * source.embedding_centroid[c]) / total;
        }
        for (const auto& [term, count] : source.term_counts) {
            target.term_counts[term] += count;
        }
        target.size += source.size;
        target.title.reset();
        out.topics.erase(from);
        for (int& l : out.labels) {
            if (l == from) {
                l = into;
            }
        }
    }
    rescore(out);
    return out;
}

void TopicTrend::write_csv(std::ostream& out) const {
    out << "year,topic,count\n";
    for (const auto& [year, row] : counts) {
        for (std::size_t t = 0; t < topics.size(); ++t) {
            out << year << ',' << topics[t] << ',' << row[t] << '\n';
        }
    }
}

TopicTrend topic_trends(const TopicModel& model, const corpus::DocumentList& docs) {
    if (docs.size() != model.labels.size()) {
        throw Error("topic_trends: " + std::to_string(docs.size()) + " documents for " +
                    std::to_string(model.labels.size()) + " labels");
    }
    TopicTrend trend;
    std::map<int, std::size_t> column;
    for (const auto& [id, topic] : model.topics) {
        column[id] = trend.topics.size();
        trend.topics.push_back(id);
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].id != model.doc_ids[i]) {
            throw Error("topic_trends: document " + docs[i].id + " is not aligned with model row " +
                        model.doc_ids[i]);
        }
        if (!docs[i].year) {
            continue;
        }
        auto& row = trend.counts[*docs[i].year];
        row.resize(trend.topics.size(), 0);
        ++row[column.at(model.labels[i])];
    }
    return trend;
}

namespace {

double centroid_cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return embed::cosine(a, b);
}

} // namespace

QueryMatch match_query(const TopicModel& model, const std::string& query, std::span<const float> query_vector) {
    std::vector<double> q(query_vector.begin(), query_vector.end());
    double norm = 0.0;
    for (double v : q) {
        norm += v * v;
    }
    if (norm == 0.0) {
        throw Error("query '" + query + "' embeds to the zero vector");
    }
    QueryMatch m;
    m.query = query;
    for (const auto& [id, topic] : model.topics) {
        if (id == kNoise) {
            continue;
        }
        if (topic.embedding_centroid.size() != q.size()) {
            throw Error("query dimension " + std::to_string(q.size()) + " does not match topic dimension " +
                        std::to_string(topic.embedding_centroid.size()));
        }
        m.ranking.emplace_back(id, centroid_cosine(q, topic.embedding_centroid));
    }
    std::stable_sort(m.ranking.begin(), m.ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    return m;
}

QueryMatch match_query(const TopicModel& model, const std::string& query, embed::TextEmbedder& embedder) {
    const auto v = embedder.embed(query);
    return match_query(model, query, std::span<const float>(v));
}

void write_matches_csv(std::ostream& out, const std::vector<QueryMatch>& matches, const TopicModel& model,
                       std::size_t top_n) {
    out << "query,rank,topic,similarity,title\n";
    for (const auto& m : matches) {
        for (std::size_t r = 0; r < std::min(top_n, m.ranking.size()); ++r) {
            const auto& [id, sim] = m.ranking[r];
            const auto& title = model.topic(id).title;
            out << csv::field(m.query) << ',' << (r + 1) << ',' << id << ',' << format_double(sim) << ','
                << csv::field(title.value_or("")) << '\n';
        }
    }
}

TopicHierarchy topic_hierarchy(const TopicModel& model) {
    TopicHierarchy h;
    std::vector<const Topic*> leaves;
    for (const auto& [id, topic] : model.topics) {
        if (id != kNoise) {
            h.leaves.push_back(id);
            leaves.push_back(&topic);
        }
    }
    const std::size_t m = leaves.size();
    if (m < 2) {
        throw Error("topic hierarchy needs at least two topics");
    }
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d = 1.0 - centroid_cosine(leaves[i]->embedding_centroid, leaves[j]->embedding_centroid);
            dist[i][j] = dist[j][i] = d;
        }
    }
    struct Node {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Node> active;
    for (std::size_t i = 0; i < m; ++i) {
        active.push_back({i, {i}});
    }
    auto linkage = [&](const Node& a, const Node& b) {
        double s = 0.0;
        for (std::size_t x : a.members) {
            for (std::size_t y : b.members) {
                s += dist[x][y];
            }
        }
        return s / static_cast<double>(a.members.size() * b.members.size());
    };
    auto topics_of = [&](const Node& n) {
        std::vector<int> ids;
        for (std::size_t x : n.members) {
            ids.push_back(h.leaves[x]);
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double d = linkage(active[i], active[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        Node merged{m + h.merges.size(), active[bi].members};
        merged.members.insert(merged.members.end(), active[bj].members.begin(), active[bj].members.end());
        h.merges.push_back({std::min(active[bi].id, active[bj].id), std::max(active[bi].id, active[bj].id), best,
                            merged.members.size(), topics_of(active[bi]), topics_of(active[bj])});
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active[bi] = std::move(merged);
    }
    return h;
}

std::string title_prompt(const std::vector<ScoredTerm>& terms) {
    std::ostringstream p;
    p << "The following terms, with their class-based TF-IDF scores, describe one topic found in a collection "
         "of research abstracts.\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, terms.size()); ++i) {
        p << "- " << terms[i].term << " (" << format_double(terms[i].score) << ")\n";
    }
    p << "Reply with a title for this topic consisting of exactly three words and nothing else.";
    return p.str();
}

namespace {

std::optional<std::string> three_words(const std::string& reply) {
    std::istringstream in(reply);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) {
        const auto first = w.find_first_not_of("\"'*.,;:!`");
        const auto last = w.find_last_not_of("\"'*.,;:!`");
        if (first == std::string::npos) {
            continue;
        }
        words.push_back(w.substr(first, last - first + 1));
    }
    if (words.size() != 3) {
        return std::nullopt;
    }
    return words[0] + " " + words[1] + " " + words[2];
}

} // namespace

LabelOutcome label_topic(const std::vector<ScoredTerm>& terms, chat::ChatTransport& transport,
                         const chat::AskPolicy& policy) {
    if (terms.empty()) {
        throw Error("cannot title a topic without terms");
    }
    const std::string prompt = title_prompt(terms);
    LabelOutcome out;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto r = chat::ask(transport, prompt, policy);
        ++out.requests;
        if (r.status != chat::AskStatus::ok) {
            throw Error("topic labelling failed: " + r.error);
        }
        if (auto title = three_words(r.response)) {
            out.title = *title;
            return out;
        }
    }
    out.fallback = true;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, terms.size()); ++i) {
        if (i > 0) {
            out.title += ' ';
        }
        out.title += terms[i].term;
    }
    return out;
}

nlohmann::json to_json(const TopicModel& model) {
    nlohmann::json topics = nlohmann::json::array();
    for (const auto& [id, t] : model.topics) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& s : t.top_terms) {
            terms.push_back({{"term", s.term}, {"score", s.score}});
        }
        topics.push_back({{"id", id},
                          {"size", t.size},
                          {"title", t.title ? nlohmann::json(*t.title) : nlohmann::json(nullptr)},
                          {"top_terms", terms},
                          {"reduced_centroid", t.reduced_centroid},
                          {"embedding_centroid", t.embedding_centroid},
                          {"term_counts", t.term_counts}});
    }
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : model.history) {
        history.push_back({{"from", h.from},
                           {"into", h.into},
                           {"distance", h.distance},
                           {"from_size", h.from_size},
                           {"into_size", h.into_size}});
    }
    return {{"top_k", model.top_k},  {"max_ngram", model.max_ngram}, {"doc_ids", model.doc_ids},
            {"labels", model.labels}, {"topics", topics},              {"history", history}};
}

TopicModel model_from_json(const nlohmann::json& j) {
    try {
        TopicModel m;
        m.top_k = j.at("top_k").get<std::size_t>();
        m.max_ngram = j.at("max_ngram").get<std::size_t>();
        m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
        m.labels = j.at("labels").get<std::vector<int>>();
        if (m.doc_ids.size() != m.labels.size()) {
            throw Error("topic model has " + std::to_string(m.doc_ids.size()) + " ids but " +
                        std::to_string(m.labels.size()) + " labels");
        }
        for (const auto& t : j.at("topics")) {
            Topic topic;
            topic.id = t.at("id").get<int>();
            topic.size = t.at("size").get<std::size_t>();
            if (!t.at("title").is_null()) {
                topic.title = t.at("title").get<std::string>();
            }
            for (const auto& s : t.at("top_terms")) {
                topic.top_terms.push_back({s.at("term").get<std::string>(), s.at("score").get<double>()});
            }
            topic.reduced_centroid = t.at("reduced_centroid").get<std::vector<double>>();
            topic.embedding_centroid = t.at("embedding_centroid").get<std::vector<double>>();
            topic.term_counts = t.at("term_counts").get<TermCounts>();
            m.topics[topic.id] = std::move(topic);
        }
        for (const auto& h : j.at("history")) {
            m.history.push_back({h.at("from").get<int>(), h.at("into").get<int>(), h.at("distance").get<double>(),
                                 h.at("from_size").get<std::size_t>(), h.at("into_size").get<std::size_t>()});
        }
        for (int l : m.labels) {
            if (!m.topics.count(l)) {
                throw Error("label " + std::to_string(l) + " has no topic entry");
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed topic model: ") + e.what());
    }
}

nlohmann::json topic_report(const TopicModel& model) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, t] : model.topics) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& s : t.top_terms) {
            terms.push_back({{"term", s.term}, {"score", s.score}});
        }
        out.push_back({{"id", id},
                       {"size", t.size},
                       {"title", t.title ? nlohmann::json(*t.title) : nlohmann::json(nullptr)},
                       {"top_terms", terms}});
    }
    return out;
}

nlohmann::json hierarchy_json(const TopicHierarchy& h) {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& m : h.merges) {
        merges.push_back({{"left", m.left},
                          {"right", m.right},
                          {"height", m.height},
                          {"size", m.size},
                          {"left_topics", m.left_topics},
                          {"right_topics", m.right_topics}});
    }
    return {{"leaves", h.leaves}, {"merges", merges}};
}

} // namespace litmine::topics
