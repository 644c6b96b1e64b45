#ifndef LITMINE_TOPICS_HPP
#define LITMINE_TOPICS_HPP

#include "litmine/chat.hpp"
#include "litmine/corpus.hpp"
#include "litmine/embed.hpp"
#include "litmine/reduce.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace litmine::topics {

inline constexpr int kNoise = -1;

using TermCounts = std::map<std::string, double>;
using ClassTerms = std::map<int, TermCounts>;
using ClassScores = std::map<int, std::map<std::string, double>>;

/// Total term count divided by the number of non-empty classes.
double average_class_size(const ClassTerms& counts);

/// score(t, c) = count(t, c) / |c| * log(1 + A / f(t)), f(t) the total count of
/// t over all classes. Empty classes are skipped and reported in `warnings`.
ClassScores ctfidf(const ClassTerms& counts, double avg_terms_per_class,
                   std::vector<std::string>* warnings = nullptr);

struct ScoredTerm {
    std::string term;
    double score;

    friend bool operator==(const ScoredTerm&, const ScoredTerm&) = default;
};

/// Scores sorted descending, ties broken lexicographically.
std::vector<ScoredTerm> top_terms(const std::map<std::string, double>& scores, std::size_t k);

struct Topic {
    int id = kNoise;
    std::size_t size = 0;
    std::vector<ScoredTerm> top_terms;
    std::vector<double> reduced_centroid;
    std::vector<double> embedding_centroid;
    std::optional<std::string> title;
    TermCounts term_counts;
};

struct MergeStep {
    int from;
    int into;
    double distance;
    std::size_t from_size;
    std::size_t into_size;
};

struct TopicModel {
    std::vector<std::string> doc_ids;
    std::vector<int> labels;
    std::map<int, Topic> topics;
    std::size_t top_k = 10;
    std::size_t max_ngram = 1;
    std::vector<MergeStep> history;

    std::size_t topic_count() const;
    const Topic& topic(int id) const;
};

struct BuildOptions {
    std::size_t top_k = 10;
    std::size_t max_ngram = 1;
};

/// Terms are preprocessed title + abstract tokens and, when max_ngram > 1,
/// space-joined n-grams up to that length.
TermCounts document_terms(const corpus::Document& doc, std::size_t max_ngram);

/// Inputs are aligned row by row; document ids must match the embedding ids.
TopicModel build_topics(const std::vector<int>& labels, const corpus::DocumentList& docs,
                        const embed::EmbeddingMatrix& embeddings, const reduce::Layout& layout,
                        const BuildOptions& options = {});

/// Recomputes every topic's c-TF-IDF top terms from its term counts.
void rescore(TopicModel& model, std::vector<std::string>* warnings = nullptr);

/// Repeatedly folds the smallest topic (lowest id on ties) into the topic with
/// the nearest reduced-space centroid. The surviving topic keeps its id.
TopicModel merge_topics(const TopicModel& model, std::size_t target_count);

struct TopicTrend {
    std::vector<int> topics;
    std::map<int, std::vector<std::size_t>> counts;

    /// CSV `year,topic,count`.
    void write_csv(std::ostream& out) const;
};

TopicTrend topic_trends(const TopicModel& model, const corpus::DocumentList& docs);

struct QueryMatch {
    std::string query;
    std::vector<std::pair<int, double>> ranking;
};

/// Cosine between the query vector and every non-noise topic's embedding
/// centroid, highest first (lower id on ties).
QueryMatch match_query(const TopicModel& model, const std::string& query, std::span<const float> query_vector);
QueryMatch match_query(const TopicModel& model, const std::string& query, embed::TextEmbedder& embedder);

/// CSV `query,rank,topic,similarity,title`.
void write_matches_csv(std::ostream& out, const std::vector<QueryMatch>& matches, const TopicModel& model,
                       std::size_t top_n);

struct HierarchyMerge {
    /// Node ids: 0..m-1 are topics in ascending id order, m+i is merge i.
    std::size_t left;
    std::size_t right;
    double height;
    std::size_t size;
    std::vector<int> left_topics;
    std::vector<int> right_topics;
};

struct TopicHierarchy {
    std::vector<int> leaves;
    std::vector<HierarchyMerge> merges;
};

/// Average-linkage agglomeration over 1 - cosine between embedding centroids.
TopicHierarchy topic_hierarchy(const TopicModel& model);

struct LabelOutcome {
    std::string title;
    bool fallback = false;
    std::size_t requests = 0;
};

std::string title_prompt(const std::vector<ScoredTerm>& terms);

/// Asks for a three-word title; one retry on a malformed answer, then the top
/// three terms joined.
LabelOutcome label_topic(const std::vector<ScoredTerm>& terms, chat::ChatTransport& transport,
                         const chat::AskPolicy& policy);

nlohmann::json to_json(const TopicModel& model);
TopicModel model_from_json(const nlohmann::json& j);
/// `[{id, size, title, top_terms:[{term, score}]}]`.
nlohmann::json topic_report(const TopicModel& model);
nlohmann::json hierarchy_json(const TopicHierarchy& h);

} // namespace litmine::topics

#endif
