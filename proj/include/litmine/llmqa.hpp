#ifndef LITMINE_LLMQA_HPP
#define LITMINE_LLMQA_HPP

#include "litmine/chat.hpp"
#include "litmine/corpus.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace litmine::llmqa {

/// yes_no questions carry a verdict and an elaboration; free_text questions
/// additionally carry a short answer value (e.g. "Daily").
enum class AnswerKind { yes_no, free_text };

struct Question {
    std::string key;
    std::string text;
    AnswerKind kind = AnswerKind::yes_no;
};

struct QuestionSet {
    std::vector<Question> questions;

    /// Throws on an empty set or duplicate keys.
    void validate() const;
    std::size_t size() const noexcept { return questions.size(); }
    /// Position of a key; throws when absent.
    std::size_t index_of(const std::string& key) const;
};

/// The five per-document questions, in publication order.
QuestionSet default_questions();

enum class Scope { abstract, fulltext };
Scope parse_scope(const std::string& name);
std::string scope_name(Scope scope);

enum class Verdict { yes, no, not_applicable, failed };
std::string verdict_name(Verdict verdict);
Verdict parse_verdict_name(const std::string& name);

struct Answer {
    Verdict verdict = Verdict::failed;
    std::string value;
    std::string elaboration;

    friend bool operator==(const Answer&, const Answer&) = default;
};

struct AnswerRecord {
    std::string doc_id;
    /// Keyed by question key; every key of the question set is present.
    std::map<std::string, Answer> answers;
    std::string model;
    Scope scope = Scope::abstract;
    std::optional<std::string> timestamp;
    bool attention_check_passed = false;
    std::string task_summary;
    /// Invariant breaches found while parsing (kept, never repaired).
    std::vector<std::string> violations;

    const Answer& answer(const std::string& key) const;

    friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

nlohmann::json to_json(const AnswerRecord& record);
AnswerRecord record_from_json(const nlohmann::json& j);
void write_records(const std::filesystem::path& path, const std::vector<AnswerRecord>& records);
std::vector<AnswerRecord> read_records(const std::filesystem::path& path);

/// The text a scope covers: title + abstract, or title + abstract + body.
/// Throws when fulltext is requested for a document without a body.
std::string scoped_text(const corpus::Document& doc, Scope scope);

/// One document per prompt, with the rigid answer block and the
/// attention-check line the parser expects.
std::string build_prompt(const corpus::Document& doc, Scope scope, const QuestionSet& questions);

/// Reads the BEGIN_ANSWERS ... END_ANSWERS block. Questions without a usable
/// verdict line are marked failed. Throws when no block is present.
AnswerRecord parse_answer(const std::string& raw, const QuestionSet& questions);

/// The published keyword baseline: five case-insensitive pattern groups,
/// elaborations built exactly as the original script builds them.
AnswerRecord regex_baseline(const corpus::Document& doc, Scope scope);
AnswerRecord regex_baseline_text(const std::string& text);

struct RunOptions {
    Scope scope = Scope::abstract;
    /// Documents whose scoped text exceeds this many characters are excluded.
    std::size_t max_text_chars = 120000;
    std::size_t max_in_flight = 1;
    std::optional<std::string> timestamp;
    chat::AskPolicy policy;
};

struct RequestLogEntry {
    std::string doc_id;
    std::string status;
    std::string prompt_hash;
    std::size_t prompt_chars = 0;
    std::size_t attempts = 0;
    std::size_t retries = 0;
    std::vector<std::string> retry_log;
    std::string response;
    std::string error;
};

nlohmann::json to_json(const RequestLogEntry& entry);

struct RunResult {
    /// Records for every document that was sent, in input order. Transport
    /// failures appear with every answer marked failed.
    std::vector<AnswerRecord> records;
    std::vector<RequestLogEntry> log;
    std::vector<std::string> too_large;
    std::vector<std::string> failed;
    std::vector<std::string> unparsed;
};

RunResult run_questions(const corpus::DocumentList& docs, const QuestionSet& questions,
                        chat::ChatTransport& transport, const RunOptions& options);

/// Counts on (outer yes/no) x (inner yes/no) for two answer sets. Index 0 is
/// "no", 1 is "yes"; any verdict other than yes counts as no.
struct ConfusionMatrix {
    std::string outer_key;
    std::string inner_key;
    std::string name_a;
    std::string name_b;
    std::size_t a[2][2]{};
    std::size_t b[2][2]{};

    std::size_t total_a() const noexcept;
    std::size_t total_b() const noexcept;
    long long difference(int outer, int inner) const noexcept;
    long long total_difference() const noexcept { return static_cast<long long>(total_a()) - static_cast<long long>(total_b()); }

    /// CSV `group,category,<A>,<B>,difference`, four cells then a Total Sum row.
    void write_csv(std::ostream& out) const;
};

ConfusionMatrix compare_answers(const std::vector<AnswerRecord>& set_a, const std::vector<AnswerRecord>& set_b,
                                const std::string& outer_key = "hyperparameter_optimization",
                                const std::string& inner_key = "comparison", std::string name_a = "A",
                                std::string name_b = "B");

/// Ordered label -> alias lists; lookup is on normalised strings.
class AliasTable {
  public:
    AliasTable(std::vector<std::pair<std::string, std::vector<std::string>>> groups, std::string fallback);

    /// `{"groups": [{"label", "aliases": [...]}], "fallback": label}`.
    static AliasTable from_json(const nlohmann::json& j);
    static AliasTable read_file(const std::filesystem::path& path);
    nlohmann::json json() const;

    /// Label for `text`, or the fallback when no alias matches.
    std::string lookup(const std::string& text, bool* matched = nullptr) const;
    const std::string& fallback() const noexcept { return fallback_; }
    std::vector<std::string> labels() const;
    const std::vector<std::pair<std::string, std::vector<std::string>>>& groups() const noexcept { return groups_; }

  private:
    std::vector<std::pair<std::string, std::vector<std::string>>> groups_;
    std::string fallback_;
    std::map<std::string, std::size_t> index_;
};

/// Lowercase, trimmed, inner whitespace collapsed, trailing full stop removed.
std::string normalize_alias(const std::string& text);

/// Time-horizon bins for the unique frequency answers (Intraday, Daily,
/// Longer; NotSpecified otherwise).
const AliasTable& default_frequency_bins();
/// Loss-function groups (Other/Unspecified otherwise).
const AliasTable& default_loss_groups();

std::string bin_frequency(const std::string& answer, const AliasTable& bins = default_frequency_bins(),
                          std::vector<std::string>* warnings = nullptr);
std::string group_loss(const std::string& answer, const AliasTable& groups = default_loss_groups(),
                       std::vector<std::string>* warnings = nullptr);

/// label -> count in table order (zero rows included), for the free-text
/// value of `key` in every record (falls back to the elaboration when the
/// value is empty).
std::vector<std::pair<std::string, std::size_t>> tally(const std::vector<AnswerRecord>& records,
                                                       const std::string& key, const AliasTable& table,
                                                       std::vector<std::string>* warnings = nullptr);

/// Best-model category headings; "Others" covers answers where no best model applies.
const std::vector<std::string>& default_model_categories();
inline constexpr const char* kUnclassified = "unclassified";

std::string category_prompt(const Answer& best_model, const std::vector<std::string>& categories);

struct Categorization {
    std::string doc_id;
    std::string category;
    /// "classified", "not_applicable" (no request sent) or "unclassified".
    std::string status;
    std::string detail;
};

struct CategoryTally {
    std::vector<Categorization> records;
    /// Categories in list order, then unclassified; zero rows included.
    std::vector<std::pair<std::string, std::size_t>> counts;
    std::size_t requests = 0;
};

/// One request per record. Records whose best-model verdict is not yes go to
/// "Others" without a request; transport failures and replies naming no
/// category are kept as unclassified.
CategoryTally categorize_models(const std::vector<AnswerRecord>& records, chat::ChatTransport& transport,
                                const chat::AskPolicy& policy,
                                const std::vector<std::string>& categories = default_model_categories(),
                                const std::string& key = "best_model");

/// CSV `label,count`.
void write_counts_csv(std::ostream& out, const std::vector<std::pair<std::string, std::size_t>>& counts);

} // namespace litmine::llmqa

#endif
