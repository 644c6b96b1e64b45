#ifndef LITMINE_FILTER_HPP
#define LITMINE_FILTER_HPP

#include "litmine/corpus.hpp"

#include <boost/regex.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace litmine::filter {

/// One line of a pattern spec file: `{label, regex, category}`.
struct PatternSpec {
    std::string label;
    std::string regex;
    std::string category;
};

struct PatternFlags {
    bool case_insensitive = true;
    /// Wrap every pattern in alphanumeric lookarounds.
    bool whole_word = false;
    /// `.` matches any character including line breaks.
    bool dot_matches_newline = true;
};

class PatternSet {
  public:
    struct Entry {
        std::string label;
        std::string source;
        std::string category;
        boost::regex regex;
    };

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const Entry& operator[](std::size_t i) const noexcept { return entries_[i]; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const PatternFlags& flags() const noexcept { return flags_; }

    /// Non-overlapping match count of entry `i` in `text`.
    std::size_t count(std::size_t i, std::string_view text) const;
    bool matches(std::size_t i, std::string_view text) const;

  private:
    friend PatternSet compile_patterns(const std::vector<PatternSpec>&, PatternFlags, bool);
    std::vector<Entry> entries_;
    PatternFlags flags_;
};

/// Compiles specs into a case-insensitive set. An empty spec list is an error
/// unless `allow_empty`. Duplicate labels and invalid sources are errors that
/// name the offending label.
PatternSet compile_patterns(const std::vector<PatternSpec>& specs, PatternFlags flags = {},
                            bool allow_empty = false);

std::vector<PatternSpec> read_pattern_file(const std::filesystem::path& path);

struct LabelHits {
    bool in_title = false;
    bool in_abstract = false;
    std::size_t title_count = 0;
    std::size_t abstract_count = 0;

    bool any() const noexcept { return in_title || in_abstract; }
};

/// Per-label hits, aligned with the PatternSet order.
using KeywordHits = std::vector<LabelHits>;

KeywordHits match_document(const corpus::Document& doc, const PatternSet& patterns);

struct FrequencyRow {
    std::string label;
    std::size_t abstract_docs = 0;
    std::size_t title_docs = 0;
    /// Documents matching in title OR abstract.
    std::size_t both_docs = 0;

    friend bool operator==(const FrequencyRow&, const FrequencyRow&) = default;
};

struct FrequencyTable {
    std::vector<FrequencyRow> rows;

    static FrequencyTable for_patterns(const PatternSet& patterns);
    void add(const KeywordHits& hits);
    void merge(const FrequencyTable& other);
    /// Column sums.
    FrequencyRow totals() const;

    /// CSV `label,abstract,title,both` followed by a SUM row.
    void write_csv(std::ostream& out) const;
    static FrequencyTable read_csv(std::istream& in);

    friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

struct FilterResult {
    corpus::DocumentList documents;
    FrequencyTable table;
    std::size_t matched = 0;
    std::size_t dropped_without_abstract = 0;
};

/// Keeps documents with at least one hit on any label (and a non-empty abstract
/// when `require_abstract`). The table counts every matching document, including
/// the ones later dropped for a missing abstract. `threads > 1` shards the
/// store; the result does not depend on the thread count.
FilterResult filter_corpus(const corpus::CorpusStore& store, const PatternSet& patterns, bool require_abstract,
                           unsigned threads = 1);

} // namespace litmine::filter

#endif
