#ifndef LITMINE_TEXTSTATS_HPP
#define LITMINE_TEXTSTATS_HPP

#include "litmine/corpus.hpp"
#include "litmine/filter.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace litmine::textstats {

using TokenList = std::vector<std::string>;

/// Lowercases and splits on word boundaries. A word is a maximal run of
/// letters or digits; non-ASCII code points count as letters unless they are
/// punctuation or symbols from the Latin-1 and General Punctuation blocks.
TokenList tokenize(std::string_view text);

/// Maps a lowercase token to its normal form.
class Normalizer {
  public:
    virtual ~Normalizer() = default;
    virtual std::string normalize(std::string_view token) const = 0;
};

class IdentityNormalizer final : public Normalizer {
  public:
    std::string normalize(std::string_view token) const override { return std::string(token); }
};

/// Porter (1980) suffix-stripping stemmer, original algorithm.
class PorterStemmer final : public Normalizer {
  public:
    std::string normalize(std::string_view token) const override;
};

std::string porter_stem(std::string_view word);

/// Versioned English stopword list shipped with the library.
inline constexpr std::string_view kStopwordListVersion = "en-1";
const std::set<std::string, std::less<>>& english_stopwords();

struct PreprocessConfig {
    std::set<std::string, std::less<>> stopwords = english_stopwords();
    std::shared_ptr<const Normalizer> normalizer = std::make_shared<PorterStemmer>();
};

/// Tokenize, drop stopwords, normalize. The normalizer is applied until the
/// token stops changing and a token is dropped when either its raw or its
/// normalized form is a stopword, so re-running preprocess on joined output
/// reproduces the same tokens.
TokenList preprocess(std::string_view text, const PreprocessConfig& config);

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

/// Counts every contiguous window of n tokens.
NgramCounts ngrams(const TokenList& tokens, std::size_t n);
void accumulate_ngrams(NgramCounts& into, const TokenList& tokens, std::size_t n);

using YearCounts = std::map<int, std::size_t>;

/// 10000 * subset / universe per year (basis points). Years where both counts
/// are zero are reported as 0.
std::map<int, double> yearly_share(const YearCounts& subset, const YearCounts& universe);

/// Requires a category match to sit within `window` tokens of a cue word
/// (prefix match on lowercase tokens).
struct ContextRule {
    std::vector<std::string> cues;
    std::size_t window = 6;
};

struct Taxonomy {
    std::string name;
    /// Category labels in file order; patterns[i] holds one entry per category.
    filter::PatternSet patterns;
    std::optional<ContextRule> context;

    std::size_t size() const noexcept { return patterns.size(); }
    const std::string& category(std::size_t i) const { return patterns[i].label; }
};

/// Builds a taxonomy; several regexes for one category are OR-ed together.
Taxonomy make_taxonomy(std::string name, const std::vector<std::pair<std::string, std::string>>& category_regexes,
                       std::optional<ContextRule> context = std::nullopt);

/// Reads `{taxonomy, category, regex}` JSONL (optional `context_cues`,
/// `context_window` on any line of a taxonomy). Taxonomies keep file order.
std::vector<Taxonomy> read_taxonomy_file(const std::filesystem::path& path);

/// True when category `i` of the taxonomy fires on `text` (honouring the context rule).
bool category_matches(const Taxonomy& taxonomy, std::size_t i, std::string_view text);

struct TrendSeries {
    std::vector<std::string> categories;
    /// year -> per-category document counts (aligned with `categories`).
    std::map<int, std::vector<std::size_t>> counts;
    /// year -> documents with a year (whether or not they matched).
    YearCounts year_totals;

    std::size_t total(std::size_t category) const;
    /// CSV `year,category,count`, years ascending, categories in taxonomy order.
    void write_csv(std::ostream& out) const;
};

/// Multi-label per-year document counts over title + abstract. Documents
/// without a year are skipped.
TrendSeries taxonomy_trends(const corpus::DocumentList& docs, const Taxonomy& taxonomy);

struct GazetteerEntry {
    std::string entity;
    std::vector<std::string> aliases;
};

std::vector<GazetteerEntry> read_gazetteer_file(const std::filesystem::path& path);

/// Entity -> number of documents whose title or abstract contains an alias
/// (case-insensitive, bounded by non-alphanumerics). Output keeps gazetteer order.
std::vector<std::pair<std::string, std::size_t>> gazetteer_entities(const corpus::DocumentList& docs,
                                                                    const std::vector<GazetteerEntry>& gazetteer);

/// Title + " " + abstract, the text unit used for statistics and embeddings.
std::string document_text(const corpus::Document& doc);

} // namespace litmine::textstats

#endif
