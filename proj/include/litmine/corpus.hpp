#ifndef LITMINE_CORPUS_HPP
#define LITMINE_CORPUS_HPP

#include "litmine/common.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace litmine::corpus {

/// One paper record.
struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::optional<std::string> body;
    std::optional<int> year;
    std::optional<std::string> venue;

    /// Documents without an abstract stay in the store but are dropped by filtering.
    bool has_abstract() const noexcept { return !abstract.empty(); }

    friend bool operator==(const Document&, const Document&) = default;
};

using DocumentList = std::vector<Document>;

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

enum class Strictness { strict, skip_bad };

/// Optional fields to materialise during iteration. `id` and `year` are always read.
enum Field : unsigned {
    kTitle = 1u << 0,
    kAbstract = 1u << 1,
    kBody = 1u << 2,
    kVenue = 1u << 3,
    kAllFields = kTitle | kAbstract | kBody | kVenue,
};

/// Parses one JSONL record. Throws Error describing the first schema violation.
Document parse_document(std::string_view line, unsigned fields = kAllFields);

/// Serialises a document as a single JSON line (no trailing newline).
std::string document_to_json(const Document& doc);

/// Read-only index over a JSONL corpus file. Records are re-read from disk on
/// every iteration so memory stays proportional to the record count.
class CorpusStore {
  public:
    const std::filesystem::path& path() const noexcept { return path_; }
    std::size_t doc_count() const noexcept { return offsets_.size(); }
    std::size_t skipped() const noexcept { return skipped_; }

    /// Byte offset of the record with this id, if present.
    std::optional<std::uint64_t> offset_of(const std::string& id) const;

    /// Visits every document in insertion order. The callback receives the
    /// record index. Throws Error naming the record index on I/O failure.
    void for_each(unsigned fields, const std::function<void(std::size_t, const Document&)>& fn) const;

    /// Visits records [begin, end). Used to shard work across readers.
    void for_range(std::size_t begin, std::size_t end, unsigned fields,
                   const std::function<void(std::size_t, const Document&)>& fn) const;

    DocumentList documents(unsigned fields = kAllFields) const;

  private:
    friend CorpusStore load_corpus(const std::filesystem::path&, Strictness);

    std::filesystem::path path_;
    std::vector<std::uint64_t> offsets_;
    std::unordered_map<std::string, std::uint64_t> index_;
    std::size_t skipped_ = 0;
};

CorpusStore load_corpus(const std::filesystem::path& path, Strictness strictness = Strictness::strict);

/// n distinct documents drawn uniformly without replacement; a pure function
/// of (store contents, n, seed).
DocumentList sample(const CorpusStore& store, std::size_t n, std::uint64_t seed);

void write_corpus(const std::filesystem::path& path, const DocumentList& docs);

/// Reads a whole JSONL file into memory (strict).
DocumentList read_documents(const std::filesystem::path& path);

} // namespace litmine::corpus

#endif
