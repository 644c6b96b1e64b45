#include "litmine/corpus.hpp"

#include <json.hpp>

#include <fstream>
#include <numeric>

namespace litmine::corpus {

using nlohmann::json;

namespace {

std::optional<std::string> optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw Error(std::string("field '") + key + "' must be a string or null");
    }
    return it->get<std::string>();
}

std::string required_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw Error(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read corpus file " + path.string());
    }
    return in;
}

} // namespace

Document parse_document(std::string_view line, unsigned fields) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw Error("record is not a JSON object");
    }

    Document doc;
    doc.id = required_string(obj, "id");
    if (doc.id.empty()) {
        throw Error("field 'id' must be non-empty");
    }
    // Title and abstract are validated even when the caller does not want them.
    std::string title = required_string(obj, "title");
    std::string abstract = obj.contains("abstract") && obj["abstract"].is_null()
                               ? std::string{}
                               : required_string(obj, "abstract");
    if (fields & kTitle) {
        doc.title = std::move(title);
    }
    if (fields & kAbstract) {
        doc.abstract = std::move(abstract);
    }
    if (fields & kBody) {
        doc.body = optional_string(obj, "body");
    }
    if (fields & kVenue) {
        doc.venue = optional_string(obj, "venue");
    }

    if (auto it = obj.find("year"); it != obj.end() && !it->is_null()) {
        if (!it->is_number_integer()) {
            throw Error("field 'year' must be an integer or null");
        }
        const auto year = it->get<long long>();
        if (year < kMinYear || year > kMaxYear) {
            throw Error("field 'year' out of range: " + std::to_string(year));
        }
        doc.year = static_cast<int>(year);
    }
    return doc;
}

std::string document_to_json(const Document& doc) {
    json obj = {
        {"id", doc.id},
        {"title", doc.title},
        {"abstract", doc.abstract},
        {"body", doc.body ? json(*doc.body) : json(nullptr)},
        {"year", doc.year ? json(*doc.year) : json(nullptr)},
        {"venue", doc.venue ? json(*doc.venue) : json(nullptr)},
    };
    return obj.dump();
}

CorpusStore load_corpus(const std::filesystem::path& path, Strictness strictness) {
    auto in = open_input(path);
    CorpusStore store;
    store.path_ = path;

    std::string line;
    std::uint64_t offset = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::uint64_t line_offset = offset;
        offset += line.size() + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        Document doc;
        try {
            doc = parse_document(line, 0);
        } catch (const Error& e) {
            if (strictness == Strictness::strict) {
                throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
            ++store.skipped_;
            continue;
        }
        if (!store.index_.emplace(doc.id, line_offset).second) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": duplicate id '" + doc.id + "'");
        }
        store.offsets_.push_back(line_offset);
    }
    if (in.bad()) {
        throw Error("I/O error while reading " + path.string());
    }
    return store;
}

std::optional<std::uint64_t> CorpusStore::offset_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void CorpusStore::for_each(unsigned fields, const std::function<void(std::size_t, const Document&)>& fn) const {
    for_range(0, offsets_.size(), fields, fn);
}

void CorpusStore::for_range(std::size_t begin, std::size_t end, unsigned fields,
                            const std::function<void(std::size_t, const Document&)>& fn) const {
    if (begin >= end) {
        return;
    }
    auto in = open_input(path_);
    std::string line;
    for (std::size_t i = begin; i < end; ++i) {
        // Consecutive valid records are usually adjacent; seek only after skipped lines.
        if (static_cast<std::uint64_t>(in.tellg()) != offsets_[i]) {
            in.seekg(static_cast<std::streamoff>(offsets_[i]));
        }
        if (!std::getline(in, line)) {
            throw Error("I/O failure reading record " + std::to_string(i) + " of " + path_.string());
        }
        Document doc;
        try {
            doc = parse_document(line, fields);
        } catch (const Error& e) {
            throw Error("record " + std::to_string(i) + " changed on disk: " + e.what());
        }
        fn(i, doc);
    }
}

DocumentList CorpusStore::documents(unsigned fields) const {
    DocumentList docs;
    docs.reserve(doc_count());
    for_each(fields, [&](std::size_t, const Document& d) { docs.push_back(d); });
    return docs;
}

DocumentList sample(const CorpusStore& store, std::size_t n, std::uint64_t seed) {
    const std::size_t total = store.doc_count();
    if (n > total) {
        throw Error("sample size " + std::to_string(n) + " exceeds corpus size " + std::to_string(total));
    }
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    // Partial Fisher-Yates: the first n slots are the sample.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(order[i], order[j]);
    }
    order.resize(n);

    std::vector<std::size_t> slot_of(total, n);
    for (std::size_t s = 0; s < n; ++s) {
        slot_of[order[s]] = s;
    }
    DocumentList picked(n);
    store.for_each(kAllFields, [&](std::size_t i, const Document& d) {
        if (slot_of[i] < n) {
            picked[slot_of[i]] = d;
        }
    });
    return picked;
}

void write_corpus(const std::filesystem::path& path, const DocumentList& docs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const auto& doc : docs) {
        out << document_to_json(doc) << '\n';
    }
    if (!out) {
        throw Error("I/O error while writing " + path.string());
    }
}

DocumentList read_documents(const std::filesystem::path& path) {
    return load_corpus(path, Strictness::strict).documents();
}

} // namespace litmine::corpus
