#include "litmine/embed.hpp"

#include "litmine/textstats.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace litmine::embed {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const char bytes[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
    out.write(bytes, 2);
}

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw Error(std::string("EMB1 truncated while reading ") + what);
    }
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    read_exact(in, reinterpret_cast<char*>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t get_u16(std::istream& in, const char* what) {
    unsigned char b[2];
    read_exact(in, reinterpret_cast<char*>(b), 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

} // namespace

void EmbeddingMatrix::validate() const {
    if (ids.size() != vectors.rows()) {
        throw Error("embedding matrix has " + std::to_string(vectors.rows()) + " rows but " +
                    std::to_string(ids.size()) + " ids");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw Error("duplicate embedding id '" + id + "'");
        }
    }
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
        for (float x : vectors.row(i)) {
            if (!std::isfinite(x)) {
                throw Error("non-finite value in embedding row " + std::to_string(i));
            }
        }
    }
}

void write_emb1(std::ostream& out, const EmbeddingMatrix& m) {
    if (m.ids.size() != m.size()) {
        throw Error("cannot write EMB1: id count does not match row count");
    }
    out.write(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(m.size()));
    put_u32(out, static_cast<std::uint32_t>(m.dim()));
    for (float x : m.vectors.values()) {
        put_u32(out, std::bit_cast<std::uint32_t>(x));
    }
    for (const auto& id : m.ids) {
        if (id.size() > 0xFFFF) {
            throw Error("embedding id longer than 65535 bytes");
        }
        put_u16(out, static_cast<std::uint16_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    if (!out) {
        throw Error("I/O error writing EMB1");
    }
}

void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    write_emb1(out, m);
}

EmbeddingMatrix read_emb1(std::istream& in) {
    char magic[4];
    read_exact(in, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw Error("bad EMB1 magic");
    }
    const std::uint32_t n = get_u32(in, "row count");
    const std::uint32_t d = get_u32(in, "dimension");
    std::vector<float> data(static_cast<std::size_t>(n) * d);
    for (auto& x : data) {
        x = std::bit_cast<float>(get_u32(in, "vector payload"));
    }
    EmbeddingMatrix m;
    m.vectors = DenseMatrix<float>(n, d, std::move(data));
    m.ids.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint16_t len = 0;
        try {
            len = get_u16(in, "id length");
        } catch (const Error&) {
            throw Error("EMB1 id count mismatch: expected " + std::to_string(n) + " ids, found " + std::to_string(i));
        }
        std::string id(len, '\0');
        read_exact(in, id.data(), len, "id bytes");
        m.ids.push_back(std::move(id));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error("EMB1 id count mismatch: trailing bytes after " + std::to_string(n) + " ids");
    }
    m.validate();
    return m;
}

EmbeddingMatrix import_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    return read_emb1(in);
}

std::vector<float> fallback_vector(std::string_view text, std::size_t dim, std::uint64_t seed, bool* zero) {
    if (dim < 8) {
        throw Error("fallback embedding dimension must be at least 8");
    }
    static const textstats::PreprocessConfig config;
    std::vector<double> acc(dim, 0.0);
    const auto tokens = textstats::preprocess(text, config);
    for (const auto& token : tokens) {
        const std::uint64_t h = mix64(fnv1a64(token, seed));
        const std::size_t coord = static_cast<std::size_t>(h % dim);
        acc[coord] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm = 0.0;
    for (double x : acc) {
        norm += x * x;
    }
    std::vector<float> out(dim, 0.0f);
    if (zero) {
        *zero = norm == 0.0;
    }
    if (norm == 0.0) {
        return out;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim; ++i) {
        out[i] = static_cast<float>(acc[i] / norm);
    }
    return out;
}

FallbackResult fallback_embed(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                              std::size_t dim, std::uint64_t seed) {
    if (ids.size() != texts.size()) {
        throw Error("fallback_embed: ids and texts differ in length");
    }
    FallbackResult result;
    result.matrix.ids = ids;
    result.matrix.vectors = DenseMatrix<float>(texts.size(), dim);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        bool zero = false;
        const auto v = fallback_vector(texts[i], dim, seed, &zero);
        std::copy(v.begin(), v.end(), result.matrix.vectors.row(i).begin());
        if (zero) {
            result.zero_rows.push_back(i);
        }
    }
    return result;
}

namespace {

struct BatchOutcome {
    std::vector<std::vector<float>> vectors;
    http::RetryStats stats;
};

BatchOutcome embed_batch(std::span<const std::string> texts, http::Transport& transport, const RemoteConfig& config) {
    nlohmann::json request = {{"model", config.model}, {"input", nlohmann::json::array()}};
    for (const auto& t : texts) {
        request["input"].push_back(t);
    }
    const std::string body = request.dump();

    BatchOutcome outcome;
    const auto response = http::with_retries(
        [&] {
            auto r = transport.post_json(body);
            http::check_status(r);
            return r;
        },
        config.retry, outcome.stats);

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("embedding endpoint returned invalid JSON: ") + e.what());
    }
    outcome.vectors.resize(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (const auto& item : parsed.at("data")) {
        const auto index = item.at("index").get<std::size_t>();
        if (index >= texts.size() || filled[index]) {
            throw Error("embedding endpoint returned an invalid or repeated index " + std::to_string(index));
        }
        outcome.vectors[index] = item.at("embedding").get<std::vector<float>>();
        filled[index] = true;
    }
    for (std::size_t i = 0; i < filled.size(); ++i) {
        if (!filled[i]) {
            throw Error("embedding endpoint omitted index " + std::to_string(i));
        }
    }
    return outcome;
}

} // namespace

EmbeddingMatrix remote_embed(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                             http::Transport& transport, const RemoteConfig& config, RemoteStats* stats) {
    if (config.batch_size == 0) {
        throw Error("batch size must be at least 1");
    }
    if (ids.size() != texts.size()) {
        throw Error("remote_embed: ids and texts differ in length");
    }
    const std::size_t n = texts.size();
    const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
    const std::size_t in_flight = std::max<std::size_t>(1, config.max_in_flight);

    std::vector<BatchOutcome> outcomes(batches);
    auto run = [&](std::size_t b) {
        const std::size_t begin = b * config.batch_size;
        const std::size_t end = std::min(n, begin + config.batch_size);
        return embed_batch(std::span<const std::string>(texts).subspan(begin, end - begin), transport, config);
    };
    for (std::size_t wave = 0; wave < batches; wave += in_flight) {
        const std::size_t wave_end = std::min(batches, wave + in_flight);
        if (in_flight == 1) {
            outcomes[wave] = run(wave);
            continue;
        }
        std::vector<std::future<BatchOutcome>> futures;
        for (std::size_t b = wave; b < wave_end; ++b) {
            futures.push_back(std::async(std::launch::async, run, b));
        }
        for (std::size_t b = wave; b < wave_end; ++b) {
            outcomes[b] = futures[b - wave].get();
        }
    }

    std::size_t dim = 0;
    EmbeddingMatrix m;
    m.ids = ids;
    std::vector<float> data;
    for (std::size_t b = 0; b < batches; ++b) {
        for (auto& v : outcomes[b].vectors) {
            if (dim == 0) {
                dim = v.size();
            }
            if (v.size() != dim || dim == 0) {
                throw Error("embedding dimension mismatch across batches: " + std::to_string(v.size()) + " vs " +
                            std::to_string(dim));
            }
            data.insert(data.end(), v.begin(), v.end());
        }
        if (stats) {
            stats->requests += outcomes[b].stats.attempts;
            stats->retries += outcomes[b].stats.retries;
            stats->log.insert(stats->log.end(), outcomes[b].stats.log.begin(), outcomes[b].stats.log.end());
        }
    }
    m.vectors = DenseMatrix<float>(n, dim, std::move(data));
    m.validate();
    return m;
}

std::vector<float> RemoteEmbedder::embed(const std::string& text) {
    auto m = remote_embed({"query"}, {text}, transport_, config_);
    if (m.dim() != dim_) {
        throw Error("remote embedder returned dimension " + std::to_string(m.dim()) + ", expected " +
                    std::to_string(dim_));
    }
    auto row = m.row(0);
    return {row.begin(), row.end()};
}

} // namespace litmine::embed
