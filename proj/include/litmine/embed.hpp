#ifndef LITMINE_EMBED_HPP
#define LITMINE_EMBED_HPP

#include "litmine/common.hpp"
#include "litmine/http.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace litmine::embed {

inline constexpr std::size_t kDefaultDim = 384;

/// n x d float matrix with one id per row. Vectors are stored exactly as
/// produced or imported (never normalised).
struct EmbeddingMatrix {
    std::vector<std::string> ids;
    DenseMatrix<float> vectors;

    std::size_t size() const noexcept { return vectors.rows(); }
    std::size_t dim() const noexcept { return vectors.cols(); }
    std::span<const float> row(std::size_t i) const noexcept { return vectors.row(i); }

    /// Checks id count, id uniqueness and finiteness; throws Error otherwise.
    void validate() const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

// EMB1: "EMB1" | u32 n | u32 d | n*d f32 | n * (u16 len | utf-8 id). Little endian.
void write_emb1(std::ostream& out, const EmbeddingMatrix& m);
void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_emb1(std::istream& in);
EmbeddingMatrix import_embeddings(const std::filesystem::path& path);

/// Feature-hashing embedding of preprocessed tokens: each token adds +-1 at a
/// seeded hash coordinate, then the vector is L2-normalised. Returns the zero
/// vector (and sets *zero) when the text has no tokens.
std::vector<float> fallback_vector(std::string_view text, std::size_t dim, std::uint64_t seed, bool* zero = nullptr);

struct FallbackResult {
    EmbeddingMatrix matrix;
    /// Rows whose text produced no tokens; their vectors are all zero.
    std::vector<std::size_t> zero_rows;
};

FallbackResult fallback_embed(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                              std::size_t dim, std::uint64_t seed);

struct RemoteConfig {
    std::string model;
    std::size_t batch_size = 32;
    /// Concurrent batch requests; output order is always the input order.
    std::size_t max_in_flight = 1;
    http::RetryPolicy retry = http::default_retry_policy();
};

struct RemoteStats {
    std::size_t requests = 0;
    std::size_t retries = 0;
    std::vector<std::string> log;
};

/// Embeds texts through an endpoint speaking `{model, input}` ->
/// `{data:[{index, embedding}]}`. Transports must tolerate concurrent calls
/// when max_in_flight > 1.
EmbeddingMatrix remote_embed(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                             http::Transport& transport, const RemoteConfig& config, RemoteStats* stats = nullptr);

/// Embeds free text one call at a time; used for queries.
class TextEmbedder {
  public:
    virtual ~TextEmbedder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<float> embed(const std::string& text) = 0;
};

class FallbackEmbedder final : public TextEmbedder {
  public:
    FallbackEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
    std::size_t dim() const override { return dim_; }
    std::vector<float> embed(const std::string& text) override { return fallback_vector(text, dim_, seed_); }

  private:
    std::size_t dim_;
    std::uint64_t seed_;
};

class RemoteEmbedder final : public TextEmbedder {
  public:
    RemoteEmbedder(http::Transport& transport, RemoteConfig config, std::size_t dim)
        : transport_(transport), config_(std::move(config)), dim_(dim) {}
    std::size_t dim() const override { return dim_; }
    std::vector<float> embed(const std::string& text) override;

  private:
    http::Transport& transport_;
    RemoteConfig config_;
    std::size_t dim_;
};

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws on a zero vector or a
/// dimension mismatch.
template <typename A, typename B>
double cosine(std::span<const A> u, std::span<const B> v) {
    if (u.size() != v.size()) {
        throw Error("cosine: dimension mismatch " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = static_cast<double>(u[i]);
        const double b = static_cast<double>(v[i]);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0) {
        throw Error("cosine: zero vector");
    }
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    return cosine(std::span<const double>(u), std::span<const double>(v));
}

} // namespace litmine::embed

#endif
