#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace citytypo {

// Unit-normalized sentence embeddings for one document. Row i corresponds to
// sentence i of the source record.
struct EmbeddingMatrix {
    std::string city_id;
    std::string encoder_id;
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::uint64_t content_hash = 0;  // hash_lines() of the source sentences
    std::vector<float> values;       // row-major, little-endian f32 on disk

    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(values.data() + i * dim, dim);
    }
};

// A sentence encoder maps text to fixed-dimension vectors. Implementations:
// FixtureEncoder (deterministic, test/offline), RemoteEncoder (request/response
// protocol to a sidecar serving a real semantic-textual-similarity model).
class SentenceEncoder {
public:
    virtual ~SentenceEncoder() = default;
    virtual const std::string& encoder_id() const = 0;
    virtual std::size_t dim() const = 0;
    // Raw (not yet normalized) vectors, one per input sentence.
    virtual std::vector<std::vector<float>> encode(const std::vector<std::string>& sentences) = 0;
};

// Deterministic bag-of-tokens encoder: each token gets a pseudorandom vector
// derived from its hash, a sentence is the sum of its token vectors. Tokens
// may be pinned to explicit vectors via a table, which makes hand-assembled
// expectations possible in tests.
class FixtureEncoder : public SentenceEncoder {
public:
    FixtureEncoder(std::size_t dim, std::uint64_t seed);

    // Token table file: one line per token, "token v1 v2 ... vD".
    static FixtureEncoder from_table_file(const std::string& path);

    const std::string& encoder_id() const override { return encoder_id_; }
    std::size_t dim() const override { return dim_; }
    std::vector<std::vector<float>> encode(const std::vector<std::string>& sentences) override;

    void set_token_vector(const std::string& token, std::vector<float> vec);
    std::vector<float> token_vector(const std::string& token) const;

private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::string encoder_id_;
    std::unordered_map<std::string, std::vector<float>> table_;
};

// Encoder speaking the remote protocol: POST <base_url>/encode with a JSON
// body {"sentences": [...]} and a response {"vectors": [[...], ...]}.
class RemoteEncoder : public SentenceEncoder {
public:
    RemoteEncoder(std::string base_url, std::string encoder_id, std::size_t dim);

    const std::string& encoder_id() const override { return encoder_id_; }
    std::size_t dim() const override { return dim_; }
    std::vector<std::vector<float>> encode(const std::vector<std::string>& sentences) override;

private:
    std::string base_url_;
    std::string encoder_id_;
    std::size_t dim_;
};

// Encode + L2-normalize. Throws DataError on dimension mismatch against the
// encoder's declared dim and on zero vectors (which cannot be normalized).
EmbeddingMatrix embed_sentences(const std::vector<std::string>& sentences,
                                SentenceEncoder& encoder, const std::string& city_id);

// Single-sentence convenience; returns one unit-normalized row.
std::vector<float> embed_one(const std::string& sentence, SentenceEncoder& encoder);

// ---------------------------------------------------------------------------
// Embedding cache: one binary file per (city_id, encoder_id, content hash).
// Layout: "CTPEMB" magic, u16 version, u32 dim, u32 rows, u64 content hash,
// u32 encoder-id length, encoder id bytes, then rows*dim little-endian f32.

std::string embedding_cache_path(const std::string& cache_dir, const std::string& city_id,
                                 const std::string& encoder_id, std::uint64_t content_hash);
void write_embedding_cache(const std::string& cache_dir, const EmbeddingMatrix& matrix);
std::optional<EmbeddingMatrix> read_embedding_cache(const std::string& cache_dir,
                                                    const std::string& city_id,
                                                    const std::string& encoder_id,
                                                    std::uint64_t content_hash);

// Cache-first embedding: serve from cache when the (city, encoder, content)
// key is present, otherwise encode and populate the cache.
EmbeddingMatrix embed_cached(const std::vector<std::string>& sentences, SentenceEncoder& encoder,
                             const std::string& city_id, const std::string& cache_dir,
                             bool* cache_hit = nullptr);

// ---------------------------------------------------------------------------
// Similarity

// dot(u/|u|, v/|v|). Inputs need not be normalized. Throws std::domain_error
// on zero vectors, DataError on dimension mismatch.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(const std::vector<float>& u, const std::vector<float>& v);

// Dense M x K similarity matrix between unit-normalized document rows and
// unit-normalized key vectors; entry (i, k) is a plain dot product.
struct SimilarityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& doc,
                                   const std::vector<std::vector<float>>& keys);

// max over sentences of dot(row, key); key and rows must be unit-normalized.
double max_similarity(const EmbeddingMatrix& doc, std::span<const float> key);

}  // namespace citytypo
