#include "citytypo/embedding.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "citytypo/errors.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

std::vector<float> hashed_token_vector(std::string_view token, std::uint64_t seed,
                                       std::size_t dim) {
    SplitMix64 rng(fnv1a64(token) ^ seed);
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        v[i] = static_cast<float>(rng.next_double() * 2.0 - 1.0);
    }
    return v;
}

void normalize_row(float* row, std::size_t dim, const std::string& context) {
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) norm_sq += static_cast<double>(row[i]) * row[i];
    if (norm_sq <= 0.0) {
        throw DataError("zero embedding cannot be normalized (" + context + ")");
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t i = 0; i < dim; ++i) row[i] = static_cast<float>(row[i] * inv);
}

void append_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}
    std::uint16_t u16() { return static_cast<std::uint16_t>(u(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
    std::uint64_t u64() { return u(8); }
    std::string_view bytes(std::size_t n) {
        need(n);
        std::string_view out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::uint64_t u(std::size_t n) {
        need(n);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += n;
        return v;
    }
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw DataError("embedding cache file truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

constexpr char kCacheMagic[6] = {'C', 'T', 'P', 'E', 'M', 'B'};
constexpr std::uint16_t kCacheVersion = 1;

}  // namespace

FixtureEncoder::FixtureEncoder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    encoder_id_ = "fixture-d" + std::to_string(dim) + "-s" + to_hex(seed);
}

FixtureEncoder FixtureEncoder::from_table_file(const std::string& path) {
    std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<float>> table;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string token;
        row >> token;
        std::vector<float> vec;
        double v;
        while (row >> v) vec.push_back(static_cast<float>(v));
        if (vec.empty()) throw ConfigError("token table row without values: " + token);
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim) throw ConfigError("token table has inconsistent dimensions");
        table[token] = std::move(vec);
    }
    if (dim == 0) throw ConfigError("empty token table: " + path);
    FixtureEncoder enc(dim, fnv1a64(content));
    enc.encoder_id_ = "fixture-table-" + to_hex(fnv1a64(content));
    enc.table_ = std::move(table);
    return enc;
}

void FixtureEncoder::set_token_vector(const std::string& token, std::vector<float> vec) {
    if (vec.size() != dim_) throw ConfigError("token vector dimension mismatch");
    table_[token] = std::move(vec);
}

std::vector<float> FixtureEncoder::token_vector(const std::string& token) const {
    auto it = table_.find(token);
    if (it != table_.end()) return it->second;
    return hashed_token_vector(token, seed_, dim_);
}

std::vector<std::vector<float>> FixtureEncoder::encode(const std::vector<std::string>& sentences) {
    std::vector<std::vector<float>> out;
    out.reserve(sentences.size());
    for (const auto& sentence : sentences) {
        std::vector<float> acc(dim_, 0.0f);
        auto tokens = tokenize(sentence);
        if (tokens.empty()) {
            // degenerate sentence: hash the raw bytes so the vector is nonzero
            acc = hashed_token_vector(sentence, seed_ ^ 0x517cc1b727220a95ULL, dim_);
        } else {
            for (const auto& token : tokens) {
                auto tv = token_vector(token);
                for (std::size_t i = 0; i < dim_; ++i) acc[i] += tv[i];
            }
        }
        out.push_back(std::move(acc));
    }
    return out;
}

RemoteEncoder::RemoteEncoder(std::string base_url, std::string encoder_id, std::size_t dim)
    : base_url_(std::move(base_url)), encoder_id_(std::move(encoder_id)), dim_(dim) {}

std::vector<std::vector<float>> RemoteEncoder::encode(const std::vector<std::string>& sentences) {
    nlohmann::json request;
    request["sentences"] = sentences;

    httplib::Client client(base_url_);
    client.set_read_timeout(300, 0);
    auto res = client.Post("/encode", request.dump(), "application/json");
    if (!res) {
        throw FetchError("encoder unreachable at " + base_url_, /*retriable=*/true);
    }
    if (res->status != 200) {
        throw FetchError("encoder returned HTTP " + std::to_string(res->status),
                         /*retriable=*/res->status >= 500);
    }
    nlohmann::json response = nlohmann::json::parse(res->body);
    const auto& vectors = response.at("vectors");
    if (vectors.size() != sentences.size()) {
        throw DataError("encoder returned " + std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(sentences.size()) + " sentences");
    }
    std::vector<std::vector<float>> out;
    out.reserve(vectors.size());
    for (const auto& vec : vectors) {
        std::vector<float> row;
        row.reserve(vec.size());
        for (const auto& x : vec) row.push_back(x.get<float>());
        if (row.size() != dim_) {
            throw DataError("encoder vector dimension " + std::to_string(row.size()) +
                            " does not match declared " + std::to_string(dim_));
        }
        out.push_back(std::move(row));
    }
    return out;
}

EmbeddingMatrix embed_sentences(const std::vector<std::string>& sentences,
                                SentenceEncoder& encoder, const std::string& city_id) {
    EmbeddingMatrix m;
    m.city_id = city_id;
    m.encoder_id = encoder.encoder_id();
    m.dim = encoder.dim();
    m.rows = sentences.size();
    m.content_hash = hash_lines(sentences);
    m.values.resize(m.rows * m.dim);

    auto raw = encoder.encode(sentences);
    if (raw.size() != sentences.size()) {
        throw DataError("encoder returned wrong number of vectors");
    }
    for (std::size_t r = 0; r < raw.size(); ++r) {
        if (raw[r].size() != m.dim) {
            throw DataError("embedding dimension mismatch for '" + city_id + "': got " +
                            std::to_string(raw[r].size()) + ", declared " + std::to_string(m.dim));
        }
        std::memcpy(m.values.data() + r * m.dim, raw[r].data(), m.dim * sizeof(float));
        normalize_row(m.values.data() + r * m.dim, m.dim,
                      city_id + " sentence " + std::to_string(r));
    }
    return m;
}

std::vector<float> embed_one(const std::string& sentence, SentenceEncoder& encoder) {
    auto m = embed_sentences({sentence}, encoder, "");
    return std::vector<float>(m.values.begin(), m.values.end());
}

std::string embedding_cache_path(const std::string& cache_dir, const std::string& city_id,
                                 const std::string& encoder_id, std::uint64_t content_hash) {
    return cache_dir + "/" + sanitize_key(city_id) + "-" + to_hex(fnv1a64(encoder_id)) + "-" +
           to_hex(content_hash) + ".emb";
}

void write_embedding_cache(const std::string& cache_dir, const EmbeddingMatrix& matrix) {
    std::string out;
    out.reserve(32 + matrix.encoder_id.size() + matrix.values.size() * 4);
    out.append(kCacheMagic, sizeof(kCacheMagic));
    append_u16(out, kCacheVersion);
    append_u32(out, static_cast<std::uint32_t>(matrix.dim));
    append_u32(out, static_cast<std::uint32_t>(matrix.rows));
    append_u64(out, matrix.content_hash);
    append_u32(out, static_cast<std::uint32_t>(matrix.encoder_id.size()));
    out.append(matrix.encoder_id);
    for (float v : matrix.values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        append_u32(out, bits);
    }
    write_file(embedding_cache_path(cache_dir, matrix.city_id, matrix.encoder_id,
                                    matrix.content_hash),
               out);
}

std::optional<EmbeddingMatrix> read_embedding_cache(const std::string& cache_dir,
                                                    const std::string& city_id,
                                                    const std::string& encoder_id,
                                                    std::uint64_t content_hash) {
    std::string path = embedding_cache_path(cache_dir, city_id, encoder_id, content_hash);
    if (!file_exists(path)) return std::nullopt;
    std::string data = read_file(path);
    ByteReader reader(data);
    if (reader.bytes(6) != std::string_view(kCacheMagic, 6)) {
        throw DataError("bad magic in embedding cache file " + path);
    }
    if (reader.u16() != kCacheVersion) {
        throw DataError("unsupported embedding cache version in " + path);
    }
    EmbeddingMatrix m;
    m.city_id = city_id;
    m.dim = reader.u32();
    m.rows = reader.u32();
    m.content_hash = reader.u64();
    auto id_len = reader.u32();
    m.encoder_id = std::string(reader.bytes(id_len));
    if (m.encoder_id != encoder_id || m.content_hash != content_hash) {
        throw DataError("embedding cache key mismatch in " + path);
    }
    std::size_t count = m.rows * m.dim;
    if (reader.remaining() != count * 4) {
        throw DataError("embedding cache payload size mismatch in " + path);
    }
    m.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = reader.u32();
        float v;
        std::memcpy(&v, &bits, 4);
        m.values[i] = v;
    }
    return m;
}

EmbeddingMatrix embed_cached(const std::vector<std::string>& sentences, SentenceEncoder& encoder,
                             const std::string& city_id, const std::string& cache_dir,
                             bool* cache_hit) {
    std::uint64_t content_hash = hash_lines(sentences);
    if (auto cached = read_embedding_cache(cache_dir, city_id, encoder.encoder_id(), content_hash)) {
        if (cached->dim != encoder.dim()) {
            throw DataError("cached embedding dim " + std::to_string(cached->dim) +
                            " does not match encoder dim " + std::to_string(encoder.dim()) +
                            " for '" + city_id + "'");
        }
        if (cache_hit) *cache_hit = true;
        return *cached;
    }
    if (cache_hit) *cache_hit = false;
    EmbeddingMatrix m = embed_sentences(sentences, encoder, city_id);
    write_embedding_cache(cache_dir, m);
    return m;
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw DataError("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double a = u[i];
        double b = v[i];
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu <= 0.0 || nv <= 0.0) {
        throw std::domain_error("cosine_similarity: zero vector");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

double cosine_similarity(const std::vector<float>& u, const std::vector<float>& v) {
    return cosine_similarity(std::span<const float>(u), std::span<const float>(v));
}

namespace {

double vector_norm(const float* v, std::size_t dim, const char* context) {
    double n = 0.0;
    for (std::size_t i = 0; i < dim; ++i) n += static_cast<double>(v[i]) * v[i];
    if (n <= 0.0) throw std::domain_error(std::string(context) + ": zero vector");
    return std::sqrt(n);
}

}  // namespace

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& doc,
                                   const std::vector<std::vector<float>>& keys) {
    SimilarityMatrix out;
    out.rows = doc.rows;
    out.cols = keys.size();
    out.values.resize(out.rows * out.cols);
    // entries are exact cosines; on pre-normalized inputs the norm factors
    // are a numerical no-op, keeping the matrix path equal to pairwise
    // cosine_similarity calls
    std::vector<double> key_norms(keys.size());
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (keys[k].size() != doc.dim) throw DataError("similarity_matrix: dimension mismatch");
        key_norms[k] = vector_norm(keys[k].data(), doc.dim, "similarity_matrix key");
    }
    for (std::size_t r = 0; r < out.rows; ++r) {
        const float* row = doc.values.data() + r * doc.dim;
        double row_norm = vector_norm(row, doc.dim, "similarity_matrix row");
        for (std::size_t k = 0; k < out.cols; ++k) {
            const float* key = keys[k].data();
            double dot = 0.0;
            for (std::size_t i = 0; i < doc.dim; ++i) {
                dot += static_cast<double>(row[i]) * key[i];
            }
            out.values[r * out.cols + k] = dot / (row_norm * key_norms[k]);
        }
    }
    return out;
}

double max_similarity(const EmbeddingMatrix& doc, std::span<const float> key) {
    if (doc.rows == 0) throw std::domain_error("max_similarity: document has no sentences");
    if (key.size() != doc.dim) throw DataError("max_similarity: dimension mismatch");
    double key_norm = vector_norm(key.data(), doc.dim, "max_similarity key");
    double best = -2.0;
    for (std::size_t r = 0; r < doc.rows; ++r) {
        const float* row = doc.values.data() + r * doc.dim;
        double dot = 0.0;
        for (std::size_t i = 0; i < doc.dim; ++i) dot += static_cast<double>(row[i]) * key[i];
        dot /= vector_norm(row, doc.dim, "max_similarity row") * key_norm;
        if (dot > best) best = dot;
    }
    return best;
}

}  // namespace citytypo
