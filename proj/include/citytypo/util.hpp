#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citytypo {

// ---------------------------------------------------------------------------
// Hashing

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// Hash of a sentence list; used as the content key for embedding caches and
// artifact staleness checks. A length prefix per item keeps ["ab","c"] and
// ["a","bc"] distinct.
std::uint64_t hash_lines(const std::vector<std::string>& lines);

std::string to_hex(std::uint64_t value);

// ---------------------------------------------------------------------------
// Deterministic RNG. std::shuffle / std::uniform_int_distribution are not
// bit-specified across standard libraries, and several artifacts must be
// byte-reproducible, so shuffling and index draws are implemented explicitly
// on top of splitmix64.

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw from [0, n) via rejection sampling.
    std::uint64_t next_below(std::uint64_t n);

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

// ---------------------------------------------------------------------------
// Strings

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::vector<std::string> split_on(std::string_view s, char delim);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Lower-cased alphanumeric tokens ("San-Diego's" -> {"san","diego","s"}).
std::vector<std::string> tokenize(std::string_view s);

// Parse a numeral that may carry thousands separators ("8,804,190", "1 234.5").
// Returns nullopt when no usable number is present.
std::optional<double> parse_numeral(std::string_view s);

// Full-precision decimal formatting that round-trips doubles exactly.
std::string format_double(double v);

// Minimal CSV handling (RFC-4180ish, single-line records).
std::vector<std::string> parse_csv_record(std::string_view line);
std::string csv_field(std::string_view value);
std::string csv_row(const std::vector<std::string>& fields);

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);

// city_id -> safe filename fragment (non [A-Za-z0-9._-] replaced by '_').
std::string sanitize_key(std::string_view key);

}  // namespace citytypo
