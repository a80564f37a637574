#pragma once

#include "d1lc/bits.hpp"
#include "d1lc/rng.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace d1lc {

enum class HashBackend : std::uint8_t { Idealized = 0, PairwiseIndep = 1 };

const char* to_string(HashBackend b);

// A sampled hash function into [1, T]. Idealized specs are a keyed pseudorandom
// function of a 64-bit seed; PairwiseIndep specs are ((a*x + b) mod p) mod T + 1
// with p the smallest prime >= max(2^domain_bits, T * 2^10).
class HashSpec {
public:
    HashBackend backend = HashBackend::Idealized;
    int domain_bits = 1;
    std::uint64_t out_size = 1;
    std::uint64_t seed = 0;
    std::uint64_t a = 1, b = 0, p = 2;

    std::uint64_t operator()(std::uint64_t x) const {
        return backend == HashBackend::Idealized ? eval_prf(x) : eval_affine(x);
    }

    // Wire format: 2-bit tag, 8-bit domain_bits, 32-bit T (0 escapes to a 64-bit T),
    // then the 64-bit seed or the two field elements a, b on ceil(log2 p) bits each.
    BitString serialize() const;
    static HashSpec deserialize(const BitString& bits);
    static HashSpec read(BitReader& r);
    std::size_t serialized_bits() const;

    bool operator==(const HashSpec& o) const;

private:
    std::uint64_t eval_prf(std::uint64_t x) const {
        std::uint64_t z = (x ^ k1_) * 0xff51afd7ed558ccdULL;
        z = (z ^ (z >> 33) ^ k2_) * 0xc4ceb9fe1a85ec53ULL;
        z ^= z >> 29;
        z *= 0x9e3779b97f4a7c15ULL;
        z ^= z >> 32;
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(z) * out_size) >> 64) + 1;
    }
    std::uint64_t eval_affine(std::uint64_t x) const {
        unsigned __int128 v = static_cast<unsigned __int128>(a) * (x % p) + b;
        return static_cast<std::uint64_t>(v % p) % out_size + 1;
    }

    void finalize();
    std::uint64_t k1_ = 0, k2_ = 0;

    friend HashSpec make_hash(HashBackend, int, std::uint64_t, std::uint64_t);
};

inline constexpr std::uint64_t kMaxHashRange = std::uint64_t{1} << 53;
inline constexpr int kMaxDomainBits = 62;

bool is_prime(std::uint64_t x);
std::uint64_t next_prime(std::uint64_t x);
// Field modulus used by a PairwiseIndep spec with the given domain and range.
std::uint64_t pairwise_modulus(int domain_bits, std::uint64_t T);

HashSpec make_hash(HashBackend backend, int universe_bits, std::uint64_t T, std::uint64_t seed);

// Number of elements of S that share their hash value with another element of S.
std::size_t colliding_elements(const HashSpec& h, std::span<const std::uint64_t> S);

// Rejection-samples PairwiseIndep specs until at most `budget` elements of S collide.
HashSpec choose_low_collision_hash(int universe_bits, std::uint64_t T, std::span<const std::uint64_t> S,
                                   std::size_t budget, Rng& rng, int retry_cap = 64);

struct SamplerMultiset {
    std::uint64_t out_size = 1;
    std::size_t size = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> elements;
};

// t seed-expanded draws in [1, T]; reproducible from (T, t, seed) alone.
SamplerMultiset sample_multiset(std::uint64_t T, std::size_t t, std::uint64_t seed);

// Rate-1/3 binary linear code with a generator drawn from a public seed.
class EccCode {
public:
    using Word = std::array<std::uint64_t, 3>;

    static constexpr std::uint64_t kPublicSeed = 0x3c6ef372fe94f82bULL;
    static EccCode make(int msg_bits, std::uint64_t public_seed = kPublicSeed);

    int msg_bits() const { return b_; }
    int code_bits() const { return 3 * b_; }
    // Minimum codeword weight; measured exhaustively for b <= 16, -1 otherwise.
    int min_distance() const { return min_distance_; }
    int resamples() const { return resamples_; }
    const std::vector<Word>& generator() const { return rows_; }

    Word encode_word(std::uint64_t msg) const;
    BitString encode(const BitString& id) const;

private:
    int b_ = 0;
    int min_distance_ = -1;
    int resamples_ = 0;
    std::vector<Word> rows_;
};

BitString ecc_encode(const EccCode& code, const BitString& id);
int word_weight(const EccCode::Word& w);

// PairwiseIndep spec over colors with T = n^d (capped at kMaxHashRange).
HashSpec make_universal_color_hash(int colorspace_bits, std::size_t n, int d, std::uint64_t seed);
std::uint64_t universal_range(std::size_t n, int d);

}  // namespace d1lc
