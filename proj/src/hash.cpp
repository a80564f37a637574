#include "d1lc/hash.hpp"

#include "d1lc/types.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace d1lc {

const char* to_string(HashBackend b) { return b == HashBackend::Idealized ? "idealized" : "pairwise"; }

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

void check_params(int universe_bits, std::uint64_t T) {
    if (T == 0) throw std::invalid_argument("hash range T must be >= 1");
    if (universe_bits <= 0) throw std::invalid_argument("universe_bits must be >= 1");
    if (universe_bits > kMaxDomainBits) throw std::invalid_argument("universe_bits must be <= 62");
    if (T > kMaxHashRange) throw std::invalid_argument("hash range T must be <= 2^53");
}

}  // namespace

bool is_prime(std::uint64_t x) {
    if (x < 2) return false;
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (x % q == 0) return x == q;
    }
    std::uint64_t d = x - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t y = powmod(a, d, x);
        if (y == 1 || y == x - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            y = mulmod(y, y, x);
            if (y == x - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t next_prime(std::uint64_t x) {
    if (x <= 2) return 2;
    if ((x & 1) == 0) ++x;
    while (!is_prime(x)) x += 2;
    return x;
}

std::uint64_t pairwise_modulus(int domain_bits, std::uint64_t T) {
    std::uint64_t lo = std::max(std::uint64_t{1} << domain_bits, T << 10);
    return next_prime(lo);
}

void HashSpec::finalize() {
    k1_ = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    k2_ = splitmix64(seed + 0x13198a2e03707344ULL);
}

HashSpec make_hash(HashBackend backend, int universe_bits, std::uint64_t T, std::uint64_t seed) {
    check_params(universe_bits, T);
    HashSpec h;
    h.backend = backend;
    h.domain_bits = universe_bits;
    h.out_size = T;
    h.seed = seed;
    if (backend == HashBackend::PairwiseIndep) {
        h.p = pairwise_modulus(universe_bits, T);
        Rng r(seed);
        h.a = r.uniform(1, h.p - 1);
        h.b = r.uniform(0, h.p - 1);
    }
    h.finalize();
    return h;
}

BitString HashSpec::serialize() const {
    BitString s;
    s.push(static_cast<std::uint64_t>(backend), 2);
    s.push(static_cast<std::uint64_t>(domain_bits), 8);
    if (out_size < (std::uint64_t{1} << 32)) {
        s.push(out_size, 32);
    } else {
        s.push(0, 32);
        s.push(out_size, 64);
    }
    if (backend == HashBackend::Idealized) {
        s.push(seed, 64);
    } else {
        int w = ceil_log2(p);
        s.push(a, w);
        s.push(b, w);
    }
    return s;
}

std::size_t HashSpec::serialized_bits() const {
    std::size_t bits = 2 + 8 + 32 + (out_size < (std::uint64_t{1} << 32) ? 0 : 64);
    bits += backend == HashBackend::Idealized ? 64 : 2 * static_cast<std::size_t>(ceil_log2(p));
    return bits;
}

HashSpec HashSpec::read(BitReader& r) {
    HashSpec h;
    auto tag = r.read(2);
    if (tag > 1) throw std::runtime_error("hash spec: unknown backend tag");
    h.backend = static_cast<HashBackend>(tag);
    h.domain_bits = static_cast<int>(r.read(8));
    h.out_size = r.read(32);
    if (h.out_size == 0) h.out_size = r.read(64);
    check_params(h.domain_bits, h.out_size);
    if (h.backend == HashBackend::Idealized) {
        h.seed = r.read(64);
    } else {
        h.p = pairwise_modulus(h.domain_bits, h.out_size);
        int w = ceil_log2(h.p);
        h.a = r.read(w);
        h.b = r.read(w);
    }
    h.finalize();
    return h;
}

HashSpec HashSpec::deserialize(const BitString& bits) {
    BitReader r(bits);
    return read(r);
}

bool HashSpec::operator==(const HashSpec& o) const {
    if (backend != o.backend || domain_bits != o.domain_bits || out_size != o.out_size) return false;
    return backend == HashBackend::Idealized ? seed == o.seed : (a == o.a && b == o.b && p == o.p);
}

std::size_t colliding_elements(const HashSpec& h, std::span<const std::uint64_t> S) {
    std::vector<std::uint64_t> hv;
    hv.reserve(S.size());
    for (auto x : S) hv.push_back(h(x));
    std::sort(hv.begin(), hv.end());
    std::size_t total = 0;
    for (std::size_t i = 0; i < hv.size();) {
        std::size_t j = i;
        while (j < hv.size() && hv[j] == hv[i]) ++j;
        if (j - i >= 2) total += j - i;
        i = j;
    }
    return total;
}

HashSpec choose_low_collision_hash(int universe_bits, std::uint64_t T, std::span<const std::uint64_t> S,
                                   std::size_t budget, Rng& rng, int retry_cap) {
    check_params(universe_bits, T);
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        HashSpec h = make_hash(HashBackend::PairwiseIndep, universe_bits, T, rng.next());
        if (colliding_elements(h, S) <= budget) return h;
    }
    throw std::runtime_error("choose_low_collision_hash: no spec within budget after " +
                             std::to_string(retry_cap) + " attempts (requires |S| <= T/2)");
}

SamplerMultiset sample_multiset(std::uint64_t T, std::size_t t, std::uint64_t seed) {
    if (T == 0) throw std::invalid_argument("sample_multiset: T must be >= 1");
    if (t == 0) throw std::invalid_argument("sample_multiset: t must be >= 1");
    SamplerMultiset s{T, t, seed, {}};
    s.elements.reserve(t);
    Rng r(derive_seed(seed, 0x5a3));
    for (std::size_t i = 0; i < t; ++i) s.elements.push_back(r.uniform(1, T));
    return s;
}

int word_weight(const EccCode::Word& w) {
    return std::popcount(w[0]) + std::popcount(w[1]) + std::popcount(w[2]);
}

namespace {

bool full_rank(std::vector<EccCode::Word> rows) {
    std::size_t r = 0;
    for (int col = 0; col < 192 && r < rows.size(); ++col) {
        auto has = [&](const EccCode::Word& w) { return (w[col / 64] >> (col % 64)) & 1; };
        std::size_t piv = r;
        while (piv < rows.size() && !has(rows[piv])) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[r], rows[piv]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != r && has(rows[i]))
                for (int k = 0; k < 3; ++k) rows[i][k] ^= rows[r][k];
        ++r;
    }
    return r == rows.size();
}

}  // namespace

EccCode EccCode::make(int msg_bits, std::uint64_t public_seed) {
    if (msg_bits < 1 || msg_bits > 64) throw std::invalid_argument("EccCode: msg_bits must be in [1, 64]");
    EccCode c;
    c.b_ = msg_bits;
    const int n = 3 * msg_bits;
    for (int attempt = 0;; ++attempt) {
        Rng r(derive_seed(public_seed, static_cast<std::uint64_t>(attempt)));
        c.rows_.assign(msg_bits, Word{0, 0, 0});
        for (auto& row : c.rows_)
            for (int k = 0; k < n; ++k)
                if (r.next() & 1) row[k / 64] |= std::uint64_t{1} << (k % 64);
        c.resamples_ = attempt;
        if (msg_bits > 16) {
            if (full_rank(c.rows_)) return c;
            continue;
        }
        // Gray-code walk over all nonzero messages.
        Word cur{0, 0, 0};
        int best = n + 1;
        for (std::uint64_t i = 1; i < (std::uint64_t{1} << msg_bits); ++i) {
            int flip = std::countr_zero(i);
            for (int k = 0; k < 3; ++k) cur[k] ^= c.rows_[flip][k];
            best = std::min(best, word_weight(cur));
            if (2 * best < msg_bits) break;
        }
        if (2 * best >= msg_bits) {
            c.min_distance_ = best;
            return c;
        }
    }
}

EccCode::Word EccCode::encode_word(std::uint64_t msg) const {
    Word w{0, 0, 0};
    for (int i = 0; i < b_; ++i)
        if ((msg >> i) & 1)
            for (int k = 0; k < 3; ++k) w[k] ^= rows_[i][k];
    return w;
}

BitString EccCode::encode(const BitString& id) const {
    if (id.size() != static_cast<std::size_t>(b_))
        throw std::invalid_argument("ecc_encode: expected " + std::to_string(b_) + "-bit input, got " +
                                    std::to_string(id.size()));
    Word w = encode_word(id.get(0, b_));
    BitString out;
    for (int k = 0; k < 3 * b_; k += 64) out.push(w[k / 64], std::min(64, 3 * b_ - k));
    return out;
}

BitString ecc_encode(const EccCode& code, const BitString& id) { return code.encode(id); }

std::uint64_t universal_range(std::size_t n, int d) {
    std::uint64_t T = 1;
    for (int i = 0; i < d; ++i) {
        if (n != 0 && T > kMaxHashRange / n) return kMaxHashRange;
        T *= std::max<std::size_t>(n, 1);
    }
    return std::min(T, kMaxHashRange);
}

HashSpec make_universal_color_hash(int colorspace_bits, std::size_t n, int d, std::uint64_t seed) {
    if (d < 6) throw std::invalid_argument("make_universal_color_hash: d must be >= 6");
    return make_hash(HashBackend::PairwiseIndep, colorspace_bits, universal_range(n, d), seed);
}

}  // namespace d1lc
