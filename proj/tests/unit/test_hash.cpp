#include "d1lc/hash.hpp"
#include "d1lc/rng.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace d1lc;

TEST_CASE("make_hash is pure and lands in [1, T]", "[hash]") {
    const HashSpec h = make_hash(HashBackend::Idealized, 16, 8, 7);
    const auto y = h(3);
    CHECK(y == h(3));
    CHECK(y >= 1);
    CHECK(y <= 8);

    Rng rng(11);
    for (int i = 0; i < 100000; ++i) {
        const auto b = i % 2 ? HashBackend::Idealized : HashBackend::PairwiseIndep;
        const HashSpec g = make_hash(b, 20, rng.uniform(1, 1000), rng.next());
        const std::uint64_t x = rng.uniform(0, (1u << 20) - 1);
        REQUIRE(g(x) == g(x));
    }
}

TEST_CASE("T = 1 forces the constant hash", "[hash]") {
    const HashSpec h = make_hash(HashBackend::PairwiseIndep, 8, 1, 12345);
    for (std::uint64_t x = 0; x < 256; ++x) REQUIRE(h(x) == 1);
}

TEST_CASE("range is exhaustively [1, T] for small T and universe", "[hash]") {
    Rng rng(5);
    for (HashBackend b : {HashBackend::Idealized, HashBackend::PairwiseIndep})
        for (std::uint64_t T = 1; T <= 16; ++T) {
            const HashSpec h = make_hash(b, 10, T, rng.next());
            for (std::uint64_t x = 0; x < 1024; ++x) {
                const auto y = h(x);
                REQUIRE(y >= 1);
                REQUIRE(y <= T);
            }
        }
}

TEST_CASE("pairwise family joint hits stay near 1/T^2", "[hash][statistical]") {
    // 20 random tuples, 50000 seeds each; bound is 2 * (1 + 1) / T^2 with a 4-sigma margin.
    const std::uint64_t T = 64;
    Rng rng(99);
    const double bound = 4.0 / static_cast<double>(T * T);
    for (int t = 0; t < 20; ++t) {
        std::uint64_t x1 = rng.uniform(0, 1023), x2 = rng.uniform(0, 1023);
        while (x2 == x1) x2 = rng.uniform(0, 1023);
        const std::uint64_t y1 = rng.uniform(1, T), y2 = rng.uniform(1, T);
        const int seeds = 50000;
        int hits = 0;
        for (int s = 0; s < seeds; ++s) {
            const HashSpec h = make_hash(HashBackend::PairwiseIndep, 10, T, rng.next());
            hits += h(x1) == y1 && h(x2) == y2;
        }
        const double freq = static_cast<double>(hits) / seeds;
        const double sigma = std::sqrt(bound / seeds);
        CHECK(freq <= bound + 4 * sigma);
    }
}

TEST_CASE("wire format round-trips", "[hash]") {
    Rng rng(3);
    for (HashBackend b : {HashBackend::Idealized, HashBackend::PairwiseIndep})
        for (std::uint64_t T : {std::uint64_t{1}, std::uint64_t{60}, std::uint64_t{1} << 40}) {
            const HashSpec h = make_hash(b, 30, T, rng.next());
            const BitString wire = h.serialize();
            CHECK(wire.size() == h.serialized_bits());
            CHECK(wire.get(0, 2) == static_cast<std::uint64_t>(b));
            CHECK(wire.get(2, 8) == 30);
            const HashSpec back = HashSpec::deserialize(wire);
            CHECK(back == h);
            for (std::uint64_t x = 0; x < 100; ++x) REQUIRE(back(x) == h(x));
        }
}

TEST_CASE("pairwise modulus is the smallest prime above the bound", "[hash]") {
    const std::uint64_t p = pairwise_modulus(8, 4);
    CHECK(p == next_prime(std::max<std::uint64_t>(256, 4 * 1024)));
    CHECK(is_prime(p));
    for (std::uint64_t q = 4096; q < p; ++q) CHECK_FALSE(is_prime(q));
}

TEST_CASE("choose_low_collision_hash", "[hash]") {
    Rng rng(1);
    SECTION("empty set takes the first spec") {
        const HashSpec h = choose_low_collision_hash(10, 17, {}, 0, rng);
        CHECK(h.backend == HashBackend::PairwiseIndep);
        CHECK(h.out_size == 17);
    }
    SECTION("budget met, verified by direct count") {
        std::vector<std::uint64_t> S(10);
        std::iota(S.begin(), S.end(), 1);
        const HashSpec h = choose_low_collision_hash(10, 60, S, 20, rng);
        std::map<std::uint64_t, int> count;
        for (auto x : S) ++count[h(x)];
        std::size_t colliding = 0;
        for (auto x : S) colliding += count[h(x)] > 1;
        CHECK(colliding <= 20);
        CHECK(colliding == colliding_elements(h, S));
    }
    SECTION("pigeonhole forces failure after the retry cap") {
        std::vector<std::uint64_t> S(9);
        std::iota(S.begin(), S.end(), 0);
        CHECK_THROWS(choose_low_collision_hash(10, 8, S, 0, rng, 16));
    }
}

TEST_CASE("sample_multiset", "[hash]") {
    const auto ones = sample_multiset(1, 5, 42);
    CHECK(ones.elements == std::vector<std::uint64_t>(5, 1));
    CHECK(sample_multiset(100, 50, 3).elements == sample_multiset(100, 50, 3).elements);
    CHECK(sample_multiset(100, 50, 3).elements != sample_multiset(100, 50, 4).elements);
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto m = sample_multiset(100, 10000, seed);
        const auto in = std::count_if(m.elements.begin(), m.elements.end(), [](auto x) { return x <= 50; });
        good += std::abs(static_cast<double>(in) / 10000.0 - 0.5) <= 0.05;
    }
    CHECK(good >= 198);
}

TEST_CASE("ecc_encode", "[hash][ecc]") {
    for (int b : {8, 12, 16}) {
        const EccCode code = EccCode::make(b);
        CHECK(code.code_bits() == 3 * b);
        CHECK(2 * code.min_distance() >= b);
        // Independent exhaustive recount from the generator rows.
        int minw = 1 << 30;
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << b); ++m) minw = std::min(minw, word_weight(code.encode_word(m)));
        CHECK(minw == code.min_distance());
    }
    const EccCode code = EccCode::make(8);
    CHECK(ecc_encode(code, BitString(8)).popcount() == 0);
    BitString a(8), b(8);
    a.set_bit(0);
    a.set_bit(5);
    b.set_bit(5);
    const BitString ca = ecc_encode(code, a), cb = ecc_encode(code, b);
    std::size_t dist = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) dist += ca.bit(i) != cb.bit(i);
    CHECK(2 * dist >= 8);
}

TEST_CASE("universal color hash", "[hash]") {
    CHECK(universal_range(64, 6) == std::uint64_t{1} << 36);
    const HashSpec h = make_universal_color_hash(18, 64, 6, 9);
    CHECK(h.out_size == std::uint64_t{1} << 36);
    CHECK(h(12345) == h(12345));
    CHECK(universal_range(100000, 6) == kMaxHashRange);
    // 100 colors in a 2^48 space with n = 256: T = 2^48, collision bound 100^2 * 2 / T is tiny.
    Rng rng(4);
    int collided = 0;
    for (int s = 0; s < 300; ++s) {
        const HashSpec g = make_universal_color_hash(48, 256, 6, rng.next());
        std::set<std::uint64_t> img;
        for (int i = 0; i < 100; ++i) img.insert(g(rng.uniform(0, (std::uint64_t{1} << 48) - 1)));
        collided += img.size() < 100;
    }
    CHECK(collided == 0);
}
