#include "d1lc/hash.hpp"
#include "d1lc/rng.hpp"
#include "d1lc/set_ops.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

using namespace d1lc;

namespace {

using Set = std::vector<std::uint64_t>;

// Literal transcriptions of the set definitions, quadratic on purpose.
Set naive_restrict(const Set& A, const HashSpec& h, std::uint64_t l) {
    Set out;
    for (auto x : A)
        if (h(x) <= l) out.push_back(x);
    return out;
}

Set naive_collide(const Set& A, const HashSpec& h, const Set& B, std::uint64_t l) {
    Set out;
    for (auto x : naive_restrict(A, h, l)) {
        bool hit = false;
        for (auto y : B) hit |= y != x && h(y) == h(x);
        if (hit) out.push_back(x);
    }
    return out;
}

Set naive_hit(const Set& A, const HashSpec& h, const Set& B, std::uint64_t l) {
    Set out;
    for (auto x : naive_restrict(A, h, l)) {
        bool clash = false;
        for (auto y : B) clash |= y != x && h(y) == h(x);
        if (!clash) out.push_back(x);
    }
    return out;
}

Set random_subset(Rng& rng, std::uint64_t universe, std::size_t max_size) {
    Set s;
    const std::size_t k = rng.uniform(0, max_size);
    for (std::size_t i = 0; i < k; ++i) s.push_back(rng.uniform(0, universe - 1));
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace

TEST_CASE("restrict edge cases", "[set_ops]") {
    const HashSpec h = make_hash(HashBackend::Idealized, 10, 16, 1);
    CHECK(restrict_set(Set{}, h, 8).empty());
    const Set A{1, 2, 3, 500, 900};
    CHECK(restrict_set(A, h, 16) == A);
}

TEST_CASE("collide edge cases", "[set_ops]") {
    const HashSpec h = make_hash(HashBackend::Idealized, 10, 16, 2);
    CHECK(collide_set(Set{1, 2, 3}, h, Set{}, 16).empty());
    CHECK(collide_set(Set{7}, h, Set{7}, 16).empty());
}

TEST_CASE("hit edge cases", "[set_ops]") {
    const HashSpec h = make_hash(HashBackend::Idealized, 10, 16, 3);
    const Set A{4, 5, 6, 7, 100};
    CHECK(hit_set(A, h, Set{}, 9) == restrict_set(A, h, 9));
    // Identity on [1, T] is injective.
    auto id = [](std::uint64_t x) { return x; };
    const Set small{1, 3, 5}, big{1, 2, 3, 4, 5};
    CHECK(hit_set(small, id, big, 5) == small);
}

TEST_CASE("set operators match naive definitions and partition restrict", "[set_ops][property]") {
    Rng rng(2024);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::uint64_t T = rng.uniform(1, 40);
        const std::uint64_t l = rng.uniform(1, T);
        const auto backend = trial % 2 ? HashBackend::Idealized : HashBackend::PairwiseIndep;
        const HashSpec h = make_hash(backend, 7, T, rng.next());
        const Set A = random_subset(rng, 128, 30), B = random_subset(rng, 128, 30);

        const Set r = restrict_set(A, h, l), c = collide_set(A, h, B, l), x = hit_set(A, h, B, l);
        REQUIRE(r == naive_restrict(A, h, l));
        REQUIRE(c == naive_collide(A, h, B, l));
        REQUIRE(x == naive_hit(A, h, B, l));
        // Collide and hit split the restriction.
        REQUIRE(c.size() + x.size() == r.size());
        Set merged = c;
        merged.insert(merged.end(), x.begin(), x.end());
        std::sort(merged.begin(), merged.end());
        REQUIRE(merged == r);
        // Monotone in l.
        if (l < T) REQUIRE(restrict_set(A, h, l + 1).size() >= r.size());
    }
}
