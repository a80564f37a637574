#include "d1lc/gen.hpp"
#include "d1lc/sketch.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"

using namespace d1lc;
using d1lc::testing::seeded;

namespace {

using Set = std::vector<std::uint64_t>;

Set iota_set(std::uint64_t from, std::size_t count) {
    Set s(count);
    std::iota(s.begin(), s.end(), from);
    return s;
}

}  // namespace

TEST_CASE("similarity of an empty set is zero", "[sketch]") {
    Network net(make_clique(2), seeded(1));
    const Set empty, two{1, 2};
    const SimilarityResult r = estimate_similarity(net, 0, 1, empty, two, SimilarityConfig{});
    CHECK(r.estimate == 0.0);
    CHECK(net.stats().max_bits_per_edge_round <= net.bandwidth());
}

TEST_CASE("self similarity lands within eps * |S|", "[sketch][statistical]") {
    const Set S = iota_set(1000, 200);
    SimilarityConfig cfg;
    cfg.eps = 0.25;
    int good = 0;
    const int seeds = 200;
    for (int seed = 1; seed <= seeds; ++seed) {
        Network net(make_clique(2), seeded(seed));
        const auto r = estimate_similarity(net, 0, 1, S, S, cfg);
        good += std::abs(r.estimate - 200.0) <= 50.0;
        REQUIRE(net.stats().max_bits_per_edge_round <= net.bandwidth());
    }
    CHECK(good >= 0.9 * seeds);
}

TEST_CASE("half-overlapping sets estimate the intersection", "[sketch][statistical]") {
    const Set A = iota_set(0, 300), B = iota_set(150, 300);
    SimilarityConfig cfg;
    cfg.eps = 0.2;
    int good = 0;
    const int seeds = 200;
    for (int seed = 1; seed <= seeds; ++seed) {
        Network net(make_clique(2), seeded(seed));
        const auto r = estimate_similarity(net, 0, 1, A, B, cfg);
        good += std::abs(r.estimate - 150.0) <= 60.0;
    }
    CHECK(good >= 0.9 * seeds);
}

TEST_CASE("plan parameters", "[sketch]") {
    SimilarityConfig cfg;
    const SimilarityPlan p = plan_similarity(100, 400, cfg);
    CHECK(p.max_size == 400);
    CHECK(p.l >= 1);
    CHECK(p.l <= p.T);
}

TEST_CASE("joint sample on disjoint sets outputs nothing", "[sketch]") {
    const Set A = iota_set(0, 50), B = iota_set(100, 50);
    for (int seed = 1; seed <= 50; ++seed) {
        Network net(make_clique(2), seeded(seed));
        const auto r = joint_sample(net, 0, 1, A, B, SimilarityConfig{}, 3);
        for (const auto& a : r.side_u) {
            if (!a) continue;
            // Any output must lie in the own set but can never be shared.
            REQUIRE(std::binary_search(A.begin(), A.end(), *a));
            REQUIRE_FALSE(std::binary_search(B.begin(), B.end(), *a));
        }
        for (const auto& b : r.side_v) {
            if (!b) continue;
            REQUIRE(std::binary_search(B.begin(), B.end(), *b));
            REQUIRE_FALSE(std::binary_search(A.begin(), A.end(), *b));
        }
    }
}

TEST_CASE("joint sample of a shared singleton agrees", "[sketch][statistical]") {
    const Set S{42};
    SimilarityConfig cfg;
    cfg.eps = 0.1;
    int agree = 0;
    const int seeds = 400;
    for (int seed = 1; seed <= seeds; ++seed) {
        Network net(make_clique(2), seeded(seed));
        const auto r = joint_sample(net, 0, 1, S, S, cfg, 1);
        agree += r.side_u[0] == std::optional<std::uint64_t>(42) && r.side_v[0] == std::optional<std::uint64_t>(42);
    }
    CHECK(agree >= (1.0 - 1.25 * cfg.eps - cfg.nu) * seeds);
}
