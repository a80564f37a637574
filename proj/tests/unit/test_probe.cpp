#include "d1lc/gen.hpp"
#include "d1lc/oracle.hpp"
#include "d1lc/probe.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"

using namespace d1lc;
using d1lc::testing::seeded;

namespace {

ProbeConfig probe_cfg(double c_k = 0) {
    ProbeConfig pc;
    pc.sim.c_k = c_k;
    return pc;
}

// The zero-flag guarantees hold with high probability only once the sketch scale grows with log n.
ProbeConfig confident_cfg() { return probe_cfg(1); }

// Two hubs 0 and 1 joined by an edge, each of degree d, sharing `common` further neighbors.
Graph buddy_pair(std::size_t d_left, std::size_t d_right, std::size_t common) {
    std::vector<Edge> e{{0, 1}};
    NodeId next = 2;
    for (std::size_t i = 0; i < common; ++i, ++next) {
        e.emplace_back(0, next);
        e.emplace_back(1, next);
    }
    for (std::size_t i = common + 1; i < d_left; ++i) e.emplace_back(0, next++);
    for (std::size_t i = common + 1; i < d_right; ++i) e.emplace_back(1, next++);
    return Graph(next, e);
}

}  // namespace

TEST_CASE("oracle sparsity reference values", "[probe][oracle]") {
    const Graph k = make_clique(20);
    CHECK(global_sparsity(k, 0, k.max_degree()) == Catch::Approx(0.0));
    CHECK(local_sparsity(k, 0) == Catch::Approx(0.0));
    const Graph s = make_star(30);
    CHECK(global_sparsity(s, 0, s.max_degree()) == Catch::Approx(29.0 / 2));
    CHECK(local_sparsity(s, 0) == Catch::Approx(29.0 / 2));
}

TEST_CASE("sparsity estimates on a clique and a star", "[probe]") {
    const double eps = 0.2;
    {
        const Graph k = make_clique(40);
        Network net(k, seeded(3));
        const auto est = estimate_sparsity(net, 0, eps, probe_cfg());
        CHECK(std::abs(est.value) <= eps * 39);
        CHECK(net.stats().max_bits_per_edge_round <= net.bandwidth());
    }
    {
        const Graph s = make_star(60);
        Network net(s, seeded(4));
        const auto est = estimate_sparsity(net, 0, eps, probe_cfg());
        CHECK(std::abs(est.value - 59.0 / 2) <= eps * 60);
        Network net2(s, seeded(5));
        const auto loc = estimate_local_sparsity(net2, 0, eps, probe_cfg());
        if (loc.valid) CHECK(std::abs(loc.value - 59.0 / 2) <= eps * 60);
    }
}

TEST_CASE("local sparsity on a clique", "[probe]") {
    const Graph k = make_clique(40);
    Network net(k, seeded(6));
    const auto est = estimate_local_sparsity_all(net, 0.2, probe_cfg());
    for (NodeId v = 0; v < k.n(); ++v)
        if (est[v].valid) CHECK(std::abs(est[v].value) <= 0.2 * 39);
}

TEST_CASE("triangle detection: bipartite never flags, clique always flags", "[probe]") {
    const double eps = 0.2;
    {
        const Graph b = make_complete_bipartite(20, 20);
        Network net(b, seeded(1));
        for (const auto& f : detect_triangle_edges(net, eps, confident_cfg())) REQUIRE_FALSE(f.flag);
    }
    {
        const Graph k = make_clique(30);
        Network net(k, seeded(2));
        const auto flags = detect_triangle_edges(net, eps, probe_cfg());
        CHECK(flags.size() == k.m());
        for (const auto& f : flags) REQUIRE(f.flag);
    }
}

TEST_CASE("c4 detection: tree never flags, K_{2,D} wedge flags", "[probe]") {
    const double eps = 0.2;
    {
        Rng rng(9);
        const Graph t = make_random_tree(120, rng);
        Network net(t, seeded(1));
        for (const auto& f : detect_c4_wedges(net, eps, confident_cfg())) REQUIRE_FALSE(f.flag);
    }
    {
        // Nodes 0 and 1 form one side, 2..41 the other; the wedge at 2 through 0 and 1 closes 39 four-cycles.
        const Graph kb = make_complete_bipartite(2, 40);
        Network net(kb, seeded(2));
        const auto flags = detect_c4_wedges(net, eps, probe_cfg(), {2});
        bool seen = false;
        for (const auto& f : flags)
            if (f.center == 2) {
                seen = true;
                REQUIRE(f.flag);
            }
        CHECK(seen);
    }
    {
        // Oracle counts exclude the center, so a star has no four-cycles at all.
        const Graph s = make_star(30);
        for (NodeId a = 1; a <= 30; ++a)
            for (NodeId b = a + 1; b <= 30; ++b) REQUIRE(c4_on_wedge(s, 0, a, b) == 0);
    }
}

TEST_CASE("buddy predicate", "[probe]") {
    BuddyConfig bc;
    bc.sim.c_k = 0;
    {
        Network net(buddy_pair(10, 20, 0), seeded(1));
        CHECK_FALSE(buddy(net, 0, 1, bc));
    }
    int agree = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        Network net(buddy_pair(60, 60, 59), seeded(seed));
        agree += buddy(net, 0, 1, bc);
    }
    CHECK(agree >= 19);
}

TEST_CASE("decomposition on canonical graphs", "[probe][acd]") {
    AcdConfig ac;
    ac.sim.c_k = 0;
    SECTION("disjoint cliques are dense") {
        const Graph g = make_clique_union(4, 30);
        Network net(g, seeded(1));
        const AcdLabels L = compute_acd(net, ac);
        for (NodeId v = 0; v < g.n(); ++v) REQUIRE(L.role[v] == Role::Dense);
        const auto cl = L.cliques();
        CHECK(cl.size() == 4);
        for (NodeId v = 0; v < g.n(); ++v) REQUIRE(L.clique_id[v] == L.clique_id[(v / 30) * 30]);
    }
    SECTION("random regular graphs are sparse") {
        Rng rng(2);
        const Graph g = make_random_regular(200, 8, rng);
        Network net(g, seeded(2));
        const AcdLabels L = compute_acd(net, ac);
        for (NodeId v = 0; v < g.n(); ++v) REQUIRE(L.role[v] == Role::Sparse);
    }
    SECTION("star") {
        const Graph g = make_star(40);
        Network net(g, seeded(3));
        const AcdLabels L = compute_acd(net, ac);
        CHECK(L.role[0] == Role::Sparse);
        for (NodeId v = 1; v < g.n(); ++v) REQUIRE(L.role[v] == Role::Uneven);
    }
}
