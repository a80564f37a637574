#include "d1lc/dense.hpp"
#include "d1lc/gen.hpp"
#include "d1lc/oracle.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace d1lc;
using d1lc::testing::seeded;

namespace {

// Every node in [0, size) is one dense clique rooted at 0; the rest are sparse.
AcdLabels one_clique(std::size_t n, std::size_t size) {
    AcdLabels L;
    L.role.assign(n, Role::Sparse);
    L.clique_id.assign(n, -1);
    for (NodeId v = 0; v < size; ++v) {
        L.role[v] = Role::Dense;
        L.clique_id[v] = 0;
    }
    return L;
}

std::vector<Palette> identical(std::size_t n, std::size_t k) {
    Palette p(k);
    for (std::size_t i = 0; i < k; ++i) p[i] = i + 1;
    return std::vector<Palette>(n, p);
}

}  // namespace

TEST_CASE("perfect clique with identical palettes", "[dense]") {
    const std::size_t k = 30;
    const Graph g = make_clique(k);
    Network net(g, seeded(1));
    ColoringEngine eng(net, identical(k, k));
    eng.announce_color_hash_setup(6);
    DenseMachinery dm(eng, one_clique(k, k));
    REQUIRE(dm.cliques().size() == 1);
    dm.select_leaders();
    const CliqueInfo& C = dm.cliques()[0];
    CHECK(C.leader == 0);
    for (auto s : C.chromatic_slack) CHECK(s == 0);
    dm.partition_inliers_outliers();
    dm.classify_slackability();
    CHECK(dm.cliques()[0].slack_class == SlackClass::Low);
}

TEST_CASE("a member with many external edges is never leader", "[dense]") {
    // Clique on 0..19; node 0 also touches 10 outside nodes.
    std::vector<Edge> e;
    for (NodeId a = 0; a < 20; ++a)
        for (NodeId b = a + 1; b < 20; ++b) e.emplace_back(a, b);
    for (NodeId x = 20; x < 30; ++x) e.emplace_back(0, x);
    const Graph g(30, e);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Network net(g, seeded(seed));
        ColoringEngine eng(net, d1lc::testing::range_palettes(g));
        eng.announce_color_hash_setup(6);
        DenseMachinery dm(eng, one_clique(30, 20));
        dm.select_leaders();
        REQUIRE(dm.cliques()[0].leader != 0);
    }
}

TEST_CASE("a member not adjacent to the leader is an outlier", "[dense]") {
    // Clique on 0..24 minus the edge (0, 24).
    std::vector<Edge> e;
    for (NodeId a = 0; a < 25; ++a)
        for (NodeId b = a + 1; b < 25; ++b)
            if (!(a == 0 && b == 24)) e.emplace_back(a, b);
    const Graph g(25, e);
    Network net(g, seeded(3));
    ColoringEngine eng(net, identical(25, 25));
    eng.announce_color_hash_setup(6);
    DenseMachinery dm(eng, one_clique(25, 25));
    dm.select_leaders();
    dm.partition_inliers_outliers();
    const CliqueInfo& C = dm.cliques()[0];
    REQUIRE(C.leader != kNoNode);
    for (NodeId v : C.members)
        if (v != C.leader && !g.has_edge(v, C.leader))
            CHECK(std::find(C.outliers.begin(), C.outliers.end(), v) != C.outliers.end());
    CHECK(std::find(C.outliers.begin(), C.outliers.end(), C.leader) == C.outliers.end());
}

TEST_CASE("synchronized trial on a perfect clique colors the core distinctly", "[dense]") {
    const std::size_t k = 40;
    const Graph g = make_clique(k);
    Network net(g, seeded(7));
    ColoringEngine eng(net, identical(k, k));
    eng.announce_color_hash_setup(6);
    DenseMachinery dm(eng, one_clique(k, k));
    dm.select_leaders();
    dm.partition_inliers_outliers();
    dm.classify_slackability();
    dm.put_aside();
    const CliqueInfo C = dm.cliques()[0];
    dm.synch_color_trial();
    std::set<Color> used;
    std::size_t colored = 0;
    for (NodeId v = 0; v < k; ++v)
        if (eng.colored(v)) {
            ++colored;
            used.insert(*eng.state(v).permanent_color);
        }
    CHECK(used.size() == colored);
    for (NodeId v : C.core) {
        if (std::find(C.put_aside.begin(), C.put_aside.end(), v) != C.put_aside.end()) continue;
        CHECK(eng.colored(v));
    }
    CHECK(eng.check_invariants().empty());
}

TEST_CASE("desk_ell grows with the degree", "[dense]") {
    CHECK(desk_ell(16) > 0);
    CHECK(desk_ell(1 << 20) >= desk_ell(16));
}
