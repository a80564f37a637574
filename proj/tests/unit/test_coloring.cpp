#include "d1lc/coloring.hpp"
#include "d1lc/gen.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace d1lc;
using d1lc::testing::all_nodes;
using d1lc::testing::range_palettes;
using d1lc::testing::seeded;

TEST_CASE("log_star and tower2", "[coloring]") {
    CHECK(log_star(1) == 0);
    CHECK(log_star(2) == 1);
    CHECK(log_star(4) == 2);
    CHECK(log_star(16) == 3);
    CHECK(log_star(65536) == 4);
    CHECK(log_star(65537) == 5);
    CHECK(tower2(0) == 1);
    CHECK(tower2(1) == 2);
    CHECK(tower2(2) == 4);
    CHECK(tower2(3) == 16);
    CHECK(tower2(4) == 65536);
    for (int i = 0; i < 5; ++i) CHECK(log_star(tower2(i)) == i);
}

TEST_CASE("slack generation with zero probability colors nothing", "[coloring]") {
    Rng rng(1);
    const Graph g = make_gnp(100, 0.1, rng);
    Network net(g, seeded(1));
    ColoringEngine eng(net, range_palettes(g));
    eng.announce_color_hash_setup(6);
    eng.slack_generation(all_nodes(g.n()), 0.0);
    CHECK(eng.uncolored_nodes().size() == g.n());
}

TEST_CASE("an isolated node with a singleton palette gets its color", "[coloring]") {
    Network net(Graph(1, {}), seeded(1));
    ColoringEngine eng(net, {{7}});
    eng.announce_color_hash_setup(6);
    CHECK(eng.try_random_color(0));
    CHECK(eng.state(0).permanent_color == std::optional<Color>(7));
}

TEST_CASE("K2 with palettes {1,2}: both endpoints color together half the time", "[coloring][statistical]") {
    // A hash collision on the receiving side can block one endpoint alone; that is safe, not a success.
    int both = 0;
    const int seeds = 2000;
    for (int seed = 1; seed <= seeds; ++seed) {
        Network net(make_clique(2), seeded(seed));
        ColoringEngine eng(net, {{1, 2}, {1, 2}});
        eng.announce_color_hash_setup(6);
        const std::vector<NodeId> v{0, 1};
        const auto r = eng.try_random_colors(v);
        both += r[0] && r[1];
        if (r[0] && r[1]) REQUIRE(*eng.state(0).permanent_color != *eng.state(1).permanent_color);
    }
    // Binomial(2000, 1/2) has sigma ~22; 5 sigma band, shifted by at most a 1/64 collision rate.
    CHECK(both <= seeds / 2 + 112);
    CHECK(both >= seeds / 2 - 112 - seeds / 64);
}

TEST_CASE("conflict resolution follows ranks", "[coloring]") {
    Network net(make_clique(2), seeded(1));
    ColoringEngine eng(net, {{1, 2}, {1, 2}});
    eng.announce_color_hash_setup(6);
    const std::vector<std::pair<NodeId, Color>> both{{0, 1}, {1, 1}};
    auto r = eng.try_colors(both);
    CHECK_FALSE(r[0]);
    CHECK_FALSE(r[1]);
    eng.set_conflict_ranks({0, 1});
    r = eng.try_colors(both);
    CHECK(r[0]);
    CHECK_FALSE(r[1]);
    // A color off the current palette is a caller error.
    CHECK_THROWS(eng.try_color(1, 1));
    CHECK(eng.try_color(1, 2));
    CHECK(eng.check_invariants().empty());
}

TEST_CASE("slack_color schedule for s_min 16 and kappa 1/4", "[coloring]") {
    Rng rng(2);
    const Graph g = make_random_regular(60, 4, rng);
    Network net(g, seeded(2));
    ColoringEngine eng(net, range_palettes(g, 60));
    eng.announce_color_hash_setup(6);
    SlackColorParams p;
    p.s_min = 16;
    p.kappa = 0.25;
    const auto r = eng.slack_color(all_nodes(g.n()), p);
    CHECK(r.rho == Catch::Approx(std::pow(16.0, 0.8)));
    CHECK(r.tower_iterations == 4);
    CHECK(r.geometric_iterations == 4);
    const std::vector<std::size_t> expect{1, 1, 2, 2, 4, 4, 16, 16, 1, 1, 1, 3, 3, 3, 5, 5, 5, 9, 9, 9, 9};
    CHECK(r.schedule == expect);
    CHECK(eng.check_invariants().empty());
}

TEST_CASE("slack_color colors a participant with no uncolored neighbors", "[coloring]") {
    Network net(make_path(3), seeded(4));
    ColoringEngine eng(net, {{1, 2}, {1, 2, 3}, {1, 2}});
    eng.announce_color_hash_setup(6);
    REQUIRE(eng.try_color(0, 1));
    REQUIRE(eng.try_color(2, 2));
    const std::vector<NodeId> mid{1};
    const auto r = eng.slack_color(mid, SlackColorParams{});
    CHECK(eng.colored(1));
    CHECK(eng.state(1).permanent_color == std::optional<Color>(3));
    CHECK(r.colored == mid);
}

TEST_CASE("multi-trial with ample slack colors nearly everything and stays proper", "[coloring]") {
    for (TrialBackend b : {TrialBackend::Idealized, TrialBackend::Uniform}) {
        Rng rng(5);
        const Graph g = make_random_regular(200, 6, rng);
        Network net(g, seeded(5));
        ColoringEngine eng(net, range_palettes(g, 40));
        eng.announce_color_hash_setup(6);
        MultiTrialParams mp;
        mp.x = 4;
        mp.backend = b;
        const auto nodes = all_nodes(g.n());
        for (int i = 0; i < 4; ++i) eng.multi_trial(eng.uncolored_nodes(), mp);
        CHECK(eng.uncolored_nodes().size() <= 2);
        CHECK(eng.check_invariants().empty());
        CHECK(net.stats().max_bits_per_edge_round <= net.bandwidth());
        const auto rep = verify_coloring(g, range_palettes(g, 40), eng.coloring());
        CHECK(rep.conflicts == 0);
        CHECK(rep.off_list == 0);
    }
}

TEST_CASE("chromatic slack counts neighbors colored off the palette", "[coloring]") {
    Network net(make_star(3), seeded(1));
    ColoringEngine eng(net, {{1, 2, 3, 4}, {9, 10}, {1, 10}, {2, 3}});
    eng.announce_color_hash_setup(6);
    CHECK(eng.chromatic_slack(0) == 0);
    REQUIRE(eng.try_color(1, 9));
    REQUIRE(eng.try_color(2, 1));
    CHECK(eng.chromatic_slack(0) == 1);
}
