#include "d1lc/gen.hpp"
#include "d1lc/oracle.hpp"
#include "d1lc/pipeline.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

#include "support.hpp"

using namespace d1lc;
using d1lc::testing::all_nodes;
using d1lc::testing::range_palettes;
using d1lc::testing::seeded;

TEST_CASE("a lone node with palette {7} is colored 7", "[pipeline]") {
    const PipelineResult r = run_d1lc(Graph(1, {}), {{7}}, PipelineConfig{});
    CHECK(r.ok());
    CHECK(r.coloring[0] == std::optional<Color>(7));
}

TEST_CASE("a long path is properly colored", "[pipeline]") {
    const Graph g = make_path(100);
    const auto pal = range_palettes(g);
    const PipelineResult r = run_d1lc(g, pal, PipelineConfig{});
    CHECK(r.ok());
    const ColoringReport v = verify_coloring(g, pal, r.coloring);
    CHECK(v.ok);
    CHECK(r.stats.max_bits_per_edge_round <= r.stats.bandwidth_bits);
}

TEST_CASE("pipeline on mixed families with adversarial palettes", "[pipeline]") {
    Rng rng(8);
    std::vector<Graph> graphs{make_gnp(300, 0.05, rng), make_clique_union(5, 25), make_star(80),
                              make_random_tree(200, rng)};
    PlantedAcdParams pp;
    graphs.push_back(make_planted_acd(pp, rng).graph);
    for (const Graph& g : graphs) {
        const auto pal = make_palettes(g, PaletteKind::Adversarial, rng);
        PipelineConfig cfg;
        cfg.master_seed = rng.next();
        const PipelineResult r = run_d1lc(g, pal, cfg);
        INFO(format_report(r));
        CHECK(r.ok());
        CHECK(verify_coloring(g, pal, r.coloring).ok);
        CHECK(r.stats.max_bits_per_edge_round <= r.stats.bandwidth_bits);
    }
}

TEST_CASE("phase_plan", "[pipeline]") {
    const PhasePlan small = phase_plan(1000, 16, 16);
    CHECK(small.ranges.empty());
    CHECK(small.residue.lo == 0);
    CHECK(small.residue.hi == 16);

    const PhasePlan big = phase_plan(std::size_t{1} << 21, std::size_t{1} << 20, 128);
    REQUIRE(big.ranges.size() == 1);
    CHECK(big.ranges[0].lo == 128);
    CHECK(big.ranges[0].hi == std::size_t{1} << 20);
    CHECK(big.residue.hi == 127);

    // Ranges tile [0, max_degree] without gaps, and there are at most log* + 1 of them.
    for (std::size_t D : {17ul, 100ul, 5000ul, 1ul << 30, 1ul << 40}) {
        const PhasePlan p = phase_plan(D + 1, D, 16);
        CHECK(p.ranges.size() + 1 <= static_cast<std::size_t>(log_star(static_cast<double>(D))) + 1);
        std::size_t top = D;
        for (const auto& r : p.ranges) {
            CHECK(r.hi == top);
            CHECK(r.lo <= r.hi);
            top = r.lo - 1;
        }
        CHECK(p.residue.hi == top);
        CHECK(p.residue.lo == 0);
    }
    CHECK_THROWS(phase_plan(10, 10, 1));
}

TEST_CASE("fallback coloring", "[pipeline]") {
    SECTION("empty residue uses no rounds") {
        Network net(make_path(4), seeded(1));
        ColoringEngine eng(net, range_palettes(net.graph()));
        const FallbackReport r = fallback_color(eng, {}, 10);
        CHECK(r.rounds == 0);
        CHECK(r.nodes == 0);
    }
    SECTION("an isolated edge") {
        Network net(make_clique(2), seeded(2));
        ColoringEngine eng(net, {{3, 4}, {3, 4}});
        eng.announce_color_hash_setup(6);
        const auto nodes = all_nodes(2);
        const FallbackReport r = fallback_color(eng, nodes, 10);
        CHECK_FALSE(r.shattering_failure);
        CHECK(eng.colored(0));
        CHECK(eng.colored(1));
        CHECK(*eng.state(0).permanent_color != *eng.state(1).permanent_color);
    }
    SECTION("a 50-node tree without phases") {
        Rng rng(3);
        const Graph g = make_random_tree(50, rng);
        const auto pal = range_palettes(g);
        PipelineConfig cfg;
        cfg.phases = false;
        const PipelineResult r = run_d1lc(g, pal, cfg);
        CHECK(r.ok());
        CHECK(r.phases.empty());
        CHECK(verify_coloring(g, pal, r.coloring).ok);
    }
}

TEST_CASE("verify_coloring", "[pipeline][oracle]") {
    const Graph c = make_cycle(6);
    std::vector<Palette> pal(6, Palette{1, 2, 3});
    Coloring col(6);
    for (NodeId v = 0; v < 6; ++v) col[v] = 1 + v % 2;
    CHECK(verify_coloring(c, pal, col).ok);

    col[1] = 1;
    ColoringReport bad = verify_coloring(c, pal, col);
    CHECK_FALSE(bad.ok);
    CHECK(bad.conflicts == 2);
    bool named = false;
    for (const auto& s : bad.violations) named |= s.find("0") != std::string::npos && s.find("1") != std::string::npos;
    CHECK(named);

    col[1] = 9;
    bad = verify_coloring(c, pal, col);
    CHECK(bad.off_list == 1);
    CHECK(bad.violations.front().find("1") != std::string::npos);

    col[1].reset();
    CHECK(verify_coloring(c, pal, col).uncolored == 1);
}

TEST_CASE("oracle suite", "[pipeline][oracle]") {
    const Graph k = make_clique(12);
    const OracleReport rk = oracle_suite(k, range_palettes(k));
    for (double z : rk.global_sparsity) CHECK(z == Catch::Approx(0.0));
    const Graph s = make_star(21);
    const OracleReport rs = oracle_suite(s, range_palettes(s));
    CHECK(rs.global_sparsity[0] == Catch::Approx(10.0));
    Rng rng(4);
    const Graph g = make_gnp(200, 0.1, rng);
    const OracleReport rg = oracle_suite(g, range_palettes(g));
    CHECK(rg.cross_check_failures == 0);
    for (NodeId v = 0; v < g.n(); ++v) REQUIRE(neighborhood_edges(g, v) == neighborhood_edges_by_scan(g, v));
}

TEST_CASE("config parsing", "[pipeline][config]") {
    std::istringstream in("# comment\neps_acd = 0.15\nbackend = uniform\nphases = false\ndegree_floor=32\n");
    const PipelineConfig c = parse_config(in);
    CHECK(c.eps_acd == 0.15);
    CHECK(c.backend == Backend::Uniform);
    CHECK_FALSE(c.phases);
    CHECK(c.degree_floor == 32);

    std::istringstream round(to_kv(c));
    const PipelineConfig back = parse_config(round);
    CHECK(to_kv(back) == to_kv(c));

    std::istringstream unknown("no_such_key = 1\n");
    CHECK_THROWS_AS(parse_config(unknown), std::invalid_argument);
    std::istringstream range("eps_acd = 0.5\n");
    CHECK_THROWS_AS(parse_config(range), std::invalid_argument);
    std::istringstream garbage("eps_acd\n");
    CHECK_THROWS_AS(parse_config(garbage), std::invalid_argument);
}

TEST_CASE("graph and palette files round-trip", "[pipeline][io]") {
    Rng rng(6);
    const Graph g = make_gnp(50, 0.2, rng);
    const auto pal = make_palettes(g, PaletteKind::Random, rng);
    std::stringstream gs, ps;
    write_graph(gs, g);
    write_palettes(ps, pal);
    const Graph g2 = read_graph(gs);
    CHECK(g2.n() == g.n());
    CHECK(g2.edges() == g.edges());
    CHECK(read_palettes(ps, g.n()) == pal);
}

TEST_CASE("report is key=value", "[pipeline]") {
    const PipelineResult r = run_d1lc(make_path(10), range_palettes(make_path(10)), PipelineConfig{});
    const std::string text = format_report(r);
    CHECK(text.find("ok=true") != std::string::npos);
    CHECK(text.find("rounds=") != std::string::npos);
    CHECK(text.find("transcript_hash=") != std::string::npos);
}
