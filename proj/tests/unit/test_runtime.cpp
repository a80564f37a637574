#include "d1lc/gen.hpp"
#include "d1lc/runtime.hpp"

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace d1lc;
using d1lc::testing::seeded;

namespace {

BitString word(std::uint64_t v, int width) {
    BitString b;
    b.push(v, width);
    return b;
}

// Gossip of random 16-bit tokens for a few rounds; used for the replay check.
RoundStats gossip(const Graph& g, std::uint64_t seed, int threads) {
    NetworkConfig cfg = seeded(seed);
    cfg.threads = threads;
    Network net(g, cfg);
    return run_rounds(
        net,
        [](NodeCtx& c) {
            if (c.round() > 6) return true;
            std::uint64_t acc = c.rng().next() & 0xffff;
            for (const auto& m : c.inbox()) acc ^= m.payload.get(0, 16);
            c.broadcast(word(acc, 16));
            return false;
        },
        100);
}

}  // namespace

TEST_CASE("default bandwidth", "[runtime]") {
    CHECK(default_bandwidth(16) == 128);
    CHECK(default_bandwidth(2) == 64);
    CHECK(default_bandwidth(1000) == 320);
    CHECK(default_bandwidth(16, 2.0) == 256);
}

TEST_CASE("a program that halts immediately uses no rounds", "[runtime]") {
    Network net(make_path(5), seeded(1));
    const RoundStats s = run_rounds(net, [](NodeCtx&) { return true; }, 10);
    CHECK(s.rounds_used == 0);
    CHECK(s.total_messages == 0);
}

TEST_CASE("K2 echo sent in round 1 is read in round 2", "[runtime]") {
    Network net(make_clique(2), seeded(1));
    std::uint64_t got = 0, got_round = 0;
    run_rounds(
        net,
        [&](NodeCtx& c) {
            if (c.round() == 1) {
                if (c.id() == 0) c.send(1, word(0x5a, 8));
                return false;
            }
            if (c.id() == 1 && !c.inbox().empty()) {
                got = c.inbox().front().payload.get(0, 8);
                got_round = c.round();
            }
            return true;
        },
        10);
    CHECK(got == 0x5a);
    CHECK(got_round == 2);
}

TEST_CASE("replay and thread count do not change the transcript", "[runtime]") {
    Rng rng(7);
    const Graph g = make_gnp(500, 0.02, rng);
    const RoundStats a = gossip(g, 99, 1), b = gossip(g, 99, 1), c = gossip(g, 99, 4), d = gossip(g, 100, 1);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.transcript_hash != d.transcript_hash);
}

TEST_CASE("bandwidth and topology violations throw", "[runtime]") {
    Network net(make_path(16), seeded(1));
    REQUIRE(net.bandwidth() == 128);
    SECTION("oversize payload") {
        CHECK_THROWS_AS(net.round("t", [](NodeCtx& c) {
            if (c.id() == 0) c.send(1, BitString(132));
        }),
                        BandwidthError);
    }
    SECTION("non-neighbor") {
        CHECK_THROWS(net.round("t", [](NodeCtx& c) {
            if (c.id() == 0) c.send(5, word(1, 4));
        }));
    }
    SECTION("second message on an edge in one round") {
        CHECK_THROWS_AS(net.round("t",
                                  [](NodeCtx& c) {
                                      if (c.id() == 0) {
                                          c.send(1, word(1, 4));
                                          c.send(1, word(2, 4));
                                      }
                                  }),
                        BandwidthError);
    }
    SECTION("a program that never halts") {
        CHECK_THROWS_AS(run_rounds(net, [](NodeCtx&) { return false; }, 20), NonTerminationError);
    }
}

TEST_CASE("streamed payloads span rounds and respect the per-edge cap", "[runtime]") {
    Network net(make_clique(2), seeded(3));
    BitString big;
    for (int i = 0; i < 10; ++i) big.push(0xabcdef0123456789ULL, 64);
    net.round("stream", std::span<const NodeId>(), [](NodeCtx&) {});
    std::vector<NodeId> zero{0};
    net.round("stream", zero, [&](NodeCtx& c) { c.send_stream(1, big); });
    CHECK(net.rounds() >= 1 + (640 + net.bandwidth() - 1) / net.bandwidth());
    CHECK(net.stats().max_bits_per_edge_round <= net.bandwidth());
    REQUIRE(net.inbox(1).size() == 1);
    CHECK(net.inbox(1).front().payload == big);
}

TEST_CASE("edge shared seed", "[runtime]") {
    Network net(make_clique(2), seeded(5));
    const std::uint64_t before = net.stats().total_messages;
    const std::uint64_t s = edge_shared_seed(net, 0, 1);
    CHECK(net.stats().total_messages - before == 1);
    CHECK(net.stats().total_bits == 64);
    Network again(make_clique(2), seeded(5));
    CHECK(edge_shared_seed(again, 1, 0) == s);
}

TEST_CASE("broadcast sends one message per neighbor", "[runtime]") {
    Graph g(6, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
    Network net(g, seeded(1));
    std::vector<NodeId> only_isolated{5};
    net.round("b", only_isolated, [](NodeCtx& c) { c.broadcast(word(1, 1)); });
    CHECK(net.stats().total_messages == 0);
    std::vector<NodeId> hub{0};
    net.round("b", hub, [](NodeCtx& c) { c.broadcast(word(1, 1)); });
    CHECK(net.stats().total_messages == 3);
}

TEST_CASE("silent rounds can be skipped", "[runtime]") {
    Network net(make_path(4), seeded(1));
    std::vector<NodeId> all = d1lc::testing::all_nodes(4);
    CHECK_FALSE(net.round_or_skip("q", all, [](NodeCtx&) {}, false));
    CHECK(net.rounds() == 0);
    CHECK(net.round_or_skip("q", all, [](NodeCtx& c) {
        if (c.id() == 0) c.send(1, word(1, 1));
    }, false));
    CHECK(net.rounds() == 1);
    CHECK(net.stats().phase_rounds.at("q") == 1);
}
