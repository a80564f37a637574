#pragma once

#include "d1lc/graph.hpp"
#include "d1lc/rng.hpp"
#include "d1lc/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace d1lc {

Graph make_clique(std::size_t k);
// `count` disjoint cliques of `size` nodes each.
Graph make_clique_union(std::size_t count, std::size_t size);
Graph make_gnp(std::size_t n, double p, Rng& rng);
// Node 0 is the center.
Graph make_star(std::size_t leaves);
Graph make_path(std::size_t n);
Graph make_cycle(std::size_t n);
// Uniform random recursive tree: node i > 0 attaches to a uniform earlier node.
Graph make_random_tree(std::size_t n, Rng& rng);
// Sides [0, a) and [a, a + b).
Graph make_complete_bipartite(std::size_t a, std::size_t b);
// Pairing model with restarts; n * d must be even.
Graph make_random_regular(std::size_t n, std::size_t d, Rng& rng);
// Chung-Lu graph with expected degrees following a power law of exponent `gamma`.
Graph make_power_law(std::size_t n, double avg_degree, double gamma, Rng& rng);

struct PlantedAcd {
    Graph graph;
    // Planted clique index per node, -1 for the sparse part.
    std::vector<int> clique_of;
};

struct PlantedAcdParams {
    std::size_t cliques = 4;
    std::size_t clique_size = 40;
    // Probability that an intra-clique edge is removed.
    double missing = 0.05;
    std::size_t sparse_nodes = 100;
    double sparse_p = 0.03;
    // Number of random bridge edges between distinct parts.
    std::size_t bridges = 20;
};

PlantedAcd make_planted_acd(const PlantedAcdParams& params, Rng& rng);

// Disjoint gadgets, each an edge (a, b) whose endpoints have degree `delta` and share
// `common` neighbors; the rest of each endpoint's neighborhood is private leaves.
// The first `rich` gadgets use `common_rich`, the others `common_poor`.
struct GapGadgets {
    Graph graph;
    // One probe target per gadget: the edge (a, b) for triangles, or the wedge
    // center with its two arms for 4-cycles.
    std::vector<std::array<NodeId, 3>> targets;
    std::vector<bool> rich;
};

GapGadgets make_triangle_gap(std::size_t delta, std::size_t common_rich, std::size_t common_poor,
                             std::size_t gadgets, std::size_t rich);
// Wedge gadgets: a center with arms u, u2 and `fillers` leaves; u and u2 have degree `delta`
// and share `common` neighbors besides the center.
GapGadgets make_c4_gap(std::size_t delta, std::size_t common_rich, std::size_t common_poor, std::size_t gadgets,
                       std::size_t rich, std::size_t fillers = 4);

enum class PaletteKind {
    // {1, ..., d_v + 1}: maximal overlap between neighbors.
    Range,
    // d_v + 1 distinct colors drawn uniformly from [1, 2^colorspace_bits).
    Random,
    // Each node's list is a random window of a small shared color pool, so
    // high-degree nodes compete with many neighbors on the same colors.
    Adversarial,
};

std::vector<Palette> make_palettes(const Graph& g, PaletteKind kind, Rng& rng, int colorspace_bits = 40,
                                   std::size_t extra = 0);

PaletteKind parse_palette_kind(const std::string& name);
const char* to_string(PaletteKind k);

}  // namespace d1lc
