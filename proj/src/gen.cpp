#include "d1lc/gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace d1lc {

Graph make_clique(std::size_t k) { return make_clique_union(1, k); }

Graph make_clique_union(std::size_t count, std::size_t size) {
    std::vector<Edge> e;
    for (std::size_t c = 0; c < count; ++c)
        for (std::size_t i = 0; i < size; ++i)
            for (std::size_t j = i + 1; j < size; ++j)
                e.emplace_back(static_cast<NodeId>(c * size + i), static_cast<NodeId>(c * size + j));
    return Graph(count * size, e);
}

Graph make_gnp(std::size_t n, double p, Rng& rng) {
    std::vector<Edge> e;
    if (p <= 0.0 || n < 2) return Graph(n, e);
    if (p >= 1.0) return make_clique(n);
    // Geometric skipping over the upper triangle.
    const double lq = std::log(1.0 - p);
    long long v = 1, w = -1;
    const long long N = static_cast<long long>(n);
    while (v < N) {
        double r = rng.real();
        w += 1 + static_cast<long long>(std::floor(std::log(1.0 - r) / lq));
        while (w >= v && v < N) {
            w -= v;
            ++v;
        }
        if (v < N) e.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
    }
    return Graph(n, e);
}

Graph make_star(std::size_t leaves) {
    std::vector<Edge> e;
    for (std::size_t i = 1; i <= leaves; ++i) e.emplace_back(0, static_cast<NodeId>(i));
    return Graph(leaves + 1, e);
}

Graph make_path(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 1; i < n; ++i) e.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(i));
    return Graph(n, e);
}

Graph make_cycle(std::size_t n) {
    if (n < 3) throw std::invalid_argument("make_cycle needs n >= 3");
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
    return Graph(n, e);
}

Graph make_random_tree(std::size_t n, Rng& rng) {
    std::vector<Edge> e;
    for (std::size_t i = 1; i < n; ++i) e.emplace_back(static_cast<NodeId>(rng.index(i)), static_cast<NodeId>(i));
    return Graph(n, e);
}

Graph make_complete_bipartite(std::size_t a, std::size_t b) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(a + j));
    return Graph(a + b, e);
}

Graph make_random_regular(std::size_t n, std::size_t d, Rng& rng) {
    if ((n * d) % 2 != 0 || d >= n) throw std::invalid_argument("make_random_regular: need n*d even and d < n");
    // Pair stubs at random; rejected pairs return to the pool and are reshuffled.
    auto key = [](NodeId a, NodeId b) { return (std::uint64_t{std::min(a, b)} << 32) | std::max(a, b); };
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<NodeId> stubs;
        stubs.reserve(n * d);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < d; ++i) stubs.push_back(static_cast<NodeId>(v));
        std::vector<Edge> e;
        std::unordered_set<std::uint64_t> seen;
        int stalls = 0;
        while (!stubs.empty() && stalls < 100) {
            rng.shuffle(stubs);
            std::vector<NodeId> rest;
            const std::size_t before = e.size();
            for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
                const NodeId a = stubs[i], b = stubs[i + 1];
                if (a != b && seen.insert(key(a, b)).second) e.emplace_back(std::min(a, b), std::max(a, b));
                else {
                    rest.push_back(a);
                    rest.push_back(b);
                }
            }
            stalls = e.size() == before ? stalls + 1 : 0;
            stubs.swap(rest);
        }
        if (stubs.empty()) return Graph(n, e);
    }
    throw std::runtime_error("make_random_regular: too many restarts");
}

Graph make_power_law(std::size_t n, double avg_degree, double gamma, Rng& rng) {
    if (gamma <= 2.0) throw std::invalid_argument("make_power_law needs gamma > 2");
    std::vector<double> w(n);
    const double ex = 1.0 / (gamma - 1.0);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] = std::pow(static_cast<double>(i + 1), -ex);
    const double scale = avg_degree * static_cast<double>(n) / sum;
    for (auto& x : w) x *= scale;
    const double total = avg_degree * static_cast<double>(n);
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(std::min(1.0, w[i] * w[j] / total)))
                e.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return Graph(n, e);
}

PlantedAcd make_planted_acd(const PlantedAcdParams& p, Rng& rng) {
    const std::size_t dense = p.cliques * p.clique_size;
    const std::size_t n = dense + p.sparse_nodes;
    PlantedAcd out;
    out.clique_of.assign(n, -1);
    std::vector<Edge> e;
    for (std::size_t c = 0; c < p.cliques; ++c)
        for (std::size_t i = 0; i < p.clique_size; ++i) {
            out.clique_of[c * p.clique_size + i] = static_cast<int>(c);
            for (std::size_t j = i + 1; j < p.clique_size; ++j)
                if (!rng.bernoulli(p.missing))
                    e.emplace_back(static_cast<NodeId>(c * p.clique_size + i),
                                   static_cast<NodeId>(c * p.clique_size + j));
        }
    for (std::size_t i = 0; i < p.sparse_nodes; ++i)
        for (std::size_t j = i + 1; j < p.sparse_nodes; ++j)
            if (rng.bernoulli(p.sparse_p))
                e.emplace_back(static_cast<NodeId>(dense + i), static_cast<NodeId>(dense + j));
    std::size_t placed = 0;
    for (std::size_t tries = 0; placed < p.bridges && tries < 100 * (p.bridges + 1) && n > 1; ++tries) {
        NodeId a = static_cast<NodeId>(rng.index(n)), b = static_cast<NodeId>(rng.index(n));
        if (a == b) continue;
        if (out.clique_of[a] == out.clique_of[b]) continue;
        e.emplace_back(a, b);
        ++placed;
    }
    out.graph = Graph(n, e);
    return out;
}

namespace {

// Adds two hubs of degree `delta` (counting `base_links` extra edges each) sharing `common` nodes.
void add_hub_pair(std::vector<Edge>& e, NodeId& next, NodeId a, NodeId b, std::size_t delta, std::size_t common,
                  std::size_t base_links) {
    if (common + base_links > delta) throw std::invalid_argument("gap gadget: common neighbors exceed the degree");
    for (std::size_t i = 0; i < common; ++i) {
        const NodeId w = next++;
        e.emplace_back(a, w);
        e.emplace_back(b, w);
    }
    for (NodeId hub : {a, b})
        for (std::size_t i = common + base_links; i < delta; ++i) e.emplace_back(hub, next++);
}

}  // namespace

GapGadgets make_triangle_gap(std::size_t delta, std::size_t common_rich, std::size_t common_poor,
                             std::size_t gadgets, std::size_t rich) {
    GapGadgets out;
    std::vector<Edge> e;
    NodeId next = 0;
    for (std::size_t k = 0; k < gadgets; ++k) {
        const NodeId a = next++, b = next++;
        e.emplace_back(a, b);
        const bool r = k < rich;
        add_hub_pair(e, next, a, b, delta, r ? common_rich : common_poor, 1);
        out.targets.push_back({a, b, kNoNode});
        out.rich.push_back(r);
    }
    out.graph = Graph(next, e);
    return out;
}

GapGadgets make_c4_gap(std::size_t delta, std::size_t common_rich, std::size_t common_poor, std::size_t gadgets,
                       std::size_t rich, std::size_t fillers) {
    GapGadgets out;
    std::vector<Edge> e;
    NodeId next = 0;
    for (std::size_t k = 0; k < gadgets; ++k) {
        const NodeId c = next++, u = next++, u2 = next++;
        e.emplace_back(c, u);
        e.emplace_back(c, u2);
        for (std::size_t i = 0; i < fillers; ++i) e.emplace_back(c, next++);
        const bool r = k < rich;
        add_hub_pair(e, next, u, u2, delta, r ? common_rich : common_poor, 1);
        out.targets.push_back({c, u, u2});
        out.rich.push_back(r);
    }
    out.graph = Graph(next, e);
    return out;
}

std::vector<Palette> make_palettes(const Graph& g, PaletteKind kind, Rng& rng, int colorspace_bits,
                                   std::size_t extra) {
    if (colorspace_bits < 1 || colorspace_bits > kMaxColorBits)
        throw std::invalid_argument("make_palettes: colorspace bits out of range");
    std::vector<Palette> pal(g.n());
    const std::uint64_t space = (std::uint64_t{1} << colorspace_bits) - 1;
    for (NodeId v = 0; v < g.n(); ++v) {
        const std::size_t size = g.degree(v) + 1 + extra;
        Palette& P = pal[v];
        switch (kind) {
            case PaletteKind::Range:
                for (std::size_t c = 1; c <= size; ++c) P.push_back(c);
                break;
            case PaletteKind::Random: {
                if (space < size) throw std::invalid_argument("make_palettes: colorspace too small");
                std::unordered_set<Color> s;
                while (s.size() < size) s.insert(rng.uniform(1, space));
                P.assign(s.begin(), s.end());
                std::sort(P.begin(), P.end());
                break;
            }
            case PaletteKind::Adversarial: {
                // Window of the pool [1, 2 * max_degree + 2] starting at a random offset.
                const std::uint64_t pool = 2 * g.max_degree() + 2;
                const std::uint64_t off = rng.uniform(0, pool - 1);
                for (std::size_t i = 0; i < size; ++i) P.push_back((off + i) % std::max<std::uint64_t>(pool, size) + 1);
                std::sort(P.begin(), P.end());
                break;
            }
        }
    }
    return pal;
}

PaletteKind parse_palette_kind(const std::string& name) {
    if (name == "range") return PaletteKind::Range;
    if (name == "random") return PaletteKind::Random;
    if (name == "adversarial") return PaletteKind::Adversarial;
    throw std::invalid_argument("unknown palette kind: " + name);
}

const char* to_string(PaletteKind k) {
    switch (k) {
        case PaletteKind::Range: return "range";
        case PaletteKind::Random: return "random";
        case PaletteKind::Adversarial: return "adversarial";
    }
    return "?";
}

}  // namespace d1lc
