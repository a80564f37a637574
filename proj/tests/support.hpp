#pragma once

#include "d1lc/graph.hpp"
#include "d1lc/runtime.hpp"

#include <numeric>
#include <vector>

namespace d1lc::testing {

inline std::vector<NodeId> all_nodes(std::size_t n) {
    std::vector<NodeId> v(n);
    std::iota(v.begin(), v.end(), NodeId{0});
    return v;
}

inline NetworkConfig seeded(std::uint64_t seed) {
    NetworkConfig c;
    c.master_seed = seed;
    return c;
}

// Palettes {1, ..., d_v + 1 + extra} for every node.
inline std::vector<Palette> range_palettes(const Graph& g, std::size_t extra = 0) {
    std::vector<Palette> p(g.n());
    for (NodeId v = 0; v < g.n(); ++v)
        for (Color c = 1; c <= g.degree(v) + 1 + extra; ++c) p[v].push_back(c);
    return p;
}

}  // namespace d1lc::testing
