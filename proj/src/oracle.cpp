#include "d1lc/oracle.hpp"

#include <algorithm>
#include <unordered_set>

namespace d1lc {

std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v) {
    auto a = g.neighbors(u), b = g.neighbors(v);
    std::size_t i = 0, j = 0, c = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else {
            ++c;
            ++i;
            ++j;
        }
    }
    return c;
}

std::size_t neighborhood_edges(const Graph& g, NodeId v) {
    std::size_t s = 0;
    for (NodeId u : g.neighbors(v)) s += common_neighbors(g, u, v);
    return s / 2;
}

std::size_t neighborhood_edges_by_scan(const Graph& g, NodeId v) {
    std::vector<bool> in(g.n(), false);
    for (NodeId u : g.neighbors(v)) in[u] = true;
    std::size_t c = 0;
    for (NodeId a = 0; a < g.n(); ++a) {
        if (!in[a]) continue;
        for (NodeId b : g.neighbors(a))
            if (b > a && in[b]) ++c;
    }
    return c;
}

double global_sparsity(const Graph& g, NodeId v, std::size_t max_degree) {
    if (max_degree == 0) return 0.0;
    const double D = static_cast<double>(max_degree);
    return (D * (D - 1) / 2 - static_cast<double>(neighborhood_edges(g, v))) / D;
}

double local_sparsity(const Graph& g, NodeId v) {
    const double d = static_cast<double>(g.degree(v));
    if (d == 0) return 0.0;
    return (d * (d - 1) / 2 - static_cast<double>(neighborhood_edges(g, v))) / d;
}

double unevenness(const Graph& g, NodeId v) {
    double s = 0;
    const double dv = static_cast<double>(g.degree(v));
    for (NodeId u : g.neighbors(v)) {
        const double du = static_cast<double>(g.degree(u));
        s += std::max(0.0, du - dv) / (du + 1);
    }
    return s;
}

double disparity(const Palette& pu, const Palette& pv) {
    if (pu.empty()) return 0.0;
    std::unordered_set<Color> in_v(pv.begin(), pv.end());
    std::size_t missing = 0;
    for (Color c : pu) missing += in_v.count(c) ? 0 : 1;
    return static_cast<double>(missing) / static_cast<double>(pu.size());
}

double discrepancy(const Graph& g, const std::vector<Palette>& pal, NodeId v) {
    double s = 0;
    for (NodeId u : g.neighbors(v)) s += disparity(pal[u], pal[v]);
    return s;
}

double slackability(const Graph& g, const std::vector<Palette>& pal, NodeId v) {
    return local_sparsity(g, v) + discrepancy(g, pal, v);
}

std::size_t triangles_on_edge(const Graph& g, NodeId u, NodeId v) { return common_neighbors(g, u, v); }

std::size_t c4_on_wedge(const Graph& g, NodeId v, NodeId u, NodeId u2) {
    std::size_t c = common_neighbors(g, u, u2);
    return c - (g.has_edge(u, v) && g.has_edge(u2, v) ? 1 : 0);
}

std::size_t external_degree(const Graph& g, NodeId v, const std::vector<bool>& in_clique) {
    std::size_t e = 0;
    for (NodeId u : g.neighbors(v)) e += in_clique[u] ? 0 : 1;
    return e;
}

std::size_t anti_degree(const Graph& g, NodeId v, const std::vector<bool>& in_clique, std::size_t clique_size) {
    std::size_t inside = 0;
    for (NodeId u : g.neighbors(v)) inside += in_clique[u] ? 1 : 0;
    return clique_size - 1 - inside;
}

OracleReport oracle_suite(const Graph& g, const std::vector<Palette>& palettes) {
    OracleReport r;
    const std::size_t n = g.n();
    r.max_degree = g.max_degree();
    r.degree.resize(n);
    r.global_sparsity.resize(n);
    r.local_sparsity.resize(n);
    r.unevenness.resize(n);
    r.discrepancy.resize(n);
    r.slackability.resize(n);
    r.neighborhood_edges.resize(n);
    for (NodeId v = 0; v < n; ++v) {
        r.degree[v] = g.degree(v);
        r.neighborhood_edges[v] = neighborhood_edges(g, v);
        if (r.neighborhood_edges[v] != neighborhood_edges_by_scan(g, v)) ++r.cross_check_failures;
        r.global_sparsity[v] = global_sparsity(g, v, r.max_degree);
        r.local_sparsity[v] = local_sparsity(g, v);
        r.unevenness[v] = unevenness(g, v);
        r.discrepancy[v] = palettes.size() == n ? discrepancy(g, palettes, v) : 0.0;
        r.slackability[v] = r.local_sparsity[v] + r.discrepancy[v];
    }
    return r;
}

ColoringReport verify_coloring(const Graph& g, const std::vector<Palette>& palettes, const Coloring& coloring) {
    ColoringReport r;
    auto fail = [&](std::string s) {
        r.ok = false;
        if (r.violations.size() < 64) r.violations.push_back(std::move(s));
    };
    if (coloring.size() != g.n()) {
        fail("coloring has " + std::to_string(coloring.size()) + " entries for " + std::to_string(g.n()) + " nodes");
        return r;
    }
    for (NodeId v = 0; v < g.n(); ++v) {
        if (!coloring[v]) {
            ++r.uncolored;
            fail("node " + std::to_string(v) + " is uncolored");
            continue;
        }
        const Palette& P = palettes[v];
        if (std::find(P.begin(), P.end(), *coloring[v]) == P.end()) {
            ++r.off_list;
            fail("node " + std::to_string(v) + " has color " + std::to_string(*coloring[v]) + " outside its list");
        }
    }
    for (auto [u, v] : g.edges())
        if (coloring[u] && coloring[v] && *coloring[u] == *coloring[v]) {
            ++r.conflicts;
            fail("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") is monochromatic with color " +
                 std::to_string(*coloring[u]));
        }
    return r;
}

}  // namespace d1lc
