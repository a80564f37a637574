#pragma once

#include "d1lc/graph.hpp"
#include "d1lc/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace d1lc {

// Exact structural quantities, computed centrally. Desk-scale only.
std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v);
// Edges inside N(v), by summing common-neighbor counts over v's neighbors.
std::size_t neighborhood_edges(const Graph& g, NodeId v);
// Same quantity by scanning every edge of the graph; an independent counting path.
std::size_t neighborhood_edges_by_scan(const Graph& g, NodeId v);

double global_sparsity(const Graph& g, NodeId v, std::size_t max_degree);
double local_sparsity(const Graph& g, NodeId v);
double unevenness(const Graph& g, NodeId v);
// |Psi_u \ Psi_v| / |Psi_u|.
double disparity(const Palette& pu, const Palette& pv);
double discrepancy(const Graph& g, const std::vector<Palette>& pal, NodeId v);
double slackability(const Graph& g, const std::vector<Palette>& pal, NodeId v);

std::size_t triangles_on_edge(const Graph& g, NodeId u, NodeId v);
// 4-cycles v-u-w-u'-v through the wedge (u, v, u').
std::size_t c4_on_wedge(const Graph& g, NodeId v, NodeId u, NodeId u2);

// Neighbors of v outside `members` (membership given as a flag vector).
std::size_t external_degree(const Graph& g, NodeId v, const std::vector<bool>& in_clique);
// |C| - 1 - |N_C(v)| for v in C.
std::size_t anti_degree(const Graph& g, NodeId v, const std::vector<bool>& in_clique, std::size_t clique_size);

struct OracleReport {
    std::size_t max_degree = 0;
    std::vector<std::size_t> degree;
    std::vector<double> global_sparsity;
    std::vector<double> local_sparsity;
    std::vector<double> unevenness;
    std::vector<double> discrepancy;
    std::vector<double> slackability;
    std::vector<std::size_t> neighborhood_edges;
    // Number of nodes where the two neighborhood-edge counts disagree (expected 0).
    std::size_t cross_check_failures = 0;
};

OracleReport oracle_suite(const Graph& g, const std::vector<Palette>& palettes);

using Coloring = std::vector<std::optional<Color>>;

struct ColoringReport {
    bool ok = true;
    std::size_t uncolored = 0;
    std::size_t conflicts = 0;
    std::size_t off_list = 0;
    std::vector<std::string> violations;
};

// Checks completeness, properness and list membership on raw colors.
ColoringReport verify_coloring(const Graph& g, const std::vector<Palette>& palettes, const Coloring& coloring);

}  // namespace d1lc
