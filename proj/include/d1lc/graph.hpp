#pragma once

#include "d1lc/types.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace d1lc {

using Edge = std::pair<NodeId, NodeId>;

// Immutable simple undirected graph with sorted adjacency lists.
class Graph {
public:
    Graph() = default;
    // Duplicate edges are merged; self-loops and out-of-range ids are rejected.
    Graph(std::size_t n, const std::vector<Edge>& edges);

    std::size_t n() const { return adj_.size(); }
    std::size_t m() const { return m_; }
    std::span<const NodeId> neighbors(NodeId v) const { return adj_[v]; }
    std::size_t degree(NodeId v) const { return adj_[v].size(); }
    std::size_t max_degree() const { return max_degree_; }
    bool has_edge(NodeId u, NodeId v) const;
    // Position of u in v's adjacency list, or -1.
    long index_of(NodeId v, NodeId u) const;
    // Each edge once, as (u, v) with u < v, in lexicographic order.
    std::vector<Edge> edges() const;
    // Subgraph induced by `keep` (original ids are preserved, others become isolated).
    Graph induced(const std::vector<bool>& keep) const;

private:
    std::vector<std::vector<NodeId>> adj_;
    std::size_t m_ = 0;
    std::size_t max_degree_ = 0;
};

Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& g);
Graph load_graph(const std::string& path);
void save_graph(const std::string& path, const Graph& g);

// One line per node: "v c1 c2 ...". Nodes missing from the input get empty palettes.
std::vector<Palette> read_palettes(std::istream& in, std::size_t n);
void write_palettes(std::ostream& out, const std::vector<Palette>& palettes);
std::vector<Palette> load_palettes(const std::string& path, std::size_t n);
void save_palettes(const std::string& path, const std::vector<Palette>& palettes);

}  // namespace d1lc
