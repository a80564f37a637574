#include "d1lc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace d1lc {

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : adj_(n) {
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
        if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& a : adj_) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        m_ += a.size();
        max_degree_ = std::max(max_degree_, a.size());
    }
    m_ /= 2;
}

bool Graph::has_edge(NodeId u, NodeId v) const { return index_of(u, v) >= 0; }

long Graph::index_of(NodeId v, NodeId u) const {
    const auto& a = adj_[v];
    auto it = std::lower_bound(a.begin(), a.end(), u);
    if (it == a.end() || *it != u) return -1;
    return static_cast<long>(it - a.begin());
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(m_);
    for (NodeId u = 0; u < adj_.size(); ++u)
        for (NodeId v : adj_[u])
            if (u < v) out.emplace_back(u, v);
    return out;
}

Graph Graph::induced(const std::vector<bool>& keep) const {
    std::vector<Edge> es;
    for (auto [u, v] : edges())
        if (keep[u] && keep[v]) es.emplace_back(u, v);
    return Graph(n(), es);
}

namespace {

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        return true;
    }
    return false;
}

}  // namespace

Graph read_graph(std::istream& in) {
    std::string line;
    if (!next_data_line(in, line)) throw std::runtime_error("graph input: missing header");
    std::istringstream hs(line);
    std::size_t n = 0, m = 0;
    if (!(hs >> n >> m)) throw std::runtime_error("graph input: header must be 'n m'");
    std::vector<Edge> edges;
    edges.reserve(m);
    while (edges.size() < m && next_data_line(in, line)) {
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u >> v) || u < 0 || v < 0)
            throw std::runtime_error("graph input: bad edge line '" + line + "'");
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    if (edges.size() != m) throw std::runtime_error("graph input: expected " + std::to_string(m) + " edges");
    return Graph(n, edges);
}

void write_graph(std::ostream& out, const Graph& g) {
    out << g.n() << ' ' << g.m() << '\n';
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open graph file " + path);
    return read_graph(f);
}

void save_graph(const std::string& path, const Graph& g) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write graph file " + path);
    write_graph(f, g);
}

std::vector<Palette> read_palettes(std::istream& in, std::size_t n) {
    std::vector<Palette> pal(n);
    std::vector<bool> seen(n, false);
    std::string line;
    while (next_data_line(in, line)) {
        std::istringstream ls(line);
        long long v;
        if (!(ls >> v) || v < 0 || static_cast<std::size_t>(v) >= n)
            throw std::runtime_error("palette input: bad node id in '" + line + "'");
        if (seen[v]) throw std::runtime_error("palette input: node " + std::to_string(v) + " listed twice");
        seen[v] = true;
        Color c;
        while (ls >> c) pal[v].push_back(c);
    }
    return pal;
}

void write_palettes(std::ostream& out, const std::vector<Palette>& palettes) {
    for (std::size_t v = 0; v < palettes.size(); ++v) {
        out << v;
        for (Color c : palettes[v]) out << ' ' << c;
        out << '\n';
    }
}

std::vector<Palette> load_palettes(const std::string& path, std::size_t n) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open palette file " + path);
    return read_palettes(f, n);
}

void save_palettes(const std::string& path, const std::vector<Palette>& palettes) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write palette file " + path);
    write_palettes(f, palettes);
}

}  // namespace d1lc
