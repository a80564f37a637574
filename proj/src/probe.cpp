#include "d1lc/probe.hpp"

#include "d1lc/hash.hpp"
#include "d1lc/types.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace d1lc {

namespace {

constexpr int kDegreeBits = 32;

std::vector<std::vector<std::uint64_t>> wide_adjacency(const Graph& g) {
    std::vector<std::vector<std::uint64_t>> adj(g.n());
    for (NodeId v = 0; v < g.n(); ++v) adj[v].assign(g.neighbors(v).begin(), g.neighbors(v).end());
    return adj;
}

// One round in which every node tells each neighbor its degree. Returns, per node,
// the degrees it received indexed like its adjacency list.
std::vector<std::vector<std::uint64_t>> exchange_degrees(Network& net, std::string_view phase) {
    net.round(phase, [&](NodeCtx& c) {
        BitString p;
        p.push(c.degree(), kDegreeBits);
        c.broadcast(p);
    });
    const Graph& g = net.graph();
    std::vector<std::vector<std::uint64_t>> got(g.n());
    for (NodeId v = 0; v < g.n(); ++v) {
        got[v].assign(g.degree(v), 0);
        for (const auto& m : net.inbox(v)) got[v][static_cast<std::size_t>(g.index_of(v, m.src))] = m.payload.get(0, kDegreeBits);
    }
    return got;
}

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("probe eps must lie in (0,1)");
}

std::vector<Edge> edges_of(const Graph& g, const std::vector<NodeId>& nodes) {
    std::vector<Edge> e;
    std::vector<bool> mark(g.n(), false);
    for (NodeId v : nodes) mark[v] = true;
    for (auto [a, b] : g.edges())
        if (mark[a] || mark[b]) e.emplace_back(a, b);
    return e;
}

std::vector<SparsityEstimate> sparsity_for(Network& net, const std::vector<NodeId>& nodes, double eps,
                                           const ProbeConfig& cfg) {
    check_eps(eps);
    const Graph& g = net.graph();
    auto adj = wide_adjacency(g);
    auto edges = edges_of(g, nodes);
    SimilarityConfig sim = cfg.sim;
    sim.eps = eps / 2;
    auto set_of = [&](NodeId self, NodeId) { return std::span<const std::uint64_t>(adj[self]); };
    auto res = estimate_similarity_batch(net, edges, set_of, sim, "sparsity");
    std::vector<double> sum(g.n(), 0.0);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        sum[edges[i].first] += res[i].estimate;
        sum[edges[i].second] += res[i].estimate;
    }
    const double D = static_cast<double>(g.max_degree());
    std::vector<SparsityEstimate> out;
    for (NodeId v : nodes) {
        SparsityEstimate s;
        s.node = v;
        s.kind = SparsityKind::Global;
        s.eps = eps;
        s.value = D > 0 ? (D - 1) / 2 - sum[v] / (2 * D) : 0.0;
        out.push_back(s);
    }
    return out;
}

std::vector<SparsityEstimate> local_sparsity_for(Network& net, const std::vector<NodeId>& nodes, double eps,
                                                 const ProbeConfig& cfg) {
    check_eps(eps);
    const Graph& g = net.graph();
    auto adj = wide_adjacency(g);
    auto deg = exchange_degrees(net, "local-sparsity");
    std::vector<bool> is_node(g.n(), false);
    for (NodeId v : nodes) is_node[v] = true;
    // low[v]: neighbors of degree < 2 d_v; count of the others decides validity.
    std::vector<std::vector<std::uint64_t>> low(g.n());
    std::vector<std::size_t> high(g.n(), 0);
    for (NodeId v : nodes) {
        auto nb = g.neighbors(v);
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (deg[v][i] < 2 * g.degree(v)) low[v].push_back(nb[i]);
            else ++high[v];
        }
    }
    SimilarityConfig sim = cfg.sim;
    sim.eps = eps / 3;
    std::vector<double> sum(g.n(), 0.0);
    // Sets differ per direction, so each edge runs once per owning endpoint.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<Edge> edges;
        for (NodeId v : nodes)
            for (std::uint64_t u : low[v])
                if ((pass == 0) == (v < u)) edges.emplace_back(v, static_cast<NodeId>(u));
        auto set_of = [&](NodeId self, NodeId other) {
            bool owner = is_node[self] && std::binary_search(low[self].begin(), low[self].end(), other) &&
                         ((pass == 0) == (self < other));
            return owner ? std::span<const std::uint64_t>(low[self]) : std::span<const std::uint64_t>(adj[self]);
        };
        auto res = estimate_similarity_batch(net, edges, set_of, sim, "local-sparsity");
        for (std::size_t i = 0; i < edges.size(); ++i) sum[edges[i].first] += res[i].estimate;
    }
    std::vector<SparsityEstimate> out;
    for (NodeId v : nodes) {
        SparsityEstimate s;
        s.node = v;
        s.kind = SparsityKind::Local;
        s.eps = eps;
        const double d = static_cast<double>(g.degree(v));
        s.valid = static_cast<double>(high[v]) < eps * d / 3;
        s.value = d > 0 ? (d - 1) / 2 - sum[v] / (2 * d) : 0.0;
        out.push_back(s);
    }
    return out;
}

std::vector<NodeId> all_nodes(const Graph& g) {
    std::vector<NodeId> v(g.n());
    for (NodeId i = 0; i < g.n(); ++i) v[i] = i;
    return v;
}

const EccCode& ecc_for(int bits) {
    static std::mutex mu;
    static std::map<int, EccCode> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(bits);
    if (it == cache.end()) it = cache.emplace(bits, EccCode::make(bits)).first;
    return it->second;
}

}  // namespace

std::vector<SparsityEstimate> estimate_sparsity_all(Network& net, double eps, const ProbeConfig& cfg) {
    return sparsity_for(net, all_nodes(net.graph()), eps, cfg);
}

SparsityEstimate estimate_sparsity(Network& net, NodeId v, double eps, const ProbeConfig& cfg) {
    return sparsity_for(net, {v}, eps, cfg)[0];
}

std::vector<SparsityEstimate> estimate_local_sparsity_all(Network& net, double eps, const ProbeConfig& cfg) {
    return local_sparsity_for(net, all_nodes(net.graph()), eps, cfg);
}

SparsityEstimate estimate_local_sparsity(Network& net, NodeId v, double eps, const ProbeConfig& cfg) {
    return local_sparsity_for(net, {v}, eps, cfg)[0];
}

std::vector<EdgeFlag> detect_triangle_edges(Network& net, double eps, const ProbeConfig& cfg) {
    check_eps(eps);
    const Graph& g = net.graph();
    auto adj = wide_adjacency(g);
    auto edges = g.edges();
    SimilarityConfig sim = cfg.sim;
    sim.eps = eps / 4;
    auto set_of = [&](NodeId self, NodeId) { return std::span<const std::uint64_t>(adj[self]); };
    auto res = estimate_similarity_batch(net, edges, set_of, sim, "triangles");
    const double thr = eps * static_cast<double>(g.max_degree()) / 2;
    std::vector<EdgeFlag> out(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
        out[i] = {edges[i].first, edges[i].second, res[i].estimate, res[i].estimate >= thr};
    return out;
}

std::vector<WedgeFlag> detect_c4_wedges(Network& net, double eps, const ProbeConfig& cfg,
                                        const std::vector<NodeId>& centers_in) {
    check_eps(eps);
    const Graph& g = net.graph();
    auto adj = wide_adjacency(g);
    std::vector<NodeId> centers = centers_in.empty() ? all_nodes(g) : centers_in;
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    SimilarityConfig sim = cfg.sim;
    sim.eps = eps / 4;

    // Round 1: neighbors report degrees so each center can size one common hash.
    auto deg = exchange_degrees(net, "c4");
    struct CenterState {
        SimilarityPlan plan;
        HashSpec h;
    };
    std::vector<CenterState> st(g.n());
    std::vector<bool> is_center(g.n(), false);
    for (NodeId v : centers) is_center[v] = true;

    // Round 2 (stream): center sends its seed and the largest neighbor degree.
    net.round("c4", centers, [&](NodeCtx& c) {
        NodeId v = c.id();
        if (c.degree() < 2) return;
        std::uint64_t mx = *std::max_element(deg[v].begin(), deg[v].end());
        std::uint64_t seed = c.rng().next();
        st[v].plan = plan_similarity(mx, mx, sim);
        st[v].h = sketch_hash(st[v].plan, seed);
        BitString p;
        p.push(seed, 64);
        p.push(mx, kDegreeBits);
        for (NodeId u : c.neighbors()) c.send_stream(u, p);
    });
    // Each neighbor rebuilds the hash from the received seed.
    std::vector<std::vector<std::pair<NodeId, CenterState>>> recv(g.n());
    for (NodeId u = 0; u < g.n(); ++u)
        for (const auto& m : net.inbox(u)) {
            BitReader r(m.payload);
            std::uint64_t seed = r.read(64), mx = r.read(kDegreeBits);
            CenterState cs;
            cs.plan = plan_similarity(mx, mx, sim);
            cs.h = sketch_hash(cs.plan, seed);
            recv[u].emplace_back(m.src, cs);
        }
    // Round 3 (stream): every neighbor answers with its hit mask of N(u) minus the center,
    // so the center never counts as a shared neighbor of its own wedge.
    net.round("c4", [&](NodeCtx& c) {
        std::vector<std::uint64_t> others;
        for (auto& [v, cs] : recv[c.id()]) {
            others.clear();
            for (std::uint64_t w : adj[c.id()])
                if (w != v) others.push_back(w);
            c.send_stream(v, hit_image_mask(others, cs.h, cs.plan.k, cs.plan.l));
        }
    });
    const double thr = eps * static_cast<double>(g.max_degree()) / 2;
    std::vector<WedgeFlag> out;
    for (NodeId v : centers) {
        if (g.degree(v) < 2) continue;
        std::vector<std::pair<NodeId, const BitString*>> masks;
        for (const auto& m : net.inbox(v)) masks.emplace_back(m.src, &m.payload);
        std::sort(masks.begin(), masks.end());
        const auto& P = st[v].plan;
        const double scale = static_cast<double>(P.T) / (static_cast<double>(P.l) * static_cast<double>(P.k));
        for (std::size_t i = 0; i < masks.size(); ++i)
            for (std::size_t j = i + 1; j < masks.size(); ++j) {
                double est = static_cast<double>(masks[i].second->and_popcount(*masks[j].second)) * scale;
                out.push_back({v, masks[i].first, masks[j].first, est, est >= thr});
            }
    }
    return out;
}

std::uint64_t similarity_round_cap(const SimilarityConfig& sim) {
    const double eps = sim.eps, alpha = eps * eps / 8, beta = eps / 4;
    const double lmax = std::ceil(sim.c_l * std::log(12.0 / sim.nu) / (alpha * beta * beta));
    return 2 + static_cast<std::uint64_t>(std::ceil(lmax / 64.0));
}

const char* to_string(BuddyBackend b) { return b == BuddyBackend::Idealized ? "idealized" : "uniform"; }

const char* to_string(Role r) {
    switch (r) {
        case Role::Sparse: return "sparse";
        case Role::Uneven: return "uneven";
        case Role::Dense: return "dense";
    }
    return "?";
}

std::vector<bool> buddy_batch(Network& net, std::span<const Edge> edges, const BuddyConfig& cfg) {
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0 / 6)) throw std::invalid_argument("buddy eps must lie in (0, 1/6)");
    const Graph& g = net.graph();
    const double eps = cfg.eps;
    std::vector<bool> flag(edges.size(), false);

    // Degree exchange on the listed edges.
    std::vector<std::vector<std::size_t>> incident(g.n());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        incident[edges[i].first].push_back(i);
        incident[edges[i].second].push_back(i);
    }
    auto other = [&](std::size_t i, NodeId self) { return edges[i].first == self ? edges[i].second : edges[i].first; };
    std::vector<NodeId> active;
    for (NodeId v = 0; v < g.n(); ++v)
        if (!incident[v].empty()) active.push_back(v);
    net.round("buddy", active, [&](NodeCtx& c) {
        for (std::size_t i : incident[c.id()]) {
            BitString p;
            p.push(c.degree(), kDegreeBits);
            c.send(other(i, c.id()), std::move(p));
        }
    });
    std::vector<bool> balanced(edges.size(), false);
    std::vector<Edge> live;
    std::vector<std::size_t> live_idx;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        std::uint64_t du = 0, dv = 0;
        for (const auto& m : net.inbox(v))
            if (m.src == u) du = m.payload.get(0, kDegreeBits);
        for (const auto& m : net.inbox(u))
            if (m.src == v) dv = m.payload.get(0, kDegreeBits);
        const double a = static_cast<double>(du), b = static_cast<double>(dv);
        balanced[i] = !(a > b / (1 - eps) || b > a / (1 - eps));
        if (balanced[i]) {
            live.push_back(edges[i]);
            live_idx.push_back(i);
        }
    }
    if (live.empty()) return flag;

    if (cfg.backend == BuddyBackend::Idealized) {
        auto adj = wide_adjacency(g);
        SimilarityConfig sim = cfg.sim;
        sim.eps = eps / 2;
        auto set_of = [&](NodeId self, NodeId) { return std::span<const std::uint64_t>(adj[self]); };
        auto res = estimate_similarity_batch(net, live, set_of, sim, "buddy");
        for (std::size_t j = 0; j < live.size(); ++j) {
            auto [u, v] = live[j];
            double mn = static_cast<double>(std::min(g.degree(u), g.degree(v)));
            flag[live_idx[j]] = res[j].estimate >= (1 - 2 * eps) * mn;
        }
        return flag;
    }

    // Uniform backend. The lower-id endpoint chooses a low-collision pairwise hash on
    // its neighborhood and a seed for both sampled multisets.
    const int id_bits = std::max(1, ceil_log2(g.n()));
    const std::size_t B = net.bandwidth();
    struct UState {
        HashSpec h;
        std::uint64_t seed = 0;
        std::uint64_t l = 0;
        bool ok = false;
    };
    std::vector<UState> st(live.size());
    std::vector<std::vector<std::size_t>> owned(g.n()), touch(g.n());
    for (std::size_t j = 0; j < live.size(); ++j) {
        owned[std::min(live[j].first, live[j].second)].push_back(j);
        touch[live[j].first].push_back(j);
        touch[live[j].second].push_back(j);
    }
    std::vector<NodeId> choosers, members;
    for (NodeId v = 0; v < g.n(); ++v) {
        if (!owned[v].empty()) choosers.push_back(v);
        if (!touch[v].empty()) members.push_back(v);
    }
    net.round("buddy", choosers, [&](NodeCtx& c) {
        NodeId v = c.id();
        std::vector<std::uint64_t> nb(c.neighbors().begin(), c.neighbors().end());
        for (std::size_t j : owned[v]) {
            NodeId u = live[j].first == v ? live[j].second : live[j].first;
            const std::uint64_t T = static_cast<std::uint64_t>(
                std::ceil(6.0 * static_cast<double>(std::max(g.degree(u), g.degree(v))) / eps));
            const auto budget = static_cast<std::size_t>(eps * static_cast<double>(g.degree(v)) / 3);
            BitString p;
            try {
                HashSpec h = choose_low_collision_hash(id_bits, T, nb, budget, c.rng(), cfg.retry_cap);
                p.push(1, 1);
                p.append(h.serialize());
                p.push(c.rng().next(), 64);
            } catch (const std::runtime_error&) {
                // No hash within the retry cap: the edge is declared not buddy.
                p.push(0, 1);
            }
            c.send_stream(u, std::move(p));
        }
    });
    for (std::size_t j = 0; j < live.size(); ++j) {
        NodeId lo = std::min(live[j].first, live[j].second), hi = std::max(live[j].first, live[j].second);
        for (const auto& m : net.inbox(hi))
            if (m.src == lo) {
                BitReader r(m.payload);
                if (!r.read_bit()) break;
                st[j].h = HashSpec::read(r);
                st[j].seed = r.read(64);
                st[j].l = std::min<std::uint64_t>(B, st[j].h.out_size);
                st[j].ok = true;
            }
    }
    // Unique-preimage bitmaps over the shared sampled multiset, one per edge side.
    // Table over hash values: 0 for no preimage, kMany for several, else preimage + 1.
    constexpr std::uint64_t kMany = ~std::uint64_t{0};
    std::vector<std::uint64_t> table;
    auto unique_bits = [&](NodeId self, const UState& s, const SamplerMultiset& S,
                           std::vector<std::uint64_t>& preimage) {
        table.assign(s.h.out_size + 1, 0);
        for (NodeId w : g.neighbors(self)) {
            auto& t = table[s.h(w)];
            t = t == 0 ? std::uint64_t{w} + 1 : kMany;
        }
        BitString b(S.size);
        preimage.assign(S.size, 0);
        for (std::size_t i = 0; i < S.size; ++i) {
            std::uint64_t t = table[S.elements[i]];
            if (t == 0 || t == kMany) continue;
            b.set_bit(i);
            preimage[i] = t - 1;
        }
        return b;
    };
    struct Side {
        BitString bits;
        std::vector<std::uint64_t> pre;
    };
    std::vector<std::array<Side, 2>> side(live.size());
    for (std::size_t j = 0; j < live.size(); ++j) {
        if (!st[j].ok) continue;
        auto S = sample_multiset(st[j].h.out_size, st[j].l, derive_seed(st[j].seed, 1));
        side[j][0].bits = unique_bits(live[j].first, st[j], S, side[j][0].pre);
        side[j][1].bits = unique_bits(live[j].second, st[j], S, side[j][1].pre);
    }
    net.round("buddy", members, [&](NodeCtx& c) {
        for (std::size_t j : touch[c.id()]) {
            if (!st[j].ok) continue;
            bool is_u = live[j].first == c.id();
            c.send(is_u ? live[j].second : live[j].first, side[j][is_u ? 0 : 1].bits);
        }
    });
    const EccCode& code = ecc_for(id_bits);
    struct Stage2 {
        BitString xu, xv;
        std::vector<std::uint64_t> pos;
        bool go = false;
    };
    std::vector<Stage2> s2(live.size());
    for (std::size_t j = 0; j < live.size(); ++j) {
        if (!st[j].ok) continue;
        auto [u, v] = live[j];
        const BitString& bu = side[j][0].bits;
        const BitString& bv = side[j][1].bits;
        const auto& pre_u = side[j][0].pre;
        const auto& pre_v = side[j][1].pre;
        const BitString* got_u = nullptr;
        const BitString* got_v = nullptr;
        for (const auto& m : net.inbox(v))
            if (m.src == u) got_u = &m.payload;
        for (const auto& m : net.inbox(u))
            if (m.src == v) got_v = &m.payload;
        if (!got_u || !got_v || !(*got_u == bu) || !(*got_v == bv))
            throw std::logic_error("buddy bitmap delivery mismatch");
        const std::size_t shared = bu.and_popcount(bv);
        const std::size_t hu = bu.popcount(), hv = bv.popcount();
        // Hit density is about eps/6 of the sample, so the threshold is taken relative
        // to the larger hit count rather than the sample size.
        if (static_cast<double>(shared) <= (1 - 3 * eps) * static_cast<double>(std::max(hu, hv))) continue;
        auto& z = s2[j];
        for (std::size_t i = 0; i < bu.size(); ++i)
            if (bu.bit(i) && bv.bit(i)) {
                BitString idu, idv;
                idu.push(pre_u[i], id_bits);
                idv.push(pre_v[i], id_bits);
                z.xu.append(code.encode(idu));
                z.xv.append(code.encode(idv));
            }
        const std::uint64_t L = z.xu.size();
        const std::uint64_t l2 = std::min<std::uint64_t>(B, L);
        z.pos = sample_multiset(L, l2, derive_seed(st[j].seed, 2)).elements;
        z.go = true;
    }
    // Exchange the sampled code bits and count disagreements.
    net.round("buddy", members, [&](NodeCtx& c) {
        for (std::size_t j : touch[c.id()]) {
            if (!s2[j].go) continue;
            bool is_u = live[j].first == c.id();
            const BitString& x = is_u ? s2[j].xu : s2[j].xv;
            BitString p(s2[j].pos.size());
            for (std::size_t q = 0; q < s2[j].pos.size(); ++q)
                if (x.bit(s2[j].pos[q] - 1)) p.set_bit(q);
            c.send(is_u ? live[j].second : live[j].first, std::move(p));
        }
    });
    for (std::size_t j = 0; j < live.size(); ++j) {
        if (!s2[j].go) continue;
        auto [u, v] = live[j];
        const BitString* from_u = nullptr;
        const BitString* from_v = nullptr;
        for (const auto& m : net.inbox(v))
            if (m.src == u) from_u = &m.payload;
        for (const auto& m : net.inbox(u))
            if (m.src == v) from_v = &m.payload;
        if (!from_u || !from_v) throw std::logic_error("buddy code bits not delivered");
        std::size_t diff = 0;
        for (std::size_t w = 0; w < from_u->word_count(); ++w)
            diff += static_cast<std::size_t>(std::popcount(from_u->data()[w] ^ from_v->data()[w]));
        flag[live_idx[j]] = static_cast<double>(diff) < eps * static_cast<double>(from_u->size());
    }
    return flag;
}

bool buddy(Network& net, NodeId u, NodeId v, const BuddyConfig& cfg) {
    Edge e{u, v};
    return buddy_batch(net, std::span<const Edge>(&e, 1), cfg)[0];
}

std::vector<std::vector<NodeId>> AcdLabels::cliques() const {
    std::map<long, std::vector<NodeId>> by;
    for (NodeId v = 0; v < role.size(); ++v)
        if (role[v] == Role::Dense) by[clique_id[v]].push_back(v);
    std::vector<std::vector<NodeId>> out;
    for (auto& [id, members] : by) out.push_back(std::move(members));
    return out;
}

AcdLabels compute_acd(Network& net, const AcdConfig& cfg) {
    if (!(cfg.eps_acd > 0.0 && cfg.eps_acd <= 0.1)) throw std::invalid_argument("eps_acd must lie in (0, 1/10]");
    if (!(cfg.eps_spa > 0.0 && cfg.eps_spa < 1.0)) throw std::invalid_argument("eps_spa must lie in (0, 1)");
    const Graph& g = net.graph();
    const std::size_t n = g.n();
    const int id_bits = std::max(1, ceil_log2(n));
    AcdLabels L;
    L.eps_acd = cfg.eps_acd;
    L.eps_spa = cfg.eps_spa;
    L.role.assign(n, Role::Sparse);
    L.clique_id.assign(n, -1);

    // (1) buddy predicate on every edge.
    auto edges = g.edges();
    BuddyConfig bc;
    bc.eps = cfg.eps_acd;
    bc.backend = cfg.backend;
    bc.sim = cfg.sim;
    auto flags = buddy_batch(net, edges, bc);
    std::vector<std::vector<NodeId>> buddies(n);
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (flags[i]) {
            buddies[edges[i].first].push_back(edges[i].second);
            buddies[edges[i].second].push_back(edges[i].first);
        }
    // (2) dense candidates. The cut uses the same relaxed 2 eps slack as the validation below,
    // since the degree-balance test alone can remove eps d buddies at a clique's degree extremes.
    std::vector<bool> cand(n, false);
    for (NodeId v = 0; v < n; ++v)
        cand[v] = g.degree(v) > 0 &&
                  static_cast<double>(buddies[v].size()) >= (1 - 2 * cfg.eps_acd) * static_cast<double>(g.degree(v));
    // Candidates tell buddies whether they are candidates.
    net.round("acd", [&](NodeCtx& c) {
        for (NodeId u : buddies[c.id()]) {
            BitString p;
            p.push_bit(cand[c.id()]);
            c.send(u, std::move(p));
        }
    });
    std::vector<std::vector<NodeId>> links(n);
    for (NodeId v = 0; v < n; ++v) {
        if (!cand[v]) continue;
        for (const auto& m : net.inbox(v))
            if (m.payload.bit(0)) links[v].push_back(m.src);
        std::sort(links[v].begin(), links[v].end());
    }

    // (3) min-id flooding over candidate buddy links, carrying hop counts to build a BFS forest.
    std::vector<NodeId> label(n), parent(n, kNoNode);
    std::vector<std::uint32_t> depth(n, 0);
    for (NodeId v = 0; v < n; ++v) label[v] = v;
    std::vector<NodeId> cands;
    for (NodeId v = 0; v < n; ++v)
        if (cand[v]) cands.push_back(v);
    const int R = std::max(1, cfg.flood_rounds);
    for (int r = 0; r < R; ++r) {
        net.round("acd", cands, [&](NodeCtx& c) {
            BitString p;
            p.push(label[c.id()], id_bits);
            p.push(depth[c.id()], 8);
            for (NodeId u : links[c.id()]) c.send(u, p);
        });
        net.local(cands, [&](NodeCtx& c) {
            NodeId v = c.id();
            for (const auto& m : c.inbox()) {
                if (!std::binary_search(links[v].begin(), links[v].end(), m.src)) continue;
                NodeId lb = static_cast<NodeId>(m.payload.get(0, id_bits));
                std::uint32_t dp = static_cast<std::uint32_t>(m.payload.get(id_bits, 8)) + 1;
                if (lb < label[v] || (lb == label[v] && lb != v && dp < depth[v])) {
                    label[v] = lb;
                    depth[v] = dp;
                    parent[v] = m.src;
                }
            }
        });
    }
    // Tree nodes carry counts for their label; members are the nodes counted. Nodes that leave
    // stay in the tree as relays so their subtrees keep reaching the root.
    std::vector<NodeId> tree = cands;
    std::vector<bool> in_tree(n, false), member(n, false);
    for (NodeId v : cands) in_tree[v] = true;
    int max_depth = R;
    // Convergecast along parents, deepest layer first. Counts travel only between nodes that
    // agree on the label.
    auto convergecast = [&](std::vector<std::uint64_t>& acc, int width) {
        for (int d = max_depth; d >= 1; --d) {
            net.round("acd", tree, [&](NodeCtx& c) {
                NodeId v = c.id();
                if (static_cast<int>(depth[v]) != d || parent[v] == kNoNode) return;
                BitString p;
                p.push(label[v], id_bits);
                p.push(acc[v], width);
                c.send(parent[v], std::move(p));
            });
            net.local(tree, [&](NodeCtx& c) {
                for (const auto& m : c.inbox())
                    if (m.payload.get(0, id_bits) == label[c.id()]) acc[c.id()] += m.payload.get(id_bits, width);
            });
        }
    };
    // Root broadcast down the tree; returns per node the value from its own root.
    auto broadcast_down = [&](const std::vector<std::uint64_t>& at_root, int width) {
        std::vector<std::optional<std::uint64_t>> got(n);
        for (NodeId v : tree)
            if (label[v] == v) got[v] = at_root[v];
        for (int d = 0; d < max_depth; ++d) {
            net.round("acd", tree, [&](NodeCtx& c) {
                NodeId v = c.id();
                if (static_cast<int>(depth[v]) != d || !got[v]) return;
                BitString p;
                p.push(label[v], id_bits);
                p.push(*got[v], width);
                c.broadcast(p);
            });
            net.local(tree, [&](NodeCtx& c) {
                NodeId v = c.id();
                for (const auto& m : c.inbox())
                    if (m.src == parent[v] && m.payload.get(0, id_bits) == label[v])
                        got[v] = m.payload.get(id_bits, width);
            });
        }
        return got;
    };
    const int cnt_bits = id_bits + 1;
    auto count_members = [&] {
        std::vector<std::uint64_t> sub(n, 0);
        for (NodeId v : tree) sub[v] = member[v] ? 1 : 0;
        convergecast(sub, cnt_bits);
        return broadcast_down(sub, cnt_bits);
    };
    for (NodeId v : cands) member[v] = true;
    auto size = count_members();
    for (NodeId v : cands)
        if (!size[v]) member[v] = false;
    const double slack = 1 + 2 * cfg.eps_acd;
    auto fits = [&](std::size_t d, std::size_t inside, double C) {
        return static_cast<double>(d) <= slack * C && slack * static_cast<double>(inside) >= C;
    };
    // Everyone announces (member, label, clique size, depth) to its neighbors.
    auto announce = [&] {
        net.round("acd", [&](NodeCtx& c) {
            const NodeId v = c.id();
            BitString p;
            p.push(member[v] ? 1 : 0, 1);
            p.push(label[v], id_bits);
            p.push(member[v] ? *size[v] : 0, cnt_bits);
            p.push(depth[v], 8);
            c.broadcast(p);
        });
    };
    // Repair by connectivity alone: outside nodes adjacent to enough of a neighboring clique
    // (counting themselves) join it as leaves, then members adjacent to too few leave. The
    // degree bound is left to the final check, since dropping members only makes it harder.
    constexpr int kRepairIterations = 3;
    for (int it = 0; it < 2 * kRepairIterations; ++it) {
        const bool joining = it % 2 == 0;
        announce();
        std::vector<bool> next = member;
        for (NodeId v = 0; v < n; ++v) {
            std::map<NodeId, std::pair<std::size_t, std::uint64_t>> seen;  // label -> (inside, size)
            for (const auto& m : net.inbox(v)) {
                if (!m.payload.bit(0)) continue;
                auto& e = seen[static_cast<NodeId>(m.payload.get(1, id_bits))];
                ++e.first;
                e.second = m.payload.get(1 + id_bits, cnt_bits);
            }
            if (!joining) {
                if (!member[v]) continue;
                auto found = seen.find(label[v]);
                const std::size_t inside = found == seen.end() ? 0 : found->second.first;
                if (slack * static_cast<double>(inside) < static_cast<double>(*size[v])) next[v] = false;
                continue;
            }
            if (in_tree[v] || g.degree(v) == 0) continue;
            NodeId best = kNoNode;
            std::size_t best_inside = 0;
            for (auto [lb, e] : seen)
                if (slack * static_cast<double>(e.first) >= static_cast<double>(e.second + 1) && e.first > best_inside) {
                    best = lb;
                    best_inside = e.first;
                }
            if (best == kNoNode) continue;
            // Attach below the shallowest announcing member of that clique.
            std::uint32_t pd = std::numeric_limits<std::uint32_t>::max();
            for (const auto& m : net.inbox(v))
                if (m.payload.bit(0) && m.payload.get(1, id_bits) == best) {
                    const auto d = static_cast<std::uint32_t>(m.payload.get(1 + id_bits + cnt_bits, 8));
                    if (d < pd) {
                        pd = d;
                        parent[v] = m.src;
                    }
                }
            label[v] = best;
            depth[v] = pd + 1;
            in_tree[v] = true;
            next[v] = true;
            max_depth = std::max(max_depth, static_cast<int>(depth[v]));
        }
        member = next;
        tree.clear();
        for (NodeId v = 0; v < n; ++v)
            if (in_tree[v]) tree.push_back(v);
        size = count_members();
    }
    // Final check: a clique is accepted only if every remaining member satisfies the bounds.
    announce();
    std::vector<std::uint64_t> bad(n, 0);
    for (NodeId v : tree) {
        if (!member[v]) continue;
        if (!size[v]) {
            bad[v] = 1;
            continue;
        }
        std::size_t inside = 0;
        for (const auto& m : net.inbox(v))
            if (m.payload.bit(0) && m.payload.get(1, id_bits) == label[v]) ++inside;
        if (!fits(g.degree(v), inside, static_cast<double>(*size[v]))) bad[v] = 1;
    }
    convergecast(bad, cnt_bits);
    auto verdict = broadcast_down(bad, cnt_bits);
    for (NodeId v : tree)
        if (member[v] && verdict[v] && *verdict[v] == 0 && size[v]) {
            L.role[v] = Role::Dense;
            L.clique_id[v] = label[v];
        }
    // (4) exact unevenness for the remaining nodes.
    auto deg = exchange_degrees(net, "acd");
    for (NodeId v = 0; v < n; ++v) {
        if (L.role[v] == Role::Dense) continue;
        const double dv = static_cast<double>(g.degree(v));
        double u = 0;
        for (std::uint64_t du : deg[v]) u += std::max(0.0, static_cast<double>(du) - dv) / (static_cast<double>(du) + 1);
        L.role[v] = (dv > 0 && u >= cfg.eps_spa * dv) ? Role::Uneven : Role::Sparse;
    }
    return L;
}

}  // namespace d1lc
