#include "d1lc/dense.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace d1lc {

namespace {

BitString tagged(MsgKind k) {
    BitString p;
    p.push(static_cast<std::uint64_t>(k), kKindBits);
    return p;
}

// Messages from `src` in v's current inbox.
const Message* from(Network& net, NodeId v, NodeId src) {
    for (const auto& m : net.inbox(v))
        if (m.src == src) return &m;
    return nullptr;
}

}  // namespace

const char* to_string(SlackClass c) { return c == SlackClass::Low ? "low" : "high"; }

double desk_ell(std::size_t max_degree) {
    const double D = static_cast<double>(std::max<std::size_t>(max_degree, 1));
    return std::max(std::ceil(std::pow(std::log(D), 2.1)), 4.0);
}

std::size_t CliqueInfo::index_of(NodeId v) const {
    auto it = std::lower_bound(members.begin(), members.end(), v);
    if (it == members.end() || *it != v) throw std::out_of_range("node is not a member of this clique");
    return static_cast<std::size_t>(it - members.begin());
}

DenseMachinery::DenseMachinery(ColoringEngine& eng, const AcdLabels& acd, DenseConfig cfg) : eng_(eng), cfg_(cfg) {
    const Graph& g = eng.graph();
    if (acd.role.size() != g.n()) throw std::invalid_argument("ACD labels do not match the graph");
    ell_ = cfg.ell > 0 ? cfg.ell : desk_ell(g.max_degree());
    id_bits_ = std::max(1, ceil_log2(g.n() + 1));
    clique_of_.assign(g.n(), -1);
    for (auto& members : acd.cliques()) {
        CliqueInfo c;
        c.clique_id = acd.clique_id[members.front()];
        c.members = members;
        c.ell = ell_;
        for (NodeId v : members) clique_of_[v] = static_cast<long>(cliques_.size());
        cliques_.push_back(std::move(c));
    }
    nb_clique_.resize(g.n());
    nb_adj_leader_.resize(g.n());
}

std::vector<NodeId> DenseMachinery::dense_nodes() const {
    std::vector<NodeId> out;
    for (const auto& c : cliques_) out.insert(out.end(), c.members.begin(), c.members.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> DenseMachinery::outlier_nodes() const {
    std::vector<NodeId> out;
    for (const auto& c : cliques_) out.insert(out.end(), c.outliers.begin(), c.outliers.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NodeId> DenseMachinery::put_aside_nodes() const {
    std::vector<NodeId> out;
    for (const auto& c : cliques_) out.insert(out.end(), c.put_aside.begin(), c.put_aside.end());
    std::sort(out.begin(), out.end());
    return out;
}

void DenseMachinery::select_leaders() {
    Network& net = eng_.net();
    const Graph& g = eng_.graph();
    const std::string phase = eng_.phase() + "/leader";
    // Clique ids travel as index + 1 so that 0 means "not dense".
    const int cid_bits = bits_for(cliques_.size() + 1);
    net.round(phase, [&](NodeCtx& c) {
        BitString p = tagged(MsgKind::Data);
        p.push(static_cast<std::uint64_t>(clique_of_[c.id()] + 1), cid_bits);
        c.broadcast(p);
    });
    for (NodeId v = 0; v < g.n(); ++v) {
        nb_clique_[v].assign(g.degree(v), -1);
        for (const auto& m : net.inbox(v))
            nb_clique_[v][static_cast<std::size_t>(g.index_of(v, m.src))] =
                static_cast<long>(m.payload.get(kKindBits, cid_bits)) - 1;
    }
    const int agg_bits = bits_for(3 * g.n() + 3);
    std::vector<std::uint64_t> best_agg(g.n(), 0);
    std::vector<NodeId> best_id(g.n(), kNoNode);
    std::vector<NodeId> members;
    for (auto& c : cliques_) {
        const std::size_t k = c.members.size();
        c.external_degree.assign(k, 0);
        c.anti_degree.assign(k, 0);
        c.chromatic_slack.assign(k, 0);
        for (std::size_t i = 0; i < k; ++i) {
            const NodeId v = c.members[i];
            const long me = clique_of_[v];
            const auto inside = static_cast<std::size_t>(std::count(nb_clique_[v].begin(), nb_clique_[v].end(), me));
            c.external_degree[i] = g.degree(v) - inside;
            c.anti_degree[i] = k - 1 - inside;
            c.chromatic_slack[i] = eng_.chromatic_slack(v);
            best_agg[v] = c.external_degree[i] + c.anti_degree[i] + c.chromatic_slack[i];
            best_id[v] = v;
            members.push_back(v);
        }
    }
    std::sort(members.begin(), members.end());
    // Two min-reduction rounds over in-clique edges reach the whole clique (diameter <= 2).
    for (int step = 0; step < 2; ++step) {
        net.round(phase, members, [&](NodeCtx& c) {
            BitString p = tagged(MsgKind::Data);
            p.push(best_agg[c.id()], agg_bits);
            p.push(best_id[c.id()], id_bits_);
            c.broadcast(p);
        });
        for (NodeId v : members) {
            for (const auto& m : net.inbox(v)) {
                if (nb_clique_[v][static_cast<std::size_t>(g.index_of(v, m.src))] != clique_of_[v]) continue;
                const std::uint64_t a = m.payload.get(kKindBits, agg_bits);
                const auto id = static_cast<NodeId>(m.payload.get(kKindBits + agg_bits, id_bits_));
                if (a < best_agg[v] || (a == best_agg[v] && id < best_id[v])) {
                    best_agg[v] = a;
                    best_id[v] = id;
                }
            }
        }
    }
    for (auto& c : cliques_) {
        c.leader = best_id[c.members.front()];
        for (NodeId v : c.members)
            if (best_id[v] != c.leader) throw std::logic_error("leader election disagreed inside a clique");
    }
    adjacency_known_ = false;
}

void DenseMachinery::learn_leader_adjacency() {
    Network& net = eng_.net();
    const Graph& g = eng_.graph();
    const std::string phase = eng_.phase() + "/leader-adjacency";
    std::vector<NodeId> members = dense_nodes();
    auto leader_of = [&](NodeId v) { return cliques_[static_cast<std::size_t>(clique_of_[v])].leader; };
    net.round(phase, members, [&](NodeCtx& c) {
        BitString p = tagged(MsgKind::Data);
        p.push(leader_of(c.id()), id_bits_);
        c.broadcast(p);
    });
    // Each node answers every member neighbor: am I adjacent to your leader?
    std::vector<std::vector<std::pair<NodeId, NodeId>>> asked(g.n());
    for (NodeId w = 0; w < g.n(); ++w)
        for (const auto& m : net.inbox(w)) asked[w].emplace_back(m.src, static_cast<NodeId>(m.payload.get(kKindBits, id_bits_)));
    net.round(phase, [&](NodeCtx& c) {
        for (auto [v, x] : asked[c.id()]) {
            BitString p = tagged(MsgKind::Data);
            p.push_bit(c.id() != x && g.has_edge(c.id(), x));
            c.send(v, std::move(p));
        }
    });
    for (NodeId v : members) {
        nb_adj_leader_[v].assign(g.degree(v), 0);
        for (const auto& m : net.inbox(v))
            nb_adj_leader_[v][static_cast<std::size_t>(g.index_of(v, m.src))] = m.payload.bit(kKindBits) ? 1 : 0;
    }
    adjacency_known_ = true;
}

void DenseMachinery::partition_inliers_outliers() {
    if (!adjacency_known_) learn_leader_adjacency();
    Network& net = eng_.net();
    const Graph& g = eng_.graph();
    const std::string phase = eng_.phase() + "/outliers";
    const int cnt_bits = bits_for(g.n());
    const std::size_t rec_bits = static_cast<std::size_t>(id_bits_ + 2 * cnt_bits + 1);
    auto record = [&](NodeId v, std::size_t common, bool adj) {
        BitString p;
        p.push(v, id_bits_);
        p.push(common, cnt_bits);
        p.push(g.degree(v), cnt_bits);
        p.push_bit(adj);
        return p;
    };
    std::vector<NodeId> members = dense_nodes();
    std::vector<std::size_t> common(g.n(), 0);
    std::vector<NodeId> relay(g.n(), kNoNode);
    for (NodeId v : members) {
        const NodeId x = cliques_[static_cast<std::size_t>(clique_of_[v])].leader;
        for (auto f : nb_adj_leader_[v]) common[v] += f;
        if (v == x || g.has_edge(v, x)) continue;
        auto nb = g.neighbors(v);
        for (std::size_t i = 0; i < nb.size(); ++i)
            if (nb_clique_[v][i] == clique_of_[v] && nb_adj_leader_[v][i]) {
                relay[v] = nb[i];
                break;
            }
    }
    // Round 1: direct records to the leader, anti-neighbors' records to a relay.
    net.round(phase, members, [&](NodeCtx& c) {
        const NodeId v = c.id();
        const NodeId x = cliques_[static_cast<std::size_t>(clique_of_[v])].leader;
        if (v == x) return;
        const bool adj = g.has_edge(v, x);
        BitString p = tagged(MsgKind::Data);
        p.append(record(v, common[v], adj));
        if (adj) c.send(x, std::move(p));
        else if (relay[v] != kNoNode) c.send(relay[v], std::move(p));
    });
    struct Rec {
        NodeId v;
        std::size_t common, degree;
        bool adj;
    };
    std::vector<std::vector<Rec>> at_leader(cliques_.size());
    auto parse = [&](const BitString& s, std::size_t pos) {
        Rec r;
        r.v = static_cast<NodeId>(s.get(pos, id_bits_));
        r.common = s.get(pos + id_bits_, cnt_bits);
        r.degree = s.get(pos + id_bits_ + cnt_bits, cnt_bits);
        r.adj = s.bit(pos + id_bits_ + 2 * cnt_bits);
        return r;
    };
    std::vector<BitString> forward(g.n());
    for (NodeId w : members) {
        const auto ci = static_cast<std::size_t>(clique_of_[w]);
        const bool is_leader = cliques_[ci].leader == w;
        for (const auto& m : net.inbox(w)) {
            if (is_leader) at_leader[ci].push_back(parse(m.payload, kKindBits));
            else forward[w].append(m.payload);
        }
    }
    // Round 2: relays forward what they collected, as one stream.
    net.round(phase, members, [&](NodeCtx& c) {
        const NodeId w = c.id();
        if (forward[w].empty()) return;
        const NodeId x = cliques_[static_cast<std::size_t>(clique_of_[w])].leader;
        c.send_stream(x, forward[w]);
    });
    const std::size_t framed = kKindBits + rec_bits;
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) {
        const NodeId x = cliques_[ci].leader;
        for (const auto& m : net.inbox(x))
            for (std::size_t pos = 0; pos + framed <= m.payload.size(); pos += framed)
                at_leader[ci].push_back(parse(m.payload, pos + kKindBits));
    }
    // Leader applies the outlier rules to the records it holds; it never marks itself.
    std::vector<std::uint8_t> outlier(g.n(), 0);
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) {
        auto& C = cliques_[ci];
        const NodeId x = C.leader;
        auto recs = at_leader[ci];
        std::sort(recs.begin(), recs.end(), [](const Rec& a, const Rec& b) { return a.v < b.v; });
        const double size = static_cast<double>(C.members.size());
        const auto q1 = static_cast<std::size_t>(std::ceil(std::max(static_cast<double>(g.degree(x)), size) / 3));
        const auto q2 = static_cast<std::size_t>(std::ceil(size / 6));
        auto by_common = recs;
        std::stable_sort(by_common.begin(), by_common.end(), [](const Rec& a, const Rec& b) { return a.common < b.common; });
        for (std::size_t i = 0; i < std::min(q1, by_common.size()); ++i) outlier[by_common[i].v] = 1;
        auto by_degree = recs;
        std::stable_sort(by_degree.begin(), by_degree.end(), [](const Rec& a, const Rec& b) { return a.degree > b.degree; });
        for (std::size_t i = 0; i < std::min(q2, by_degree.size()); ++i) outlier[by_degree[i].v] = 1;
        for (const auto& r : recs)
            if (!r.adj) outlier[r.v] = 1;
        C.delta_c = g.degree(x);
        for (const auto& r : recs) C.delta_c = std::max(C.delta_c, r.degree);
    }
    // Round 3: leader notifies its in-clique neighbors; anti-neighbors know they are outliers.
    std::vector<NodeId> leaders;
    for (const auto& C : cliques_) leaders.push_back(C.leader);
    std::sort(leaders.begin(), leaders.end());
    net.round(phase, leaders, [&](NodeCtx& c) {
        const NodeId x = c.id();
        auto nb = c.neighbors();
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (nb_clique_[x][i] != clique_of_[x]) continue;
            BitString p = tagged(MsgKind::Data);
            p.push_bit(outlier[nb[i]] != 0);
            c.send(nb[i], std::move(p));
        }
    });
    for (auto& C : cliques_) {
        C.inliers.clear();
        C.outliers.clear();
        C.common_with_leader.assign(C.members.size(), 0);
        for (std::size_t i = 0; i < C.members.size(); ++i) {
            const NodeId v = C.members[i];
            C.common_with_leader[i] = common[v];
            bool out;
            if (v == C.leader) out = false;
            else if (const Message* m = from(net, v, C.leader)) out = m->payload.bit(kKindBits);
            else out = true;
            (out ? C.outliers : C.inliers).push_back(v);
        }
    }
}

void DenseMachinery::classify_slackability() {
    if (!adjacency_known_) learn_leader_adjacency();
    Network& net = eng_.net();
    const Graph& g = eng_.graph();
    const std::string phase = eng_.phase() + "/classify";
    const int cnt_bits = bits_for(g.n());
    std::vector<NodeId> members = dense_nodes();
    // Each in-clique neighbor of the leader counts its neighbors inside N_C(leader).
    net.round(phase, members, [&](NodeCtx& c) {
        const NodeId u = c.id();
        const NodeId x = cliques_[static_cast<std::size_t>(clique_of_[u])].leader;
        if (u == x || !g.has_edge(u, x)) return;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < nb_clique_[u].size(); ++i)
            if (nb_clique_[u][i] == clique_of_[u] && nb_adj_leader_[u][i]) ++cnt;
        BitString p = tagged(MsgKind::Data);
        p.push(cnt, cnt_bits);
        c.send(x, std::move(p));
    });
    for (auto& C : cliques_) {
        const NodeId x = C.leader;
        double sum = 0;
        for (const auto& m : net.inbox(x)) sum += static_cast<double>(m.payload.get(kKindBits, cnt_bits));
        const double d = static_cast<double>(g.degree(x));
        const double m_hat = sum / 2;
        C.sparsity_estimate = d > 0 ? (d * (d - 1) / 2 - m_hat) / d : 0.0;
        const std::size_t xi = C.index_of(x);
        C.slackability_estimate = static_cast<double>(C.external_degree[xi]) + C.sparsity_estimate +
                                  static_cast<double>(C.chromatic_slack[xi]);
        C.slack_class = C.slackability_estimate <= cfg_.c_class * ell_ ? SlackClass::Low : SlackClass::High;
    }
    // Leader tells its in-clique neighbors the class and the clique's max degree.
    std::vector<NodeId> leaders;
    for (const auto& C : cliques_) leaders.push_back(C.leader);
    std::sort(leaders.begin(), leaders.end());
    net.round(phase, leaders, [&](NodeCtx& c) {
        const auto& C = cliques_[static_cast<std::size_t>(clique_of_[c.id()])];
        auto nb = c.neighbors();
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (nb_clique_[c.id()][i] != clique_of_[c.id()]) continue;
            BitString p = tagged(MsgKind::Data);
            p.push_bit(C.slack_class == SlackClass::Low);
            p.push(C.delta_c, cnt_bits);
            c.send(nb[i], std::move(p));
        }
    });
}

void DenseMachinery::put_aside() {
    Network& net = eng_.net();
    const Graph& g = eng_.graph();
    const std::string phase = eng_.phase() + "/put-aside";
    const int cnt_bits = bits_for(g.n());
    const int cid_bits = bits_for(cliques_.size() + 1);
    std::vector<std::uint8_t> sampled(g.n(), 0);
    std::vector<NodeId> samplers;
    for (auto& C : cliques_) {
        C.core.clear();
        C.put_aside.clear();
        for (NodeId v : C.inliers)
            if (v != C.leader && !eng_.colored(v) && g.has_edge(v, C.leader)) C.core.push_back(v);
        if (C.slack_class != SlackClass::Low) continue;
        const double p = std::min(1.0, ell_ * ell_ / (48.0 * static_cast<double>(std::max<std::size_t>(C.delta_c, 1))));
        for (NodeId v : C.core)
            if (net.rng(v).bernoulli(p)) {
                sampled[v] = 1;
                samplers.push_back(v);
            }
    }
    std::sort(samplers.begin(), samplers.end());
    // Round 1: sampled nodes announce themselves with their clique.
    net.round(phase, samplers, [&](NodeCtx& c) {
        BitString p = tagged(MsgKind::Data);
        p.push(static_cast<std::uint64_t>(clique_of_[c.id()] + 1), cid_bits);
        c.broadcast(p);
    });
    std::vector<NodeId> survivors;
    for (NodeId v : samplers) {
        bool clash = false;
        for (const auto& m : net.inbox(v))
            if (static_cast<long>(m.payload.get(kKindBits, cid_bits)) - 1 != clique_of_[v]) clash = true;
        if (!clash) survivors.push_back(v);
    }
    // Round 2: survivors report to the leader.
    net.round(phase, survivors, [&](NodeCtx& c) {
        c.send(cliques_[static_cast<std::size_t>(clique_of_[c.id()])].leader, tagged(MsgKind::Data));
    });
    const auto cap = static_cast<std::size_t>(std::floor(cfg_.c_pa * ell_));
    std::vector<NodeId> leaders;
    std::vector<std::vector<NodeId>> kept(cliques_.size());
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) {
        auto& C = cliques_[ci];
        std::vector<NodeId> got;
        for (const auto& m : net.inbox(C.leader)) got.push_back(m.src);
        std::sort(got.begin(), got.end());
        if (got.size() > cap) got.resize(cap);
        kept[ci] = got;
        if (!got.empty()) leaders.push_back(C.leader);
    }
    std::sort(leaders.begin(), leaders.end());
    // Round 3: leader confirms the trimmed set and each member's rank in it.
    net.round(phase, leaders, [&](NodeCtx& c) {
        const auto ci = static_cast<std::size_t>(clique_of_[c.id()]);
        for (std::size_t r = 0; r < kept[ci].size(); ++r) {
            BitString p = tagged(MsgKind::Data);
            p.push(r, cnt_bits);
            c.send(kept[ci][r], std::move(p));
        }
    });
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) cliques_[ci].put_aside = kept[ci];
}

void DenseMachinery::synch_color_trial() {
    Network& net = eng_.net();
    const std::string phase = eng_.phase() + "/synch-trial";
    std::vector<NodeId> leaders;
    std::vector<std::vector<std::pair<NodeId, Color>>> plan(cliques_.size());
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) {
        auto& C = cliques_[ci];
        std::vector<NodeId> targets;
        for (NodeId u : C.core)
            if (!eng_.colored(u) && !std::binary_search(C.put_aside.begin(), C.put_aside.end(), u)) targets.push_back(u);
        if (targets.empty()) continue;
        leaders.push_back(C.leader);
        Palette perm = eng_.state(C.leader).palette;
        net.rng(C.leader).shuffle(perm);
        for (std::size_t i = 0; i < targets.size() && i < perm.size(); ++i) plan[ci].emplace_back(targets[i], perm[i]);
    }
    std::sort(leaders.begin(), leaders.end());
    const int hb = eng_.hash_bits();
    net.round(phase, leaders, [&](NodeCtx& c) {
        for (auto [u, col] : plan[static_cast<std::size_t>(clique_of_[c.id()])]) {
            BitString p = tagged(MsgKind::Data);
            p.push(eng_.perm_hash(u, col), hb);
            c.send(u, std::move(p));
        }
    });
    std::vector<std::pair<NodeId, Color>> tries;
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci)
        for (auto [u, col] : plan[ci]) {
            const Message* m = from(net, u, cliques_[ci].leader);
            if (!m) continue;
            auto pre = eng_.palette_preimages(u, m->payload.get(kKindBits, hb));
            if (!pre.empty()) tries.emplace_back(u, pre.front());
        }
    std::sort(tries.begin(), tries.end());
    const std::string saved = eng_.phase();
    eng_.set_phase(phase);
    eng_.try_colors(tries);
    eng_.set_phase(saved);
}

PutAsideColoring DenseMachinery::color_put_aside() {
    Network& net = eng_.net();
    const Graph& g = eng_.graph();
    const std::string phase = eng_.phase() + "/put-aside-color";
    const int cnt_bits = bits_for(g.n());
    const int hb = eng_.hash_bits();
    PutAsideColoring out;

    std::vector<NodeId> pa_nodes;
    std::vector<long> rank(g.n(), -1);
    for (auto& C : cliques_)
        for (std::size_t r = 0; r < C.put_aside.size(); ++r)
            if (!eng_.colored(C.put_aside[r])) {
                pa_nodes.push_back(C.put_aside[r]);
                rank[C.put_aside[r]] = static_cast<long>(r);
            }
    std::sort(pa_nodes.begin(), pa_nodes.end());
    // Round 0: put-aside nodes publish their rank so neighbors can build adjacency bitmaps.
    net.round(phase, pa_nodes, [&](NodeCtx& c) {
        BitString p = tagged(MsgKind::Data);
        p.push(static_cast<std::uint64_t>(rank[c.id()]), cnt_bits);
        c.broadcast(p);
    });
    std::vector<std::vector<std::size_t>> pa_nbr_ranks(g.n());
    for (NodeId v : pa_nodes)
        for (const auto& m : net.inbox(v))
            if (clique_of_[m.src] == clique_of_[v]) pa_nbr_ranks[v].push_back(m.payload.get(kKindBits, cnt_bits));

    // Leaders with a large enough core assign disjoint relay intervals.
    std::vector<NodeId> relay_for(g.n(), kNoNode);
    std::vector<NodeId> leaders;
    for (std::size_t ci = 0; ci < cliques_.size(); ++ci) {
        auto& C = cliques_[ci];
        const std::size_t p = C.put_aside.size();
        if (p == 0) continue;
        if (C.core.size() < 2 * p * p + p) {
            for (NodeId v : C.put_aside)
                if (!eng_.colored(v)) out.deferred.push_back(v);
            continue;
        }
        leaders.push_back(C.leader);
        for (std::size_t k = 0; k < p; ++k) {
            const std::size_t lo = k * (2 * p + 1), hi = lo + 2 * p;
            out.intervals.push_back({ci, C.put_aside[k], lo, hi});
            for (std::size_t j = lo; j <= hi; ++j)
                if (C.core[j] != C.put_aside[k]) relay_for[C.core[j]] = C.put_aside[k];
        }
    }
    std::sort(leaders.begin(), leaders.end());
    // Round 1: leader tells each relay whose records it carries.
    net.round(phase, leaders, [&](NodeCtx& c) {
        for (NodeId r : c.neighbors())
            if (relay_for[r] != kNoNode && clique_of_[r] == clique_of_[c.id()]) {
                BitString p = tagged(MsgKind::Data);
                p.push(relay_for[r], id_bits_);
                c.send(r, std::move(p));
            }
    });
    std::vector<NodeId> relays;
    std::vector<NodeId> origin(g.n(), kNoNode);
    for (NodeId r = 0; r < g.n(); ++r)
        if (relay_for[r] != kNoNode) {
            const Message* m = from(net, r, cliques_[static_cast<std::size_t>(clique_of_[r])].leader);
            if (!m) continue;
            origin[r] = static_cast<NodeId>(m->payload.get(kKindBits, id_bits_));
            relays.push_back(r);
        }
    // Round 2: relays adjacent to their origin introduce themselves.
    net.round(phase, relays, [&](NodeCtx& c) {
        if (g.has_edge(c.id(), origin[c.id()])) c.send(origin[c.id()], tagged(MsgKind::Data));
    });
    std::vector<std::vector<NodeId>> my_relays(g.n());
    std::vector<std::vector<Color>> offered(g.n());
    std::vector<NodeId> senders;
    for (NodeId v : pa_nodes) {
        const auto& C = cliques_[static_cast<std::size_t>(clique_of_[v])];
        for (const auto& m : net.inbox(v))
            if (relay_for[m.src] == v) my_relays[v].push_back(m.src);
        std::sort(my_relays[v].begin(), my_relays[v].end());
        if (std::find(leaders.begin(), leaders.end(), C.leader) == leaders.end()) continue;
        // Fewer than |P_C| relays means the anti-degree assumption failed for v.
        const std::size_t k = pa_nbr_ranks[v].size() + 1;
        const auto& pal = eng_.state(v).palette;
        if (my_relays[v].size() < C.put_aside.size() || pal.size() < k) {
            out.deferred.push_back(v);
            continue;
        }
        offered[v].assign(pal.begin(), pal.begin() + static_cast<long>(k));
        senders.push_back(v);
    }
    // Round 3: each put-aside node sends one record per relay: origin, color hash, bitmap.
    net.round(phase, senders, [&](NodeCtx& c) {
        const NodeId v = c.id();
        const auto& C = cliques_[static_cast<std::size_t>(clique_of_[v])];
        BitString bitmap(C.put_aside.size());
        for (std::size_t r : pa_nbr_ranks[v]) bitmap.set_bit(r);
        for (std::size_t j = 0; j < offered[v].size(); ++j) {
            BitString p = tagged(MsgKind::Data);
            p.push(v, id_bits_);
            p.push(eng_.perm_hash(C.leader, offered[v][j]), hb);
            p.append(bitmap);
            p.pad_to_byte();
            c.send_stream(my_relays[v][j], std::move(p));
        }
    });
    std::vector<NodeId> forwarding;
    std::vector<BitString> carried(g.n());
    for (NodeId r : relays)
        if (const Message* m = from(net, r, origin[r])) {
            carried[r] = m->payload;
            forwarding.push_back(r);
        }
    // Round 4: relays forward the records to the leader.
    net.round(phase, forwarding, [&](NodeCtx& c) {
        c.send_stream(cliques_[static_cast<std::size_t>(clique_of_[c.id()])].leader, carried[c.id()]);
    });
    // Leader greedily assigns hashes in ascending id order.
    std::vector<NodeId> chosen_relay;
    for (NodeId x : leaders) {
        const auto& C = cliques_[static_cast<std::size_t>(clique_of_[x])];
        const std::size_t p = C.put_aside.size();
        struct Rec {
            NodeId relay;
            std::uint64_t hash;
        };
        std::map<NodeId, std::vector<Rec>> recs;
        std::map<NodeId, BitString> bitmap;
        for (const auto& m : net.inbox(x)) {
            if (relay_for[m.src] == kNoNode) continue;
            const auto v = static_cast<NodeId>(m.payload.get(kKindBits, id_bits_));
            recs[v].push_back({m.src, m.payload.get(kKindBits + id_bits_, hb)});
            BitString b(p);
            for (std::size_t i = 0; i < p; ++i)
                if (m.payload.bit(kKindBits + id_bits_ + hb + i)) b.set_bit(i);
            bitmap[v] = b;
        }
        std::vector<std::optional<std::uint64_t>> assigned(p);
        for (auto& [v, list] : recs) {
            std::sort(list.begin(), list.end(), [](const Rec& a, const Rec& b) { return a.relay < b.relay; });
            for (const auto& rec : list) {
                bool clash = false;
                for (std::size_t r = 0; r < p; ++r)
                    if (bitmap[v].bit(r) && assigned[r] == rec.hash) clash = true;
                if (clash) continue;
                assigned[static_cast<std::size_t>(rank[v])] = rec.hash;
                chosen_relay.push_back(rec.relay);
                break;
            }
        }
    }
    std::sort(chosen_relay.begin(), chosen_relay.end());
    // Round 5: leader answers through the relay that carried the chosen record.
    net.round(phase, leaders, [&](NodeCtx& c) {
        for (NodeId r : c.neighbors())
            if (clique_of_[r] == clique_of_[c.id()] && std::binary_search(chosen_relay.begin(), chosen_relay.end(), r))
                c.send(r, tagged(MsgKind::Data));
    });
    std::vector<NodeId> answering;
    for (NodeId r : chosen_relay)
        if (from(net, r, cliques_[static_cast<std::size_t>(clique_of_[r])].leader)) answering.push_back(r);
    // Round 6: the relay passes the verdict back to its origin.
    net.round(phase, answering, [&](NodeCtx& c) { c.send(origin[c.id()], tagged(MsgKind::Data)); });
    std::vector<std::pair<NodeId, Color>> adopt;
    for (NodeId v : senders) {
        for (std::size_t j = 0; j < my_relays[v].size() && j < offered[v].size(); ++j)
            if (from(net, v, my_relays[v][j])) {
                adopt.emplace_back(v, offered[v][j]);
                break;
            }
    }
    const std::string saved = eng_.phase();
    eng_.set_phase(phase);
    eng_.commit_colors(adopt);
    eng_.set_phase(saved);
    for (auto [v, c] : adopt) out.colored.push_back(v);
    for (NodeId v : senders)
        if (!eng_.colored(v)) out.deferred.push_back(v);
    std::sort(out.deferred.begin(), out.deferred.end());
    return out;
}

}  // namespace d1lc
