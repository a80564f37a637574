#include "d1lc/runtime.hpp"

#include "d1lc/types.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <thread>

namespace d1lc {

namespace {

// Order-sensitive digest of a payload; four independent lanes keep long streams cheap.
std::uint64_t fold_words(const std::uint64_t* w, std::size_t n) {
    std::uint64_t a = 0x243f6a8885a308d3ULL, b = 0x13198a2e03707344ULL, c = 0xa4093822299f31d0ULL,
                  d = 0x082efa98ec4e6c89ULL;
    constexpr std::uint64_t K = 0x9fb21c651e98df25ULL;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a = std::rotl((a ^ w[i]) * K, 31);
        b = std::rotl((b ^ w[i + 1]) * K, 29);
        c = std::rotl((c ^ w[i + 2]) * K, 27);
        d = std::rotl((d ^ w[i + 3]) * K, 25);
    }
    for (; i < n; ++i) a = std::rotl((a ^ w[i]) * K, 31);
    return splitmix64(a ^ splitmix64(b ^ splitmix64(c ^ splitmix64(d ^ n))));
}

}  // namespace

std::size_t default_bandwidth(std::size_t n, double mult) {
    double raw = mult * 32.0 * std::max(1, ceil_log2(std::max<std::size_t>(n, 2)));
    return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(raw)));
}

RoundStats RoundStats::since(const RoundStats& before) const {
    RoundStats d = *this;
    d.rounds_used -= before.rounds_used;
    d.total_messages -= before.total_messages;
    d.total_bits -= before.total_bits;
    for (auto& [k, v] : d.phase_rounds) {
        auto it = before.phase_rounds.find(k);
        if (it != before.phase_rounds.end()) v -= it->second;
    }
    std::erase_if(d.phase_rounds, [](const auto& kv) { return kv.second == 0; });
    return d;
}

std::span<const NodeId> NodeCtx::neighbors() const { return net_->g_.neighbors(v_); }
std::size_t NodeCtx::degree() const { return net_->g_.degree(v_); }
std::size_t NodeCtx::bandwidth() const { return net_->bandwidth(); }
std::uint64_t NodeCtx::round() const { return net_->stats_.rounds_used + 1; }
Rng& NodeCtx::rng() { return net_->rngs_[v_]; }
std::vector<Message>& NodeCtx::inbox() { return net_->inbox_[v_]; }

void NodeCtx::send(NodeId to, BitString payload) { net_->enqueue(v_, to, std::move(payload), false); }
void NodeCtx::send_stream(NodeId to, BitString payload) { net_->enqueue(v_, to, std::move(payload), true); }
void NodeCtx::broadcast(const BitString& payload) {
    for (NodeId u : neighbors()) send(u, payload);
}

Network::Network(Graph g, NetworkConfig cfg) : g_(std::move(g)), cfg_(cfg) {
    const std::size_t n = g_.n();
    stats_.bandwidth_bits = cfg_.bandwidth_bits ? cfg_.bandwidth_bits : default_bandwidth(n, cfg_.bandwidth_mult);
    if (cfg_.threads < 1) cfg_.threads = 1;
    rngs_.reserve(n);
    for (NodeId v = 0; v < n; ++v) rngs_.emplace_back(cfg_.master_seed ^ static_cast<std::uint64_t>(v));
    inbox_.resize(n);
    outbox_.resize(n);
    sent_.resize(n);
    for (NodeId v = 0; v < n; ++v) sent_[v].assign(g_.degree(v), 0);
    all_.resize(n);
    for (NodeId v = 0; v < n; ++v) all_[v] = v;
}

void Network::enqueue(NodeId src, NodeId to, BitString&& payload, bool stream) {
    if (!sending_allowed_) throw std::logic_error("send outside of a communication round");
    const std::size_t B = stats_.bandwidth_bits;
    long idx = g_.index_of(src, to);
    if (idx < 0)
        throw BandwidthError("[" + phase_ + "] node " + std::to_string(src) + " sent to non-neighbor " +
                             std::to_string(to));
    if (!stream && payload.size() > B)
        throw BandwidthError("[" + phase_ + "] node " + std::to_string(src) + " sent " +
                             std::to_string(payload.size()) + " bits to " + std::to_string(to) + " (B = " +
                             std::to_string(B) + ")");
    auto& cnt = sent_[src][static_cast<std::size_t>(idx)];
    if (cnt >= cfg_.msgs_per_round_cap)
        throw BandwidthError("[" + phase_ + "] node " + std::to_string(src) + " exceeded the per-round cap of " +
                             std::to_string(cfg_.msgs_per_round_cap) + " message(s) to " + std::to_string(to));
    ++cnt;
    Message m;
    m.src = src;
    m.dst = to;
    m.round = stats_.rounds_used + 1;
    m.chunks = static_cast<std::uint32_t>(std::max<std::size_t>(1, (payload.size() + B - 1) / B));
    m.payload = std::move(payload);
    outbox_[src].push_back(std::move(m));
}

void Network::execute(std::span<const NodeId> active, const StepFn& fn, bool allow_send) {
    sending_allowed_ = allow_send;
    const std::size_t T = static_cast<std::size_t>(cfg_.threads);
    if (T <= 1 || active.size() < 2 * T) {
        for (NodeId v : active) {
            NodeCtx c(this, v);
            fn(c);
        }
    } else {
        std::vector<std::exception_ptr> errs(T);
        std::vector<std::thread> pool;
        const std::size_t per = (active.size() + T - 1) / T;
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t lo = t * per, hi = std::min(active.size(), lo + per);
            if (lo >= hi) break;
            pool.emplace_back([&, t, lo, hi] {
                try {
                    for (std::size_t i = lo; i < hi; ++i) {
                        NodeCtx c(this, active[i]);
                        fn(c);
                    }
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) {
                sending_allowed_ = false;
                std::rethrow_exception(e);
            }
    }
    sending_allowed_ = false;
}

bool Network::deliver(std::string_view phase, bool count_silent) {
    const std::size_t B = stats_.bandwidth_bits;
    std::uint64_t span = 1;
    bool any = false;
    for (auto& in : inbox_) in.clear();
    std::uint64_t h = stats_.transcript_hash;
    for (NodeId v = 0; v < outbox_.size(); ++v) {
        auto& out = outbox_[v];
        if (out.empty()) continue;
        any = true;
        std::fill(sent_[v].begin(), sent_[v].end(), 0);
        for (auto& m : out) {
            span = std::max<std::uint64_t>(span, m.chunks);
            stats_.total_messages += m.chunks;
            stats_.total_bits += m.payload.size();
            stats_.max_bits_per_edge_round =
                std::max<std::uint64_t>(stats_.max_bits_per_edge_round, std::min<std::size_t>(m.payload.size(), B));
            h = splitmix64(h ^ (m.round * 0x9e3779b97f4a7c15ULL) ^ (std::uint64_t{m.src} << 32) ^ m.dst);
            h = splitmix64(h ^ m.payload.size());
            h = splitmix64(h ^ fold_words(m.payload.data(), m.payload.word_count()));
            inbox_[m.dst].push_back(std::move(m));
        }
        out.clear();
    }
    stats_.transcript_hash = h;
    if (!any && !count_silent) return false;
    stats_.rounds_used += span;
    stats_.phase_rounds[std::string(phase)] += span;
    return any;
}

void Network::round(std::string_view phase, const StepFn& fn) { round(phase, all_, fn); }

void Network::round(std::string_view phase, std::span<const NodeId> active, const StepFn& fn) {
    phase_ = phase;
    execute(active, fn, true);
    deliver(phase, true);
}

bool Network::round_or_skip(std::string_view phase, std::span<const NodeId> active, const StepFn& fn,
                            bool count_silent) {
    phase_ = phase;
    execute(active, fn, true);
    return deliver(phase, count_silent);
}

void Network::local(const StepFn& fn) { local(all_, fn); }

void Network::local(std::span<const NodeId> active, const StepFn& fn) { execute(active, fn, false); }

void Network::idle(std::string_view phase, std::uint64_t rounds) {
    if (rounds == 0) return;
    for (auto& in : inbox_) in.clear();
    stats_.rounds_used += rounds;
    stats_.phase_rounds[std::string(phase)] += rounds;
}

RoundStats run_rounds(Network& net, const std::function<bool(NodeCtx&)>& program, std::uint64_t max_rounds,
                      std::string_view phase) {
    const RoundStats before = net.stats();
    std::vector<NodeId> active(net.n());
    for (NodeId v = 0; v < net.n(); ++v) active[v] = v;
    std::vector<char> halted(net.n(), 0);
    std::uint64_t executed = 0;
    while (!active.empty()) {
        if (executed >= max_rounds)
            throw NonTerminationError("run_rounds: " + std::to_string(active.size()) +
                                      " node program(s) still running after " + std::to_string(max_rounds) +
                                      " rounds");
        bool sent = net.round_or_skip(phase, active, [&](NodeCtx& c) { halted[c.id()] = program(c) ? 1 : 0; },
                                      false);
        std::vector<NodeId> next;
        for (NodeId v : active)
            if (!halted[v]) next.push_back(v);
        // A silent round that leaves programs running still elapses.
        if (!sent && !next.empty()) net.idle(phase, 1);
        ++executed;
        active.swap(next);
    }
    return net.stats().since(before);
}

std::vector<std::uint64_t> edge_shared_seeds(Network& net, std::string_view phase, std::span<const Edge> edges) {
    std::vector<std::vector<std::pair<NodeId, std::size_t>>> owned(net.n());
    std::vector<NodeId> active;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [a, b] = edges[i];
        NodeId lo = std::min(a, b), hi = std::max(a, b);
        if (owned[lo].empty()) active.push_back(lo);
        owned[lo].emplace_back(hi, i);
    }
    std::sort(active.begin(), active.end());
    std::vector<std::uint64_t> seeds(edges.size(), 0), received(edges.size(), 0);
    net.round(phase, active, [&](NodeCtx& c) {
        for (auto [partner, idx] : owned[c.id()]) {
            std::uint64_t s = c.rng().next();
            seeds[idx] = s;
            BitString p;
            p.push(s, 64);
            c.send(partner, std::move(p));
        }
    });
    for (std::size_t i = 0; i < edges.size(); ++i) {
        NodeId lo = std::min(edges[i].first, edges[i].second), hi = std::max(edges[i].first, edges[i].second);
        for (const auto& m : net.inbox(hi))
            if (m.src == lo) received[i] = m.payload.get(0, 64);
        if (received[i] != seeds[i]) throw std::logic_error("edge seed delivery mismatch");
    }
    return received;
}

std::uint64_t edge_shared_seed(Network& net, NodeId a, NodeId b, std::string_view phase) {
    Edge e{a, b};
    return edge_shared_seeds(net, phase, std::span<const Edge>(&e, 1))[0];
}

}  // namespace d1lc
