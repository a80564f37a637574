#include "d1lc/sketch.hpp"

#include "d1lc/types.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace d1lc {

namespace {

constexpr int kSizeBits = 32;

std::uint64_t checked_ceil(double x) {
    if (!(x < 9.0e15)) throw std::invalid_argument("similarity parameters overflow");
    return static_cast<std::uint64_t>(std::ceil(x));
}

void validate(const SimilarityConfig& cfg) {
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw std::invalid_argument("similarity eps must lie in (0,1)");
    if (!(cfg.nu > 0.0 && cfg.nu < 1.0)) throw std::invalid_argument("similarity nu must lie in (0,1)");
    if (cfg.c_k < 0.0 || cfg.c_l <= 0.0) throw std::invalid_argument("similarity constants must be positive");
}

// Index of the j-th set bit (0-based) of a & b.
std::size_t select_common(const BitString& a, const BitString& b, std::uint64_t j) {
    for (std::size_t w = 0; w < a.word_count(); ++w) {
        std::uint64_t x = a.data()[w] & b.data()[w];
        auto c = static_cast<std::uint64_t>(std::popcount(x));
        if (j < c) {
            for (; j > 0; --j) x &= x - 1;
            return w * 64 + static_cast<std::size_t>(std::countr_zero(x));
        }
        j -= c;
    }
    throw std::logic_error("select_common: index out of range");
}

struct EdgeRun {
    SimilarityPlan plan;
    HashSpec h;
    std::uint64_t seed = 0;
    // Delivered masks, read from the receiving endpoint's inbox.
    const BitString* mask_u = nullptr;
    const BitString* mask_v = nullptr;
    bool empty = true;
    std::uint64_t bits = 0;
};

// Shared protocol: size exchange, seed exchange, bitmask exchange.
std::vector<EdgeRun> run_protocol(Network& net, std::span<const Edge> edges, const EdgeSetFn& set_of,
                                  const SimilarityConfig& cfg, std::string_view phase) {
    validate(cfg);
    const std::size_t n = net.n();
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u == v || !net.graph().has_edge(u, v)) throw std::invalid_argument("similarity on a non-edge");
        incident[u].push_back(i);
        incident[v].push_back(i);
    }
    std::vector<NodeId> active;
    for (NodeId v = 0; v < n; ++v)
        if (!incident[v].empty()) active.push_back(v);

    auto other = [&](std::size_t i, NodeId self) { return edges[i].first == self ? edges[i].second : edges[i].first; };
    std::vector<EdgeRun> runs(edges.size());

    // Round 1: both endpoints announce their set size.
    net.round(phase, active, [&](NodeCtx& c) {
        for (std::size_t i : incident[c.id()]) {
            NodeId o = other(i, c.id());
            BitString p;
            p.push(set_of(c.id(), o).size(), kSizeBits);
            c.send(o, std::move(p));
        }
    });
    std::vector<std::uint64_t> size_u(edges.size()), size_v(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        for (const auto& m : net.inbox(v))
            if (m.src == u) size_u[i] = m.payload.get(0, kSizeBits);
        for (const auto& m : net.inbox(u))
            if (m.src == v) size_v[i] = m.payload.get(0, kSizeBits);
        runs[i].bits += 2 * kSizeBits;
        runs[i].empty = size_u[i] == 0 || size_v[i] == 0;
        if (!runs[i].empty) runs[i].plan = plan_similarity(size_u[i], size_v[i], cfg);
    }

    // Round 2: the lower-id endpoint draws and sends the shared seed.
    std::vector<Edge> live;
    std::vector<std::size_t> live_idx;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (!runs[i].empty) {
            live.push_back(edges[i]);
            live_idx.push_back(i);
        }
    if (live.empty()) return runs;
    auto seeds = edge_shared_seeds(net, phase, live);
    for (std::size_t j = 0; j < live.size(); ++j) {
        auto& r = runs[live_idx[j]];
        r.seed = seeds[j];
        r.h = sketch_hash(r.plan, derive_seed(r.seed, 1));
        r.bits += 64;
    }

    // Stream rounds: each side sends its l-bit image mask.
    std::vector<std::vector<std::size_t>> live_incident(n);
    std::vector<NodeId> live_active;
    for (std::size_t i : live_idx) {
        live_incident[edges[i].first].push_back(i);
        live_incident[edges[i].second].push_back(i);
    }
    for (NodeId v = 0; v < n; ++v)
        if (!live_incident[v].empty()) live_active.push_back(v);
    net.round(phase, live_active, [&](NodeCtx& c) {
        for (std::size_t i : live_incident[c.id()]) {
            NodeId o = other(i, c.id());
            auto& r = runs[i];
            c.send_stream(o, hit_image_mask(set_of(c.id(), o), r.h, r.plan.k, r.plan.l));
        }
    });
    for (std::size_t i : live_idx) {
        auto [u, v] = edges[i];
        auto& r = runs[i];
        for (const auto& m : net.inbox(v))
            if (m.src == u) r.mask_u = &m.payload;
        for (const auto& m : net.inbox(u))
            if (m.src == v) r.mask_v = &m.payload;
        if (!r.mask_u || !r.mask_v) throw std::logic_error("similarity mask not delivered");
        r.bits += 2 * r.plan.l;
    }
    return runs;
}

}  // namespace

SimilarityPlan plan_similarity(std::size_t size_u, std::size_t size_v, const SimilarityConfig& cfg) {
    validate(cfg);
    SimilarityPlan p;
    p.max_size = std::max(size_u, size_v);
    if (p.max_size == 0) return p;
    const double eps = cfg.eps;
    const double lg = std::log(12.0 / cfg.nu);
    p.k = cfg.c_k > 0.0 ? std::max<std::uint64_t>(1, checked_ceil(cfg.c_k * lg / (eps * eps * eps) / p.max_size)) : 1;
    p.T = checked_ceil(8.0 * static_cast<double>(p.k) * static_cast<double>(p.max_size) / eps);
    const double alpha = eps * eps / 8.0, beta = eps / 4.0;
    p.l = std::min(p.T, checked_ceil(cfg.c_l * lg / (alpha * beta * beta)));
    return p;
}

HashSpec sketch_hash(const SimilarityPlan& plan, std::uint64_t seed) {
    return make_hash(HashBackend::Idealized, kMaxDomainBits, plan.T, seed);
}

namespace {

// Blocks of 2^20 positions keep the (once, twice) scratch in cache; ranges spanning
// several blocks are bucketed by block first.
template <class Y>
BitString image_mask_impl(std::span<const std::uint64_t> S, const HashSpec& h, std::uint64_t k, std::uint64_t l) {
    constexpr int kBlockBits = 20;
    constexpr std::uint64_t kBlock = std::uint64_t{1} << kBlockBits;
    const std::uint64_t blocks = (l + kBlock - 1) / kBlock;
    std::vector<Y> ys;
    ys.reserve(std::min<std::uint64_t>(S.size() * k, l));
    std::vector<std::size_t> start(blocks + 1, 0);
    for (std::uint64_t x : S) {
        if (k > 1 && x > (std::numeric_limits<std::uint64_t>::max() - (k - 1)) / k)
            throw std::invalid_argument("hit_image_mask: scaled element overflows 64 bits");
        const std::uint64_t base = x * k;
        for (std::uint64_t j = 0; j < k; ++j) {
            std::uint64_t y = h(base + j);
            if (y > l) continue;
            ys.push_back(static_cast<Y>(y - 1));
            ++start[((y - 1) >> kBlockBits) + 1];
        }
    }
    BitString once(l);
    std::uint64_t* out = once.data();
    // Scratch is zero on entry to every block and re-zeroed while the block is emitted.
    std::vector<std::uint64_t> scratch(2 * ((std::min(l, kBlock) + 63) / 64), 0);
    auto run_block = [&](std::uint64_t blk, const Y* first, const Y* last) {
        const std::uint64_t base = blk * kBlock;
        for (auto it = first; it != last; ++it) {
            std::uint64_t i = *it - base, m = std::uint64_t{1} << (i & 63);
            std::uint64_t* w = &scratch[2 * (i >> 6)];
            w[1] |= w[0] & m;
            w[0] |= m;
        }
        const std::uint64_t nwords = (std::min(l - base, kBlock) + 63) / 64;
        for (std::uint64_t w = 0; w < nwords; ++w) {
            out[base / 64 + w] = scratch[2 * w] & ~scratch[2 * w + 1];
            scratch[2 * w] = scratch[2 * w + 1] = 0;
        }
    };
    if (blocks <= 1) {
        run_block(0, ys.data(), ys.data() + ys.size());
        return once;
    }
    for (std::uint64_t b = 0; b < blocks; ++b) start[b + 1] += start[b];
    std::vector<Y> sorted(ys.size());
    std::vector<std::size_t> pos(start.begin(), start.end() - 1);
    for (Y y : ys) sorted[pos[y >> kBlockBits]++] = y;
    for (std::uint64_t b = 0; b < blocks; ++b)
        if (start[b] != start[b + 1]) run_block(b, sorted.data() + start[b], sorted.data() + start[b + 1]);
    return once;
}

}  // namespace

BitString hit_image_mask(std::span<const std::uint64_t> S, const HashSpec& h, std::uint64_t k, std::uint64_t l) {
    if (k == 0) throw std::invalid_argument("hit_image_mask: k must be positive");
    if (l <= (std::uint64_t{1} << 32)) return image_mask_impl<std::uint32_t>(S, h, k, l);
    return image_mask_impl<std::uint64_t>(S, h, k, l);
}

std::optional<std::uint64_t> unique_preimage(std::span<const std::uint64_t> S, const HashSpec& h, std::uint64_t k,
                                             std::uint64_t y) {
    std::optional<std::uint64_t> found;
    for (std::uint64_t x : S)
        for (std::uint64_t j = 0; j < k; ++j)
            if (h(x * k + j) == y) {
                if (found) return std::nullopt;
                found = x;
            }
    return found;
}

std::vector<SimilarityResult> estimate_similarity_batch(Network& net, std::span<const Edge> edges,
                                                        const EdgeSetFn& set_of, const SimilarityConfig& cfg,
                                                        std::string_view phase) {
    auto runs = run_protocol(net, edges, set_of, cfg, phase);
    std::vector<SimilarityResult> out(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto& r = runs[i];
        auto& res = out[i];
        res.bits_sent = r.bits;
        if (r.empty) continue;
        res.scale_factor = r.plan.k;
        res.T = r.plan.T;
        res.l = r.plan.l;
        res.shared = r.mask_u->and_popcount(*r.mask_v);
        res.estimate = static_cast<double>(res.shared) * static_cast<double>(r.plan.T) /
                       (static_cast<double>(r.plan.l) * static_cast<double>(r.plan.k));
    }
    return out;
}

SimilarityResult estimate_similarity(Network& net, NodeId u, NodeId v, std::span<const std::uint64_t> S_u,
                                     std::span<const std::uint64_t> S_v, const SimilarityConfig& cfg) {
    Edge e{u, v};
    auto set_of = [&](NodeId self, NodeId) { return self == u ? S_u : S_v; };
    return estimate_similarity_batch(net, std::span<const Edge>(&e, 1), set_of, cfg)[0];
}

std::vector<JointSampleResult> joint_sample_batch(Network& net, std::span<const Edge> edges, const EdgeSetFn& set_of,
                                                  const SimilarityConfig& cfg, std::size_t count,
                                                  std::string_view phase) {
    if (count == 0) throw std::invalid_argument("joint_sample: count must be at least 1");
    auto runs = run_protocol(net, edges, set_of, cfg, phase);
    std::vector<JointSampleResult> out(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto& r = runs[i];
        auto& res = out[i];
        res.bits_sent = r.bits;
        res.side_u.assign(count, std::nullopt);
        res.side_v.assign(count, std::nullopt);
        if (r.empty) continue;
        res.J = r.mask_u->and_popcount(*r.mask_v);
        if (res.J == 0) continue;
        auto [u, v] = edges[i];
        auto su = set_of(u, v), sv = set_of(v, u);
        // Both endpoints derive the index stream from the shared seed; no extra messages.
        Rng pick(derive_seed(r.seed, 2));
        for (std::size_t c = 0; c < count; ++c) {
            std::uint64_t j = pick.index(res.J);
            std::uint64_t y = select_common(*r.mask_u, *r.mask_v, j) + 1;
            res.side_u[c] = unique_preimage(su, r.h, r.plan.k, y);
            res.side_v[c] = unique_preimage(sv, r.h, r.plan.k, y);
        }
    }
    return out;
}

JointSampleResult joint_sample(Network& net, NodeId u, NodeId v, std::span<const std::uint64_t> S_u,
                               std::span<const std::uint64_t> S_v, const SimilarityConfig& cfg, std::size_t count) {
    Edge e{u, v};
    auto set_of = [&](NodeId self, NodeId) { return self == u ? S_u : S_v; };
    return joint_sample_batch(net, std::span<const Edge>(&e, 1), set_of, cfg, count)[0];
}

}  // namespace d1lc
