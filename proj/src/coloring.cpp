#include "d1lc/coloring.hpp"

#include "d1lc/set_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace d1lc {

namespace {

// Cap on draws per multi-trial; beyond this every candidate is almost surely drawn.
constexpr std::size_t kMaxDraws = std::size_t{1} << 16;

BitString tagged(MsgKind k) {
    BitString p;
    p.push(static_cast<std::uint64_t>(k), kKindBits);
    return p;
}

MsgKind kind_of(const Message& m) { return static_cast<MsgKind>(m.payload.get(0, kKindBits)); }

bool in_palette(const Palette& p, Color c) { return std::binary_search(p.begin(), p.end(), c); }

}  // namespace

const char* to_string(TrialBackend b) { return b == TrialBackend::Idealized ? "idealized" : "uniform"; }

TrialBackend parse_trial_backend(const std::string& s) {
    if (s == "idealized") return TrialBackend::Idealized;
    if (s == "uniform") return TrialBackend::Uniform;
    throw std::invalid_argument("unknown backend: " + s);
}

std::size_t multitrial_sample_length(std::uint64_t T, std::size_t n, std::size_t bandwidth,
                                     const MultiTrialParams& p) {
    const double nd = static_cast<double>(std::max<std::size_t>(n, 2));
    const double nu = std::max(std::pow(nd, -p.c_nu), 12.0 * std::exp(-p.alpha * static_cast<double>(T) / 45.0));
    const double l = std::ceil(45.0 * std::log(12.0 / nu) / (p.alpha * p.beta * p.beta));
    std::size_t out = bandwidth > static_cast<std::size_t>(kKindBits) ? bandwidth - kKindBits : 1;
    out = std::min<std::size_t>(out, T);
    if (l >= 1 && l < static_cast<double>(out)) out = static_cast<std::size_t>(l);
    return std::max<std::size_t>(out, 1);
}

int log_star(double x) {
    int k = 0;
    while (x > 1.0) {
        x = std::log2(x);
        ++k;
    }
    return k;
}

double tower2(int i) {
    double t = 1;
    for (int j = 0; j < i; ++j) {
        if (t >= 63) return std::ldexp(1.0, 63);
        t = std::ldexp(1.0, static_cast<int>(t));
    }
    return t;
}

ColoringEngine::ColoringEngine(Network& net, std::vector<Palette> palettes, EngineOptions opt) : net_(net) {
    const Graph& g = net.graph();
    if (palettes.size() != g.n()) throw std::invalid_argument("palette count differs from node count");
    Color mx = 1;
    st_.resize(g.n());
    for (NodeId v = 0; v < g.n(); ++v) {
        auto& p = palettes[v];
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
        if (!p.empty()) mx = std::max(mx, p.back());
        st_[v].original = p;
        st_[v].palette = std::move(p);
        st_[v].uncolored_degree = g.degree(v);
    }
    colorspace_bits_ = opt.colorspace_bits > 0 ? opt.colorspace_bits : bits_for(mx);
    if (colorspace_bits_ > kMaxColorBits || bits_for(mx) > colorspace_bits_)
        throw std::invalid_argument("palette colors exceed the configured colorspace");
    nb_colored_.resize(g.n());
    nb_rank_.resize(g.n());
    for (NodeId v = 0; v < g.n(); ++v) {
        nb_colored_[v].assign(g.degree(v), 0);
        nb_rank_[v].assign(g.degree(v), 0);
    }
    hash_index_.resize(g.n());
    baseline_.assign(g.n(), 0);
    (void)opt.hash_d;
}

Coloring ColoringEngine::coloring() const {
    Coloring c(n());
    for (NodeId v = 0; v < n(); ++v) c[v] = st_[v].permanent_color;
    return c;
}

std::vector<NodeId> ColoringEngine::uncolored_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n(); ++v)
        if (!colored(v)) out.push_back(v);
    return out;
}

std::uint64_t ColoringEngine::announce_color_hash_setup(int d) {
    const std::uint64_t before = net_.rounds();
    std::vector<HashSpec> drawn(n());
    net_.round(phase_ + "/hash-setup", [&](NodeCtx& c) {
        HashSpec h = make_universal_color_hash(colorspace_bits_, n(), d, c.rng().next());
        drawn[c.id()] = h;
        BitString p = tagged(MsgKind::Data);
        p.append(h.serialize());
        for (NodeId u : c.neighbors()) c.send_stream(u, p);
    });
    for (NodeId v = 0; v < n(); ++v) {
        for (const auto& m : net_.inbox(v)) {
            BitReader r(m.payload);
            r.read(kKindBits);
            if (!(HashSpec::read(r) == drawn[m.src])) throw std::logic_error("announcement hash garbled in transit");
        }
        st_[v].color_hash = drawn[v];
        auto& idx = hash_index_[v];
        idx.clear();
        for (Color c : st_[v].original) idx.emplace_back(drawn[v](c), c);
        std::sort(idx.begin(), idx.end());
    }
    hash_bits_ = bits_for(universal_range(n(), d));
    announced_ = true;
    return net_.rounds() - before;
}

void ColoringEngine::set_conflict_ranks(const std::vector<int>& rank) {
    if (rank.size() != n()) throw std::invalid_argument("rank vector size differs from node count");
    net_.round(phase_ + "/ranks", [&](NodeCtx& c) {
        if (rank[c.id()] < 0 || rank[c.id()] > 255) throw std::invalid_argument("conflict rank must fit in 8 bits");
        st_[c.id()].rank = rank[c.id()];
        BitString p = tagged(MsgKind::Data);
        p.push(static_cast<std::uint64_t>(rank[c.id()]), 8);
        c.broadcast(p);
    });
    for (NodeId v = 0; v < n(); ++v)
        for (const auto& m : net_.inbox(v))
            nb_rank_[v][static_cast<std::size_t>(graph().index_of(v, m.src))] =
                static_cast<int>(m.payload.get(kKindBits, 8));
}

std::vector<Color> ColoringEngine::palette_preimages(NodeId v, std::uint64_t y) const {
    std::vector<Color> out;
    const auto& idx = hash_index_[v];
    auto it = std::lower_bound(idx.begin(), idx.end(), std::make_pair(y, Color{0}));
    for (; it != idx.end() && it->first == y; ++it)
        if (in_palette(st_[v].palette, it->second)) out.push_back(it->second);
    return out;
}

void ColoringEngine::receive_perms() {
    for (NodeId v = 0; v < n(); ++v) {
        auto& s = st_[v];
        for (const auto& m : net_.inbox(v)) {
            if (kind_of(m) != MsgKind::Perm) continue;
            const std::uint64_t y = m.payload.get(kKindBits, hash_bits_);
            const auto i = static_cast<std::size_t>(graph().index_of(v, m.src));
            if (nb_colored_[v][i]) throw std::logic_error("neighbor announced a second permanent color");
            nb_colored_[v][i] = 1;
            --s.uncolored_degree;
            s.neighbor_color_hashes.emplace_back(m.src, y);
            // Colored nodes keep pruning: a leader's palette is still used to hand out colors.
            for (Color c : palette_preimages(v, y)) s.palette.erase(std::lower_bound(s.palette.begin(), s.palette.end(), c));
        }
    }
}

void ColoringEngine::commit_colors(std::span<const std::pair<NodeId, Color>> adopted) {
    if (!announced_) throw std::logic_error("color hashes must be announced before coloring");
    std::vector<NodeId> active;
    std::vector<Color> color_of(n(), 0);
    for (auto [v, c] : adopted) {
        if (colored(v)) throw std::logic_error("node is already colored");
        if (!in_palette(st_[v].palette, c)) throw std::invalid_argument("adopted color is not in the palette");
        active.push_back(v);
        color_of[v] = c;
    }
    std::sort(active.begin(), active.end());
    net_.round(phase_ + "/perm", active, [&](NodeCtx& ctx) {
        const NodeId v = ctx.id();
        st_[v].permanent_color = color_of[v];
        for (NodeId u : ctx.neighbors()) {
            BitString p = tagged(MsgKind::Perm);
            p.push(st_[u].color_hash(color_of[v]), hash_bits_);
            ctx.send(u, std::move(p));
        }
    });
    receive_perms();
}

std::vector<bool> ColoringEngine::try_colors(std::span<const std::pair<NodeId, Color>> tries) {
    if (!announced_) throw std::logic_error("color hashes must be announced before coloring");
    std::vector<std::optional<Color>> tried(n());
    std::vector<NodeId> active;
    for (auto [v, c] : tries) {
        if (colored(v)) throw std::logic_error("try_color on a colored node");
        if (!in_palette(st_[v].palette, c)) throw std::invalid_argument("try_color: color not in palette");
        if (tried[v]) throw std::invalid_argument("try_color: node listed twice");
        tried[v] = c;
        active.push_back(v);
    }
    std::sort(active.begin(), active.end());
    net_.round(phase_ + "/try", active, [&](NodeCtx& ctx) {
        const NodeId v = ctx.id();
        auto nb = ctx.neighbors();
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (nb_colored_[v][i]) continue;
            BitString p = tagged(MsgKind::Try);
            p.push(st_[nb[i]].color_hash(*tried[v]), hash_bits_);
            ctx.send(nb[i], std::move(p));
        }
    });
    std::vector<std::uint8_t> ok(n(), 0);
    for (NodeId v : active) {
        const std::uint64_t mine = st_[v].color_hash(*tried[v]);
        bool clash = false;
        for (const auto& m : net_.inbox(v)) {
            if (kind_of(m) != MsgKind::Try) continue;
            const auto i = static_cast<std::size_t>(graph().index_of(v, m.src));
            if (nb_rank_[v][i] <= st_[v].rank && m.payload.get(kKindBits, hash_bits_) == mine) clash = true;
        }
        ok[v] = !clash;
    }
    std::vector<std::pair<NodeId, Color>> winners;
    for (NodeId v : active)
        if (ok[v]) winners.emplace_back(v, *tried[v]);
    commit_colors(winners);
    std::vector<bool> out;
    for (auto [v, c] : tries) out.push_back(ok[v] != 0);
    return out;
}

std::vector<bool> ColoringEngine::try_random_colors(std::span<const NodeId> nodes) {
    std::vector<std::pair<NodeId, Color>> tries;
    for (NodeId v : nodes) {
        const auto& pal = st_[v].palette;
        if (pal.empty()) throw std::logic_error("try_random_color: empty palette");
        tries.emplace_back(v, pal[net_.rng(v).index(pal.size())]);
    }
    return try_colors(tries);
}

bool ColoringEngine::try_color(NodeId v, Color c) {
    std::pair<NodeId, Color> t{v, c};
    return try_colors(std::span<const std::pair<NodeId, Color>>(&t, 1))[0];
}

bool ColoringEngine::try_random_color(NodeId v) { return try_random_colors(std::span<const NodeId>(&v, 1))[0]; }

void ColoringEngine::slack_generation(std::span<const NodeId> participants, double p_gen) {
    if (!(p_gen >= 0.0 && p_gen <= 1.0)) throw std::invalid_argument("p_gen must lie in [0,1]");
    for (NodeId v = 0; v < n(); ++v) baseline_[v] = st_[v].slack();
    std::vector<NodeId> sampled;
    for (NodeId v : participants)
        if (!colored(v) && net_.rng(v).bernoulli(p_gen)) sampled.push_back(v);
    try_random_colors(sampled);
}

VStartResult ColoringEngine::identify_v_start(std::span<const NodeId> participants, double eps_hat) {
    std::vector<std::uint8_t> gained(n(), 0), member(n(), 0);
    std::vector<NodeId> active;
    for (NodeId v : participants)
        if (!colored(v)) {
            member[v] = 1;
            active.push_back(v);
            gained[v] = static_cast<double>(st_[v].slack() - baseline_[v]) >=
                        eps_hat * static_cast<double>(graph().degree(v));
        }
    net_.round(phase_ + "/v-start", active, [&](NodeCtx& c) {
        BitString p = tagged(MsgKind::Data);
        p.push_bit(gained[c.id()]);
        c.broadcast(p);
    });
    VStartResult r;
    for (NodeId v : active) {
        if (gained[v]) {
            r.gained.push_back(v);
            continue;
        }
        std::size_t cnt = 0;
        for (const auto& m : net_.inbox(v))
            if (m.payload.bit(kKindBits)) ++cnt;
        if (static_cast<double>(cnt) >= eps_hat * static_cast<double>(graph().degree(v))) r.v_start.push_back(v);
        else r.bad.push_back(v);
    }
    return r;
}

std::vector<bool> ColoringEngine::multi_trial(std::span<const NodeId> nodes, const MultiTrialParams& p) {
    if (!announced_) throw std::logic_error("color hashes must be announced before coloring");
    if (p.x < 1) throw std::invalid_argument("multi_trial: x must be >= 1");
    const std::size_t B = net_.bandwidth();
    struct Trial {
        bool active = false;
        bool fixed = false;
        HashSpec h;
        std::size_t l = 0;
        // Uniform backend: sampled hash values and their sorted (value, position) index.
        std::vector<std::uint64_t> sample;
        std::vector<std::pair<std::uint64_t, std::uint32_t>> sample_index;
        std::vector<Color> tries;
    };
    std::vector<Trial> tr(n());
    std::vector<NodeId> active;
    for (NodeId v : nodes)
        if (!colored(v) && !tr[v].active) {
            if (st_[v].palette.empty()) throw std::logic_error("multi_trial: empty palette");
            tr[v].active = true;
            active.push_back(v);
        }
    std::sort(active.begin(), active.end());

    // Setup: hash spec (and sampler seed) to every uncolored neighbor.
    net_.round(phase_ + "/mt-setup", active, [&](NodeCtx& c) {
        const NodeId v = c.id();
        auto& t = tr[v];
        const auto& pal = st_[v].palette;
        const std::uint64_t T = 6 * pal.size();
        BitString payload = tagged(MsgKind::Data);
        if (p.backend == TrialBackend::Idealized) {
            t.h = make_hash(HashBackend::Idealized, colorspace_bits_, T, c.rng().next());
            t.l = multitrial_sample_length(T, n(), B, p);
            payload.append(t.h.serialize());
        } else {
            t.h = choose_low_collision_hash(colorspace_bits_, T, pal, static_cast<std::size_t>(T / 3), c.rng());
            const std::uint64_t seed = c.rng().next();
            t.l = std::min<std::uint64_t>(B - kKindBits, T);
            t.sample = sample_multiset(T, t.l, seed).elements;
            for (std::uint32_t i = 0; i < t.sample.size(); ++i) t.sample_index.emplace_back(t.sample[i], i);
            std::sort(t.sample_index.begin(), t.sample_index.end());
            payload.append(t.h.serialize());
            payload.push(seed, 64);
        }
        auto nb = c.neighbors();
        for (std::size_t i = 0; i < nb.size(); ++i)
            if (!nb_colored_[v][i]) c.send_stream(nb[i], payload);
    });
    // Receivers decode each neighbor's spec; the decoded copy equals the sender's, so the
    // sender-side record (including the expanded sample) is shared instead of duplicated.
    for (NodeId v : active) {
        auto& t = tr[v];
        if (auto it = p.fixed_tries.find(v); it != p.fixed_tries.end()) {
            t.fixed = true;
            t.tries = it->second;
            continue;
        }
        const auto& pal = st_[v].palette;
        std::vector<Color> cand;
        if (p.backend == TrialBackend::Idealized) {
            cand = hit_set(pal, t.h, pal, t.l);
        } else {
            for (Color c : pal) {
                auto lo = std::lower_bound(t.sample_index.begin(), t.sample_index.end(),
                                           std::make_pair(t.h(c), std::uint32_t{0}));
                if (lo != t.sample_index.end() && lo->first == t.h(c)) cand.push_back(c);
            }
        }
        if (cand.empty()) continue;
        Rng& rng = net_.rng(v);
        const std::size_t draws = std::min(p.x, kMaxDraws);
        for (std::size_t k = 0; k < draws; ++k) t.tries.push_back(cand[rng.index(cand.size())]);
        std::sort(t.tries.begin(), t.tries.end());
        t.tries.erase(std::unique(t.tries.begin(), t.tries.end()), t.tries.end());
    }
    // Positions of the receiver's sample (or hash range) that a color occupies.
    auto mark = [&](const Trial& t, Color c, BitString& bits) {
        const std::uint64_t y = t.h(c);
        if (p.backend == TrialBackend::Idealized) {
            if (y <= t.l) bits.set_bit(y - 1);
            return;
        }
        auto lo = std::lower_bound(t.sample_index.begin(), t.sample_index.end(), std::make_pair(y, std::uint32_t{0}));
        for (; lo != t.sample_index.end() && lo->first == y; ++lo) bits.set_bit(lo->second);
    };
    net_.round(phase_ + "/mt-indicator", active, [&](NodeCtx& c) {
        const NodeId v = c.id();
        if (tr[v].tries.empty()) return;
        auto nb = c.neighbors();
        for (std::size_t i = 0; i < nb.size(); ++i) {
            const NodeId u = nb[i];
            if (nb_colored_[v][i] || !tr[u].active || tr[u].fixed) continue;
            BitString bits(tr[u].l);
            for (Color col : tr[v].tries) mark(tr[u], col, bits);
            if (bits.popcount() == 0) continue;
            BitString payload = tagged(MsgKind::Indicator);
            payload.append(bits);
            c.send(u, std::move(payload));
        }
    });
    std::vector<std::pair<NodeId, Color>> adopt;
    std::vector<std::uint8_t> won(n(), 0);
    for (NodeId v : active) {
        auto& t = tr[v];
        if (t.fixed || t.tries.empty()) continue;
        BitString blocked(t.l);
        for (const auto& m : net_.inbox(v)) {
            if (kind_of(m) != MsgKind::Indicator) continue;
            for (std::size_t i = 0; i < t.l; ++i)
                if (m.payload.bit(kKindBits + i)) blocked.set_bit(i);
        }
        for (Color col : t.tries) {
            BitString mine(t.l);
            mark(t, col, mine);
            if (mine.and_popcount(blocked) == 0) {
                adopt.emplace_back(v, col);
                won[v] = 1;
                break;
            }
        }
    }
    commit_colors(adopt);
    std::vector<bool> out;
    for (NodeId v : nodes) out.push_back(won[v] != 0);
    return out;
}

std::size_t ColoringEngine::uncolored_in(NodeId v, const std::vector<std::uint8_t>& member) const {
    std::size_t d = 0;
    auto nb = graph().neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i)
        if (!nb_colored_[v][i] && member[nb[i]]) ++d;
    return d;
}

SlackColorResult ColoringEngine::slack_color(std::span<const NodeId> participants, const SlackColorParams& p) {
    if (!(p.kappa > 0.0 && p.kappa <= 1.0)) throw std::invalid_argument("slack_color: kappa must lie in (0,1]");
    if (!(p.s_min >= 1.0)) throw std::invalid_argument("slack_color: s_min must be >= 1");
    const std::uint64_t before = net_.rounds();
    SlackColorResult r;
    std::vector<std::uint8_t> member(n(), 0);
    std::vector<NodeId> active;
    for (NodeId v : participants)
        if (!colored(v) && !member[v]) {
            member[v] = 1;
            active.push_back(v);
        }
    std::sort(active.begin(), active.end());
    const std::vector<NodeId> start = active;
    // Participants announce themselves so each node can count competing neighbors.
    net_.round(phase_ + "/slack-color", active, [&](NodeCtx& c) { c.broadcast(tagged(MsgKind::Data)); });

    auto prune = [&]() { std::erase_if(active, [&](NodeId v) { return colored(v); }); };
    // s(v) = |palette| - d(v) with d(v) counting uncolored participating neighbors.
    auto degree_now = [&](NodeId v) { return static_cast<double>(uncolored_in(v, member)); };
    auto slack_now = [&](NodeId v) { return static_cast<double>(st_[v].palette.size()) - degree_now(v); };
    auto drop_if = [&](auto&& pred) {
        std::vector<NodeId> keep;
        for (NodeId v : active) {
            if (pred(v)) r.dropped.push_back(v);
            else keep.push_back(v);
        }
        active.swap(keep);
    };
    auto trial = [&](std::size_t x, int times) {
        MultiTrialParams mp = p.trial;
        mp.x = std::max<std::size_t>(1, x);
        for (int k = 0; k < times; ++k) {
            r.schedule.push_back(mp.x);
            multi_trial(active, mp);
            prune();
        }
    };

    for (int i = 0; i < p.init_rounds; ++i) {
        try_random_colors(active);
        prune();
    }
    drop_if([&](NodeId v) { return slack_now(v) < 2 * degree_now(v); });

    const double rho = std::pow(p.s_min, 1.0 / (1.0 + p.kappa));
    r.rho = rho;
    const double rho_k = std::pow(rho, p.kappa);
    const int tower_top = log_star(rho);
    for (int i = 0; i <= tower_top; ++i) {
        const double x = tower2(i);
        trial(static_cast<std::size_t>(std::min(x, static_cast<double>(kMaxDraws))), 2);
        ++r.tower_iterations;
        const double cap = std::min(std::exp2(std::min(x, 1023.0)), rho_k);
        drop_if([&](NodeId v) { return degree_now(v) > slack_now(v) / cap; });
    }
    const int geo_top = static_cast<int>(std::ceil(1.0 / p.kappa));
    for (int i = 1; i <= geo_top; ++i) {
        const double x = std::pow(rho, i * p.kappa);
        trial(static_cast<std::size_t>(std::min(x, static_cast<double>(kMaxDraws))), 3);
        ++r.geometric_iterations;
        const double cap = std::min(std::pow(rho, (i + 1) * p.kappa), rho);
        drop_if([&](NodeId v) { return degree_now(v) > slack_now(v) / cap; });
    }
    trial(static_cast<std::size_t>(std::min(rho, static_cast<double>(kMaxDraws))), 1);

    for (NodeId v : start) {
        if (colored(v)) r.colored.push_back(v);
    }
    std::erase_if(r.dropped, [&](NodeId v) { return colored(v); });
    r.leftover = active;
    r.rounds = net_.rounds() - before;
    return r;
}

std::size_t ColoringEngine::chromatic_slack(NodeId v) const {
    std::size_t k = 0;
    const auto& idx = hash_index_[v];
    for (const auto& [u, y] : st_[v].neighbor_color_hashes) {
        auto it = std::lower_bound(idx.begin(), idx.end(), std::make_pair(y, Color{0}));
        if (it == idx.end() || it->first != y) ++k;
    }
    return k;
}

std::vector<std::string> ColoringEngine::check_invariants() const {
    std::vector<std::string> bad;
    const Graph& g = graph();
    for (NodeId v = 0; v < n(); ++v) {
        const auto& s = st_[v];
        if (s.permanent_color) {
            if (!in_palette(s.original, *s.permanent_color))
                bad.push_back("node " + std::to_string(v) + " colored outside its list");
            for (NodeId u : g.neighbors(v))
                if (u > v && st_[u].permanent_color == s.permanent_color)
                    bad.push_back("edge " + std::to_string(v) + "-" + std::to_string(u) + " shares a color");
            continue;
        }
        if (s.palette.size() < s.uncolored_degree + 1)
            bad.push_back("node " + std::to_string(v) + " palette smaller than uncolored degree + 1");
        for (const auto& [u, y] : s.neighbor_color_hashes)
            for (Color c : s.palette)
                if (s.color_hash(c) == y)
                    bad.push_back("node " + std::to_string(v) + " keeps a color announced by " + std::to_string(u));
    }
    return bad;
}

}  // namespace d1lc
