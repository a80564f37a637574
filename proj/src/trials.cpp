#include "d1lc/trials.hpp"

#include "d1lc/coloring.hpp"
#include "d1lc/dense.hpp"
#include "d1lc/gen.hpp"
#include "d1lc/hash.hpp"
#include "d1lc/oracle.hpp"
#include "d1lc/pipeline.hpp"
#include "d1lc/probe.hpp"
#include "d1lc/runtime.hpp"
#include "d1lc/set_ops.hpp"
#include "d1lc/sketch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace d1lc {

double TrialSpec::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stod(it->second);
}

std::string TrialSpec::param_str(const std::string& key, const std::string& fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

bool TrialSpec::statistical() const {
    return std::any_of(claims.begin(), claims.end(), [](const Claim& c) {
        return c.statistic == "success_rate" || c.statistic == "failure_rate" || c.statistic.rfind("mean:", 0) == 0;
    });
}

namespace {

using U64s = std::vector<std::uint64_t>;

std::size_t sz(const TrialSpec& s, const std::string& k, double fallback) {
    return static_cast<std::size_t>(s.param(k, fallback));
}

// Distinct random elements below 2^bits, sorted.
U64s random_set(Rng& rng, std::size_t count, int bits, const std::unordered_set<std::uint64_t>& avoid = {}) {
    std::unordered_set<std::uint64_t> s;
    const std::uint64_t hi = bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
    while (s.size() < count) {
        const std::uint64_t x = rng.uniform(0, hi);
        if (!avoid.count(x)) s.insert(x);
    }
    U64s out(s.begin(), s.end());
    std::sort(out.begin(), out.end());
    return out;
}

// Two sets of `size` elements sharing round(overlap * size).
std::pair<U64s, U64s> overlapping_sets(Rng& rng, std::size_t size, double overlap) {
    const auto shared = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(size)));
    U64s all = random_set(rng, 2 * size - shared, 40);
    rng.shuffle(all);
    U64s A(all.begin(), all.begin() + static_cast<long>(size));
    U64s B(all.begin(), all.begin() + static_cast<long>(shared));
    B.insert(B.end(), all.begin() + static_cast<long>(size), all.end());
    std::sort(A.begin(), A.end());
    std::sort(B.begin(), B.end());
    return {A, B};
}

std::size_t intersection_size(const U64s& A, const U64s& B) {
    std::vector<std::uint64_t> I;
    std::set_intersection(A.begin(), A.end(), B.begin(), B.end(), std::back_inserter(I));
    return I.size();
}

SeedOutcome fail(SeedOutcome o, const std::string& note) {
    o.ok = false;
    if (o.note.empty()) o.note = note;
    return o;
}

Backend backend_of(const TrialSpec& s) { return parse_backend(s.param_str("backend", "idealized")); }

// ---- hashing ----

SeedOutcome trial_hash_purity(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const int bits = static_cast<int>(rng.uniform(1, 10));
    const std::uint64_t T = rng.uniform(1, 16);
    for (HashBackend b : {HashBackend::Idealized, HashBackend::PairwiseIndep}) {
        HashSpec h = make_hash(b, bits, T, rng.next());
        HashSpec again = HashSpec::deserialize(h.serialize());
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << bits); ++x) {
            const auto y = h(x);
            if (y < 1 || y > T) return fail(o, "evaluation outside [1, T]");
            if (h(x) != y || again(x) != y) return fail(o, "evaluation is not pure across copies");
        }
    }
    (void)s;
    return o;
}

SeedOutcome trial_pairwise_joint(const TrialSpec& s, std::uint64_t seed) {
    const auto T = static_cast<std::uint64_t>(s.param("T", 64));
    const int bits = static_cast<int>(s.param("universe_bits", 10));
    HashSpec h = make_hash(HashBackend::PairwiseIndep, bits, T, splitmix64(seed));
    SeedOutcome o;
    const bool hit = h(static_cast<std::uint64_t>(s.param("x1", 3))) == static_cast<std::uint64_t>(s.param("y1", 5)) &&
                     h(static_cast<std::uint64_t>(s.param("x2", 900))) == static_cast<std::uint64_t>(s.param("y2", 17));
    o.values["joint_hit"] = hit ? 1.0 : 0.0;
    o.values["bound"] = 2.0 / static_cast<double>(T * T);
    return o;
}

SeedOutcome trial_low_collision(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "size", 10);
    const auto T = static_cast<std::uint64_t>(s.param("T", 60));
    const std::size_t budget = sz(s, "budget", 20);
    U64s S = random_set(rng, n, 20);
    HashSpec h = choose_low_collision_hash(20, T, S, budget, rng);
    const std::size_t coll = colliding_elements(h, S);
    // Independent count: hash values taken by two or more elements.
    std::map<std::uint64_t, std::size_t> count;
    for (auto x : S) ++count[h(x)];
    std::size_t brute = 0;
    for (auto x : S) brute += count[h(x)] >= 2 ? 1 : 0;
    o.values["collisions"] = static_cast<double>(brute);
    if (brute != coll) return fail(o, "collision count disagrees with direct evaluation");
    if (brute > budget) return fail(o, "collisions exceed the budget");
    return o;
}

SeedOutcome trial_sampler(const TrialSpec& s, std::uint64_t seed) {
    SeedOutcome o;
    const auto T = static_cast<std::uint64_t>(s.param("T", 100));
    const std::size_t t = sz(s, "t", 10000);
    const double delta = s.param("delta", 0.05);
    SamplerMultiset m = sample_multiset(T, t, seed);
    // Test set: the even values of [1, T], density 1/2.
    std::size_t in = 0;
    for (auto x : m.elements) {
        if (x < 1 || x > T) return fail(o, "sample outside [1, T]");
        in += x % 2 == 0 ? 1 : 0;
    }
    const double frac = static_cast<double>(in) / static_cast<double>(t);
    o.values["fraction"] = frac;
    SamplerMultiset again = sample_multiset(T, t, seed);
    if (again.elements != m.elements) return fail(o, "sampler is not reproducible from its seed");
    if (std::abs(frac - 0.5) > delta) return fail(o, "sample average outside the window");
    return o;
}

SeedOutcome trial_ecc(const TrialSpec& s, std::uint64_t seed) {
    SeedOutcome o;
    const int b = static_cast<int>(s.param("b", 8));
    EccCode code = EccCode::make(b, seed == 1 ? EccCode::kPublicSeed : splitmix64(seed));
    int minw = std::numeric_limits<int>::max();
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << b); ++m) {
        BitString id(static_cast<std::size_t>(b));
        for (int i = 0; i < b; ++i)
            if ((m >> i) & 1u) id.set_bit(static_cast<std::size_t>(i));
        minw = std::min<int>(minw, static_cast<int>(ecc_encode(code, id).popcount()));
    }
    o.values["min_weight"] = minw;
    if (2 * minw < b) return fail(o, "codeword weight below b/2");
    return o;
}

SeedOutcome trial_color_hash(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "n", 256);
    const int d = static_cast<int>(s.param("d", 6));
    const int bits = static_cast<int>(s.param("colorspace_bits", 48));
    const std::size_t colors = sz(s, "colors", 100);
    U64s pal = random_set(rng, colors, bits);
    HashSpec h = make_universal_color_hash(bits, n, d, rng.next());
    std::set<std::uint64_t> img;
    for (auto c : pal) img.insert(h(c));
    o.values["collided"] = img.size() < pal.size() ? 1.0 : 0.0;
    if (img.size() < pal.size()) return fail(o, "palette colors collide");
    return o;
}

// ---- set operators ----

SeedOutcome trial_set_identities(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const int ubits = static_cast<int>(s.param("universe_bits", 8));
    const std::uint64_t U = std::uint64_t{1} << ubits;
    const std::uint64_t T = rng.uniform(1, static_cast<std::uint64_t>(s.param("max_T", 16)));
    HashSpec h = make_hash(HashBackend::Idealized, ubits, T, rng.next());
    auto subset = [&](double p) {
        U64s out;
        for (std::uint64_t x = 0; x < U; ++x)
            if (rng.bernoulli(p)) out.push_back(x);
        return out;
    };
    const U64s A = subset(rng.real());
    const U64s B = subset(rng.real());
    U64s C = B;
    for (std::uint64_t x = 0; x < U; ++x)
        if (rng.bernoulli(0.3)) C.push_back(x);
    std::sort(C.begin(), C.end());
    C.erase(std::unique(C.begin(), C.end()), C.end());
    U64s AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    std::sort(AB.begin(), AB.end());
    AB.erase(std::unique(AB.begin(), AB.end()), AB.end());
    auto as_set = [](const U64s& v) { return std::set<std::uint64_t>(v.begin(), v.end()); };
    auto images = [&](const U64s& v) {
        std::set<std::uint64_t> im;
        for (auto x : v) im.insert(h(x));
        return im;
    };
    std::size_t violations = 0;
    for (std::uint64_t l = 1; l <= T; ++l) {
        // Definitions checked by brute force.
        U64s r_brute, c_brute;
        for (auto x : A)
            if (h(x) <= l) {
                r_brute.push_back(x);
                for (auto y : B)
                    if (y != x && h(y) == h(x)) {
                        c_brute.push_back(x);
                        break;
                    }
            }
        const U64s r = restrict_set(A, h, l), c = collide_set(A, h, B, l), hi = hit_set(A, h, B, l);
        U64s hi_brute;
        std::set_difference(r_brute.begin(), r_brute.end(), c_brute.begin(), c_brute.end(),
                            std::back_inserter(hi_brute));
        if (r != r_brute || c != c_brute || hi != hi_brute) ++violations;
        // Collisions of A with itself occupy at most half as many hash values.
        const U64s cAA = collide_set(A, h, A, l);
        if (2 * images(cAA).size() > cAA.size()) ++violations;
        // Hits of A against a superset hash injectively.
        const U64s hAB = hit_set(A, h, AB, l);
        if (images(hAB).size() != hAB.size()) ++violations;
        // Growing the reference set can only add collisions and remove hits.
        const auto cB = as_set(collide_set(A, h, B, l)), cC = as_set(collide_set(A, h, C, l));
        const auto hB = as_set(hit_set(A, h, B, l)), hC = as_set(hit_set(A, h, C, l));
        if (!std::includes(cC.begin(), cC.end(), cB.begin(), cB.end())) ++violations;
        if (!std::includes(hB.begin(), hB.end(), hC.begin(), hC.end())) ++violations;
    }
    o.values["violations"] = static_cast<double>(violations);
    if (violations) return fail(o, "set identity violated");
    return o;
}

// ---- two-party primitives ----

SimilarityConfig sim_config(const TrialSpec& s) {
    SimilarityConfig c;
    c.eps = s.param("eps", 0.1);
    c.nu = s.param("nu", 0.05);
    c.c_k = s.param("c_k", 96);
    c.c_l = s.param("c_l", 45);
    return c;
}

SeedOutcome trial_similarity(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    auto [A, B] = overlapping_sets(rng, sz(s, "size", 200), s.param("overlap", 0.5));
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(make_path(2), nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    const SimilarityConfig cfg = sim_config(s);
    SimilarityResult r = estimate_similarity(net, 0, 1, A, B, cfg);
    const double truth = static_cast<double>(intersection_size(A, B));
    const double err = std::abs(r.estimate - truth);
    o.values["abs_error"] = err;
    o.values["max_bits"] = static_cast<double>(net.stats().max_bits_per_edge_round);
    if (net.stats().max_bits_per_edge_round > net.bandwidth()) return fail(o, "message above B");
    if (err > cfg.eps * static_cast<double>(std::max(A.size(), B.size()))) return fail(o, "estimate outside eps*max");
    return o;
}

SeedOutcome trial_joint_sample(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    auto [A, B] = overlapping_sets(rng, sz(s, "size", 200), s.param("overlap", 0.5));
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(make_path(2), nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    JointSampleResult r = joint_sample(net, 0, 1, A, B, sim_config(s), 1);
    const auto& a = r.side_u.front();
    const auto& b = r.side_v.front();
    const bool same = a && b && *a == *b && std::binary_search(A.begin(), A.end(), *a) &&
                      std::binary_search(B.begin(), B.end(), *a);
    o.values["agree"] = same ? 1.0 : 0.0;
    if (!same) return fail(o, "endpoints did not output the same shared element");
    return o;
}

// ---- runtime ----

SeedOutcome trial_runtime(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "n", 200);
    Graph g = make_gnp(n, s.param("p", 0.03), rng);
    auto flood = [&](Network& net, std::vector<std::uint32_t>& dist) {
        const int bits = bits_for(n + 1);
        dist.assign(n, std::numeric_limits<std::uint32_t>::max());
        dist[0] = 0;
        std::vector<std::uint8_t> announced(n, 0);
        return run_rounds(net, [&](NodeCtx& c) {
            for (const auto& m : c.inbox()) {
                const auto d = static_cast<std::uint32_t>(m.payload.get(0, bits)) + 1;
                if (d < dist[c.id()]) dist[c.id()] = d;
            }
            if (dist[c.id()] != std::numeric_limits<std::uint32_t>::max() && !announced[c.id()]) {
                announced[c.id()] = 1;
                BitString p;
                p.push(dist[c.id()], bits);
                c.broadcast(p);
                return false;
            }
            return announced[c.id()] != 0 || c.round() > n;
        }, n + 2, "flood");
    };
    NetworkConfig nc;
    nc.master_seed = seed;
    Network n1(g, nc), n2(g, nc);
    std::vector<std::uint32_t> d1, d2;
    RoundStats s1 = flood(n1, d1), s2 = flood(n2, d2);
    // Oracle BFS.
    std::vector<std::uint32_t> bfs(n, std::numeric_limits<std::uint32_t>::max());
    std::queue<NodeId> q;
    bfs[0] = 0;
    q.push(0);
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        for (NodeId u : g.neighbors(v))
            if (bfs[u] == std::numeric_limits<std::uint32_t>::max()) {
                bfs[u] = bfs[v] + 1;
                q.push(u);
            }
    }
    if (d1 != bfs) return fail(o, "flooding distances differ from BFS");
    if (!(s1 == s2)) return fail(o, "replay changed the statistics or transcript");
    if (s1.max_bits_per_edge_round > s1.bandwidth_bits) return fail(o, "message above B");
    std::size_t reached_edges = 0;
    for (NodeId v = 0; v < n; ++v)
        if (bfs[v] != std::numeric_limits<std::uint32_t>::max()) reached_edges += g.degree(v);
    if (s1.total_messages != reached_edges) return fail(o, "broadcast message count differs from reached degree sum");
    // Edge seeds: one 64-bit message per edge, all in one round.
    auto edges = g.edges();
    const auto before = n1.stats();
    auto seeds = edge_shared_seeds(n1, "seeds", edges);
    const auto after = n1.stats().since(before);
    if (!edges.empty() && (after.rounds_used != 1 || after.total_messages != edges.size()))
        return fail(o, "edge seeds did not cost one message per edge in one round");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    o.values["seed_duplicates"] = static_cast<double>(seeds.size() - distinct.size());
    o.values["rounds"] = static_cast<double>(s1.rounds_used);
    return o;
}

// ---- probes ----

ProbeConfig probe_config(const TrialSpec& s) {
    ProbeConfig pc;
    pc.sim.c_k = s.param("c_k", 0);
    pc.sim.nu = s.param("nu", 0.05);
    return pc;
}

SeedOutcome trial_sparsity(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    Graph g = make_gnp(sz(s, "n", 400), s.param("p", 0.05), rng);
    const double eps = s.param("eps", 0.2);
    NetworkConfig nc;
    nc.master_seed = seed;
    nc.bandwidth_mult = s.param("bandwidth_mult", 1);
    Network net(g, nc);
    const ProbeConfig pc = probe_config(s);
    auto glob = estimate_sparsity_all(net, eps, pc);
    auto loc = estimate_local_sparsity_all(net, eps, pc);
    const double D = static_cast<double>(g.max_degree());
    std::size_t good_g = 0, good_l = 0, valid_l = 0;
    for (NodeId v = 0; v < g.n(); ++v) {
        if (std::abs(glob[v].value - global_sparsity(g, v, g.max_degree())) <= eps * D) ++good_g;
        if (!loc[v].valid) continue;
        ++valid_l;
        if (std::abs(loc[v].value - local_sparsity(g, v)) <= eps * static_cast<double>(g.degree(v))) ++good_l;
    }
    o.values["global_within"] = static_cast<double>(good_g) / static_cast<double>(g.n());
    o.values["local_within"] = valid_l ? static_cast<double>(good_l) / static_cast<double>(valid_l) : 1.0;
    return o;
}

struct DetectionTally {
    std::size_t rich = 0, rich_ok = 0, poor = 0, poor_ok = 0;
    void add(double truth, bool flag, double eps, double D) {
        if (truth >= eps * D) {
            ++rich;
            rich_ok += flag ? 1 : 0;
        } else if (truth <= eps * D / 4) {
            ++poor;
            poor_ok += flag ? 0 : 1;
        }
    }
    void record(SeedOutcome& o) const {
        o.values["rich_correct"] = rich ? static_cast<double>(rich_ok) / static_cast<double>(rich) : 1.0;
        o.values["poor_correct"] = poor ? static_cast<double>(poor_ok) / static_cast<double>(poor) : 1.0;
    }
};

SeedOutcome trial_triangles(const TrialSpec& s, std::uint64_t seed) {
    SeedOutcome o;
    const std::size_t delta = sz(s, "delta", 50);
    const double eps = s.param("eps", 0.2);
    const std::size_t gadgets = sz(s, "gadgets", 8);
    const auto rich_t = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(delta)));
    const auto poor_t = static_cast<std::size_t>(std::floor(eps * static_cast<double>(delta) / 4));
    GapGadgets gg = make_triangle_gap(delta, rich_t, poor_t, gadgets, gadgets / 2);
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(gg.graph, nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    const ProbeConfig pc = probe_config(s);
    auto flags = detect_triangle_edges(net, eps, pc);
    DetectionTally t;
    const double D = static_cast<double>(gg.graph.max_degree());
    for (const auto& f : flags) t.add(static_cast<double>(triangles_on_edge(gg.graph, f.u, f.v)), f.flag, eps, D);
    t.record(o);
    SimilarityConfig sc = pc.sim;
    sc.eps = eps / 4;
    const auto cap = similarity_round_cap(sc);
    o.values["rounds"] = static_cast<double>(net.rounds());
    o.values["rounds_over_cap"] = net.rounds() > cap ? 1.0 : 0.0;
    o.values["cap"] = static_cast<double>(cap);
    if (t.rich_ok != t.rich || t.poor_ok != t.poor) return fail(o, "a gadget was misclassified");
    return o;
}

SeedOutcome trial_c4(const TrialSpec& s, std::uint64_t seed) {
    SeedOutcome o;
    const std::size_t delta = sz(s, "delta", 50);
    const double eps = s.param("eps", 0.2);
    const std::size_t gadgets = sz(s, "gadgets", 8);
    const auto rich_t = static_cast<std::size_t>(std::ceil(eps * static_cast<double>(delta)));
    const auto poor_t = static_cast<std::size_t>(std::floor(eps * static_cast<double>(delta) / 4));
    GapGadgets gg = make_c4_gap(delta, rich_t, poor_t, gadgets, gadgets / 2);
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(gg.graph, nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    std::vector<NodeId> centers;
    for (const auto& t : gg.targets) centers.push_back(t[0]);
    const ProbeConfig pc = probe_config(s);
    auto flags = detect_c4_wedges(net, eps, pc, centers);
    DetectionTally t;
    const double D = static_cast<double>(gg.graph.max_degree());
    for (const auto& f : flags) t.add(static_cast<double>(c4_on_wedge(gg.graph, f.center, f.u, f.u2)), f.flag, eps, D);
    t.record(o);
    SimilarityConfig sc = pc.sim;
    sc.eps = eps / 4;
    const auto cap = similarity_round_cap(sc);
    o.values["rounds"] = static_cast<double>(net.rounds());
    o.values["rounds_over_cap"] = net.rounds() > cap ? 1.0 : 0.0;
    if (t.rich_ok != t.rich || t.poor_ok != t.poor) return fail(o, "a gadget was misclassified");
    return o;
}

SeedOutcome trial_buddy(const TrialSpec& s, std::uint64_t seed) {
    SeedOutcome o;
    const std::size_t d = sz(s, "degree", 50);
    const double overlap = s.param("overlap", 1.0);
    // Edge (0, 1); both endpoints have degree d and share `common` further neighbors.
    const auto common = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(d - 1)));
    std::vector<Edge> e{{0, 1}};
    NodeId next = 2;
    for (std::size_t i = 0; i < common; ++i, ++next) {
        e.emplace_back(0, next);
        e.emplace_back(1, next);
    }
    for (NodeId hub : {NodeId{0}, NodeId{1}})
        for (std::size_t i = common + 1; i < d; ++i) e.emplace_back(hub, next++);
    Graph g(next, e);
    NetworkConfig nc;
    nc.master_seed = seed;
    nc.bandwidth_mult = s.param("bandwidth_mult", 1);
    Network net(g, nc);
    BuddyConfig bc;
    bc.eps = s.param("eps", 0.1);
    bc.backend = backend_of(s) == Backend::Idealized ? BuddyBackend::Idealized : BuddyBackend::Uniform;
    bc.sim.c_k = s.param("c_k", 0);
    const bool f = buddy(net, 0, 1, bc);
    o.values["flag"] = f ? 1.0 : 0.0;
    return o;
}

SeedOutcome trial_acd(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    PlantedAcdParams pp;
    pp.cliques = sz(s, "cliques", 4);
    pp.clique_size = sz(s, "clique_size", 40);
    pp.missing = s.param("missing", 0.05);
    pp.sparse_nodes = sz(s, "sparse_nodes", 100);
    pp.sparse_p = s.param("sparse_p", 0.03);
    pp.bridges = sz(s, "bridges", 20);
    PlantedAcd pa = make_planted_acd(pp, rng);
    const Graph& g = pa.graph;
    NetworkConfig nc;
    nc.master_seed = seed;
    nc.bandwidth_mult = s.param("bandwidth_mult", 1);
    Network net(g, nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    AcdConfig ac;
    ac.eps_acd = s.param("eps_acd", 0.1);
    ac.eps_spa = s.param("eps_spa", 0.1);
    ac.backend = backend_of(s) == Backend::Idealized ? BuddyBackend::Idealized : BuddyBackend::Uniform;
    ac.sim.c_k = s.param("c_k", 0);
    AcdLabels L = compute_acd(net, ac);
    const auto cliques = L.cliques();
    std::map<long, std::size_t> size_of;
    for (const auto& c : cliques) size_of[L.clique_id[c.front()]] = c.size();
    std::size_t role_ok = 0;
    for (NodeId v = 0; v < g.n(); ++v) {
        const double d = static_cast<double>(g.degree(v));
        bool ok = false;
        switch (L.role[v]) {
            case Role::Sparse: ok = local_sparsity(g, v) >= ac.eps_spa * d / 2; break;
            case Role::Uneven: ok = unevenness(g, v) >= ac.eps_spa * d; break;
            case Role::Dense: {
                const double C = static_cast<double>(size_of.at(L.clique_id[v]));
                std::size_t inside = 0;
                for (NodeId u : g.neighbors(v)) inside += L.clique_id[u] == L.clique_id[v] ? 1 : 0;
                ok = d <= (1 + 2 * ac.eps_acd) * C && (1 + 2 * ac.eps_acd) * static_cast<double>(inside) >= C;
                break;
            }
        }
        role_ok += ok ? 1 : 0;
    }
    // Match each planted clique to the recovered label it overlaps most; sparse maps to -1.
    std::map<int, std::map<long, std::size_t>> overlap;
    for (NodeId v = 0; v < g.n(); ++v) ++overlap[pa.clique_of[v]][L.clique_id[v]];
    std::map<int, long> match;
    std::set<long> used;
    for (auto& [p, m] : overlap) {
        if (p < 0) {
            match[p] = -1;
            continue;
        }
        long best = -2;
        std::size_t best_n = 0;
        for (auto [l, c] : m)
            if (l >= 0 && !used.count(l) && c > best_n) {
                best = l;
                best_n = c;
            }
        match[p] = best;
        if (best >= 0) used.insert(best);
    }
    std::size_t agree = 0;
    for (NodeId v = 0; v < g.n(); ++v) agree += L.clique_id[v] == match[pa.clique_of[v]] ? 1 : 0;
    o.values["role_ok"] = static_cast<double>(role_ok) / static_cast<double>(g.n());
    o.values["agreement"] = static_cast<double>(agree) / static_cast<double>(g.n());
    return o;
}

// ---- coloring ----

SeedOutcome trial_multi_trial(const TrialSpec& s, std::uint64_t seed) {
    SeedOutcome o;
    const auto x = static_cast<std::size_t>(s.param("x", 1));
    const std::size_t d = sz(s, "degree", 4);
    const bool adversarial = s.param("adversarial", 0) != 0;
    const std::size_t P = std::max<std::size_t>(2 * x * d, sz(s, "min_palette", 16));
    Graph g = make_star(d);
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    Palette shared;
    for (Color c = 1; c <= P; ++c) shared.push_back(c * 7919);
    std::vector<Palette> pal(d + 1, shared);
    ColoringEngine eng(net, pal);
    eng.announce_color_hash_setup(6);
    MultiTrialParams mp;
    mp.x = x;
    mp.backend = backend_of(s) == Backend::Idealized ? TrialBackend::Idealized : TrialBackend::Uniform;
    if (adversarial) {
        // Leaves try fixed disjoint blocks that together cover half of the center's palette.
        std::size_t k = 0;
        for (NodeId leaf = 1; leaf <= d; ++leaf) {
            std::vector<Color> f;
            for (std::size_t j = 0; j < P / 2 / d; ++j) f.push_back(shared[k++]);
            mp.fixed_tries[leaf] = f;
        }
    }
    std::vector<NodeId> all(d + 1);
    std::iota(all.begin(), all.end(), NodeId{0});
    auto got = eng.multi_trial(all, mp);
    o.values["bound"] = std::pow(7.0 / 8.0, static_cast<double>(x));
    if (!eng.check_invariants().empty()) return fail(o, "coloring invariant violated");
    if (!got[0]) return fail(o, "center stayed uncolored");
    return o;
}

SeedOutcome trial_try_color(const TrialSpec& s, std::uint64_t seed) {
    (void)s;
    SeedOutcome o;
    NetworkConfig nc;
    nc.master_seed = seed;
    {
        Network net(Graph(1, {}), nc);
        ColoringEngine eng(net, {{5, 9}});
        eng.announce_color_hash_setup(6);
        if (!eng.try_random_color(0)) return fail(o, "isolated node failed its trial");
    }
    {
        Network net(make_path(2), nc);
        ColoringEngine eng(net, {{1, 2}, {1, 2}});
        eng.announce_color_hash_setup(6);
        std::vector<std::pair<NodeId, Color>> both{{0, 1}, {1, 1}};
        auto r = eng.try_colors(both);
        if (r[0] || r[1]) return fail(o, "symmetric conflict let a node keep the color");
        eng.set_conflict_ranks({0, 1});
        r = eng.try_colors(both);
        if (!r[0] || r[1]) return fail(o, "priority conflict resolved the wrong way");
    }
    {
        Network net(make_path(2), nc);
        ColoringEngine eng(net, {{1, 2}, {1, 2}});
        eng.announce_color_hash_setup(6);
        std::vector<NodeId> both{0, 1};
        auto r = eng.try_random_colors(both);
        o.values["both_colored"] = r[0] && r[1] ? 1.0 : 0.0;
        // One endpoint alone may lose to a false hash collision on its side; equal colors never survive.
        if (r[0] && r[1] && *eng.state(0).permanent_color == *eng.state(1).permanent_color)
            return fail(o, "K2 random trial kept equal colors");
        if (!eng.check_invariants().empty()) return fail(o, "coloring invariant violated");
    }
    return o;
}

SeedOutcome trial_try_random(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "n", 200), d = sz(s, "degree", 8);
    Graph g = make_random_regular(n, d, rng);
    // Slack d/2: palettes of 1.5d + 1 colors drawn from a pool of 3d.
    std::vector<Palette> pal(n);
    for (auto& P : pal) {
        std::vector<Color> pool(3 * d);
        std::iota(pool.begin(), pool.end(), Color{1});
        rng.shuffle(pool);
        P.assign(pool.begin(), pool.begin() + static_cast<long>(d + d / 2 + 1));
        std::sort(P.begin(), P.end());
    }
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    ColoringEngine eng(net, pal);
    eng.announce_color_hash_setup(6);
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    auto r = eng.try_random_colors(all);
    o.values["colored_fraction"] =
        static_cast<double>(std::count(r.begin(), r.end(), true)) / static_cast<double>(n);
    if (!eng.check_invariants().empty()) return fail(o, "coloring invariant violated");
    return o;
}

SeedOutcome trial_slack_color(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "n", 300), d = sz(s, "degree", 16);
    const double slack_mult = s.param("slack_mult", 3);
    Graph g = make_random_regular(n, d, rng);
    std::vector<Palette> pal(n);
    const auto size = static_cast<std::size_t>(std::ceil(static_cast<double>(d) * (1 + slack_mult)));
    for (auto& P : pal) {
        std::vector<Color> pool(2 * size);
        std::iota(pool.begin(), pool.end(), Color{1});
        rng.shuffle(pool);
        P.assign(pool.begin(), pool.begin() + static_cast<long>(size));
        std::sort(P.begin(), P.end());
    }
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    ColoringEngine eng(net, pal);
    eng.announce_color_hash_setup(6);
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    SlackColorParams sp;
    sp.s_min = s.param("s_min", 16);
    sp.kappa = s.param("kappa", 0.5);
    sp.trial.backend = backend_of(s) == Backend::Idealized ? TrialBackend::Idealized : TrialBackend::Uniform;
    const auto before = net.rounds();
    auto r = eng.slack_color(all, sp);
    o.values["colored_fraction"] =
        static_cast<double>(n - eng.uncolored_nodes().size()) / static_cast<double>(n);
    o.values["rounds"] = static_cast<double>(net.rounds() - before);
    o.values["rounds_per_log_star"] =
        static_cast<double>(net.rounds() - before) / std::max(1, log_star(sp.s_min));
    (void)r;
    if (!eng.check_invariants().empty()) return fail(o, "coloring invariant violated");
    return o;
}

SeedOutcome trial_v_start(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "n", 500);
    Graph g = make_gnp(n, s.param("p", 0.1), rng);
    auto pal = make_palettes(g, PaletteKind::Random, rng);
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    ColoringEngine eng(net, pal);
    eng.announce_color_hash_setup(6);
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    eng.slack_generation(all, s.param("p_gen", 0.1));
    auto vs = eng.identify_v_start(eng.uncolored_nodes(), s.param("eps_hat", 0.01));
    o.values["bad"] = static_cast<double>(vs.bad.size());
    o.values["v_start"] = static_cast<double>(vs.v_start.size());
    if (!eng.check_invariants().empty()) return fail(o, "coloring invariant violated");
    if (!vs.bad.empty()) return fail(o, "BAD set is not empty");
    return o;
}

SeedOutcome trial_announce(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::size_t n = sz(s, "n", 200);
    Graph g = make_gnp(n, s.param("p", 0.05), rng);
    auto pal = make_palettes(g, PaletteKind::Random, rng, static_cast<int>(s.param("colorspace_bits", 48)));
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    ColoringEngine eng(net, pal);
    const auto rounds = eng.announce_color_hash_setup(static_cast<int>(s.param("d", 6)));
    o.values["rounds"] = static_cast<double>(rounds);
    std::size_t collisions = 0;
    for (NodeId v = 0; v < n; ++v) {
        std::set<Color> colors(pal[v].begin(), pal[v].end());
        for (NodeId u : g.neighbors(v)) colors.insert(pal[u].begin(), pal[u].end());
        std::set<std::uint64_t> img;
        for (Color c : colors) img.insert(eng.state(v).color_hash(c));
        collisions += colors.size() - img.size();
    }
    o.values["collisions"] = static_cast<double>(collisions);
    if (collisions) return fail(o, "neighborhood colors collide under an announcement hash");
    return o;
}

// ---- dense machinery ----

// Planted cliques as ACD labels (clique id = smallest member), so dense steps are tested
// independently of the decomposition.
AcdLabels planted_labels(const PlantedAcd& pa) {
    AcdLabels L;
    const std::size_t n = pa.graph.n();
    L.role.assign(n, Role::Sparse);
    L.clique_id.assign(n, -1);
    std::map<int, long> first;
    for (NodeId v = 0; v < n; ++v)
        if (pa.clique_of[v] >= 0) {
            first.try_emplace(pa.clique_of[v], static_cast<long>(v));
            L.role[v] = Role::Dense;
            L.clique_id[v] = first[pa.clique_of[v]];
        }
    return L;
}

// Number of neighbors whose permanent color lies outside v's original palette (raw colors).
std::size_t raw_chromatic_slack(const ColoringEngine& eng, NodeId v) {
    const auto& orig = eng.state(v).original;
    std::size_t k = 0;
    for (NodeId u : eng.graph().neighbors(v)) {
        const auto& c = eng.state(u).permanent_color;
        if (c && std::find(orig.begin(), orig.end(), *c) == orig.end()) ++k;
    }
    return k;
}

SeedOutcome trial_dense_exact(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    PlantedAcdParams pp;
    pp.cliques = sz(s, "cliques", 4);
    pp.clique_size = sz(s, "clique_size", 60);
    pp.missing = s.param("missing", 0.05);
    pp.sparse_nodes = sz(s, "sparse_nodes", 100);
    pp.sparse_p = s.param("sparse_p", 0.03);
    pp.bridges = sz(s, "bridges", 20);
    PlantedAcd pa = make_planted_acd(pp, rng);
    const Graph& g = pa.graph;
    auto pal = make_palettes(g, parse_palette_kind(s.param_str("palettes", "range")), rng);
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    ColoringEngine eng(net, pal);
    eng.announce_color_hash_setup(6);
    std::vector<NodeId> all(g.n());
    std::iota(all.begin(), all.end(), NodeId{0});
    eng.slack_generation(all, s.param("p_gen", 0.1));
    DenseConfig dc;
    dc.ell = s.param("ell", 0);
    DenseMachinery dm(eng, planted_labels(pa), dc);
    dm.select_leaders();

    std::size_t violations = 0;
    std::string first;
    auto violate = [&](const std::string& what) {
        ++violations;
        if (first.empty()) first = what;
    };
    for (const auto& C : dm.cliques()) {
        std::vector<bool> in(g.n(), false);
        for (NodeId v : C.members) in[v] = true;
        std::size_t best = std::numeric_limits<std::size_t>::max();
        NodeId arg = kNoNode;
        for (std::size_t i = 0; i < C.members.size(); ++i) {
            const NodeId v = C.members[i];
            if (C.external_degree[i] != external_degree(g, v, in)) violate("external degree differs from oracle");
            if (C.anti_degree[i] != anti_degree(g, v, in, C.members.size())) violate("anti-degree differs from oracle");
            if (C.chromatic_slack[i] != raw_chromatic_slack(eng, v)) violate("chromatic slack differs from raw count");
            if (C.chromatic_slack[i] > g.degree(v)) violate("chromatic slack above degree");
            const std::size_t agg = C.external_degree[i] + C.anti_degree[i] + C.chromatic_slack[i];
            if (agg < best) {
                best = agg;
                arg = v;
            }
        }
        if (C.leader != arg) violate("leader does not minimize the aggregate");
    }

    dm.partition_inliers_outliers();
    for (const auto& C : dm.cliques()) {
        const NodeId x = C.leader;
        // Recompute the three outlier rules from oracle adjacency.
        std::vector<NodeId> others;
        for (NodeId v : C.members)
            if (v != x) others.push_back(v);
        const double size = static_cast<double>(C.members.size());
        const auto q1 = static_cast<std::size_t>(std::ceil(std::max(static_cast<double>(g.degree(x)), size) / 3));
        const auto q2 = static_cast<std::size_t>(std::ceil(size / 6));
        std::set<NodeId> expect;
        auto by_common = others;
        std::stable_sort(by_common.begin(), by_common.end(), [&](NodeId a, NodeId b) {
            return common_neighbors(g, a, x) < common_neighbors(g, b, x);
        });
        for (std::size_t i = 0; i < std::min(q1, by_common.size()); ++i) expect.insert(by_common[i]);
        auto by_degree = others;
        std::stable_sort(by_degree.begin(), by_degree.end(),
                         [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
        for (std::size_t i = 0; i < std::min(q2, by_degree.size()); ++i) expect.insert(by_degree[i]);
        for (NodeId v : others)
            if (!g.has_edge(v, x)) expect.insert(v);
        if (std::vector<NodeId>(expect.begin(), expect.end()) != C.outliers) violate("outliers differ from recomputed rules");
        std::vector<NodeId> uni = C.inliers;
        uni.insert(uni.end(), C.outliers.begin(), C.outliers.end());
        std::sort(uni.begin(), uni.end());
        if (uni != C.members) violate("inliers and outliers do not partition the clique");
        if (!std::binary_search(C.inliers.begin(), C.inliers.end(), x)) violate("leader is not an inlier");
        for (NodeId v : C.inliers)
            if (v != x && !g.has_edge(v, x)) violate("inlier not adjacent to the leader");
    }

    dm.classify_slackability();
    for (const auto& C : dm.cliques()) {
        const NodeId x = C.leader;
        std::vector<bool> in(g.n(), false);
        for (NodeId v : C.members) in[v] = true;
        const double zeta = local_sparsity(g, x);
        const double ex = static_cast<double>(external_degree(g, x, in));
        if (C.sparsity_estimate < zeta - 1e-9 || C.sparsity_estimate > zeta + ex + 1e-9)
            violate("sparsity estimate outside [zeta, zeta + e_x]");
        const bool low = C.slackability_estimate <= dc.c_class * dm.ell();
        if (low != (C.slack_class == SlackClass::Low)) violate("slack class disagrees with the threshold");
    }

    dm.put_aside();
    for (const auto& C : dm.cliques()) {
        for (NodeId v : C.put_aside)
            if (!std::binary_search(C.core.begin(), C.core.end(), v)) violate("put-aside node outside the core");
        for (NodeId v : C.core)
            if (!std::binary_search(C.inliers.begin(), C.inliers.end(), v) || eng.colored(v))
                violate("core node is not an uncolored inlier");
        if (static_cast<double>(C.put_aside.size()) > std::floor(dc.c_pa * dm.ell())) violate("put-aside set above cap");
        if (C.slack_class == SlackClass::High && !C.put_aside.empty()) violate("high-slack clique has put-aside nodes");
    }
    const auto pa_nodes = dm.put_aside_nodes();
    for (NodeId v : pa_nodes)
        for (NodeId u : g.neighbors(v))
            if (std::binary_search(pa_nodes.begin(), pa_nodes.end(), u) && dm.clique_of(u) != dm.clique_of(v))
                violate("put-aside sets of different cliques are adjacent");

    SlackColorParams sp;
    sp.s_min = s.param("s_min", 4);
    eng.slack_color(dm.outlier_nodes(), sp);
    dm.synch_color_trial();
    std::vector<NodeId> rest;
    for (NodeId v : dm.dense_nodes())
        if (!eng.colored(v) && !std::binary_search(pa_nodes.begin(), pa_nodes.end(), v)) rest.push_back(v);
    eng.slack_color(rest, sp);
    PutAsideColoring pc = dm.color_put_aside();
    std::map<std::size_t, std::vector<RelayInterval>> by_clique;
    for (const auto& iv : pc.intervals) by_clique[iv.clique].push_back(iv);
    for (auto& [ci, ivs] : by_clique) {
        const std::size_t p = dm.cliques()[ci].put_aside.size();
        std::sort(ivs.begin(), ivs.end(), [](const RelayInterval& a, const RelayInterval& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            if (ivs[i].last - ivs[i].first + 1 != 2 * p + 1) violate("relay interval has the wrong length");
            if (i > 0 && ivs[i].first <= ivs[i - 1].last) violate("relay intervals overlap");
            if (ivs[i].last >= dm.cliques()[ci].core.size()) violate("relay interval leaves the core");
        }
    }
    for (const auto& msg : eng.check_invariants()) violate(msg);
    o.values["violations"] = static_cast<double>(violations);
    o.values["put_aside"] = static_cast<double>(pa_nodes.size());
    o.values["put_aside_colored"] = static_cast<double>(pc.colored.size());
    if (violations) return fail(o, first);
    return o;
}

SeedOutcome trial_leader_quality(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    PlantedAcdParams pp;
    pp.cliques = sz(s, "cliques", 1);
    pp.clique_size = sz(s, "clique_size", 40);
    pp.missing = s.param("missing", 0.2);
    pp.sparse_nodes = sz(s, "sparse_nodes", 60);
    pp.sparse_p = s.param("sparse_p", 0.05);
    pp.bridges = sz(s, "bridges", 60);
    PlantedAcd pa = make_planted_acd(pp, rng);
    const Graph& g = pa.graph;
    auto pal = make_palettes(g, parse_palette_kind(s.param_str("palettes", "adversarial")), rng);
    NetworkConfig nc;
    nc.master_seed = seed;
    Network net(g, nc);
    o.values["bandwidth"] = static_cast<double>(net.bandwidth());
    ColoringEngine eng(net, pal);
    eng.announce_color_hash_setup(6);
    std::vector<NodeId> all(g.n());
    std::iota(all.begin(), all.end(), NodeId{0});
    eng.slack_generation(all, s.param("p_gen", 0.1));
    DenseMachinery dm(eng, planted_labels(pa), {});
    dm.select_leaders();
    const double factor = s.param("factor", 6);
    double worst = 0;
    for (const auto& C : dm.cliques()) {
        double smin = std::numeric_limits<double>::infinity();
        for (NodeId v : C.members) smin = std::min(smin, slackability(g, pal, v));
        const double sx = slackability(g, pal, C.leader);
        const double ratio = smin > 0 ? sx / smin : (sx > 0 ? std::numeric_limits<double>::infinity() : 1.0);
        worst = std::max(worst, ratio);
        if (sx > factor * smin + 1e-9) o.ok = false;
    }
    o.values["ratio"] = worst;
    if (!o.ok) o.note = "leader slackability above the factor times the clique minimum";
    return o;
}

// ---- pipeline ----

SeedOutcome trial_pipeline(const TrialSpec& s, std::uint64_t seed) {
    Rng rng(seed);
    SeedOutcome o;
    const std::string family = s.param_str("family", "gnp");
    const std::size_t n = sz(s, "n", 300);
    Graph g;
    if (family == "gnp") g = make_gnp(n, s.param("p", 0.05), rng);
    else if (family == "tree") g = make_random_tree(n, rng);
    else if (family == "star") g = make_star(n - 1);
    else if (family == "cliques") g = make_clique_union(sz(s, "count", 5), sz(s, "size", 30));
    else if (family == "planted") {
        PlantedAcdParams pp;
        pp.cliques = sz(s, "cliques", 4);
        pp.clique_size = sz(s, "clique_size", 40);
        pp.sparse_nodes = n;
        g = make_planted_acd(pp, rng).graph;
    } else throw std::invalid_argument("unknown graph family " + family);
    auto pal = make_palettes(g, parse_palette_kind(s.param_str("palettes", "adversarial")), rng);
    PipelineConfig cfg;
    cfg.master_seed = seed;
    cfg.backend = backend_of(s);
    cfg.phases = s.param("phases", 1) != 0;
    PipelineResult r = run_d1lc(g, pal, cfg);
    o.values["rounds"] = static_cast<double>(r.stats.rounds_used);
    o.values["fallback_rounds"] = static_cast<double>(r.fallback.rounds);
    if (r.stats.max_bits_per_edge_round > r.stats.bandwidth_bits) return fail(o, "message above B");
    if (!r.ok()) return fail(o, "coloring is not complete, proper and list-valid");
    const auto plan = phase_plan(g.n(), g.max_degree(), cfg.degree_floor);
    if (plan.ranges.size() != r.plan.ranges.size()) return fail(o, "phase plan mismatch");
    const OracleReport rep = oracle_suite(g, pal);
    if (rep.cross_check_failures) return fail(o, "oracle cross-check failed");
    return o;
}

}  // namespace

const std::map<std::string, TrialKind>& trial_kinds() {
    static const std::map<std::string, TrialKind> kinds{
        {"hash_purity", {trial_hash_purity, {"make_hash"}, "hash evaluation is pure and lands in [1, T]"}},
        {"pairwise_joint", {trial_pairwise_joint, {"make_hash"}, "joint hit frequency of the affine family"}},
        {"low_collision_hash",
         {trial_low_collision, {"choose_low_collision_hash"}, "rejection-sampled hash meets its collision budget"}},
        {"sampler", {trial_sampler, {"sample_multiset"}, "sample average of a half-density set"}},
        {"ecc_distance", {trial_ecc, {"ecc_encode"}, "exhaustive minimum codeword weight"}},
        {"color_hash", {trial_color_hash, {"make_universal_color_hash"}, "palette colors hash injectively"}},
        {"set_identities", {trial_set_identities, {"restrict", "collide", "hit"}, "set-operator identities"}},
        {"similarity", {trial_similarity, {"estimate_similarity", "edge_shared_seed", "send"}, "intersection estimate error"}},
        {"joint_sample", {trial_joint_sample, {"joint_sample", "edge_shared_seed"}, "both endpoints draw the same shared element"}},
        {"runtime", {trial_runtime, {"run_rounds", "send", "broadcast", "edge_shared_seed"}, "flooding replay and accounting"}},
        {"sparsity", {trial_sparsity, {"estimate_sparsity", "estimate_local_sparsity"}, "sparsity estimates against the oracle"}},
        {"triangles", {trial_triangles, {"detect_triangle_edges"}, "triangle-rich edge detection on gap gadgets"}},
        {"c4", {trial_c4, {"detect_c4_wedges"}, "4-cycle-rich wedge detection on gap gadgets"}},
        {"buddy", {trial_buddy, {"buddy"}, "buddy predicate on a constructed overlap"}},
        {"acd", {trial_acd, {"compute_acd", "buddy"}, "decomposition roles and clique recovery"}},
        {"multi_trial",
         {trial_multi_trial,
          {"multi_trial", "announce_color_hash_setup", "make_universal_color_hash", "choose_low_collision_hash",
           "sample_multiset"},
          "multi-trial failure rate under the palette precondition"}},
        {"try_color", {trial_try_color, {"try_color", "try_random_color"}, "trial conflict semantics"}},
        {"try_random", {trial_try_random, {"try_random_color"}, "one random trial with slack d/2"}},
        {"slack_color", {trial_slack_color, {"slack_color", "multi_trial"}, "slack coloring with slack 3d"}},
        {"v_start", {trial_v_start, {"slack_generation", "identify_v_start"}, "BAD set after slack generation"}},
        {"announce", {trial_announce, {"announce_color_hash_setup", "make_universal_color_hash"}, "announcement hash setup"}},
        {"dense_exact",
         {trial_dense_exact,
          {"select_leader", "chromatic_slack", "partition_inliers_outliers", "classify_slackability", "put_aside",
           "synch_color_trial", "color_put_aside", "slack_generation", "slack_color"},
          "exact dense-machinery invariants"}},
        {"leader_quality", {trial_leader_quality, {"select_leader", "chromatic_slack"}, "leader slackability ratio"}},
        {"pipeline",
         {trial_pipeline, {"run_d1lc", "phase_plan", "fallback_color", "verify_coloring", "oracle_suite"},
          "full pipeline totality"}},
    };
    return kinds;
}

bool TrialVerdict::pass() const {
    return !claims.empty() && std::all_of(claims.begin(), claims.end(), [](const ClaimResult& c) { return c.pass; });
}

TrialVerdict run_trials(const TrialSpec& spec) {
    const auto& kinds = trial_kinds();
    auto it = kinds.find(spec.kind);
    if (it == kinds.end()) throw std::invalid_argument("trial " + spec.name + ": unknown kind " + spec.kind);
    if (spec.seeds < 1) throw std::invalid_argument("trial " + spec.name + ": needs at least one seed");
    if (spec.claims.empty()) throw std::invalid_argument("trial " + spec.name + ": no claim");
    if (spec.statistical() && spec.seeds < 1000)
        throw std::invalid_argument("trial " + spec.name + ": statistical claims need at least 1000 seeds");
    TrialVerdict v;
    v.name = spec.name;
    v.kind = spec.kind;
    v.anchor = spec.anchor;
    v.seeds = spec.seeds;
    v.first_seed = spec.first_seed;
    const auto t0 = std::chrono::steady_clock::now();
    std::map<std::string, std::vector<double>> values;
    for (std::size_t i = 0; i < spec.seeds; ++i) {
        const std::uint64_t seed = spec.first_seed + i;
        SeedOutcome o = it->second.fn(spec, seed);
        if (!o.ok) {
            ++v.failures;
            if (v.failing_seeds.size() < 20) v.failing_seeds.push_back(seed);
            if (v.first_failure_note.empty()) v.first_failure_note = o.note;
        }
        for (const auto& [k, x] : o.values) values[k].push_back(x);
    }
    v.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (const Claim& c : spec.claims) {
        ClaimResult r;
        r.claim = c;
        const double N = static_cast<double>(spec.seeds);
        if (c.statistic == "success_rate") r.measured = (N - static_cast<double>(v.failures)) / N;
        else if (c.statistic == "failure_rate") r.measured = static_cast<double>(v.failures) / N;
        else if (c.statistic == "violations") r.measured = static_cast<double>(v.failures);
        else {
            const auto colon = c.statistic.find(':');
            if (colon == std::string::npos) throw std::invalid_argument("unknown statistic " + c.statistic);
            const std::string agg = c.statistic.substr(0, colon), key = c.statistic.substr(colon + 1);
            auto vit = values.find(key);
            if (vit == values.end() || vit->second.empty())
                throw std::invalid_argument("trial " + spec.name + " recorded no value " + key);
            const auto& xs = vit->second;
            if (agg == "mean") r.measured = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
            else if (agg == "min") r.measured = *std::min_element(xs.begin(), xs.end());
            else if (agg == "max") r.measured = *std::max_element(xs.begin(), xs.end());
            else throw std::invalid_argument("unknown aggregate " + agg);
        }
        r.pass = c.direction == Direction::AtLeast ? r.measured >= c.threshold : r.measured <= c.threshold;
        v.claims.push_back(r);
    }
    return v;
}

Claim parse_claim(const std::string& text) {
    Claim c;
    std::size_t pos = text.find(">=");
    if (pos != std::string::npos) c.direction = Direction::AtLeast;
    else if ((pos = text.find("<=")) != std::string::npos) c.direction = Direction::AtMost;
    else throw std::invalid_argument("claim needs >= or <=: " + text);
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t") - b + 1);
    };
    c.statistic = trim(text.substr(0, pos));
    c.threshold = std::stod(trim(text.substr(pos + 2)));
    return c;
}

std::vector<TrialSpec> parse_manifest(std::istream& in) {
    std::vector<TrialSpec> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "manifest line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']' || line.rfind("[trial ", 0) != 0) throw std::invalid_argument(where + "bad stanza header");
            TrialSpec t;
            t.name = trim(line.substr(7, line.size() - 8));
            out.push_back(std::move(t));
            continue;
        }
        if (out.empty()) throw std::invalid_argument(where + "key outside a stanza");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + "missing '='");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        TrialSpec& t = out.back();
        if (key == "kind") t.kind = value;
        else if (key == "seeds") t.seeds = std::stoull(value);
        else if (key == "first_seed") t.first_seed = std::stoull(value);
        else if (key == "anchor") t.anchor = value;
        else if (key == "claim") t.claims.push_back(parse_claim(value));
        else if (key == "ops") {
            std::stringstream ss(value);
            std::string op;
            while (std::getline(ss, op, ','))
                if (!trim(op).empty()) t.ops.push_back(trim(op));
        } else if (key.rfind("param.", 0) == 0) t.params[key.substr(6)] = value;
        else throw std::invalid_argument(where + "unknown key " + key);
    }
    for (const auto& t : out)
        if (t.kind.empty()) throw std::invalid_argument("trial " + t.name + " has no kind");
    return out;
}

std::vector<TrialSpec> load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open manifest " + path);
    return parse_manifest(f);
}

const std::vector<std::string>& core_operations() {
    static const std::vector<std::string> ops{
        "make_hash", "choose_low_collision_hash", "sample_multiset", "ecc_encode", "make_universal_color_hash",
        "restrict", "collide", "hit", "estimate_similarity", "joint_sample",
        "run_rounds", "send", "edge_shared_seed", "broadcast",
        "estimate_sparsity", "estimate_local_sparsity", "detect_triangle_edges", "detect_c4_wedges", "buddy",
        "compute_acd",
        "try_color", "try_random_color", "slack_generation", "identify_v_start", "multi_trial", "slack_color",
        "announce_color_hash_setup",
        "chromatic_slack", "select_leader", "classify_slackability", "partition_inliers_outliers", "put_aside",
        "synch_color_trial", "color_put_aside",
    };
    return ops;
}

std::vector<std::string> covered_operations(const TrialSpec& spec) {
    std::set<std::string> ops(spec.ops.begin(), spec.ops.end());
    auto it = trial_kinds().find(spec.kind);
    if (it != trial_kinds().end()) ops.insert(it->second.ops.begin(), it->second.ops.end());
    return {ops.begin(), ops.end()};
}

std::vector<std::string> uncovered_operations(const std::vector<TrialSpec>& specs) {
    std::set<std::string> covered;
    for (const auto& s : specs)
        for (auto& op : covered_operations(s)) covered.insert(op);
    std::vector<std::string> out;
    for (const auto& op : core_operations())
        if (!covered.count(op)) out.push_back(op);
    return out;
}

bool ManifestReport::pass() const {
    return uncovered.empty() &&
           std::all_of(verdicts.begin(), verdicts.end(), [](const TrialVerdict& v) { return v.pass(); });
}

ManifestReport run_manifest(const std::vector<TrialSpec>& specs) {
    ManifestReport r;
    r.uncovered = uncovered_operations(specs);
    for (const auto& s : specs) r.verdicts.push_back(run_trials(s));
    return r;
}

std::string format_verdict(const TrialVerdict& v) {
    std::ostringstream o;
    o << (v.pass() ? "PASS" : "FAIL") << " " << v.name << " kind=" << v.kind << " seeds=" << v.first_seed << ".."
      << (v.first_seed + v.seeds - 1) << " failures=" << v.failures << " ms=" << static_cast<long>(v.millis);
    for (const auto& c : v.claims)
        o << " [" << c.claim.statistic << "=" << c.measured << (c.claim.direction == Direction::AtLeast ? " >= " : " <= ")
          << c.claim.threshold << (c.pass ? " ok" : " violated") << "]";
    if (!v.failing_seeds.empty()) {
        o << " failing_seeds=";
        for (std::size_t i = 0; i < v.failing_seeds.size(); ++i) o << (i ? "," : "") << v.failing_seeds[i];
        o << " first_failure=\"" << v.first_failure_note << "\"";
    }
    if (!v.anchor.empty()) o << " anchor=\"" << v.anchor << "\"";
    return o.str();
}

std::string format_manifest_report(const ManifestReport& r) {
    std::ostringstream o;
    for (const auto& v : r.verdicts) o << format_verdict(v) << "\n";
    o << (r.uncovered.empty() ? "PASS" : "FAIL") << " coverage: " << core_operations().size() - r.uncovered.size()
      << "/" << core_operations().size() << " operations referenced";
    for (const auto& op : r.uncovered) o << " missing=" << op;
    o << "\n" << (r.pass() ? "PASS" : "FAIL") << " manifest\n";
    return o.str();
}

}  // namespace d1lc
