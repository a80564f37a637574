#include "d1lc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace d1lc {

const char* to_string(Backend b) { return b == Backend::Idealized ? "idealized" : "uniform"; }

Backend parse_backend(const std::string& s) {
    if (s == "idealized") return Backend::Idealized;
    if (s == "uniform") return Backend::Uniform;
    throw std::invalid_argument("unknown backend: " + s);
}

void PipelineConfig::validate() const {
    auto eps_ok = [](double e) { return e > 0.0 && e <= 1.0 / 6; };
    if (!eps_ok(eps_acd)) throw std::invalid_argument("eps_acd must lie in (0, 1/6]");
    if (!eps_ok(eps_spa)) throw std::invalid_argument("eps_spa must lie in (0, 1/6]");
    if (!eps_ok(eps_hat)) throw std::invalid_argument("eps_hat must lie in (0, 1/6]");
    if (!(p_gen > 0.0 && p_gen <= 1.0)) throw std::invalid_argument("p_gen must lie in (0, 1]");
    if (degree_floor < 2) throw std::invalid_argument("degree_floor must be at least 2");
    if (!(kappa > 1.0 / s_min() && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (1/s_min, 1]");
    if (!(bandwidth_mult > 0)) throw std::invalid_argument("bandwidth_mult must be positive");
    if (c_class <= 0 || c_pa <= 0) throw std::invalid_argument("c_class and c_pa must be positive");
    if (fallback_cap_mult <= 0) throw std::invalid_argument("fallback_cap_mult must be positive");
    if (residue_rounds < 0 || init_rounds < 0) throw std::invalid_argument("round counts must be non-negative");
    if (hash_d < 6) throw std::invalid_argument("hash_d must be at least 6");
    if (flood_rounds < 1) throw std::invalid_argument("flood_rounds must be at least 1");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
}

NetworkConfig PipelineConfig::network_config() const {
    NetworkConfig nc;
    nc.bandwidth_mult = bandwidth_mult;
    nc.master_seed = master_seed;
    nc.threads = threads;
    return nc;
}

double PipelineConfig::s_min() const { return std::max(1.0, std::floor(static_cast<double>(degree_floor) / 4)); }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected a boolean, got " + v);
}

}  // namespace

PipelineConfig parse_config(std::istream& in) {
    PipelineConfig c;
    const std::map<std::string, std::function<void(const std::string&)>> setters{
        {"eps_acd", [&](const std::string& v) { c.eps_acd = std::stod(v); }},
        {"eps_spa", [&](const std::string& v) { c.eps_spa = std::stod(v); }},
        {"eps_hat", [&](const std::string& v) { c.eps_hat = std::stod(v); }},
        {"p_gen", [&](const std::string& v) { c.p_gen = std::stod(v); }},
        {"kappa", [&](const std::string& v) { c.kappa = std::stod(v); }},
        {"c_class", [&](const std::string& v) { c.c_class = std::stod(v); }},
        {"c_pa", [&](const std::string& v) { c.c_pa = std::stod(v); }},
        {"bandwidth_mult", [&](const std::string& v) { c.bandwidth_mult = std::stod(v); }},
        {"backend", [&](const std::string& v) { c.backend = parse_backend(v); }},
        {"degree_floor", [&](const std::string& v) { c.degree_floor = std::stoull(v); }},
        {"fallback_cap_mult", [&](const std::string& v) { c.fallback_cap_mult = std::stod(v); }},
        {"residue_rounds", [&](const std::string& v) { c.residue_rounds = std::stoi(v); }},
        {"init_rounds", [&](const std::string& v) { c.init_rounds = std::stoi(v); }},
        {"hash_d", [&](const std::string& v) { c.hash_d = std::stoi(v); }},
        {"flood_rounds", [&](const std::string& v) { c.flood_rounds = std::stoi(v); }},
        {"phases", [&](const std::string& v) { c.phases = parse_bool(v); }},
        {"master_seed", [&](const std::string& v) { c.master_seed = std::stoull(v); }},
        {"threads", [&](const std::string& v) { c.threads = std::stoi(v); }},
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing '='");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key " + key);
        try {
            it->second(value);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file " + path);
    return parse_config(f);
}

std::string to_kv(const PipelineConfig& c) {
    std::ostringstream o;
    o << "eps_acd=" << c.eps_acd << "\neps_spa=" << c.eps_spa << "\neps_hat=" << c.eps_hat << "\np_gen=" << c.p_gen
      << "\nkappa=" << c.kappa << "\nc_class=" << c.c_class << "\nc_pa=" << c.c_pa
      << "\nbandwidth_mult=" << c.bandwidth_mult << "\nbackend=" << to_string(c.backend)
      << "\ndegree_floor=" << c.degree_floor << "\nfallback_cap_mult=" << c.fallback_cap_mult
      << "\nresidue_rounds=" << c.residue_rounds << "\ninit_rounds=" << c.init_rounds << "\nhash_d=" << c.hash_d
      << "\nflood_rounds=" << c.flood_rounds << "\nphases=" << (c.phases ? "true" : "false")
      << "\nmaster_seed=" << c.master_seed << "\nthreads=" << c.threads << "\n";
    return o.str();
}

PhasePlan phase_plan(std::size_t n, std::size_t max_degree, std::size_t floor) {
    (void)n;
    if (floor < 2) throw std::invalid_argument("phase_plan: floor must be at least 2");
    PhasePlan plan;
    std::size_t x = max_degree;
    while (x > floor) {
        const double l7 = std::ceil(std::pow(std::log2(static_cast<double>(x)), 7));
        std::size_t lo = floor;
        if (l7 <= static_cast<double>(x) / 2 && l7 > static_cast<double>(floor)) lo = static_cast<std::size_t>(l7);
        plan.ranges.push_back({lo, x});
        if (lo == floor) break;
        x = lo - 1;
    }
    plan.residue = {0, plan.ranges.empty() ? max_degree : plan.ranges.back().lo - 1};
    return plan;
}

FallbackReport fallback_color(ColoringEngine& eng, std::span<const NodeId> uncolored, std::size_t cap) {
    Network& net = eng.net();
    const Graph& g = eng.graph();
    const std::uint64_t before = net.rounds();
    const std::string saved_phase = eng.phase();
    const std::string phase = "fallback";
    FallbackReport rep;
    rep.cap = cap;
    std::vector<NodeId> S;
    for (NodeId v : uncolored)
        if (!eng.colored(v)) S.push_back(v);
    std::sort(S.begin(), S.end());
    rep.nodes = S.size();
    if (S.empty()) return rep;

    std::vector<std::uint8_t> in(g.n(), 0);
    for (NodeId v : S) in[v] = 1;
    const int id_bits = std::max(1, ceil_log2(g.n() + 1));
    const int cnt_bits = bits_for(g.n() + 1);
    const int color_bits = eng.colorspace_bits();
    auto members_of = [&](NodeId v) {
        std::vector<NodeId> out;
        for (NodeId u : g.neighbors(v))
            if (in[u]) out.push_back(u);
        return out;
    };

    // Min-id flooding; a node re-sends only after its label dropped. Labels reach each node
    // along a shortest path from the root, so the adopting sender is a BFS parent.
    std::vector<NodeId> label(g.n(), kNoNode), parent(g.n(), kNoNode);
    std::vector<std::size_t> depth(g.n(), 0);
    for (NodeId v : S) label[v] = v;
    std::vector<NodeId> changed = S;
    for (std::size_t step = 1;; ++step) {
        const bool sent = net.round_or_skip(phase, changed, [&](NodeCtx& c) {
            BitString p;
            p.push(label[c.id()], id_bits);
            for (NodeId u : members_of(c.id())) c.send(u, p);
        }, false);
        if (!sent) break;
        changed.clear();
        for (NodeId v : S) {
            NodeId best = label[v], from = kNoNode;
            for (const auto& m : net.inbox(v)) {
                const auto l = static_cast<NodeId>(m.payload.get(0, id_bits));
                if (l < best || (l == best && from != kNoNode && m.src < from)) {
                    best = l;
                    from = m.src;
                }
            }
            if (best < label[v]) {
                label[v] = best;
                parent[v] = from;
                depth[v] = step;
                changed.push_back(v);
            }
        }
    }
    std::size_t max_depth = 0;
    for (NodeId v : S) max_depth = std::max(max_depth, depth[v]);
    std::vector<std::vector<NodeId>> by_depth(max_depth + 1);
    for (NodeId v : S) by_depth[depth[v]].push_back(v);

    // Size convergecast so the root can check the cap before gathering.
    std::vector<std::size_t> subtree(g.n(), 1);
    for (std::size_t k = max_depth; k >= 1; --k) {
        net.round(phase, by_depth[k], [&](NodeCtx& c) {
            BitString p;
            p.push(subtree[c.id()], cnt_bits);
            c.send(parent[c.id()], std::move(p));
        });
        for (NodeId w : by_depth[k - 1])
            for (const auto& m : net.inbox(w)) subtree[w] += m.payload.get(0, cnt_bits);
    }
    for (NodeId r : by_depth[0]) {
        ++rep.components;
        rep.largest_component = std::max(rep.largest_component, subtree[r]);
    }
    if (rep.largest_component > cap) {
        rep.shattering_failure = true;
        rep.rounds = net.rounds() - before;
        return rep;
    }

    // Gather: each node's record is id, palette, and its uncolored neighbors.
    std::vector<BitString> carry(g.n());
    for (NodeId v : S) {
        BitString& b = carry[v];
        const auto& pal = eng.state(v).palette;
        const auto nb = members_of(v);
        b.push(v, id_bits);
        b.push(pal.size(), cnt_bits);
        for (Color c : pal) b.push(c, color_bits);
        b.push(nb.size(), cnt_bits);
        for (NodeId u : nb) b.push(u, id_bits);
    }
    std::vector<std::vector<std::pair<NodeId, std::vector<NodeId>>>> child_ids(g.n());
    auto ids_in = [&](const BitString& s) {
        std::vector<NodeId> ids;
        BitReader r(s);
        while (r.remaining() > 0) {
            ids.push_back(static_cast<NodeId>(r.read(id_bits)));
            const auto k = r.read(cnt_bits);
            for (std::uint64_t i = 0; i < k; ++i) r.read(color_bits);
            const auto a = r.read(cnt_bits);
            for (std::uint64_t i = 0; i < a; ++i) r.read(id_bits);
        }
        return ids;
    };
    for (std::size_t k = max_depth; k >= 1; --k) {
        net.round(phase, by_depth[k], [&](NodeCtx& c) { c.send_stream(parent[c.id()], carry[c.id()]); });
        for (NodeId w : by_depth[k - 1])
            for (const auto& m : net.inbox(w)) {
                child_ids[w].emplace_back(m.src, ids_in(m.payload));
                carry[w].append(m.payload);
            }
    }
    // Roots color greedily in id order.
    std::map<NodeId, Color> assigned;
    for (NodeId root : by_depth[0]) {
        BitReader r(carry[root]);
        std::map<NodeId, std::pair<Palette, std::vector<NodeId>>> recs;
        while (r.remaining() > 0) {
            const auto v = static_cast<NodeId>(r.read(id_bits));
            auto& [pal, nb] = recs[v];
            pal.resize(r.read(cnt_bits));
            for (auto& c : pal) c = r.read(color_bits);
            nb.resize(r.read(cnt_bits));
            for (auto& u : nb) u = static_cast<NodeId>(r.read(id_bits));
        }
        for (auto& [v, rec] : recs) {
            std::vector<Color> taken;
            for (NodeId u : rec.second)
                if (auto it = assigned.find(u); it != assigned.end()) taken.push_back(it->second);
            auto pick = std::find_if(rec.first.begin(), rec.first.end(), [&](Color c) {
                return std::find(taken.begin(), taken.end(), c) == taken.end();
            });
            if (pick == rec.first.end()) throw std::logic_error("fallback: palette exhausted, palette invariant broken");
            assigned[v] = *pick;
        }
    }
    // Scatter: each node forwards to every child the assignments of that child's subtree.
    auto encode = [&](const std::vector<NodeId>& ids) {
        BitString p;
        for (NodeId u : ids) {
            p.push(u, id_bits);
            p.push(assigned.at(u), color_bits);
        }
        return p;
    };
    for (std::size_t k = 0; k < max_depth; ++k) {
        net.round(phase, by_depth[k], [&](NodeCtx& c) {
            for (const auto& [child, ids] : child_ids[c.id()]) c.send_stream(child, encode(ids));
        });
    }
    std::vector<std::pair<NodeId, Color>> adopt;
    for (NodeId v : S) adopt.emplace_back(v, assigned.at(v));
    eng.set_phase(phase);
    eng.commit_colors(adopt);
    eng.set_phase(saved_phase);
    rep.rounds = net.rounds() - before;
    return rep;
}

namespace {

std::vector<NodeId> still_uncolored(const ColoringEngine& eng, std::span<const NodeId> nodes) {
    std::vector<NodeId> out;
    for (NodeId v : nodes)
        if (!eng.colored(v)) out.push_back(v);
    return out;
}

std::vector<NodeId> minus(std::vector<NodeId> a, std::vector<NodeId> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<NodeId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

PhaseReport run_phase(ColoringEngine& eng, const PipelineConfig& cfg, const DegreeRange& range, std::size_t index) {
    Network& net = eng.net();
    const Graph& g = eng.graph();
    const std::uint64_t before = net.rounds();
    const std::string tag = "phase" + std::to_string(index);
    PhaseReport rep;
    rep.range = range;

    std::vector<NodeId> part;
    for (NodeId v = 0; v < g.n(); ++v)
        if (!eng.colored(v) && range.contains(g.degree(v))) part.push_back(v);
    rep.participants = part.size();
    if (part.empty()) return rep;

    AcdConfig ac;
    ac.eps_acd = cfg.eps_acd;
    ac.eps_spa = cfg.eps_spa;
    ac.backend = cfg.backend == Backend::Idealized ? BuddyBackend::Idealized : BuddyBackend::Uniform;
    ac.sim.c_k = 0;
    ac.flood_rounds = cfg.flood_rounds;
    AcdLabels acd = compute_acd(net, ac);
    // Nodes outside the range keep no role in this phase.
    std::vector<std::uint8_t> in_part(g.n(), 0);
    for (NodeId v : part) in_part[v] = 1;
    for (NodeId v = 0; v < g.n(); ++v)
        if (!in_part[v]) {
            acd.role[v] = Role::Sparse;
            acd.clique_id[v] = -1;
        }

    SlackColorParams sp;
    sp.s_min = cfg.s_min();
    sp.kappa = cfg.kappa;
    sp.init_rounds = cfg.init_rounds;
    sp.trial.backend = cfg.backend == Backend::Idealized ? TrialBackend::Idealized : TrialBackend::Uniform;

    eng.set_phase(tag + "/slack-generation");
    eng.slack_generation(part, cfg.p_gen);

    std::vector<NodeId> sparse_part, dense_part;
    for (NodeId v : part) {
        if (acd.role[v] == Role::Dense) {
            ++rep.dense;
            dense_part.push_back(v);
        } else {
            ++(acd.role[v] == Role::Uneven ? rep.uneven : rep.sparse);
            sparse_part.push_back(v);
        }
    }

    // Sparse and uneven nodes: V_start first, then the rest; BAD nodes wait for the fallback.
    eng.set_phase(tag + "/sparse");
    VStartResult vs = eng.identify_v_start(still_uncolored(eng, sparse_part), cfg.eps_hat);
    rep.v_start = vs.v_start.size();
    rep.bad = vs.bad.size();
    auto r1 = eng.slack_color(still_uncolored(eng, vs.v_start), sp);
    auto rest = minus(minus(still_uncolored(eng, sparse_part), vs.v_start), vs.bad);
    auto r2 = eng.slack_color(rest, sp);
    rep.dropped += r1.dropped.size() + r2.dropped.size();

    // Dense nodes.
    eng.set_phase(tag + "/dense");
    DenseConfig dc;
    dc.c_class = cfg.c_class;
    dc.c_pa = cfg.c_pa;
    DenseMachinery dm(eng, acd, dc);
    rep.cliques = dm.cliques().size();
    if (!dm.cliques().empty()) {
        dm.select_leaders();
        dm.partition_inliers_outliers();
        dm.classify_slackability();
        dm.put_aside();
        for (const auto& C : dm.cliques()) rep.low_cliques += C.slack_class == SlackClass::Low;
        const auto pa = dm.put_aside_nodes();
        rep.put_aside = pa.size();
        auto r3 = eng.slack_color(still_uncolored(eng, dm.outlier_nodes()), sp);
        dm.synch_color_trial();
        auto r4 = eng.slack_color(minus(still_uncolored(eng, dense_part), pa), sp);
        auto pac = dm.color_put_aside();
        rep.put_aside_deferred = pac.deferred.size();
        rep.dropped += r3.dropped.size() + r4.dropped.size();
    }
    rep.left_uncolored = still_uncolored(eng, part).size();
    rep.rounds = net.rounds() - before;
    return rep;
}

}  // namespace

PipelineResult run_d1lc(Network& net, const std::vector<Palette>& palettes, const PipelineConfig& cfg) {
    cfg.validate();
    const Graph& g = net.graph();
    if (palettes.size() != g.n()) throw std::invalid_argument("one palette per node is required");
    for (NodeId v = 0; v < g.n(); ++v) {
        if (palettes[v].size() < g.degree(v) + 1)
            throw std::invalid_argument("palette of node " + std::to_string(v) + " is smaller than its degree + 1");
        for (Color c : palettes[v])
            if (c >> kMaxColorBits) throw std::invalid_argument("color of node " + std::to_string(v) + " exceeds 62 bits");
    }
    net.set_threads(cfg.threads);
    PipelineResult res;
    EngineOptions eo;
    eo.hash_d = cfg.hash_d;
    ColoringEngine eng(net, palettes, eo);
    eng.set_phase("setup");
    eng.announce_color_hash_setup(cfg.hash_d);

    res.plan = phase_plan(g.n(), g.max_degree(), cfg.degree_floor);
    if (cfg.phases)
        for (std::size_t i = 0; i < res.plan.ranges.size(); ++i)
            res.phases.push_back(run_phase(eng, cfg, res.plan.ranges[i], i));

    // Residue: degrees below every range (all nodes when phases are off) get plain random trials.
    std::vector<NodeId> residue;
    for (NodeId v = 0; v < g.n(); ++v)
        if (!eng.colored(v) && (!cfg.phases || res.plan.residue.contains(g.degree(v)))) residue.push_back(v);
    res.residue_nodes = residue.size();
    const std::uint64_t before_residue = net.rounds();
    eng.set_phase("residue");
    for (int i = 0; i < cfg.residue_rounds && !residue.empty(); ++i) {
        eng.try_random_colors(residue);
        residue = still_uncolored(eng, residue);
    }
    res.residue_rounds = net.rounds() - before_residue;

    const double lg = std::log2(static_cast<double>(std::max<std::size_t>(g.n(), 2)));
    const auto cap = static_cast<std::size_t>(std::ceil(cfg.fallback_cap_mult * lg * lg));
    res.fallback = fallback_color(eng, eng.uncolored_nodes(), cap);

    res.coloring = eng.coloring();
    res.stats = net.stats();
    res.verification = verify_coloring(g, palettes, res.coloring);
    res.invariant_violations = eng.check_invariants();
    return res;
}

PipelineResult run_d1lc(const Graph& g, const std::vector<Palette>& palettes, const PipelineConfig& cfg) {
    cfg.validate();
    Network net(g, cfg.network_config());
    return run_d1lc(net, palettes, cfg);
}

std::string format_report(const PipelineResult& r) {
    std::ostringstream o;
    o << "ok=" << (r.ok() ? "true" : "false") << "\n";
    o << "uncolored=" << r.verification.uncolored << " conflicts=" << r.verification.conflicts
      << " off_list=" << r.verification.off_list << "\n";
    o << "rounds=" << r.stats.rounds_used << "\n";
    o << "bandwidth_bits=" << r.stats.bandwidth_bits << "\n";
    o << "max_bits_per_edge_round=" << r.stats.max_bits_per_edge_round << "\n";
    o << "messages=" << r.stats.total_messages << "\n";
    o << "total_bits=" << r.stats.total_bits << "\n";
    o << "transcript_hash=" << std::hex << r.stats.transcript_hash << std::dec << "\n";
    for (std::size_t i = 0; i < r.phases.size(); ++i) {
        const auto& p = r.phases[i];
        o << "phase=" << i << " range=" << p.range.lo << ".." << p.range.hi << " participants=" << p.participants
          << " sparse=" << p.sparse << " uneven=" << p.uneven << " dense=" << p.dense << " cliques=" << p.cliques
          << " low_cliques=" << p.low_cliques << " v_start=" << p.v_start << " bad=" << p.bad
          << " put_aside=" << p.put_aside << " put_aside_deferred=" << p.put_aside_deferred << " dropped=" << p.dropped
          << " left_uncolored=" << p.left_uncolored << " rounds=" << p.rounds << "\n";
    }
    o << "residue_range=" << r.plan.residue.lo << ".." << r.plan.residue.hi << " residue_nodes=" << r.residue_nodes
      << " residue_rounds=" << r.residue_rounds << "\n";
    o << "fallback_nodes=" << r.fallback.nodes << " fallback_components=" << r.fallback.components
      << " fallback_largest=" << r.fallback.largest_component << " fallback_cap=" << r.fallback.cap
      << " fallback_rounds=" << r.fallback.rounds
      << " shattering_failure=" << (r.fallback.shattering_failure ? "true" : "false") << "\n";
    for (const auto& [phase, rounds] : r.stats.phase_rounds) o << "phase_rounds." << phase << "=" << rounds << "\n";
    for (const auto& v : r.verification.violations) o << "violation=" << v << "\n";
    for (const auto& v : r.invariant_violations) o << "invariant=" << v << "\n";
    return o.str();
}

}  // namespace d1lc
