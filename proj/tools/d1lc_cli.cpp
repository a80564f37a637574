#include "d1lc/gen.hpp"
#include "d1lc/graph.hpp"
#include "d1lc/oracle.hpp"
#include "d1lc/pipeline.hpp"
#include "d1lc/probe.hpp"
#include "d1lc/trials.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <malloc.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace d1lc;
using json = nlohmann::json;

void write_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write report " + path);
    f << j.dump(2) << "\n";
}

json stats_json(const RoundStats& s) {
    json j{{"rounds", s.rounds_used},
           {"bandwidth_bits", s.bandwidth_bits},
           {"max_bits_per_edge_round", s.max_bits_per_edge_round},
           {"messages", s.total_messages},
           {"total_bits", s.total_bits},
           {"transcript_hash", s.transcript_hash}};
    for (const auto& [phase, r] : s.phase_rounds) j["phase_rounds"][phase] = r;
    return j;
}

struct RunOptions {
    std::string graph, palettes, config, report, coloring_out;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    double bandwidth_mult = 1.0;
    std::uint64_t max_rounds = 0;
    std::string backend;
    int threads = 0;
};

PipelineConfig build_config(const RunOptions& o, const CLI::App& sub) {
    std::stringstream kv;
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) throw std::runtime_error("cannot open config " + o.config);
        kv << f.rdbuf() << "\n";
    }
    if (sub.count("--seed")) kv << "master_seed=" << o.seed << "\n";
    if (sub.count("--bandwidth-mult")) kv << "bandwidth_mult=" << o.bandwidth_mult << "\n";
    if (!o.backend.empty()) kv << "backend=" << o.backend << "\n";
    if (o.threads > 0) kv << "threads=" << o.threads << "\n";
    for (const auto& s : o.overrides) kv << s << "\n";
    return parse_config(kv);
}

int cmd_run(const RunOptions& o, const CLI::App& sub) {
    const PipelineConfig cfg = build_config(o, sub);
    const Graph g = load_graph(o.graph);
    const auto pal = load_palettes(o.palettes, g.n());
    const PipelineResult r = run_d1lc(g, pal, cfg);
    std::cout << format_report(r);
    const bool within = o.max_rounds == 0 || r.stats.rounds_used <= o.max_rounds;
    if (!within) std::cout << "max_rounds_exceeded=true limit=" << o.max_rounds << "\n";
    if (!o.coloring_out.empty()) {
        std::ofstream f(o.coloring_out);
        for (NodeId v = 0; v < g.n(); ++v)
            f << v << " " << (r.coloring[v] ? std::to_string(*r.coloring[v]) : std::string("-")) << "\n";
    }
    if (!o.report.empty()) {
        json j{{"ok", r.ok()},
               {"within_max_rounds", within},
               {"config", to_kv(cfg)},
               {"stats", stats_json(r.stats)},
               {"uncolored", r.verification.uncolored},
               {"conflicts", r.verification.conflicts},
               {"off_list", r.verification.off_list},
               {"residue_nodes", r.residue_nodes},
               {"fallback",
                {{"nodes", r.fallback.nodes},
                 {"components", r.fallback.components},
                 {"largest_component", r.fallback.largest_component},
                 {"cap", r.fallback.cap},
                 {"rounds", r.fallback.rounds},
                 {"shattering_failure", r.fallback.shattering_failure}}}};
        for (const auto& p : r.phases)
            j["phases"].push_back({{"lo", p.range.lo},         {"hi", p.range.hi},       {"participants", p.participants},
                                   {"sparse", p.sparse},       {"uneven", p.uneven},     {"dense", p.dense},
                                   {"cliques", p.cliques},     {"v_start", p.v_start},   {"bad", p.bad},
                                   {"put_aside", p.put_aside}, {"rounds", p.rounds},     {"left_uncolored", p.left_uncolored}});
        j["violations"] = r.verification.violations;
        j["invariant_violations"] = r.invariant_violations;
        write_json(o.report, j);
    }
    return r.ok() && within ? 0 : 1;
}

struct ProbeOptions {
    std::string graph, op = "sparsity", report, backend = "idealized";
    double eps = 0.2;
    std::uint64_t seed = 1;
    double bandwidth_mult = 1.0;
    double c_k = 0;
};

int cmd_probe(const ProbeOptions& o) {
    const Graph g = load_graph(o.graph);
    NetworkConfig nc;
    nc.master_seed = o.seed;
    nc.bandwidth_mult = o.bandwidth_mult;
    Network net(g, nc);
    ProbeConfig pc;
    pc.sim.c_k = o.c_k;
    json j{{"op", o.op}, {"eps", o.eps}};
    if (o.op == "sparsity" || o.op == "local-sparsity") {
        auto est = o.op == "sparsity" ? estimate_sparsity_all(net, o.eps, pc) : estimate_local_sparsity_all(net, o.eps, pc);
        for (const auto& e : est) {
            const double exact = o.op == "sparsity" ? global_sparsity(g, e.node, g.max_degree()) : local_sparsity(g, e.node);
            std::cout << "node=" << e.node << " estimate=" << e.value << " exact=" << exact
                      << " valid=" << (e.valid ? "true" : "false") << "\n";
            j["nodes"].push_back({{"node", e.node}, {"estimate", e.value}, {"exact", exact}, {"valid", e.valid}});
        }
    } else if (o.op == "triangles") {
        for (const auto& f : detect_triangle_edges(net, o.eps, pc)) {
            const auto exact = triangles_on_edge(g, f.u, f.v);
            std::cout << "edge=" << f.u << "," << f.v << " estimate=" << f.estimate << " exact=" << exact
                      << " flag=" << (f.flag ? "true" : "false") << "\n";
            j["edges"].push_back({{"u", f.u}, {"v", f.v}, {"estimate", f.estimate}, {"exact", exact}, {"flag", f.flag}});
        }
    } else if (o.op == "c4") {
        for (const auto& f : detect_c4_wedges(net, o.eps, pc, {})) {
            const auto exact = c4_on_wedge(g, f.center, f.u, f.u2);
            std::cout << "wedge=" << f.u << "," << f.center << "," << f.u2 << " estimate=" << f.estimate
                      << " exact=" << exact << " flag=" << (f.flag ? "true" : "false") << "\n";
            j["wedges"].push_back({{"center", f.center}, {"u", f.u}, {"u2", f.u2}, {"estimate", f.estimate},
                                   {"exact", exact}, {"flag", f.flag}});
        }
    } else if (o.op == "acd") {
        AcdConfig ac;
        ac.eps_acd = std::min(o.eps, 0.1);
        ac.backend = parse_backend(o.backend) == Backend::Idealized ? BuddyBackend::Idealized : BuddyBackend::Uniform;
        ac.sim.c_k = o.c_k;
        const AcdLabels L = compute_acd(net, ac);
        for (NodeId v = 0; v < g.n(); ++v) {
            std::cout << "node=" << v << " role=" << to_string(L.role[v]) << " clique=" << L.clique_id[v] << "\n";
            j["nodes"].push_back({{"node", v}, {"role", to_string(L.role[v])}, {"clique", L.clique_id[v]}});
        }
        std::cout << "cliques=" << L.cliques().size() << "\n";
    } else {
        throw std::invalid_argument("unknown probe op " + o.op);
    }
    const RoundStats s = net.stats();
    std::cout << "rounds=" << s.rounds_used << " bandwidth_bits=" << s.bandwidth_bits
              << " max_bits_per_edge_round=" << s.max_bits_per_edge_round << "\n";
    j["stats"] = stats_json(s);
    if (!o.report.empty()) write_json(o.report, j);
    return 0;
}

int cmd_oracle(const std::string& graph, const std::string& palettes, const std::string& report) {
    const Graph g = load_graph(graph);
    Rng rng(1);
    const auto pal = palettes.empty() ? make_palettes(g, PaletteKind::Range, rng) : load_palettes(palettes, g.n());
    const OracleReport r = oracle_suite(g, pal);
    json j{{"max_degree", r.max_degree}, {"cross_check_failures", r.cross_check_failures}};
    std::cout << "max_degree=" << r.max_degree << " cross_check_failures=" << r.cross_check_failures << "\n";
    for (NodeId v = 0; v < g.n(); ++v) {
        std::cout << "node=" << v << " degree=" << r.degree[v] << " global_sparsity=" << r.global_sparsity[v]
                  << " local_sparsity=" << r.local_sparsity[v] << " unevenness=" << r.unevenness[v]
                  << " discrepancy=" << r.discrepancy[v] << " slackability=" << r.slackability[v]
                  << " neighborhood_edges=" << r.neighborhood_edges[v] << "\n";
        j["nodes"].push_back({{"node", v},
                              {"degree", r.degree[v]},
                              {"global_sparsity", r.global_sparsity[v]},
                              {"local_sparsity", r.local_sparsity[v]},
                              {"unevenness", r.unevenness[v]},
                              {"discrepancy", r.discrepancy[v]},
                              {"slackability", r.slackability[v]},
                              {"neighborhood_edges", r.neighborhood_edges[v]}});
    }
    if (!report.empty()) write_json(report, j);
    return r.cross_check_failures == 0 ? 0 : 1;
}

struct GenOptions {
    std::string family = "gnp", palette_kind = "range", out_graph, out_palettes;
    std::size_t n = 100, k = 10, count = 4, size = 30, degree = 4, clique_size = 40, sparse_nodes = 100, bridges = 20;
    double p = 0.05, avg_degree = 8, gamma = 2.5, missing = 0.05;
    int colorspace_bits = 40;
    std::size_t extra = 0;
    std::uint64_t seed = 1;
};

int cmd_gen(const GenOptions& o) {
    Rng rng(o.seed);
    Graph g;
    if (o.family == "clique") g = make_clique(o.k);
    else if (o.family == "cliques") g = make_clique_union(o.count, o.size);
    else if (o.family == "gnp") g = make_gnp(o.n, o.p, rng);
    else if (o.family == "star") g = make_star(o.n - 1);
    else if (o.family == "path") g = make_path(o.n);
    else if (o.family == "cycle") g = make_cycle(o.n);
    else if (o.family == "tree") g = make_random_tree(o.n, rng);
    else if (o.family == "regular") g = make_random_regular(o.n, o.degree, rng);
    else if (o.family == "power-law") g = make_power_law(o.n, o.avg_degree, o.gamma, rng);
    else if (o.family == "planted") {
        PlantedAcdParams pp;
        pp.cliques = o.count;
        pp.clique_size = o.clique_size;
        pp.missing = o.missing;
        pp.sparse_nodes = o.sparse_nodes;
        pp.sparse_p = o.p;
        pp.bridges = o.bridges;
        g = make_planted_acd(pp, rng).graph;
    } else throw std::invalid_argument("unknown family " + o.family);
    const auto pal = make_palettes(g, parse_palette_kind(o.palette_kind), rng, o.colorspace_bits, o.extra);
    if (o.out_graph.empty()) write_graph(std::cout, g);
    else save_graph(o.out_graph, g);
    if (!o.out_palettes.empty()) save_palettes(o.out_palettes, pal);
    std::cerr << "n=" << g.n() << " m=" << g.m() << " max_degree=" << g.max_degree() << "\n";
    return 0;
}

int cmd_bench(const std::string& manifest, const std::vector<std::string>& only, const std::string& report) {
    auto specs = load_manifest(manifest);
    ManifestReport r;
    r.uncovered = uncovered_operations(specs);
    for (const auto& s : specs) {
        if (!only.empty() && std::find(only.begin(), only.end(), s.name) == only.end()) continue;
        r.verdicts.push_back(run_trials(s));
        std::cout << format_verdict(r.verdicts.back()) << std::endl;
    }
    std::cout << (r.uncovered.empty() ? "PASS" : "FAIL") << " coverage: "
              << core_operations().size() - r.uncovered.size() << "/" << core_operations().size()
              << " operations referenced";
    for (const auto& op : r.uncovered) std::cout << " missing=" << op;
    std::cout << "\n" << (r.pass() ? "PASS" : "FAIL") << " manifest\n";
    if (!report.empty()) {
        json j{{"pass", r.pass()}, {"uncovered", r.uncovered}};
        for (const auto& v : r.verdicts) {
            json t{{"name", v.name},     {"kind", v.kind},         {"anchor", v.anchor},
                   {"pass", v.pass()},   {"seeds", v.seeds},       {"first_seed", v.first_seed},
                   {"failures", v.failures}, {"failing_seeds", v.failing_seeds}, {"millis", v.millis}};
            for (const auto& c : v.claims)
                t["claims"].push_back({{"statistic", c.claim.statistic},
                                       {"threshold", c.claim.threshold},
                                       {"direction", c.claim.direction == Direction::AtLeast ? ">=" : "<="},
                                       {"measured", c.measured},
                                       {"pass", c.pass}});
            j["trials"].push_back(t);
        }
        write_json(report, j);
    }
    return r.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    CLI::App app{"d1lc: CONGEST simulator and (degree+1)-list-coloring pipeline"};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "run the full coloring pipeline");
    run->add_option("--graph", ro.graph, "edge list file")->required();
    run->add_option("--palettes", ro.palettes, "palette file")->required();
    run->add_option("--config", ro.config, "key=value config file");
    run->add_option("--set", ro.overrides, "config override key=value (repeatable)");
    run->add_option("--seed", ro.seed, "master seed");
    run->add_option("--bandwidth-mult", ro.bandwidth_mult, "bandwidth multiplier");
    run->add_option("--max-rounds", ro.max_rounds, "fail when more rounds are used (0 = no limit)");
    run->add_option("--backend", ro.backend, "idealized or uniform");
    run->add_option("--threads", ro.threads, "worker threads");
    run->add_option("--report", ro.report, "JSON report path");
    run->add_option("--coloring", ro.coloring_out, "write 'node color' lines here");

    ProbeOptions po;
    auto* probe = app.add_subcommand("probe", "run a graph probe and compare with the exact value");
    probe->add_option("--graph", po.graph, "edge list file")->required();
    probe->add_option("--op", po.op, "sparsity, local-sparsity, triangles, c4 or acd");
    probe->add_option("--eps", po.eps, "precision");
    probe->add_option("--seed", po.seed, "master seed");
    probe->add_option("--bandwidth-mult", po.bandwidth_mult, "bandwidth multiplier");
    probe->add_option("--c-k", po.c_k, "similarity scale constant (0 disables the scale factor)");
    probe->add_option("--backend", po.backend, "buddy backend for acd");
    probe->add_option("--report", po.report, "JSON report path");

    std::string og, op, orep;
    auto* oracle = app.add_subcommand("oracle", "exact structure report");
    oracle->add_option("--graph", og, "edge list file")->required();
    oracle->add_option("--palettes", op, "palette file (default: range palettes)");
    oracle->add_option("--report", orep, "JSON report path");

    GenOptions go;
    auto* gen = app.add_subcommand("gen", "generate a graph and palettes");
    gen->add_option("--family", go.family,
                    "clique, cliques, gnp, star, path, cycle, tree, regular, power-law or planted");
    gen->add_option("--n", go.n, "node count");
    gen->add_option("--p", go.p, "edge probability");
    gen->add_option("--k", go.k, "clique size");
    gen->add_option("--count", go.count, "number of cliques");
    gen->add_option("--size", go.size, "clique size in a union");
    gen->add_option("--degree", go.degree, "regular degree");
    gen->add_option("--avg-degree", go.avg_degree, "power-law average degree");
    gen->add_option("--gamma", go.gamma, "power-law exponent");
    gen->add_option("--clique-size", go.clique_size, "planted clique size");
    gen->add_option("--missing", go.missing, "planted missing-edge fraction");
    gen->add_option("--sparse-nodes", go.sparse_nodes, "planted sparse node count");
    gen->add_option("--bridges", go.bridges, "planted bridge edges");
    gen->add_option("--palette-kind", go.palette_kind, "range, random or adversarial");
    gen->add_option("--colorspace-bits", go.colorspace_bits, "color space size in bits");
    gen->add_option("--extra", go.extra, "extra palette colors beyond degree+1");
    gen->add_option("--seed", go.seed, "generator seed");
    gen->add_option("--out-graph", go.out_graph, "edge list output (default stdout)");
    gen->add_option("--out-palettes", go.out_palettes, "palette output");

    std::string manifest, brep;
    std::vector<std::string> only;
    auto* bench = app.add_subcommand("bench", "run a Monte Carlo trial manifest");
    bench->add_option("--manifest", manifest, "trial manifest")->required();
    bench->add_option("--trial", only, "run only these trials (repeatable)");
    bench->add_option("--report", brep, "JSON report path");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(ro, *run);
        if (*probe) return cmd_probe(po);
        if (*oracle) return cmd_oracle(og, op, orep);
        if (*gen) return cmd_gen(go);
        if (*bench) return cmd_bench(manifest, only, brep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
