#pragma once

#include "d1lc/coloring.hpp"
#include "d1lc/dense.hpp"
#include "d1lc/oracle.hpp"
#include "d1lc/probe.hpp"
#include "d1lc/runtime.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace d1lc {

enum class Backend { Idealized, Uniform };
const char* to_string(Backend b);
Backend parse_backend(const std::string& s);

struct PipelineConfig {
    double eps_acd = 0.1;
    double eps_spa = 0.1;
    double eps_hat = 0.01;
    double p_gen = 0.1;
    double kappa = 0.5;
    double c_class = 4;
    double c_pa = 2;
    double bandwidth_mult = 1.0;
    Backend backend = Backend::Idealized;
    // Smallest upper end of a degree range; lower degrees form the residue.
    std::size_t degree_floor = 16;
    // Fallback component cap is fallback_cap_mult * log2(n)^2.
    double fallback_cap_mult = 10;
    // Random-trial rounds given to residue nodes before the fallback.
    int residue_rounds = 16;
    int init_rounds = 3;
    int hash_d = 6;
    int flood_rounds = 3;
    // When false every node goes straight to the residue trials and the fallback.
    bool phases = true;
    std::uint64_t master_seed = 1;
    int threads = 1;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    NetworkConfig network_config() const;
    double s_min() const;
};

// Flat key=value lines; '#' starts a comment; unknown keys are an error.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::string& path);
std::string to_kv(const PipelineConfig& cfg);

struct DegreeRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
    bool contains(std::size_t d) const { return lo <= d && d <= hi; }
};

// Disjoint degree ranges from the top down; everything below the last range is residue.
struct PhasePlan {
    std::vector<DegreeRange> ranges;
    DegreeRange residue;
};

// x_0 = Delta; a range [lo, x] uses lo = ceil(log2(x)^7) when that at least halves x and
// exceeds the floor, otherwise lo = floor and the descent stops.
PhasePlan phase_plan(std::size_t n, std::size_t max_degree, std::size_t floor);

struct PhaseReport {
    DegreeRange range;
    std::size_t participants = 0;
    std::size_t sparse = 0;
    std::size_t uneven = 0;
    std::size_t dense = 0;
    std::size_t cliques = 0;
    std::size_t low_cliques = 0;
    std::size_t v_start = 0;
    std::size_t bad = 0;
    std::size_t put_aside = 0;
    std::size_t put_aside_deferred = 0;
    std::size_t dropped = 0;
    std::size_t left_uncolored = 0;
    std::uint64_t rounds = 0;
};

struct FallbackReport {
    std::size_t nodes = 0;
    std::size_t components = 0;
    std::size_t largest_component = 0;
    std::size_t cap = 0;
    std::uint64_t rounds = 0;
    // Set when a component exceeds the cap; nothing is colored in that case.
    bool shattering_failure = false;
};

struct PipelineResult {
    Coloring coloring;
    RoundStats stats;
    ColoringReport verification;
    PhasePlan plan;
    std::vector<PhaseReport> phases;
    std::size_t residue_nodes = 0;
    std::uint64_t residue_rounds = 0;
    FallbackReport fallback;
    std::vector<std::string> invariant_violations;

    bool ok() const { return verification.ok && !fallback.shattering_failure && invariant_violations.empty(); }
};

// Gather-and-greedy on the components induced by `uncolored`: min-id flooding builds a BFS
// tree, members stream their palettes and uncolored adjacency to the root, the root colors
// greedily in id order and streams the assignments back.
FallbackReport fallback_color(ColoringEngine& eng, std::span<const NodeId> uncolored, std::size_t cap);

// Validates |palette_v| >= d_v + 1, then runs the phases, the residue trials and the fallback.
PipelineResult run_d1lc(Network& net, const std::vector<Palette>& palettes, const PipelineConfig& cfg);
PipelineResult run_d1lc(const Graph& g, const std::vector<Palette>& palettes, const PipelineConfig& cfg);

// Structured text report.
std::string format_report(const PipelineResult& r);

}  // namespace d1lc
