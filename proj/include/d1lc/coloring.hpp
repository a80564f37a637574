#pragma once

#include "d1lc/hash.hpp"
#include "d1lc/oracle.hpp"
#include "d1lc/runtime.hpp"
#include "d1lc/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace d1lc {

// 2-bit kind tag carried by every coloring message.
enum class MsgKind : std::uint8_t { Try = 0, Perm = 1, Indicator = 2, Data = 3 };
inline constexpr int kKindBits = 2;

enum class TrialBackend { Idealized, Uniform };
const char* to_string(TrialBackend b);
TrialBackend parse_trial_backend(const std::string& s);

struct NodeColorState {
    Palette original;
    // Current palette, sorted ascending.
    Palette palette;
    std::optional<Color> permanent_color;
    std::size_t uncolored_degree = 0;
    // Conflict rank: u is in the conflict set of v iff rank(u) <= rank(v).
    int rank = 0;
    HashSpec color_hash;
    // (neighbor, announced hash of its permanent color under this node's color_hash).
    std::vector<std::pair<NodeId, std::uint64_t>> neighbor_color_hashes;

    long slack() const { return static_cast<long>(palette.size()) - static_cast<long>(uncolored_degree); }
};

struct MultiTrialParams {
    double alpha = 1.0 / 12;
    double beta = 1.0 / 3;
    double c_nu = 4.0;
    std::size_t x = 1;
    TrialBackend backend = TrialBackend::Idealized;
    // Test hook: nodes listed here try exactly these colors instead of sampling.
    std::map<NodeId, std::vector<Color>> fixed_tries;
};

// Sample length for a hash range T: min(B - kind tag, T, ceil(45 ln(12/nu_T) / (alpha beta^2)))
// with nu_T = max(n^-c_nu, 12 exp(-alpha T / 45)).
std::size_t multitrial_sample_length(std::uint64_t T, std::size_t n, std::size_t bandwidth,
                                     const MultiTrialParams& p);

struct VStartResult {
    std::vector<NodeId> v_start;
    // Nodes with little slack gain and too few gaining neighbors.
    std::vector<NodeId> bad;
    std::vector<NodeId> gained;
};

struct SlackColorResult {
    std::vector<NodeId> colored;
    std::vector<NodeId> dropped;
    std::vector<NodeId> leftover;
    double rho = 0;
    int tower_iterations = 0;
    int geometric_iterations = 0;
    std::uint64_t rounds = 0;
    // x values used by the multi-trial calls in order (for schedule checks).
    std::vector<std::size_t> schedule;
};

struct SlackColorParams {
    double s_min = 4;
    double kappa = 0.5;
    int init_rounds = 3;
    MultiTrialParams trial;
};

// Number of times log2 must be applied to x before it is <= 1.
int log_star(double x);
// 2 tetrated i times (2^^0 = 1), saturating at 2^63.
double tower2(int i);

struct EngineOptions {
    // 0 selects the bit length of the largest palette color.
    int colorspace_bits = 0;
    // Announcement hash range is n^hash_d (capped).
    int hash_d = 6;
};

// Owns all node-local coloring state on top of a Network. Every cross-node effect
// goes through a message; each method is a fixed sequence of synchronous rounds.
class ColoringEngine {
public:
    ColoringEngine(Network& net, std::vector<Palette> palettes, EngineOptions opt = {});

    Network& net() { return net_; }
    const Graph& graph() const { return net_.graph(); }
    std::size_t n() const { return net_.n(); }
    int colorspace_bits() const { return colorspace_bits_; }
    // Width of an announced color hash on the wire.
    int hash_bits() const { return hash_bits_; }
    NodeColorState& state(NodeId v) { return st_[v]; }
    const NodeColorState& state(NodeId v) const { return st_[v]; }
    bool colored(NodeId v) const { return st_[v].permanent_color.has_value(); }
    bool neighbor_colored(NodeId v, std::size_t idx) const { return nb_colored_[v][idx] != 0; }
    Coloring coloring() const;
    std::vector<NodeId> uncolored_nodes() const;

    // Phase label used for rounds issued by the engine.
    void set_phase(std::string phase) { phase_ = std::move(phase); }
    const std::string& phase() const { return phase_; }

    // Every node draws its announcement hash and streams the spec to its neighbors.
    // Returns the rounds used.
    std::uint64_t announce_color_hash_setup(int d);
    bool hashes_announced() const { return announced_; }

    // One round: nodes publish their conflict rank (8 bits).
    void set_conflict_ranks(const std::vector<int>& rank);

    // Two rounds: TRY hashes to uncolored neighbors, then PERM broadcast by the winners.
    std::vector<bool> try_colors(std::span<const std::pair<NodeId, Color>> tries);
    std::vector<bool> try_random_colors(std::span<const NodeId> nodes);
    bool try_color(NodeId v, Color c);
    bool try_random_color(NodeId v);

    void slack_generation(std::span<const NodeId> participants, double p_gen);
    // Uses the slack recorded at the start of the last slack_generation.
    VStartResult identify_v_start(std::span<const NodeId> participants, double eps_hat);

    std::vector<bool> multi_trial(std::span<const NodeId> nodes, const MultiTrialParams& p);

    SlackColorResult slack_color(std::span<const NodeId> participants, const SlackColorParams& p);

    // Neighbors whose announced permanent color hashes to no color of the original palette.
    std::size_t chromatic_slack(NodeId v) const;

    // One round: each node in `adopted` takes the color and broadcasts its PERM hash.
    void commit_colors(std::span<const std::pair<NodeId, Color>> adopted);

    // Violations of properness, list validity and the palette invariants; empty when all hold.
    std::vector<std::string> check_invariants() const;

    // Slack recorded at the start of the last slack_generation.
    long slack_baseline(NodeId v) const { return baseline_[v]; }

    std::uint64_t perm_hash(NodeId to, Color c) const { return st_[to].color_hash(c); }
    // Colors of v's palette whose hash under v's announcement hash equals y.
    std::vector<Color> palette_preimages(NodeId v, std::uint64_t y) const;

private:
    void receive_perms();
    std::size_t uncolored_in(NodeId v, const std::vector<std::uint8_t>& member) const;

    Network& net_;
    int colorspace_bits_ = 1;
    int hash_bits_ = 1;
    std::vector<NodeColorState> st_;
    std::vector<std::vector<std::uint8_t>> nb_colored_;
    std::vector<std::vector<int>> nb_rank_;
    // Sorted (hash, color) of the original palette under the node's own announcement hash.
    std::vector<std::vector<std::pair<std::uint64_t, Color>>> hash_index_;
    std::vector<long> baseline_;
    std::string phase_ = "color";
    bool announced_ = false;
};

}  // namespace d1lc
