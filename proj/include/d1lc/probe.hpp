#pragma once

#include "d1lc/graph.hpp"
#include "d1lc/runtime.hpp"
#include "d1lc/sketch.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace d1lc {

enum class SparsityKind { Global, Local };

struct SparsityEstimate {
    NodeId node = kNoNode;
    double value = 0.0;
    SparsityKind kind = SparsityKind::Global;
    double eps = 0.0;
    // False when the local-sparsity precondition (few much-higher-degree neighbors) fails.
    bool valid = true;
};

// Similarity constants for probes. `sim.eps` is overwritten by each probe with the
// precision it needs; c_k, c_l and nu are taken as given.
struct ProbeConfig {
    SimilarityConfig sim{};
};

// Global sparsity of every node: similarity at eps/2 on every edge, then
// (Delta-1)/2 - (1/2 Delta) * sum of the estimates. Delta is the known maximum degree.
std::vector<SparsityEstimate> estimate_sparsity_all(Network& net, double eps, const ProbeConfig& cfg = {});
SparsityEstimate estimate_sparsity(Network& net, NodeId v, double eps, const ProbeConfig& cfg = {});

// Local sparsity: similarity at eps/3 restricted to neighbors of degree < 2 d_v, with
// d_v in place of Delta.
std::vector<SparsityEstimate> estimate_local_sparsity_all(Network& net, double eps, const ProbeConfig& cfg = {});
SparsityEstimate estimate_local_sparsity(Network& net, NodeId v, double eps, const ProbeConfig& cfg = {});

struct EdgeFlag {
    NodeId u = kNoNode, v = kNoNode;
    double estimate = 0.0;
    bool flag = false;
};

// Flags edge uv iff the estimate of |N(u) ∩ N(v)| is at least eps * Delta / 2.
// The estimate runs at precision eps/4 so the two sides of the gap stay separated.
std::vector<EdgeFlag> detect_triangle_edges(Network& net, double eps, const ProbeConfig& cfg = {});

struct WedgeFlag {
    NodeId center = kNoNode, u = kNoNode, u2 = kNoNode;
    double estimate = 0.0;
    bool flag = false;
};

// Each center picks one hash, collects hit masks of N(u) from its neighbors and flags
// pairs whose estimated |N(u) ∩ N(u2)| is at least eps * Delta / 2. With `centers`
// empty every node acts as a center.
std::vector<WedgeFlag> detect_c4_wedges(Network& net, double eps, const ProbeConfig& cfg = {},
                                        const std::vector<NodeId>& centers = {});

// Round cap of one similarity exchange: size and seed rounds plus ceil(l_max / 64)
// stream rounds, where l_max is the sample threshold at the given precision. It does not
// depend on n or on degrees.
std::uint64_t similarity_round_cap(const SimilarityConfig& sim);

enum class BuddyBackend { Idealized, Uniform };
const char* to_string(BuddyBackend b);

struct BuddyConfig {
    double eps = 0.1;
    BuddyBackend backend = BuddyBackend::Idealized;
    SimilarityConfig sim{};
    // Attempts allowed when the chooser looks for a low-collision hash.
    int retry_cap = 64;
};

std::vector<bool> buddy_batch(Network& net, std::span<const Edge> edges, const BuddyConfig& cfg);
bool buddy(Network& net, NodeId u, NodeId v, const BuddyConfig& cfg);

enum class Role : std::uint8_t { Sparse = 0, Uneven = 1, Dense = 2 };
const char* to_string(Role r);

struct AcdLabels {
    std::vector<Role> role;
    // Clique label for dense nodes (the id of the candidate that rooted the clique), -1 otherwise.
    std::vector<long> clique_id;
    double eps_acd = 0.1;
    double eps_spa = 0.1;

    std::vector<std::vector<NodeId>> cliques() const;
};

struct AcdConfig {
    double eps_acd = 0.1;
    double eps_spa = 0.1;
    BuddyBackend backend = BuddyBackend::Idealized;
    SimilarityConfig sim{};
    // Flooding rounds used to label components; valid almost-cliques have diameter <= 2.
    int flood_rounds = 3;
};

AcdLabels compute_acd(Network& net, const AcdConfig& cfg);

}  // namespace d1lc
