#pragma once

#include "d1lc/coloring.hpp"
#include "d1lc/probe.hpp"

#include <cstdint>
#include <vector>

namespace d1lc {

enum class SlackClass { Low, High };
const char* to_string(SlackClass c);

struct CliqueInfo {
    long clique_id = -1;
    // Sorted by id.
    std::vector<NodeId> members;
    NodeId leader = kNoNode;
    std::vector<NodeId> inliers;
    std::vector<NodeId> outliers;
    // Uncolored inliers adjacent to the leader, fixed when put-aside sets are drawn.
    std::vector<NodeId> core;
    std::vector<NodeId> put_aside;
    SlackClass slack_class = SlackClass::High;
    double slackability_estimate = 0;
    double sparsity_estimate = 0;
    std::size_t delta_c = 0;
    double ell = 0;
    // Aligned with members.
    std::vector<std::size_t> external_degree;
    std::vector<std::size_t> anti_degree;
    std::vector<std::size_t> chromatic_slack;
    std::vector<std::size_t> common_with_leader;

    std::size_t index_of(NodeId v) const;
};

struct DenseConfig {
    double c_class = 4;
    double c_pa = 2;
    // 0 selects max(ceil(ln(Delta)^2.1), 4).
    double ell = 0;
};

// max(ceil(ln(Delta)^2.1), 4).
double desk_ell(std::size_t max_degree);

struct RelayInterval {
    std::size_t clique = 0;
    NodeId node = kNoNode;
    // Inclusive indices into the clique's core order.
    std::size_t first = 0, last = 0;
};

struct PutAsideColoring {
    std::vector<NodeId> colored;
    // Nodes left for the fallback: relay shortage or a core too small for disjoint intervals.
    std::vector<NodeId> deferred;
    std::vector<RelayInterval> intervals;
};

// Per-clique machinery for all dense cliques at once; every step is a fixed number of
// rounds shared by all cliques.
class DenseMachinery {
public:
    DenseMachinery(ColoringEngine& eng, const AcdLabels& acd, DenseConfig cfg = {});

    std::vector<CliqueInfo>& cliques() { return cliques_; }
    const std::vector<CliqueInfo>& cliques() const { return cliques_; }
    // Index into cliques() or -1.
    long clique_of(NodeId v) const { return clique_of_[v]; }
    double ell() const { return ell_; }

    // Exchanges clique ids, computes e_v, a_v and chromatic slack, and elects the member
    // minimizing (e_v + a_v + kappa_v, id) by a two-hop min reduction.
    void select_leaders();
    // Members report common-neighbor counts with the leader; the leader applies the three
    // outlier rules and notifies its neighbors.
    void partition_inliers_outliers();
    // Leader estimates its sparsity from in-clique neighborhood edge counts.
    void classify_slackability();
    // Low cliques draw put-aside sets; every clique fixes its core.
    void put_aside();
    void synch_color_trial();
    PutAsideColoring color_put_aside();

    std::vector<NodeId> outlier_nodes() const;
    std::vector<NodeId> put_aside_nodes() const;
    std::vector<NodeId> dense_nodes() const;

private:
    void learn_leader_adjacency();

    ColoringEngine& eng_;
    DenseConfig cfg_;
    double ell_ = 4;
    int id_bits_ = 1;
    std::vector<CliqueInfo> cliques_;
    std::vector<long> clique_of_;
    // Per node, aligned with adjacency: the neighbor's clique index (learned by message).
    std::vector<std::vector<long>> nb_clique_;
    // Per node, aligned with adjacency: neighbor is adjacent to this node's leader.
    std::vector<std::vector<std::uint8_t>> nb_adj_leader_;
    bool adjacency_known_ = false;
};

}  // namespace d1lc
