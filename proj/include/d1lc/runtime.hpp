#pragma once

#include "d1lc/bits.hpp"
#include "d1lc/graph.hpp"
#include "d1lc/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace d1lc {

struct NetworkConfig {
    double bandwidth_mult = 1.0;
    // When nonzero, overrides the derived bandwidth exactly.
    std::size_t bandwidth_bits = 0;
    std::uint64_t master_seed = 1;
    int msgs_per_round_cap = 1;
    int threads = 1;
};

// B = max(64, mult * 32 * ceil(log2 n)).
std::size_t default_bandwidth(std::size_t n, double mult = 1.0);

struct Message {
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint64_t round = 0;
    BitString payload;
    // Number of consecutive B-bit messages this payload occupied on the edge.
    std::uint32_t chunks = 1;
};

struct RoundStats {
    std::uint64_t rounds_used = 0;
    std::uint64_t max_bits_per_edge_round = 0;
    std::uint64_t total_messages = 0;
    std::uint64_t total_bits = 0;
    std::uint64_t transcript_hash = 0;
    std::size_t bandwidth_bits = 0;
    std::map<std::string, std::uint64_t> phase_rounds;

    // Counters accumulated after `before` was captured (hash and bandwidth taken from *this).
    RoundStats since(const RoundStats& before) const;
    bool operator==(const RoundStats&) const = default;
};

class BandwidthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonTerminationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Network;

// A node's view during one round: its id, adjacency, inbox, rng and send primitives.
class NodeCtx {
public:
    NodeCtx(Network* net, NodeId v) : net_(net), v_(v) {}

    NodeId id() const { return v_; }
    std::span<const NodeId> neighbors() const;
    std::size_t degree() const;
    std::size_t bandwidth() const;
    std::uint64_t round() const;
    Rng& rng();

    // Messages sent to this node in the previous round.
    std::vector<Message>& inbox();

    // Payload must fit in B bits.
    void send(NodeId to, BitString payload);
    // Payload of any length, split into ceil(len/B) messages on consecutive rounds.
    void send_stream(NodeId to, BitString payload);
    void broadcast(const BitString& payload);

private:
    Network* net_;
    NodeId v_;
};

class Network {
public:
    explicit Network(Graph g, NetworkConfig cfg = {});

    const Graph& graph() const { return g_; }
    std::size_t n() const { return g_.n(); }
    std::size_t bandwidth() const { return stats_.bandwidth_bits; }
    const NetworkConfig& config() const { return cfg_; }
    std::uint64_t rounds() const { return stats_.rounds_used; }
    const RoundStats& stats() const { return stats_; }
    Rng& rng(NodeId v) { return rngs_[v]; }
    NodeCtx ctx(NodeId v) { return NodeCtx(this, v); }
    std::vector<Message>& inbox(NodeId v) { return inbox_[v]; }
    void set_threads(int t) { cfg_.threads = t < 1 ? 1 : t; }

    using StepFn = std::function<void(NodeCtx&)>;

    // One synchronous round over every node: step, then deliver all sends.
    void round(std::string_view phase, const StepFn& fn);
    // Same, restricted to `active` nodes; the others only receive.
    void round(std::string_view phase, std::span<const NodeId> active, const StepFn& fn);
    // Local computation on the current inbox; no round elapses and nothing may be sent.
    void local(const StepFn& fn);
    void local(std::span<const NodeId> active, const StepFn& fn);

    // Like round(); when nothing was sent and `count_silent` is false the round is not counted.
    // Returns whether any message was sent.
    bool round_or_skip(std::string_view phase, std::span<const NodeId> active, const StepFn& fn, bool count_silent);

    // Marks `rounds` silent rounds (e.g. waiting for a pipelined stream elsewhere).
    void idle(std::string_view phase, std::uint64_t rounds);

private:
    friend class NodeCtx;
    void enqueue(NodeId src, NodeId to, BitString&& payload, bool stream);
    void execute(std::span<const NodeId> active, const StepFn& fn, bool allow_send);
    bool deliver(std::string_view phase, bool count_silent);

    Graph g_;
    NetworkConfig cfg_;
    RoundStats stats_;
    std::vector<Rng> rngs_;
    std::vector<std::vector<Message>> inbox_;
    std::vector<std::vector<Message>> outbox_;
    std::vector<std::vector<std::uint8_t>> sent_;
    std::vector<NodeId> all_;
    bool sending_allowed_ = false;
    std::string phase_;
};

// Runs `program` each round on every non-halted node until all halt.
// The program returns true to halt. A final round in which every node halts
// without sending is not counted.
RoundStats run_rounds(Network& net, const std::function<bool(NodeCtx&)>& program, std::uint64_t max_rounds,
                      std::string_view phase = "program");

// Joint randomness on edges: the lower-id endpoint draws a 64-bit seed and sends it
// in one message. All edges are served in the same round.
std::vector<std::uint64_t> edge_shared_seeds(Network& net, std::string_view phase, std::span<const Edge> edges);
std::uint64_t edge_shared_seed(Network& net, NodeId a, NodeId b, std::string_view phase = "edge-seed");

}  // namespace d1lc
