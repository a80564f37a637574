#pragma once

#include "d1lc/bits.hpp"
#include "d1lc/graph.hpp"
#include "d1lc/hash.hpp"
#include "d1lc/runtime.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace d1lc {

struct SimilarityConfig {
    double eps = 0.1;
    double nu = 0.05;
    // Scale constant: k = ceil(c_k * eps^-3 * ln(12/nu) / max). Zero disables scaling (k = 1).
    double c_k = 96.0;
    // Sample threshold constant: l = ceil(c_l * alpha^-1 * beta^-2 * ln(12/nu)), capped at T.
    double c_l = 45.0;
};

struct SimilarityPlan {
    std::uint64_t k = 1;
    std::uint64_t T = 1;
    std::uint64_t l = 1;
    std::size_t max_size = 0;
};

// Parameters both endpoints derive once they know each other's set size.
SimilarityPlan plan_similarity(std::size_t size_u, std::size_t size_v, const SimilarityConfig& cfg);

// Idealized hash for a plan, keyed by the edge seed.
HashSpec sketch_hash(const SimilarityPlan& plan, std::uint64_t seed);

// Bitmask over [l]: bit y-1 set iff exactly one element of S x [k] hashes to y.
// The scaled element (x, j) is encoded as x * k + j.
BitString hit_image_mask(std::span<const std::uint64_t> S, const HashSpec& h, std::uint64_t k, std::uint64_t l);

// The element x of S whose scaled copy is the unique preimage of y, if any.
std::optional<std::uint64_t> unique_preimage(std::span<const std::uint64_t> S, const HashSpec& h, std::uint64_t k,
                                             std::uint64_t y);

struct SimilarityResult {
    double estimate = 0.0;
    std::uint64_t bits_sent = 0;
    std::uint64_t scale_factor = 1;
    std::uint64_t T = 0;
    std::uint64_t l = 0;
    // |h(T_u) ∩ h(T_v)|, so estimate = shared * T / (l * k).
    std::uint64_t shared = 0;
};

struct JointSampleResult {
    std::vector<std::optional<std::uint64_t>> side_u;
    std::vector<std::optional<std::uint64_t>> side_v;
    std::uint64_t J = 0;
    std::uint64_t bits_sent = 0;
};

// Set held by node `self` for its exchange with neighbor `other`.
using EdgeSetFn = std::function<std::span<const std::uint64_t>(NodeId self, NodeId other)>;

// Runs the similarity estimate on every listed edge concurrently. Each result is
// the value both endpoints hold for edge (u, v) as listed.
std::vector<SimilarityResult> estimate_similarity_batch(Network& net, std::span<const Edge> edges,
                                                        const EdgeSetFn& set_of, const SimilarityConfig& cfg,
                                                        std::string_view phase = "similarity");

SimilarityResult estimate_similarity(Network& net, NodeId u, NodeId v, std::span<const std::uint64_t> S_u,
                                     std::span<const std::uint64_t> S_v, const SimilarityConfig& cfg);

std::vector<JointSampleResult> joint_sample_batch(Network& net, std::span<const Edge> edges, const EdgeSetFn& set_of,
                                                  const SimilarityConfig& cfg, std::size_t count,
                                                  std::string_view phase = "joint-sample");

JointSampleResult joint_sample(Network& net, NodeId u, NodeId v, std::span<const std::uint64_t> S_u,
                               std::span<const std::uint64_t> S_v, const SimilarityConfig& cfg,
                               std::size_t count = 1);

}  // namespace d1lc
