#pragma once

#include <cstdint>
#include <vector>

namespace d1lc {

using NodeId = std::uint32_t;
using Color = std::uint64_t;
using Palette = std::vector<Color>;

inline constexpr NodeId kNoNode = ~NodeId{0};

// Colors must fit below 2^62 so the pairwise-independent field stays under 2^64.
inline constexpr int kMaxColorBits = 62;

inline int ceil_log2(std::uint64_t x) {
    int b = 0;
    while (b < 64 && (std::uint64_t{1} << b) < x) ++b;
    return b;
}

// Bits needed to write any value in [0, x].
inline int bits_for(std::uint64_t x) {
    int b = 1;
    while (b < 64 && (x >> b) != 0) ++b;
    return b;
}

}  // namespace d1lc
