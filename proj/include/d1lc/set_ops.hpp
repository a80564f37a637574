#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace d1lc {

// Hash-restricted set operators. `Hash` is any callable mapping an element to [1, T].
// Results keep the order of A.

template <class Range, class Hash>
auto restrict_set(const Range& A, const Hash& h, std::uint64_t l) {
    std::vector<typename Range::value_type> out;
    for (const auto& x : A)
        if (h(x) <= l) out.push_back(x);
    return out;
}

namespace detail {

// For each hash value <= l: number of preimages in B and, if unique, that preimage.
template <class Range, class Hash>
auto preimage_index(const Range& B, const Hash& h, std::uint64_t l) {
    using T = typename Range::value_type;
    std::unordered_map<std::uint64_t, std::pair<std::size_t, T>> idx;
    idx.reserve(B.size() * 2);
    for (const auto& y : B) {
        auto hv = h(y);
        if (hv > l) continue;
        auto [it, fresh] = idx.try_emplace(hv, 0, y);
        ++it->second.first;
    }
    return idx;
}

}  // namespace detail

template <class Range, class Hash>
auto collide_set(const Range& A, const Hash& h, const Range& B, std::uint64_t l) {
    std::vector<typename Range::value_type> out;
    auto idx = detail::preimage_index(B, h, l);
    for (const auto& x : A) {
        auto hv = h(x);
        if (hv > l) continue;
        auto it = idx.find(hv);
        if (it == idx.end()) continue;
        if (it->second.first >= 2 || !(it->second.second == x)) out.push_back(x);
    }
    return out;
}

template <class Range, class Hash>
auto hit_set(const Range& A, const Hash& h, const Range& B, std::uint64_t l) {
    std::vector<typename Range::value_type> out;
    auto idx = detail::preimage_index(B, h, l);
    for (const auto& x : A) {
        auto hv = h(x);
        if (hv > l) continue;
        auto it = idx.find(hv);
        if (it == idx.end() || (it->second.first == 1 && it->second.second == x)) out.push_back(x);
    }
    return out;
}

}  // namespace d1lc
