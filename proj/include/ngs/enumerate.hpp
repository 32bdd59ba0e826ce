#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "ngs/graph.hpp"

// Connected graphs up to isomorphism, for exhaustive checks on tiny orders.
// Every connected graph on n vertices arises from one on n-1 vertices by
// attaching a new vertex to a nonempty subset (remove a non-cut vertex), so
// the levels are grown that way and deduplicated by a canonical code.

namespace ngs {

namespace detail {

inline constexpr std::size_t kMaxEnumOrder = 8;
using AdjRows = std::array<std::uint8_t, kMaxEnumOrder>;

inline std::uint32_t pair_code(const AdjRows& adj, std::size_t n, const std::array<int, kMaxEnumOrder>& perm) {
  std::uint32_t code = 0;
  std::uint32_t bit = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++bit)
      if (adj[perm[i]] >> perm[j] & 1u) code |= 1u << bit;
  return code;
}

// Minimum code over vertex orders listing degrees non-increasingly; that set
// of orders is isomorphism-invariant, so the minimum is canonical.
inline std::uint32_t canonical_code(const AdjRows& adj, std::size_t n) {
  std::array<int, kMaxEnumOrder> degree{};
  for (std::size_t v = 0; v < n; ++v) degree[v] = __builtin_popcount(adj[v]);
  std::array<int, kMaxEnumOrder> perm{};
  std::iota(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n), 0);
  std::sort(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n),
            [&](int a, int b) { return degree[a] > degree[b] || (degree[a] == degree[b] && a < b); });
  std::uint32_t best = ~0u;
  // Permute within equal-degree blocks only.
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && degree[perm[j]] == degree[perm[i]]) ++j;
    blocks.emplace_back(i, j);
    i = j;
  }
  auto recurse = [&](auto& self, std::size_t b) -> void {
    if (b == blocks.size()) {
      best = std::min(best, pair_code(adj, n, perm));
      return;
    }
    auto [lo, hi] = blocks[b];
    auto first = perm.begin() + static_cast<std::ptrdiff_t>(lo);
    auto last = perm.begin() + static_cast<std::ptrdiff_t>(hi);
    std::sort(first, last);
    do {
      self(self, b + 1);
    } while (std::next_permutation(first, last));
  };
  recurse(recurse, 0);
  return best;
}

inline AdjRows decode(std::uint32_t code, std::size_t n) {
  AdjRows adj{};
  std::uint32_t bit = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++bit)
      if (code >> bit & 1u) {
        adj[i] |= static_cast<std::uint8_t>(1u << j);
        adj[j] |= static_cast<std::uint8_t>(1u << i);
      }
  return adj;
}

}  // namespace detail

/// One representative per isomorphism class of connected graphs on n vertices.
/// Class counts for n = 1..7 are 1, 1, 2, 6, 21, 112, 853.
inline std::vector<Graph> enumerate_connected_graphs(std::size_t n) {
  if (n == 0 || n > 7) throw std::invalid_argument("enumeration supports 1 <= n <= 7");
  std::set<std::uint32_t> level{0};  // the single vertex
  for (std::size_t k = 2; k <= n; ++k) {
    std::set<std::uint32_t> next;
    for (std::uint32_t code : level) {
      auto base = detail::decode(code, k - 1);
      for (std::uint32_t subset = 1; subset < (1u << (k - 1)); ++subset) {
        auto adj = base;
        adj[k - 1] = static_cast<std::uint8_t>(subset);
        for (std::size_t v = 0; v + 1 < k; ++v)
          if (subset >> v & 1u) adj[v] |= static_cast<std::uint8_t>(1u << (k - 1));
        next.insert(detail::canonical_code(adj, k));
      }
    }
    level = std::move(next);
  }
  std::vector<Graph> out;
  out.reserve(level.size());
  for (std::uint32_t code : level) {
    auto adj = detail::decode(code, n);
    std::vector<Graph::Edge> edges;
    for (Vertex i = 0; i < n; ++i)
      for (Vertex j = i + 1; j < n; ++j)
        if (adj[i] >> j & 1u) edges.emplace_back(i, j);
    out.emplace_back(n, std::move(edges));
  }
  return out;
}

}  // namespace ngs
