#pragma once

// Independent reference computations used by the unit tests. Nothing here
// calls into the code paths it is used to check.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ngs/graph.hpp"

namespace ngs::testing {

inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.order();
  constexpr int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
  for (auto [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

/// u is consistent with reply v to q iff d(q,u) = d(q,v) + d(v,u), d(q,v) = 1.
inline bool brute_consistent(const std::vector<std::vector<int>>& d, Vertex q, Vertex v, Vertex u) {
  if (q == v) return u == q;
  return d[q][v] == 1 && d[q][u] == d[q][v] + d[v][u];
}

inline Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
  GeneratorParams params;
  params.edge_probability = p;
  return generate(GraphKind::erdos_renyi, n, params, seed);
}

/// Positive integer weights: every sum stays exact in double precision.
inline std::vector<double> integer_weights(std::size_t n, std::mt19937_64& rng, int hi = 1000) {
  std::uniform_int_distribution<int> pick(1, hi);
  std::vector<double> w(n);
  for (double& x : w) x = pick(rng);
  return w;
}

}  // namespace ngs::testing
