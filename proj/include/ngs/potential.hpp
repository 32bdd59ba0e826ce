#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ngs/graph.hpp"

// Exact potentials over an arbitrary non-negative weight vector. These are the
// ground truth the sampled quantities are checked against, so nothing here
// depends on the sampling machinery.

namespace ngs {

inline double total_weight(std::span<const double> omega) {
  return std::accumulate(omega.begin(), omega.end(), 0.0);
}

/// Phi(v) = sum_u d(u, v) * omega(u).
inline double phi(std::span<const double> omega, const DistanceMatrix& d, Vertex v) {
  auto row = d.row(v);
  double acc = 0.0;
  for (std::size_t u = 0; u < omega.size(); ++u) acc += row[u] * omega[u];
  return acc;
}

inline std::vector<double> phi_all(std::span<const double> omega, const DistanceMatrix& d) {
  std::vector<double> out(omega.size());
  for (Vertex v = 0; v < out.size(); ++v) out[v] = phi(omega, d, v);
  return out;
}

/// Weight of N(v, u) for a neighbor u of v.
inline double branch_weight(std::span<const double> omega, const DistanceMatrix& d, Vertex v,
                            Vertex u) {
  auto from_v = d.row(v);
  auto from_u = d.row(u);
  double acc = 0.0;
  for (std::size_t x = 0; x < omega.size(); ++x)
    if (from_v[x] == from_u[x] + 1) acc += omega[x];
  return acc;
}

/// Lambda(v) = max over neighbors u of omega(N(v, u)); 0 for an isolated vertex.
inline double lambda(std::span<const double> omega, const Graph& g, const DistanceMatrix& d,
                     Vertex v) {
  double best = 0.0;
  for (Vertex u : g.neighbors(v)) best = std::max(best, branch_weight(omega, d, v, u));
  return best;
}

/// Phi-minimizer, lowest id on ties.
inline Vertex exact_median(std::span<const double> omega, const DistanceMatrix& d) {
  auto values = phi_all(omega, d);
  return static_cast<Vertex>(std::min_element(values.begin(), values.end()) - values.begin());
}

inline bool is_delta_close(std::span<const double> omega, const Graph& g, const DistanceMatrix& d,
                           Vertex v, double delta) {
  return lambda(omega, g, d, v) <= (0.5 + delta) * total_weight(omega);
}

/// The vertex holding more than (1/2 + delta) of the total weight, if any.
inline std::optional<Vertex> heavy_vertex(std::span<const double> omega, double delta) {
  if (omega.empty()) return std::nullopt;
  const double threshold = (0.5 + delta) * total_weight(omega);
  auto it = std::max_element(omega.begin(), omega.end());
  if (*it > threshold) return static_cast<Vertex>(it - omega.begin());
  return std::nullopt;
}

struct PotentialReport {
  std::vector<double> phi;
  std::vector<double> lambda;
  Vertex median = 0;
  double total = 0.0;

  /// Lambda(median) <= omega / 2.
  bool median_bisects() const { return lambda[median] <= total / 2.0; }
};

inline PotentialReport potential_report(std::span<const double> omega, const Graph& g,
                                        const DistanceMatrix& d) {
  PotentialReport r;
  r.phi = phi_all(omega, d);
  r.lambda.resize(omega.size());
  for (Vertex v = 0; v < omega.size(); ++v) r.lambda[v] = lambda(omega, g, d, v);
  r.median = static_cast<Vertex>(std::min_element(r.phi.begin(), r.phi.end()) - r.phi.begin());
  r.total = total_weight(omega);
  return r;
}

}  // namespace ngs
