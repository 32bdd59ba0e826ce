#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ngs/rng.hpp"

namespace ngs {

using Vertex = std::uint32_t;
using Distance = std::uint16_t;

inline constexpr Distance kUnreachable = std::numeric_limits<Distance>::max();
inline constexpr std::size_t kMaxOrder = kUnreachable;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All-pairs hop distances, row-major n x n.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, kUnreachable) {}

  std::size_t order() const { return n_; }

  Distance operator()(Vertex u, Vertex v) const { return data_[std::size_t{u} * n_ + v]; }
  Distance& at(Vertex u, Vertex v) { return data_[std::size_t{u} * n_ + v]; }

  std::span<const Distance> row(Vertex u) const {
    return {data_.data() + std::size_t{u} * n_, n_};
  }
  std::span<Distance> row(Vertex u) { return {data_.data() + std::size_t{u} * n_, n_}; }

  Distance diameter() const {
    Distance best = 0;
    for (Distance x : data_) best = std::max(best, x);
    return best;
  }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<Distance> data_;
};

namespace detail {

inline void bfs_row(std::span<const std::vector<Vertex>> adjacency, Vertex source,
                    std::span<Distance> out, std::vector<Vertex>& queue) {
  std::fill(out.begin(), out.end(), kUnreachable);
  queue.clear();
  queue.push_back(source);
  out[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Vertex u = queue[head];
    Distance next = static_cast<Distance>(out[u] + 1);
    for (Vertex w : adjacency[u]) {
      if (out[w] == kUnreachable) {
        out[w] = next;
        queue.push_back(w);
      }
    }
  }
}

}  // namespace detail

/// Undirected, unweighted, simple, connected graph.
///
/// Construction validates the edge list, rejects disconnected input and
/// computes the all-pairs distance matrix once; copies share it.
class Graph {
 public:
  using Edge = std::pair<Vertex, Vertex>;

  Graph(std::size_t n, std::vector<Edge> edges) : n_(n) {
    if (n == 0) throw GraphError("graph must have at least one vertex");
    if (n > kMaxOrder) throw GraphError("graph order " + std::to_string(n) + " exceeds limit");
    adjacency_.resize(n);
    for (auto& [u, v] : edges) {
      if (u >= n || v >= n) {
        throw GraphError("edge {" + std::to_string(u) + "," + std::to_string(v) +
                         "} references a vertex outside 0.." + std::to_string(n - 1));
      }
      if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
      throw GraphError("parallel edge {" + std::to_string(dup->first) + "," +
                       std::to_string(dup->second) + "}");
    }
    for (auto [u, v] : edges) {
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
    }
    for (auto& nbrs : adjacency_) {
      std::sort(nbrs.begin(), nbrs.end());
      max_degree_ = std::max(max_degree_, nbrs.size());
    }
    edges_ = std::move(edges);

    std::vector<Distance> reach(n);
    std::vector<Vertex> queue;
    detail::bfs_row(adjacency_, 0, reach, queue);
    if (auto it = std::find(reach.begin(), reach.end(), kUnreachable); it != reach.end()) {
      throw GraphError("graph is disconnected: no path between vertex 0 and vertex " +
                       std::to_string(it - reach.begin()));
    }

    auto dist = std::make_shared<DistanceMatrix>(n);
    for (Vertex s = 0; s < n; ++s) detail::bfs_row(adjacency_, s, dist->row(s), queue);
    diameter_ = dist->diameter();
    distances_ = std::move(dist);
  }

  std::size_t order() const { return n_; }
  std::size_t size() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v]; }
  std::span<const std::vector<Vertex>> adjacency() const { return adjacency_; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }
  std::size_t max_degree() const { return max_degree_; }
  Distance diameter() const { return diameter_; }
  const DistanceMatrix& distances() const { return *distances_; }

  bool has_edge(Vertex u, Vertex v) const {
    return std::binary_search(adjacency_[u].begin(), adjacency_[u].end(), v);
  }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adjacency_;
  std::size_t max_degree_ = 0;
  Distance diameter_ = 0;
  std::shared_ptr<const DistanceMatrix> distances_;
};

/// Exact hop distances by one BFS per source, O(n*m).
inline DistanceMatrix all_pairs_distances(const Graph& g) {
  DistanceMatrix d(g.order());
  std::vector<Vertex> queue;
  for (Vertex s = 0; s < g.order(); ++s) detail::bfs_row(g.adjacency(), s, d.row(s), queue);
  return d;
}

/// Marks every u for which reply `v` to query `q` could be truthful.
/// `mask` is resized to n; mask[u] is 1 for consistent vertices.
inline void mark_consistent(const DistanceMatrix& d, Vertex q, Vertex v,
                            std::vector<std::uint8_t>& mask) {
  const std::size_t n = d.order();
  mask.assign(n, 0);
  if (q == v) {
    mask[q] = 1;
    return;
  }
  auto from_q = d.row(q);
  auto from_v = d.row(v);
  for (std::size_t u = 0; u < n; ++u) mask[u] = from_q[u] == from_v[u] + 1;
}

inline bool is_valid_reply(const Graph& g, Vertex q, Vertex v) {
  return v < g.order() && (v == q || g.has_edge(q, v));
}

/// N(q, v): {q} when v == q, else the vertices with v on a shortest q-u path.
inline std::vector<Vertex> consistent_set(const Graph& g, const DistanceMatrix& d, Vertex q,
                                          Vertex v) {
  if (q >= g.order() || !is_valid_reply(g, q, v)) {
    throw std::invalid_argument("reply " + std::to_string(v) + " is neither query vertex " +
                                std::to_string(q) + " nor one of its neighbors");
  }
  std::vector<std::uint8_t> mask;
  mark_consistent(d, q, v, mask);
  std::vector<Vertex> out;
  for (Vertex u = 0; u < mask.size(); ++u)
    if (mask[u]) out.push_back(u);
  return out;
}

// ---------------------------------------------------------------------------
// Generators

enum class GraphKind { path, cycle, complete, grid, random_tree, erdos_renyi, random_regular };

inline std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::path: return "path";
    case GraphKind::cycle: return "cycle";
    case GraphKind::complete: return "complete";
    case GraphKind::grid: return "grid";
    case GraphKind::random_tree: return "random-tree";
    case GraphKind::erdos_renyi: return "erdos-renyi-connected";
    case GraphKind::random_regular: return "random-regular";
  }
  return "?";
}

inline GraphKind parse_graph_kind(std::string_view name) {
  if (name == "path") return GraphKind::path;
  if (name == "cycle") return GraphKind::cycle;
  if (name == "complete") return GraphKind::complete;
  if (name == "grid") return GraphKind::grid;
  if (name == "random-tree" || name == "tree") return GraphKind::random_tree;
  if (name == "erdos-renyi-connected" || name == "er" || name == "erdos-renyi")
    return GraphKind::erdos_renyi;
  if (name == "random-regular" || name == "regular") return GraphKind::random_regular;
  throw std::invalid_argument("unknown graph kind '" + std::string(name) + "'");
}

struct GeneratorParams {
  std::optional<double> edge_probability;  // erdos-renyi; default min(1, 2 ln n / n)
  std::optional<std::size_t> degree;       // random-regular; default 3
  std::optional<std::size_t> rows;         // grid; default floor(sqrt(n)) when it divides n
  std::size_t max_attempts = 10000;
};

namespace detail {

inline std::vector<Graph::Edge> random_tree_edges(std::size_t n, Rng& rng) {
  std::vector<Graph::Edge> edges;
  if (n < 2) return edges;
  if (n == 2) return {{0, 1}};
  // Pruefer decoding: uniform over labeled trees.
  std::vector<Vertex> code(n - 2);
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
  for (auto& c : code) c = pick(rng);
  std::vector<std::size_t> degree(n, 1);
  for (Vertex c : code) ++degree[c];
  std::priority_queue<Vertex, std::vector<Vertex>, std::greater<>> leaves;
  for (Vertex v = 0; v < n; ++v)
    if (degree[v] == 1) leaves.push(v);
  for (Vertex c : code) {
    Vertex leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, c);
    if (--degree[c] == 1) leaves.push(c);
  }
  Vertex a = leaves.top();
  leaves.pop();
  edges.emplace_back(a, leaves.top());
  return edges;
}

inline std::optional<std::vector<Graph::Edge>> try_regular(std::size_t n, std::size_t k,
                                                           Rng& rng) {
  std::vector<Vertex> stubs;
  stubs.reserve(n * k);
  for (Vertex v = 0; v < n; ++v) stubs.insert(stubs.end(), k, v);
  std::shuffle(stubs.begin(), stubs.end(), rng);
  std::vector<Graph::Edge> edges;
  for (std::size_t i = 0; i < stubs.size(); i += 2) {
    auto [u, v] = std::minmax(stubs[i], stubs[i + 1]);
    if (u == v) return std::nullopt;
    edges.emplace_back(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) return std::nullopt;
  return edges;
}

inline bool edges_connected(std::size_t n, const std::vector<Graph::Edge>& edges) {
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (auto [u, v] : edges) {
    auto a = find(u), b = find(v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace detail

/// Deterministic for a fixed seed.
inline Graph generate(GraphKind kind, std::size_t n, const GeneratorParams& params,
                      std::uint64_t seed) {
  if (n == 0) throw GraphError("generator needs n >= 1");
  Rng rng = make_stream(seed, 0, stream_tag::generator);
  std::vector<Graph::Edge> edges;
  switch (kind) {
    case GraphKind::path:
      for (Vertex i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case GraphKind::cycle:
      if (n < 3) throw GraphError("cycle needs n >= 3");
      for (Vertex i = 0; i < n; ++i) edges.emplace_back(i, static_cast<Vertex>((i + 1) % n));
      break;
    case GraphKind::complete:
      for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) edges.emplace_back(u, v);
      break;
    case GraphKind::grid: {
      std::size_t rows = params.rows.value_or(
          static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
      if (rows == 0 || n % rows != 0) {
        throw GraphError("grid with n=" + std::to_string(n) + " needs a row count dividing n");
      }
      std::size_t cols = n / rows;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          auto id = static_cast<Vertex>(r * cols + c);
          if (c + 1 < cols) edges.emplace_back(id, id + 1);
          if (r + 1 < rows) edges.emplace_back(id, static_cast<Vertex>(id + cols));
        }
      }
      break;
    }
    case GraphKind::random_tree:
      edges = detail::random_tree_edges(n, rng);
      break;
    case GraphKind::erdos_renyi: {
      double p = params.edge_probability.value_or(
          n < 2 ? 1.0 : std::min(1.0, 2.0 * std::log(static_cast<double>(n)) / n));
      if (!(p > 0.0 && p <= 1.0)) throw GraphError("edge probability must lie in (0, 1]");
      std::bernoulli_distribution coin(p);
      bool ok = n == 1;
      for (std::size_t attempt = 0; !ok && attempt < params.max_attempts; ++attempt) {
        edges.clear();
        for (Vertex u = 0; u < n; ++u)
          for (Vertex v = u + 1; v < n; ++v)
            if (coin(rng)) edges.emplace_back(u, v);
        ok = detail::edges_connected(n, edges);
      }
      if (!ok) throw GraphError("no connected G(n,p) sample within the attempt limit");
      break;
    }
    case GraphKind::random_regular: {
      std::size_t k = params.degree.value_or(3);
      if (k >= n || (n * k) % 2 != 0 || (n > 2 && k < 2) || (n == 2 && k != 1)) {
        throw GraphError("no connected " + std::to_string(k) + "-regular graph on " +
                         std::to_string(n) + " vertices");
      }
      bool ok = n == 1;
      for (std::size_t attempt = 0; !ok && attempt < params.max_attempts; ++attempt) {
        if (auto got = detail::try_regular(n, k, rng); got && detail::edges_connected(n, *got)) {
          edges = std::move(*got);
          ok = true;
        }
      }
      if (!ok) throw GraphError("no simple connected regular sample within the attempt limit");
      break;
    }
  }
  return Graph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-list text format: "n m", then m lines "u v" with 0-indexed ids.

inline Graph read_edge_list(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw GraphError("edge list: missing 'n m' header");
  std::vector<Graph::Edge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    long long u = 0, v = 0;
    if (!(in >> u >> v)) {
      throw GraphError("edge list: expected " + std::to_string(m) + " edges, got " +
                       std::to_string(i));
    }
    if (u < 0 || v < 0) throw GraphError("edge list: negative vertex id on edge " + std::to_string(i));
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
  return Graph(n, std::move(edges));
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.order() << ' ' << g.size() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace ngs
