#include "gossip/topology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gossip/error.hpp"
#include "gossip/rng.hpp"

namespace gossip {

Graph::Graph(int n, std::vector<Edge> edges, std::optional<std::vector<Point2>> coords)
    : n_(n), edges_(std::move(edges)), coords_(std::move(coords)) {
  if (n_ < 2) throw InvalidParameter("graph needs at least 2 nodes, got " + std::to_string(n_));
  for (auto& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_) {
      throw InvalidParameter("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                             ") has an endpoint outside [0, " + std::to_string(n_) + ")");
    }
    if (e.u == e.v) throw InvalidParameter("self loop at node " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  const auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw InvalidParameter("duplicate edge (" + std::to_string(dup->u) + ", " + std::to_string(dup->v) + ")");
  }
  if (coords_ && coords_->size() != static_cast<std::size_t>(n_)) {
    throw InvalidParameter("coordinate block has " + std::to_string(coords_->size()) + " entries for " +
                           std::to_string(n_) + " nodes");
  }
  if (!is_connected(n_, edges_)) throw InvalidParameter("graph is not connected");
}

std::optional<std::size_t> Graph::find_edge(int i, int j) const {
  const Edge key{std::min(i, j), std::max(i, j)};
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

DisjointSets::DisjointSets(int n) : parent_(n), size_(n, 1) {
  for (int i = 0; i < n; ++i) parent_[i] = i;
}

int DisjointSets::find(int a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

bool DisjointSets::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

bool is_connected(int n, std::span<const Edge> edges) {
  if (n <= 1) return true;
  DisjointSets sets(n);
  int merges = 0;
  for (const auto& e : edges) merges += sets.unite(e.u, e.v) ? 1 : 0;
  return merges == n - 1;
}

Graph make_cycle(int n) {
  if (n < 3) throw InvalidParameter("cycle needs n >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return Graph(n, std::move(edges));
}

Graph make_grid2d(int rows, int cols) {
  if (rows < 2 || cols < 2) {
    throw InvalidParameter("grid needs rows >= 2 and cols >= 2, got " + std::to_string(rows) + "x" +
                           std::to_string(cols));
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(rows) * (cols - 1) + static_cast<std::size_t>(cols) * (rows - 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, v + cols});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

double rgg_radius(int n) { return std::sqrt(std::log(static_cast<double>(n)) / n); }

std::vector<Edge> rgg_edges(std::span<const Point2> points, double radius) {
  std::vector<Edge> edges;
  const double r2 = radius * radius;
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy <= r2) edges.push_back({i, j});
    }
  }
  return edges;
}

Graph make_rgg(int n, std::uint64_t seed, int max_attempts) {
  if (n < 2) throw InvalidParameter("rgg needs n >= 2, got " + std::to_string(n));
  const double radius = rgg_radius(n);
  Rng rng(seed);
  std::vector<Point2> points(n);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (auto& p : points) {
      p.x = rng.uniform01();
      p.y = rng.uniform01();
    }
    auto edges = rgg_edges(points, radius);
    if (is_connected(n, edges)) return Graph(n, std::move(edges), points);
  }
  throw GenerationFailure("rgg(n=" + std::to_string(n) + ", seed=" + std::to_string(seed) +
                          ") not connected after " + std::to_string(max_attempts) + " attempts");
}

Eigen::MatrixXd incidence_matrix(const Graph& g) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_edges()), g.num_nodes());
  Eigen::Index row = 0;
  for (const auto& e : g.edges()) {
    A(row, e.u) = 1.0;
    A(row, e.v) = -1.0;
    ++row;
  }
  return A;
}

Eigen::SparseMatrix<double> incidence_sparse(const Graph& g) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * g.num_edges());
  int row = 0;
  for (const auto& e : g.edges()) {
    entries.emplace_back(row, e.u, 1.0);
    entries.emplace_back(row, e.v, -1.0);
    ++row;
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(g.num_edges()), g.num_nodes());
  A.setFromTriplets(entries.begin(), entries.end());
  return A;
}

Eigen::MatrixXd laplacian(const Graph& g) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
  const auto deg = g.degrees();
  for (int i = 0; i < g.num_nodes(); ++i) L(i, i) = deg[i];
  for (const auto& e : g.edges()) {
    L(e.u, e.v) = -1.0;
    L(e.v, e.u) = -1.0;
  }
  return L;
}

Partition connected_components(const Graph& g, std::span<const std::size_t> edge_subset) {
  const int n = g.num_nodes();
  DisjointSets sets(n);
  for (std::size_t e : edge_subset) {
    if (e >= g.num_edges()) {
      throw InvalidParameter("edge index " + std::to_string(e) + " out of range for " +
                             std::to_string(g.num_edges()) + " edges");
    }
    const auto& edge = g.edge(e);
    sets.unite(edge.u, edge.v);
  }

  Partition p;
  p.assignment.assign(n, -1);
  std::vector<int> root_id(n, -1);
  std::vector<int> counts;
  for (int v = 0; v < n; ++v) {
    const int root = sets.find(v);
    if (root_id[root] < 0) {
      root_id[root] = static_cast<int>(counts.size());
      counts.push_back(0);
    }
    p.assignment[v] = root_id[root];
    ++counts[root_id[root]];
  }

  p.offsets.assign(counts.size() + 1, 0);
  for (std::size_t r = 0; r < counts.size(); ++r) p.offsets[r + 1] = p.offsets[r] + counts[r];
  p.members.resize(n);
  std::vector<int> cursor(p.offsets.begin(), p.offsets.end() - 1);
  for (int v = 0; v < n; ++v) p.members[cursor[p.assignment[v]]++] = v;
  return p;
}

}  // namespace gossip
