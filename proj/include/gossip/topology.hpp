#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace gossip {

/// Undirected edge; stored graphs keep u < v.
struct Edge {
  int u = 0;
  int v = 0;
  auto operator<=>(const Edge&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Immutable undirected connected graph on nodes 0..n-1.
///
/// Edges are canonicalized to (min, max) and sorted lexicographically at
/// construction; the position of an edge in that order is its row in the
/// incidence matrix and the index the samplers draw.
class Graph {
 public:
  /// Throws InvalidParameter on self loops, out-of-range endpoints,
  /// duplicate edges, a coordinate block of the wrong length, or a
  /// disconnected edge set.
  Graph(int n, std::vector<Edge> edges, std::optional<std::vector<Point2>> coords = std::nullopt);

  int num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::optional<std::vector<Point2>>& coords() const noexcept { return coords_; }

  /// Index of edge {i, j} in either orientation, if present.
  std::optional<std::size_t> find_edge(int i, int j) const;

  std::vector<int> degrees() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::optional<std::vector<Point2>> coords_;
};

/// Partition of all nodes into connected components, stored compactly.
/// Component ids are assigned in order of each component's smallest node and
/// members are listed in ascending order, so the partition does not depend on
/// the order in which edges were supplied.
struct Partition {
  std::vector<int> assignment;  // node -> component id
  std::vector<int> offsets;     // size() + 1 entries into members
  std::vector<int> members;

  std::size_t size() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const int> component(std::size_t r) const {
    return std::span<const int>(members).subspan(offsets[r], offsets[r + 1] - offsets[r]);
  }
};

/// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(int n);
  int find(int a);
  bool unite(int a, int b);
  int set_size(int a) { return size_[find(a)]; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

Graph make_cycle(int n);
Graph make_grid2d(int rows, int cols);

/// sqrt(ln n / n)
double rgg_radius(int n);

/// Edges (i, j) with |p_i - p_j| <= radius, in canonical order.
std::vector<Edge> rgg_edges(std::span<const Point2> points, double radius);

/// Random geometric graph: n uniform points in the unit square, connected
/// within rgg_radius(n). Disconnected draws are discarded and all points
/// redrawn from the same stream, up to max_attempts times.
Graph make_rgg(int n, std::uint64_t seed, int max_attempts = 100);

/// |E| x n matrix with +1 at column u and -1 at column v of each edge row.
Eigen::MatrixXd incidence_matrix(const Graph& g);
Eigen::SparseMatrix<double> incidence_sparse(const Graph& g);

/// Degree matrix minus adjacency matrix.
Eigen::MatrixXd laplacian(const Graph& g);

/// Components of the subgraph spanned by the selected edges. Nodes touching
/// no selected edge are singleton components.
Partition connected_components(const Graph& g, std::span<const std::size_t> edge_subset);

bool is_connected(int n, std::span<const Edge> edges);

}  // namespace gossip
