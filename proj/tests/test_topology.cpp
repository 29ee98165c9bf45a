#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "gossip/error.hpp"
#include "gossip/graph_io.hpp"
#include "gossip/rng.hpp"
#include "gossip/sketch.hpp"
#include "gossip/topology.hpp"

using namespace gossip;

namespace {

std::set<std::pair<int, int>> edge_set(const Graph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges()) s.insert({e.u, e.v});
  return s;
}

std::vector<std::set<int>> as_sets(const Partition& p) {
  std::vector<std::set<int>> out;
  for (std::size_t r = 0; r < p.size(); ++r) {
    const auto c = p.component(r);
    out.emplace_back(c.begin(), c.end());
  }
  return out;
}

}  // namespace

TEST_CASE("cycle generator") {
  const Graph g3 = make_cycle(3);
  CHECK(g3.num_edges() == 3);
  CHECK(edge_set(g3) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {0, 2}});

  const Graph g4 = make_cycle(4);
  CHECK(g4.num_edges() == 4);
  for (int d : g4.degrees()) CHECK(d == 2);

  CHECK_THROWS_AS(make_cycle(2), InvalidParameter);
}

TEST_CASE("grid generator") {
  const Graph g22 = make_grid2d(2, 2);
  CHECK(g22.num_nodes() == 4);
  CHECK(g22.num_edges() == 4);

  const Graph g33 = make_grid2d(3, 3);
  CHECK(g33.num_nodes() == 9);
  CHECK(g33.num_edges() == 12);

  const Graph g45 = make_grid2d(4, 5);
  CHECK(g45.num_edges() == 4 * 4 + 5 * 3);
  CHECK(g45.find_edge(0, 1));
  CHECK(g45.find_edge(0, 5));
  CHECK_FALSE(g45.find_edge(4, 5));  // row wrap is not an edge

  CHECK_THROWS_AS(make_grid2d(1, 5), InvalidParameter);
  CHECK_THROWS_AS(make_grid2d(5, 1), InvalidParameter);
}

TEST_CASE("rgg radius and edge rule") {
  CHECK(rgg_radius(100) == doctest::Approx(0.21459660262893474).epsilon(1e-14));
  CHECK(rgg_radius(2) == doctest::Approx(0.5887050112577373).epsilon(1e-14));

  const std::vector<Point2> pts{{0.1, 0.1}, {0.15, 0.1}};
  const auto edges = rgg_edges(pts, rgg_radius(2));
  REQUIRE(edges.size() == 1);
  CHECK(edges[0] == Edge{0, 1});

  // Distance exactly equal to the radius is an edge.
  const double r = 0.25;
  const std::vector<Point2> boundary{{0.0, 0.0}, {r, 0.0}, {0.9, 0.9}};
  const auto be = rgg_edges(boundary, r);
  REQUIRE(be.size() == 1);
  CHECK(be[0] == Edge{0, 1});
}

TEST_CASE("rgg is deterministic and connected") {
  const Graph a = make_rgg(150, 42);
  const Graph b = make_rgg(150, 42);
  CHECK(edge_set(a) == edge_set(b));
  REQUIRE(a.coords());
  for (std::size_t i = 0; i < a.coords()->size(); ++i) {
    CHECK((*a.coords())[i].x == (*b.coords())[i].x);
    CHECK((*a.coords())[i].y == (*b.coords())[i].y);
  }
  CHECK(is_connected(a.num_nodes(), a.edges()));

  std::ostringstream sa, sb;
  write_edge_list(sa, a);
  write_edge_list(sb, b);
  CHECK(sa.str() == sb.str());

  const Graph c = make_rgg(150, 43);
  CHECK(edge_set(a) != edge_set(c));
}

TEST_CASE("rgg reports exhausted retry budget") {
  // Two points are often farther apart than the radius; one attempt only.
  bool threw = false;
  for (std::uint64_t seed = 0; seed < 50 && !threw; ++seed) {
    try {
      make_rgg(2, seed, 1);
    } catch (const GenerationFailure& e) {
      threw = true;
      CHECK(std::string(e.what()).find("1 attempts") != std::string::npos);
    }
  }
  CHECK(threw);
}

TEST_CASE("graph construction validates its input") {
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}, {1, 2}}), InvalidParameter);  // duplicate after canonicalization
  CHECK_THROWS_AS(Graph(3, {{0, 0}, {1, 2}}), InvalidParameter);
  CHECK_THROWS_AS(Graph(3, {{0, 3}, {1, 2}}), InvalidParameter);
  CHECK_THROWS_AS(Graph(4, {{0, 1}, {2, 3}}), InvalidParameter);  // disconnected
  CHECK_THROWS_AS(Graph(1, {}), InvalidParameter);

  const Graph g(3, {{2, 1}, {1, 0}});
  REQUIRE(g.num_edges() == 2);
  CHECK(g.edge(0) == Edge{0, 1});
  CHECK(g.edge(1) == Edge{1, 2});
  CHECK(g.find_edge(2, 1) == std::optional<std::size_t>(1));
  CHECK_FALSE(g.find_edge(0, 2));
}

TEST_CASE("incidence matrix") {
  const Graph path(2, {{0, 1}});
  const Eigen::MatrixXd A2 = incidence_matrix(path);
  REQUIRE(A2.rows() == 1);
  CHECK(A2(0, 0) == 1.0);
  CHECK(A2(0, 1) == -1.0);

  const Eigen::MatrixXd A3 = incidence_matrix(make_cycle(3));
  CHECK(A3.rows() == 3);
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(A3).rank() == 2);

  for (const Graph& g : {make_cycle(7), make_grid2d(4, 6), make_rgg(120, 3), make_rgg(200, 9)}) {
    const Eigen::MatrixXd A = incidence_matrix(g);
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      CHECK(A.row(r).squaredNorm() == 2.0);
      CHECK((A.row(r).array() == 1.0).count() == 1);
      CHECK((A.row(r).array() == -1.0).count() == 1);
    }
    CHECK((A.transpose() * A - laplacian(g)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Eigen::MatrixXd(incidence_sparse(g)) - A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(A).rank() == g.num_nodes() - 1);
  }
}

TEST_CASE("connected components of edge subsets") {
  const Graph c3 = make_cycle(3);
  const Partition empty = connected_components(c3, {});
  CHECK(empty.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) CHECK(empty.component(r).size() == 1);

  const Graph c4 = make_cycle(4);
  const std::vector<std::size_t> sel{*c4.find_edge(0, 1), *c4.find_edge(1, 2)};
  const Partition p = connected_components(c4, sel);
  CHECK(as_sets(p) == std::vector<std::set<int>>{{0, 1, 2}, {3}});
  CHECK(p.assignment == std::vector<int>{0, 0, 0, 1});

  std::vector<std::size_t> all(c4.num_edges());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = e;
  const Partition whole = connected_components(c4, all);
  CHECK(whole.size() == 1);
  CHECK(whole.component(0).size() == 4);

  const std::vector<std::size_t> bad{7};
  CHECK_THROWS_AS(connected_components(c4, bad), InvalidParameter);
}

TEST_CASE("components cover all nodes and ignore edge order") {
  const Graph g = make_rgg(80, 11);
  Rng rng(5);
  std::mt19937_64 shuffler(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(g.num_edges());
    auto subset = sample_subset(g.num_edges(), k, rng);
    const Partition a = connected_components(g, subset);
    std::shuffle(subset.begin(), subset.end(), shuffler);
    const Partition b = connected_components(g, subset);
    CHECK(a.assignment == b.assignment);
    CHECK(a.members == b.members);
    CHECK(a.offsets == b.offsets);

    std::size_t covered = 0;
    std::vector<int> seen(g.num_nodes(), 0);
    for (std::size_t r = 0; r < a.size(); ++r) {
      for (int v : a.component(r)) {
        ++seen[v];
        CHECK(a.assignment[v] == static_cast<int>(r));
      }
      covered += a.component(r).size();
    }
    CHECK(covered == static_cast<std::size_t>(g.num_nodes()));
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
}

TEST_CASE("edge list round trip keeps edges and coordinates") {
  const Graph g = make_rgg(60, 21);
  std::stringstream ss;
  write_edge_list(ss, g);
  const Graph back = read_edge_list(ss);
  CHECK(edge_set(back) == edge_set(g));
  REQUIRE(back.coords());
  for (std::size_t i = 0; i < g.coords()->size(); ++i) {
    CHECK((*back.coords())[i].x == (*g.coords())[i].x);
    CHECK((*back.coords())[i].y == (*g.coords())[i].y);
  }

  std::ostringstream cyc;
  write_edge_list(cyc, make_cycle(10));
  CHECK(cyc.str().rfind("10 10\n", 0) == 0);
}

TEST_CASE("edge list parser rejects malformed input") {
  std::istringstream truncated("3 3\n0 1\n1 2\n");
  CHECK_THROWS_AS(read_edge_list(truncated), InvalidParameter);
  std::istringstream junk("3 2\n0 1\n1 2\nfoo\n");
  CHECK_THROWS_AS(read_edge_list(junk), InvalidParameter);
  std::istringstream short_coords("2 1\n0 1\ncoords\n0 0\n");
  CHECK_THROWS_AS(read_edge_list(short_coords), InvalidParameter);
  std::istringstream header("x y\n");
  CHECK_THROWS_AS(read_edge_list(header), InvalidParameter);
}
