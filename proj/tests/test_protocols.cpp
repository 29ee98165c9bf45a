#include <doctest.h>

#include <cstring>

#include "gossip/error.hpp"
#include "gossip/protocols.hpp"
#include "gossip/rng.hpp"
#include "gossip/solver.hpp"
#include "gossip/topology.hpp"

using namespace gossip;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::VectorXd gaussian(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

GossipState random_state(Rng& rng, int n) {
  GossipState st = GossipState::start(gaussian(rng, n));
  st.prev_values = gaussian(rng, n);
  return st;
}

bool bit_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("mrk with omega 1 and no momentum is pairwise averaging") {
  const Graph g = make_cycle(5);
  Rng rng(1);
  GossipState st = GossipState::start(gaussian(rng, 5));
  const GossipState next = step_mrk(g, st, {1, 2}, 1.0, 0.0);
  CHECK(next.values[1] == (st.values[1] + st.values[2]) / 2);
  CHECK(next.values[2] == next.values[1]);
  for (int l : {0, 3, 4}) CHECK(next.values[l] == st.values[l]);
  CHECK(bit_equal(next.values, step_pairwise(g, st, {1, 2}).values));
  CHECK(next.iter == 1);
}

TEST_CASE("mrk hand-evaluated example") {
  const Graph g = make_cycle(3);
  GossipState st = GossipState::start(vec({0, 2, 7}));
  st = step_mrk(g, st, {0, 1}, 1.0, 0.5);
  CHECK(bit_equal(st.values, vec({1, 1, 7})));
  CHECK(bit_equal(st.prev_values, vec({0, 2, 7})));
  st = step_mrk(g, st, {0, 1}, 1.0, 0.5);
  CHECK(bit_equal(st.values, vec({1.5, 0.5, 7})));
  CHECK(st.iter == 2);

  CHECK_THROWS_AS(step_mrk(make_cycle(4), GossipState::start(vec({0, 1, 2, 3})), {0, 2}, 1.0, 0.5), InvalidEdge);
  CHECK_THROWS_AS(step_mrk(g, st, {0, 1}, 2.0, 0.5), InvalidParameter);
  CHECK_THROWS_AS(step_mrk(g, st, {0, 1}, 1.0, -0.5), InvalidParameter);
}

TEST_CASE("mrk sum follows the two-term recurrence") {
  const Graph g = make_rgg(40, 2);
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const GossipState st = random_state(rng, 40);
    const double omega = 0.1 + 1.8 * rng.uniform01();
    const double beta = rng.uniform01();
    const Edge e = g.edge(rng.uniform_index(g.num_edges()));
    const GossipState next = step_mrk(g, st, e, omega, beta);
    const double want = (1 + beta) * st.values.sum() - beta * st.prev_values.sum();
    CHECK(std::abs(next.values.sum() - want) <= 1e-11 * (1 + st.values.cwiseAbs().sum()));
  }
}

TEST_CASE("mrk and mrbk keep the sum when both registers start equal") {
  const Graph g = make_grid2d(4, 4);
  Rng rng(3);
  const Eigen::VectorXd c = gaussian(rng, 16);
  const double bound = 1e-9 * 16 * c.cwiseAbs().maxCoeff();
  for (std::size_t tau : {std::size_t(1), std::size_t(4)}) {
    GossipState st = GossipState::start(c);
    const auto blocks = SketchDistribution::uniform_blocks(g.num_edges(), tau);
    for (int k = 0; k < 5000; ++k) {
      if (tau == 1) {
        inplace::mrk(g, st, rng.uniform_index(g.num_edges()), 1.0, 0.4);
      } else {
        inplace::mrbk(g, st, std::get<BlockSample>(blocks.sample(rng)).rows, 1.0, 0.4);
      }
      REQUIRE(std::abs(st.values.sum() - c.sum()) <= bound);
    }
  }
}

TEST_CASE("mrbk update rule") {
  Rng rng(4);
  const Graph c5 = make_cycle(5);
  for (int trial = 0; trial < 50; ++trial) {
    const GossipState st = random_state(rng, 5);
    const std::size_t e = rng.uniform_index(c5.num_edges());
    const std::vector<std::size_t> one{e};
    CHECK(max_diff(step_mrbk(c5, st, one, 1.3, 0.2).values, step_mrk(c5, st, c5.edge(e), 1.3, 0.2).values) <=
          1e-12);
  }

  const GossipState st0 = GossipState::start(vec({0, 1, 5, -2, 4}));
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  const GossipState avg = step_mrbk(c5, st0, all, 1.0, 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(avg.values[i] == doctest::Approx(1.6).epsilon(1e-14));

  // Component {2, 3, 4} on the 6-cycle; the rest are singletons.
  const Graph c6 = make_cycle(6);
  const GossipState st = random_state(rng, 6);
  const std::vector<std::size_t> sel{*c6.find_edge(2, 3), *c6.find_edge(3, 4)};
  const double omega = 0.7, beta = 0.25;
  const GossipState next = step_mrbk(c6, st, sel, omega, beta);
  const auto& x = st.values;
  const auto& p = st.prev_values;
  const double m = (x[2] + x[3] + x[4]) / 3;
  for (int v : {2, 3, 4}) {
    CHECK(next.values[v] == doctest::Approx(omega * m + (1 - omega) * x[v] + beta * (x[v] - p[v])).epsilon(1e-13));
  }
  for (int v : {0, 1, 5}) {
    CHECK(next.values[v] == doctest::Approx(x[v] + beta * (x[v] - p[v])).epsilon(1e-13));
  }

  const std::vector<std::size_t> bad{6};
  CHECK_THROWS_AS(step_mrbk(c6, st, bad, omega, beta), InvalidEdge);
}

TEST_CASE("protocol steps agree with heavy ball on the consensus system") {
  Rng rng(5);
  for (int inst = 0; inst < 5; ++inst) {
    const Graph g = make_rgg(15, 50 + inst);
    const auto sys = LinearSystemd::average_consensus(g);
    const auto blocks = SketchDistribution::uniform_blocks(g.num_edges(), std::min<std::size_t>(4, g.num_edges()));
    for (int t = 0; t < 40; ++t) {
      const GossipState st = random_state(rng, 15);
      const IterateState<double> it{st.values, st.prev_values};
      const double omega = 0.1 + 1.8 * rng.uniform01();
      const double beta = rng.uniform01();

      const std::size_t e = rng.uniform_index(g.num_edges());
      const auto row = shb_step(sys, it, SketchSample{RowSample{e}}, omega, beta);
      CHECK(max_diff(step_mrk(g, st, g.edge(e), omega, beta).values, row.current) <= 1e-12);

      const auto rows = std::get<BlockSample>(blocks.sample(rng)).rows;
      const auto block = shb_step(sys, it, SketchSample{BlockSample{rows}}, omega, beta);
      CHECK(max_diff(step_mrbk(g, st, rows, omega, beta).values, block.current) <= 1e-10);
    }
  }
}

TEST_CASE("shift register") {
  const Graph g = make_cycle(5);
  Rng rng(6);
  const GossipState st = random_state(rng, 5);

  const GossipState exact = step_shift_register(g, st, {3, 4}, 1.0);
  CHECK(exact.values[3] == (st.values[3] + st.values[4]) / 2);
  CHECK(exact.values[4] == exact.values[3]);

  for (double omega : {1.0, 1.2, 1.3, 1.9}) {
    const GossipState next = step_shift_register(g, st, {0, 4}, omega);
    for (int l : {1, 2, 3}) {
      CHECK(std::memcmp(&next.values[l], &st.values[l], sizeof(double)) == 0);
      CHECK(std::memcmp(&next.prev_values[l], &st.prev_values[l], sizeof(double)) == 0);
    }
    CHECK(next.prev_values[0] == st.values[0]);
    CHECK(next.prev_values[4] == st.values[4]);
    const GossipState eager = step_mrk(g, st, {0, 4}, omega, omega - 1);
    CHECK(std::abs(next.values[0] - eager.values[0]) <= 1e-12);
    CHECK(std::abs(next.values[4] - eager.values[4]) <= 1e-12);
  }

  CHECK_THROWS_AS(step_shift_register(g, st, {0, 1}, 0.9), InvalidParameter);
  CHECK_THROWS_AS(step_shift_register(g, st, {0, 1}, 2.0), InvalidParameter);
  CHECK_THROWS_AS(step_shift_register(g, st, {0, 2}, 1.5), InvalidEdge);
}

TEST_CASE("diagonal momentum generalization") {
  const Graph g = make_cycle(6);
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const GossipState st = random_state(rng, 6);
    const Edge e = g.edge(rng.uniform_index(g.num_edges()));
    const double omega = 1.0 + 0.99 * rng.uniform01();
    const double beta = rng.uniform01();

    const GossipState plain = step_diag_b(g, st, e, 1.0, Eigen::VectorXd::Zero(6));
    CHECK(max_diff(plain.values, step_pairwise(g, st, e).values) <= 1e-15);

    const GossipState uniform = step_diag_b(g, st, e, omega, Eigen::VectorXd::Constant(6, beta));
    CHECK(max_diff(uniform.values, step_mrk(g, st, e, omega, beta).values) <= 1e-12);

    Eigen::VectorXd pair_only = Eigen::VectorXd::Zero(6);
    pair_only[e.u] = pair_only[e.v] = omega - 1;
    const GossipState pair = step_diag_b(g, st, e, omega, pair_only);
    const GossipState shift = step_shift_register(g, st, e, omega);
    CHECK(std::abs(pair.values[e.u] - shift.values[e.u]) <= 1e-12);
    CHECK(std::abs(pair.values[e.v] - shift.values[e.v]) <= 1e-12);
  }

  const GossipState st = GossipState::start(vec({0, 1, 2, 3, 4, 5}));
  CHECK_THROWS_AS(step_diag_b(g, st, {0, 1}, 1.0, Eigen::VectorXd::Zero(5)), InvalidParameter);
  CHECK_THROWS_AS(step_diag_b(g, st, {0, 1}, 1.0, Eigen::VectorXd::Constant(6, -0.1)), InvalidParameter);
}

TEST_CASE("lazy mrk against eager mrk") {
  // Every node active every step: the 2-node path.
  const Graph path(2, {{0, 1}});
  GossipState lazy = GossipState::start(vec({0, 3}));
  GossipState eager = lazy;
  for (int k = 0; k < 50; ++k) {
    lazy = step_lazy_mrk(path, lazy, {0, 1}, 1.2, 0.4, k);
    eager = step_mrk(path, eager, {0, 1}, 1.2, 0.4);
    REQUIRE(bit_equal(lazy.values, eager.values));
  }

  // Fixed sequence on the triangle with non-trivial previous registers.
  const Graph c3 = make_cycle(3);
  GossipState l3 = GossipState::start(vec({0, 1, 5}));
  l3.prev_values = vec({1, 0, 2});
  GossipState e3 = l3;
  const std::vector<Edge> seq{{0, 1}, {0, 1}, {1, 2}};
  for (std::int64_t k = 0; k < 2; ++k) {
    l3 = step_lazy_mrk(c3, l3, seq[k], 1.0, 0.3, k);
    e3 = step_mrk(c3, e3, seq[k], 1.0, 0.3);
  }
  CHECK(l3.values[2] == 5.0);  // untouched in storage
  const auto [x2, p2] = lazy_catch_up(l3, 2, 0.3, 2);
  CHECK(std::abs(x2 - e3.values[2]) <= 1e-12);
  CHECK(std::abs(p2 - e3.prev_values[2]) <= 1e-12);
  l3 = step_lazy_mrk(c3, l3, seq[2], 1.0, 0.3, 2);
  e3 = step_mrk(c3, e3, seq[2], 1.0, 0.3);
  CHECK(max_diff(lazy_materialize(l3, 0.3), e3.values) <= 1e-12);

  CHECK_THROWS_AS(step_lazy_mrk(c3, l3, {0, 1}, 1.0, 0.3, 1), InvalidState);
  CHECK_THROWS_AS(step_lazy_mrk(c3, l3, {0, 3}, 1.0, 0.3, 5), InvalidEdge);

  // No momentum: lazy and eager coincide for any activation pattern.
  const Graph g = make_cycle(8);
  Rng rng(8);
  GossipState a = random_state(rng, 8);
  a.prev_values = a.values;
  GossipState b = a;
  for (std::int64_t k = 0; k < 200; ++k) {
    const Edge e = g.edge(rng.uniform_index(g.num_edges()));
    a = step_lazy_mrk(g, a, e, 1.4, 0.0, k);
    b = step_mrk(g, b, e, 1.4, 0.0);
    REQUIRE(bit_equal(a.values, b.values));
  }
}

TEST_CASE("lazy materialization over long gaps") {
  const Graph g = make_cycle(10);
  Rng rng(9), s1(10), s2(10);
  GossipState lazy = random_state(rng, 10);
  GossipState eager = lazy;
  for (std::int64_t k = 0; k < 1000; ++k) {
    const std::size_t e = s1.uniform_index(g.num_edges());
    REQUIRE(e == s2.uniform_index(g.num_edges()));
    inplace::lazy_mrk(g, lazy, e, 1.0, 0.3, k);
    inplace::mrk(g, eager, e, 1.0, 0.3);
  }
  CHECK(max_diff(lazy_materialize(lazy, 0.3), eager.values) <= 1e-10);
}

TEST_CASE("run protocol") {
  Rng rng(11);
  const Graph g = make_cycle(6);
  const Eigen::VectorXd c = gaussian(rng, 6);
  ProtocolConfig cfg;
  cfg.kind = ProtocolKind::MRK;
  cfg.beta = 0.3;

  Rng r0(1);
  const auto empty = run_protocol(cfg, g, c, 0, r0, true);
  CHECK(empty.rel_err == std::vector<double>{1.0});
  CHECK(empty.states.size() == 1);

  const Graph path(2, {{0, 1}});
  ProtocolConfig base;
  Rng r1(2);
  const auto two = run_protocol(base, path, vec({0, 4}), 1, r1);
  CHECK(two.rel_err == std::vector<double>{1.0, 0.0});

  for (auto kind : {ProtocolKind::Baseline, ProtocolKind::MRK, ProtocolKind::MRBK, ProtocolKind::ShiftRegister,
                    ProtocolKind::DiagonalB, ProtocolKind::LazyMRK}) {
    ProtocolConfig k = cfg;
    k.kind = kind;
    k.tau = 2;
    k.omega = 1.2;
    k.b_diag = Eigen::VectorXd::Constant(6, 0.2);
    Rng a(77), b(77);
    const auto ta = run_protocol(k, g, c, 300, a);
    const auto tb = run_protocol(k, g, c, 300, b);
    CHECK(ta.rel_err == tb.rel_err);
    CHECK(ta.rel_err.size() == 301);
  }

  // Lazy trace tracks the eager one when fed the same samples.
  ProtocolConfig lazy = cfg;
  lazy.kind = ProtocolKind::LazyMRK;
  Rng a(5), b(5);
  const auto tl = run_protocol(lazy, g, c, 500, a);
  const auto te = run_protocol(cfg, g, c, 500, b);
  for (std::size_t k = 0; k < tl.rel_err.size(); ++k) {
    CHECK(std::abs(tl.rel_err[k] - te.rel_err[k]) <= 1e-10);
  }

  CHECK(relative_error(vec({3, 3}), vec({3, 3})) == 0.0);
  CHECK(parse_protocol_kind("shift-register") == ProtocolKind::ShiftRegister);
  CHECK_THROWS_AS(parse_protocol_kind("gossip"), InvalidParameter);

  ProtocolConfig bad = cfg;
  bad.kind = ProtocolKind::MRBK;
  bad.tau = 7;
  Rng r2(3);
  CHECK_THROWS_AS(run_protocol(bad, g, c, 10, r2), InvalidParameter);
  bad.tau = 2;
  bad.edge_dist = SketchDistribution::uniform_rows(6);
  CHECK_THROWS_AS(run_protocol(bad, g, c, 10, r2), InvalidParameter);
}
