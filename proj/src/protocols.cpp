#include "gossip/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gossip/error.hpp"

namespace gossip {

namespace {

void check_relaxation(double omega) {
  if (!(omega > 0.0 && omega < 2.0)) {
    throw InvalidParameter("relaxation must lie in (0, 2), got " + std::to_string(omega));
  }
}

void check_momentum(double beta) {
  if (!(beta >= 0.0)) throw InvalidParameter("momentum must be >= 0, got " + std::to_string(beta));
}

void check_shift_relaxation(double omega) {
  if (!(omega >= 1.0 && omega < 2.0)) {
    throw InvalidParameter("shift-register relaxation must lie in [1, 2), got " + std::to_string(omega));
  }
}

void check_state(const Graph& g, const GossipState& st) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (st.values.size() != n || st.prev_values.size() != n) {
    throw InvalidState("state has " + std::to_string(st.values.size()) + " values for " +
                       std::to_string(g.num_nodes()) + " nodes");
  }
}

std::size_t edge_index(const Graph& g, Edge e) {
  const auto idx = g.find_edge(e.u, e.v);
  if (!idx) throw InvalidEdge("(" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") is not an edge");
  return *idx;
}

void check_b_diag(const Graph& g, const Eigen::VectorXd& b_diag) {
  if (b_diag.size() != g.num_nodes()) {
    throw InvalidParameter("momentum diagonal has " + std::to_string(b_diag.size()) + " entries for " +
                           std::to_string(g.num_nodes()) + " nodes");
  }
  if (!(b_diag.array() >= 0.0).all()) throw InvalidParameter("momentum diagonal entries must be >= 0");
}

void ensure_last_active(const Graph& g, GossipState& st) {
  if (st.last_active.empty()) st.last_active.assign(g.num_nodes(), 0);
}

// One idle extrapolation (x, p) -> (x + beta (x - p), x), replayed `gap` times.
std::pair<double, double> replay_idle(double x, double p, double beta, std::int64_t gap) {
  for (std::int64_t t = 0; t < gap; ++t) {
    const double next = x + beta * (x - p);
    p = x;
    x = next;
  }
  return {x, p};
}

}  // namespace

GossipState GossipState::start(const Eigen::VectorXd& c) {
  GossipState st;
  st.values = c;
  st.prev_values = c;
  st.iter = 0;
  st.last_active.assign(static_cast<std::size_t>(c.size()), 0);
  return st;
}

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::Baseline: return "baseline";
    case ProtocolKind::MRK: return "mrk";
    case ProtocolKind::MRBK: return "mrbk";
    case ProtocolKind::ShiftRegister: return "shift-register";
    case ProtocolKind::DiagonalB: return "diag-b";
    case ProtocolKind::LazyMRK: return "lazy-mrk";
  }
  return "unknown";
}

ProtocolKind parse_protocol_kind(std::string_view name) {
  for (auto k : {ProtocolKind::Baseline, ProtocolKind::MRK, ProtocolKind::MRBK, ProtocolKind::ShiftRegister,
                 ProtocolKind::DiagonalB, ProtocolKind::LazyMRK}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidParameter("unknown protocol kind `" + std::string(name) + "`");
}

void ProtocolConfig::validate(const Graph& g) const {
  switch (kind) {
    case ProtocolKind::Baseline:
      break;
    case ProtocolKind::MRK:
    case ProtocolKind::LazyMRK:
      check_relaxation(omega);
      check_momentum(beta);
      break;
    case ProtocolKind::MRBK:
      check_relaxation(omega);
      check_momentum(beta);
      if (tau < 1 || tau > g.num_edges()) {
        throw InvalidParameter("block size " + std::to_string(tau) + " outside [1, " +
                               std::to_string(g.num_edges()) + "]");
      }
      break;
    case ProtocolKind::ShiftRegister:
      check_shift_relaxation(omega);
      break;
    case ProtocolKind::DiagonalB:
      check_relaxation(omega);
      check_b_diag(g, b_diag);
      break;
  }
  if (edge_dist) {
    if (edge_dist->rows() != g.num_edges()) {
      throw InvalidParameter("edge distribution covers " + std::to_string(edge_dist->rows()) + " edges, graph has " +
                             std::to_string(g.num_edges()));
    }
    const bool wants_block = kind == ProtocolKind::MRBK;
    if (edge_dist->is_block() != wants_block) {
      throw InvalidParameter(std::string("protocol ") + std::string(to_string(kind)) +
                             (wants_block ? " needs a block distribution" : " needs a single-edge distribution"));
    }
    if (wants_block && edge_dist->tau() != tau) {
      throw InvalidParameter("block distribution size does not match tau");
    }
  }
}

SketchDistribution ProtocolConfig::edge_distribution(const Graph& g) const {
  if (edge_dist) return *edge_dist;
  if (kind == ProtocolKind::MRBK) return SketchDistribution::uniform_blocks(g.num_edges(), tau);
  return SketchDistribution::uniform_rows(g.num_edges());
}

namespace inplace {

void pairwise(const Graph& g, GossipState& st, std::size_t e) {
  const auto [i, j] = g.edge(e);
  const double avg = (st.values[i] + st.values[j]) / 2.0;
  st.prev_values[i] = st.values[i];
  st.prev_values[j] = st.values[j];
  st.values[i] = avg;
  st.values[j] = avg;
  ++st.iter;
}

void mrk(const Graph& g, GossipState& st, std::size_t e, double omega, double beta) {
  const auto [i, j] = g.edge(e);
  const double xi = st.values[i], xj = st.values[j];
  const double pi = st.prev_values[i], pj = st.prev_values[j];
  for (Eigen::Index l = 0; l < st.values.size(); ++l) {
    const double x = st.values[l];
    st.values[l] = x + beta * (x - st.prev_values[l]);
    st.prev_values[l] = x;
  }
  st.values[i] = (2.0 - omega) / 2.0 * xi + omega / 2.0 * xj + beta * (xi - pi);
  st.values[j] = (2.0 - omega) / 2.0 * xj + omega / 2.0 * xi + beta * (xj - pj);
  ++st.iter;
}

void mrbk(const Graph& g, GossipState& st, std::span<const std::size_t> edge_subset, double omega, double beta) {
  const Partition parts = connected_components(g, edge_subset);
  std::vector<double> mean(parts.size(), 0.0);
  for (std::size_t r = 0; r < parts.size(); ++r) {
    const auto comp = parts.component(r);
    double sum = 0.0;
    for (int v : comp) sum += st.values[v];
    mean[r] = sum / static_cast<double>(comp.size());
  }
  for (Eigen::Index l = 0; l < st.values.size(); ++l) {
    const double x = st.values[l];
    st.values[l] = omega * mean[parts.assignment[l]] + (1.0 - omega) * x + beta * (x - st.prev_values[l]);
    st.prev_values[l] = x;
  }
  ++st.iter;
}

void shift_register(const Graph& g, GossipState& st, std::size_t e, double omega) {
  const auto [i, j] = g.edge(e);
  const double xi = st.values[i], xj = st.values[j];
  const double avg = (xi + xj) / 2.0;
  st.values[i] = omega * avg + (1.0 - omega) * st.prev_values[i];
  st.values[j] = omega * avg + (1.0 - omega) * st.prev_values[j];
  st.prev_values[i] = xi;
  st.prev_values[j] = xj;
  ++st.iter;
}

void diag_b(const Graph& g, GossipState& st, std::size_t e, double omega, const Eigen::VectorXd& b_diag) {
  const auto [i, j] = g.edge(e);
  const double exchange = omega / 2.0 * (st.values[i] - st.values[j]);
  for (Eigen::Index l = 0; l < st.values.size(); ++l) {
    const double x = st.values[l];
    st.values[l] = x + b_diag[l] * (x - st.prev_values[l]);
    st.prev_values[l] = x;
  }
  st.values[i] -= exchange;
  st.values[j] += exchange;
  ++st.iter;
}

void lazy_mrk(const Graph& g, GossipState& st, std::size_t e, double omega, double beta, std::int64_t counter) {
  ensure_last_active(g, st);
  const auto [i, j] = g.edge(e);
  const auto [xi, pi] = lazy_catch_up(st, i, beta, counter);
  const auto [xj, pj] = lazy_catch_up(st, j, beta, counter);
  st.values[i] = (2.0 - omega) / 2.0 * xi + omega / 2.0 * xj + beta * (xi - pi);
  st.values[j] = (2.0 - omega) / 2.0 * xj + omega / 2.0 * xi + beta * (xj - pj);
  st.prev_values[i] = xi;
  st.prev_values[j] = xj;
  st.last_active[i] = counter + 1;
  st.last_active[j] = counter + 1;
  st.iter = counter + 1;
}

}  // namespace inplace

GossipState step_pairwise(const Graph& g, const GossipState& st, Edge e) {
  check_state(g, st);
  GossipState next = st;
  inplace::pairwise(g, next, edge_index(g, e));
  return next;
}

GossipState step_mrk(const Graph& g, const GossipState& st, Edge e, double omega, double beta) {
  check_state(g, st);
  check_relaxation(omega);
  check_momentum(beta);
  GossipState next = st;
  inplace::mrk(g, next, edge_index(g, e), omega, beta);
  return next;
}

GossipState step_mrbk(const Graph& g, const GossipState& st, std::span<const std::size_t> edge_subset, double omega,
                      double beta) {
  check_state(g, st);
  check_relaxation(omega);
  check_momentum(beta);
  for (std::size_t e : edge_subset) {
    if (e >= g.num_edges()) {
      throw InvalidEdge("edge index " + std::to_string(e) + " out of range for " + std::to_string(g.num_edges()) +
                        " edges");
    }
  }
  GossipState next = st;
  inplace::mrbk(g, next, edge_subset, omega, beta);
  return next;
}

GossipState step_shift_register(const Graph& g, const GossipState& st, Edge e, double omega) {
  check_state(g, st);
  check_shift_relaxation(omega);
  GossipState next = st;
  inplace::shift_register(g, next, edge_index(g, e), omega);
  return next;
}

GossipState step_diag_b(const Graph& g, const GossipState& st, Edge e, double omega, const Eigen::VectorXd& b_diag) {
  check_state(g, st);
  check_relaxation(omega);
  check_b_diag(g, b_diag);
  GossipState next = st;
  inplace::diag_b(g, next, edge_index(g, e), omega, b_diag);
  return next;
}

GossipState step_lazy_mrk(const Graph& g, const GossipState& st, Edge e, double omega, double beta,
                          std::int64_t counter) {
  check_state(g, st);
  check_relaxation(omega);
  check_momentum(beta);
  if (counter < st.iter) {
    throw InvalidState("common counter " + std::to_string(counter) + " is behind state counter " +
                       std::to_string(st.iter));
  }
  const std::size_t idx = edge_index(g, e);
  GossipState next = st;
  inplace::lazy_mrk(g, next, idx, omega, beta, counter);
  return next;
}

std::pair<double, double> lazy_catch_up(const GossipState& st, int node, double beta, std::int64_t counter) {
  if (node < 0 || node >= st.values.size()) throw InvalidParameter("node " + std::to_string(node) + " out of range");
  const std::int64_t since = st.last_active.empty() ? 0 : st.last_active[node];
  if (counter < since) {
    throw InvalidState("common counter " + std::to_string(counter) + " precedes node " + std::to_string(node) +
                       "'s last activation " + std::to_string(since));
  }
  return replay_idle(st.values[node], st.prev_values[node], beta, counter - since);
}

Eigen::VectorXd lazy_materialize(const GossipState& st, double beta) {
  // (x, p) -> M (x, p) with M = [[1 + beta, -beta], [1, 0]]; gaps are
  // applied as M^gap by repeated squaring.
  Eigen::Matrix2d step;
  step << 1.0 + beta, -beta, 1.0, 0.0;
  Eigen::VectorXd out(st.values.size());
  for (Eigen::Index i = 0; i < st.values.size(); ++i) {
    const std::int64_t since = st.last_active.empty() ? 0 : st.last_active[i];
    std::int64_t gap = st.iter - since;
    if (gap < 0) throw InvalidState("node " + std::to_string(i) + " is ahead of the state counter");
    Eigen::Matrix2d power = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d base = step;
    while (gap > 0) {
      if (gap & 1) power = power * base;
      base = base * base;
      gap >>= 1;
    }
    out[i] = power(0, 0) * st.values[i] + power(0, 1) * st.prev_values[i];
  }
  return out;
}

double relative_error(const Eigen::VectorXd& x, const Eigen::VectorXd& x0) {
  const double target = x0.mean();
  const double denom = (x0.array() - target).square().sum();
  if (denom == 0.0) return 0.0;
  return (x.array() - target).square().sum() / denom;
}

ProtocolTrace run_protocol(const ProtocolConfig& cfg, const Graph& g, const Eigen::VectorXd& c, std::int64_t iters,
                           Rng& rng, bool keep_states) {
  cfg.validate(g);
  if (c.size() != g.num_nodes()) {
    throw InvalidParameter("initial vector has " + std::to_string(c.size()) + " entries for " +
                           std::to_string(g.num_nodes()) + " nodes");
  }
  if (iters < 0) throw InvalidParameter("iteration count must be >= 0");
  const SketchDistribution dist = cfg.edge_distribution(g);

  ProtocolTrace trace;
  trace.rel_err.reserve(static_cast<std::size_t>(iters) + 1);
  GossipState st = GossipState::start(c);
  trace.rel_err.push_back(relative_error(st.values, c));
  if (keep_states) trace.states.push_back(st);

  for (std::int64_t k = 0; k < iters; ++k) {
    const SketchSample s = dist.sample(rng);
    if (const auto* block = std::get_if<BlockSample>(&s)) {
      inplace::mrbk(g, st, block->rows, cfg.omega, cfg.beta);
    } else {
      const std::size_t e = std::get<RowSample>(s).row;
      switch (cfg.kind) {
        case ProtocolKind::Baseline: inplace::pairwise(g, st, e); break;
        case ProtocolKind::MRK: inplace::mrk(g, st, e, cfg.omega, cfg.beta); break;
        case ProtocolKind::ShiftRegister: inplace::shift_register(g, st, e, cfg.omega); break;
        case ProtocolKind::DiagonalB: inplace::diag_b(g, st, e, cfg.omega, cfg.b_diag); break;
        case ProtocolKind::LazyMRK: inplace::lazy_mrk(g, st, e, cfg.omega, cfg.beta, st.iter); break;
        case ProtocolKind::MRBK: break;  // block samples handled above
      }
    }
    if (cfg.kind == ProtocolKind::LazyMRK) {
      trace.rel_err.push_back(relative_error(lazy_materialize(st, cfg.beta), c));
    } else {
      trace.rel_err.push_back(relative_error(st.values, c));
    }
    if (keep_states) trace.states.push_back(st);
  }
  return trace;
}

}  // namespace gossip
