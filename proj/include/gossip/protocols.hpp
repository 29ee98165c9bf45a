#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gossip/rng.hpp"
#include "gossip/sketch.hpp"
#include "gossip/topology.hpp"

namespace gossip {

/// Node values of a gossip run. `values` is x^k, `prev_values` is x^{k-1}.
/// `last_active` is only maintained by the lazy protocol: node i stores
/// (x_i^{k_i}, x_i^{k_i - 1}) with k_i = last_active[i].
struct GossipState {
  Eigen::VectorXd values;
  Eigen::VectorXd prev_values;
  std::int64_t iter = 0;
  std::vector<std::int64_t> last_active;

  /// Both registers set to the private values c, counter at zero.
  static GossipState start(const Eigen::VectorXd& c);
};

enum class ProtocolKind {
  Baseline,       // pairwise averaging
  MRK,            // Kaczmarz with momentum
  MRBK,           // block Kaczmarz with momentum
  ShiftRegister,  // two-register accelerated gossip
  DiagonalB,      // per-node momentum weights
  LazyMRK,        // mRK with deferred idle updates and a common counter
};

std::string_view to_string(ProtocolKind kind);
ProtocolKind parse_protocol_kind(std::string_view name);

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::Baseline;
  double omega = 1.0;
  double beta = 0.0;
  std::size_t tau = 1;
  Eigen::VectorXd b_diag;
  /// Edge sampling. Empty means uniform edges (single-edge kinds) or uniform
  /// tau-blocks (MRBK).
  std::optional<SketchDistribution> edge_dist;

  /// Throws InvalidParameter if a parameter is out of range for `kind` on `g`.
  void validate(const Graph& g) const;
  SketchDistribution edge_distribution(const Graph& g) const;
};

// Pure step functions. Each takes the state at iteration k and returns the
// state at k + 1. Pairs that are not edges of `g` raise InvalidEdge.

/// (x_i + x_j)/2 on both endpoints; every other node unchanged.
GossipState step_pairwise(const Graph& g, const GossipState& st, Edge e);

GossipState step_mrk(const Graph& g, const GossipState& st, Edge e, double omega, double beta);

/// Every component V_r of the selected subgraph (singletons included) gets
///   x_i <- omega mean(x_{V_r}) + (1 - omega) x_i + beta (x_i - x_i_prev).
GossipState step_mrbk(const Graph& g, const GossipState& st, std::span<const std::size_t> edge_subset, double omega,
                      double beta);

/// Only i and j change; idle nodes keep both registers.
GossipState step_shift_register(const Graph& g, const GossipState& st, Edge e, double omega);

/// x+ = x - (omega/2)(x_i - x_j)(e_i - e_j) + diag(b)(x - x_prev).
GossipState step_diag_b(const Graph& g, const GossipState& st, Edge e, double omega, const Eigen::VectorXd& b_diag);

/// Lazy mRK at common counter K. Nodes i and j first replay the K - k_i idle
/// extrapolations they missed, then exchange. Other nodes are untouched in
/// storage. Throws InvalidState if K is behind the state's counter or a node's
/// last activation.
GossipState step_lazy_mrk(const Graph& g, const GossipState& st, Edge e, double omega, double beta,
                          std::int64_t counter);

/// (x_i^K, x_i^{K-1}) for a node of a lazy state, by replaying its idle updates.
std::pair<double, double> lazy_catch_up(const GossipState& st, int node, double beta, std::int64_t counter);

/// Values every node would hold at the state's counter under eager mRK.
Eigen::VectorXd lazy_materialize(const GossipState& st, double beta);

/// ||x - x*||^2 / ||x0 - x*||^2 with x* = mean(x0) 1. Zero when x0 is already
/// at consensus.
double relative_error(const Eigen::VectorXd& x, const Eigen::VectorXd& x0);

struct ProtocolTrace {
  std::vector<double> rel_err;        // iterations 0..iters
  std::vector<GossipState> states;    // filled only when requested
};

/// Runs `iters` iterations from x^0 = x^1 = c, drawing samples from `rng`.
ProtocolTrace run_protocol(const ProtocolConfig& cfg, const Graph& g, const Eigen::VectorXd& c, std::int64_t iters,
                           Rng& rng, bool keep_states = false);

namespace inplace {

// Mutating kernels over edge indices. No validation beyond what the pure
// wrappers above do once per run.

void pairwise(const Graph& g, GossipState& st, std::size_t e);
void mrk(const Graph& g, GossipState& st, std::size_t e, double omega, double beta);
void mrbk(const Graph& g, GossipState& st, std::span<const std::size_t> edge_subset, double omega, double beta);
void shift_register(const Graph& g, GossipState& st, std::size_t e, double omega);
void diag_b(const Graph& g, GossipState& st, std::size_t e, double omega, const Eigen::VectorXd& b_diag);
void lazy_mrk(const Graph& g, GossipState& st, std::size_t e, double omega, double beta, std::int64_t counter);

}  // namespace inplace

}  // namespace gossip
