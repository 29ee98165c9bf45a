#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gossip/protocols.hpp"
#include "gossip/topology.hpp"

namespace gossip {

/// Which network to build: family "cycle" (n), "grid" (rows, cols),
/// "rgg" (n, seed) or "file" (path to an edge list).
struct GraphSpec {
  std::string family = "cycle";
  int n = 0;
  int rows = 0;
  int cols = 0;
  std::uint64_t seed = 0;
  std::string path;

  Graph build() const;
};

struct LabeledProtocol {
  std::string label;
  ProtocolConfig config;
};

struct ExperimentConfig {
  GraphSpec graph;
  std::vector<LabeledProtocol> protocols;
  int trials = 1;
  std::int64_t iters = 1;
  std::uint64_t master_seed = 0;
  std::string output;
  bool dump_states = false;
  int threads = 1;

  /// trials >= 1, iters >= 1, at least one protocol, labels unique and
  /// CSV-safe.
  void validate() const;
};

/// Parses the JSON experiment config. Keys mirror ExperimentConfig:
///
///   {"graph": {"family": "cycle", "n": 30},
///    "protocols": [{"label": "mrk b=0.3", "kind": "mrk", "omega": 1, "beta": 0.3}],
///    "trials": 10, "iters": 5000, "master_seed": 7, "output": "out.csv"}
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Relative-error traces of every (protocol, trial) pair plus their means.
struct TraceTable {
  std::vector<std::string> labels;
  int trials = 0;
  std::int64_t iters = 0;
  /// series[p][t][k]: relative error of protocol p, trial t, iteration k.
  std::vector<std::vector<std::vector<double>>> series;
  /// mean[p][k]: arithmetic mean over trials.
  std::vector<std::vector<double>> mean;
  /// states[p][t][k]: node values, only with dump_states.
  std::vector<std::vector<std::vector<Eigen::VectorXd>>> states;
};

/// Initial private values of a trial: standard normal draws from the
/// (master_seed, trial) stream. Shared by every protocol in the experiment.
Eigen::VectorXd initial_values(std::uint64_t master_seed, int trial, int n);

TraceTable run_experiment(const ExperimentConfig& cfg, const Graph& g);
TraceTable run_experiment(const ExperimentConfig& cfg);

void write_trace_csv(std::ostream& out, const TraceTable& table);
void write_aggregate_csv(std::ostream& out, const TraceTable& table);
void write_states_csv(std::ostream& out, const TraceTable& table);

/// `out.csv` -> `out.agg.csv`; other names get `.agg.csv` appended.
std::string aggregate_path(const std::string& output);
std::string states_path(const std::string& output);

/// Writes the trace, its aggregate and (when present) the state dump. Files
/// are staged under temporary names and renamed only after all writes succeed.
void write_outputs(const TraceTable& table, const std::string& output);

/// Settings for the three head-to-head comparisons.
struct ComparisonConfig {
  GraphSpec graph;
  int trials = 1;
  std::int64_t iters = 1000;
  std::uint64_t master_seed = 0;
  std::string output_prefix = "compare";
  std::vector<double> betas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> shift_omegas = {1.2, 1.3};
  std::size_t tau = 5;
  int threads = 1;
};

ComparisonConfig parse_comparison_config(const std::string& json_text);
ComparisonConfig load_comparison_config(const std::string& path);

/// Momentum sweep of mRK at omega = 1, shift register against mRK with
/// beta = omega - 1, and a momentum sweep of mRBK at block size tau. Each
/// includes the pairwise baseline. Outputs go to <prefix>.{momentum,shift,block}.csv.
std::vector<ExperimentConfig> comparison_suite(const ComparisonConfig& cfg);

}  // namespace gossip
