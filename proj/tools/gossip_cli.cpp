// Command-line front end: graph generation, rate reports and experiments.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gossip/graph_io.hpp"
#include "gossip/harness.hpp"
#include "gossip/theory.hpp"

namespace {

int cmd_graph(const gossip::GraphSpec& spec, const std::string& out) {
  const gossip::Graph g = spec.build();
  gossip::save_edge_list(out, g);
  std::cerr << "wrote " << g.num_nodes() << " nodes, " << g.num_edges() << " edges to " << out << '\n';
  return 0;
}

int cmd_rates(const std::string& graph_path, const std::string& sketch, std::size_t tau, std::size_t mc_samples,
              std::uint64_t seed, std::optional<double> omega, std::optional<double> beta) {
  const gossip::Graph g = gossip::load_edge_list(graph_path);
  const auto dist = sketch == "rk" ? gossip::SketchDistribution::uniform_rows(g.num_edges())
                                   : gossip::SketchDistribution::uniform_blocks(g.num_edges(), tau);
  gossip::ExpectationOptions opts;
  opts.mc_samples = mc_samples;
  opts.seed = seed;
  const gossip::WEstimate est = gossip::expected_W_ac(g, dist, opts);
  const gossip::Spectrum spec = gossip::extreme_spectrum(est.W);

  // Without an explicit (omega, beta) report the unit-step accelerated preset.
  const auto presets = gossip::accelerated_presets(spec.lambda_min_plus, spec.lambda_max);
  const double w = omega.value_or(presets[0].omega);
  const double b = beta.value_or(omega ? 0.0 : presets[0].beta);
  gossip::write_rate_report(std::cout, gossip::make_rate_report(spec, w, b, est.approximate));
  return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::string> output) {
  gossip::ExperimentConfig cfg = gossip::load_experiment_config(config_path);
  if (output) cfg.output = *output;
  const gossip::TraceTable table = gossip::run_experiment(cfg);
  gossip::write_outputs(table, cfg.output);
  std::cerr << "wrote " << cfg.output << " and " << gossip::aggregate_path(cfg.output) << '\n';
  return 0;
}

int cmd_compare(const std::string& config_path) {
  const gossip::ComparisonConfig cfg = gossip::load_comparison_config(config_path);
  const gossip::Graph g = cfg.graph.build();
  for (const auto& exp : gossip::comparison_suite(cfg)) {
    const gossip::TraceTable table = gossip::run_experiment(exp, g);
    gossip::write_outputs(table, exp.output);
    std::cerr << "wrote " << exp.output << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized gossip with heavy-ball momentum"};
  app.require_subcommand(1);

  gossip::GraphSpec graph_spec;
  std::string graph_out;
  auto* graph = app.add_subcommand("graph", "Generate a network and write it as an edge list");
  graph->add_option("--family", graph_spec.family, "cycle, grid or rgg")
      ->required()
      ->check(CLI::IsMember({"cycle", "grid", "rgg"}));
  graph->add_option("--n", graph_spec.n, "Node count (cycle, rgg)");
  graph->add_option("--rows", graph_spec.rows, "Grid rows");
  graph->add_option("--cols", graph_spec.cols, "Grid columns");
  graph->add_option("--seed", graph_spec.seed, "RNG seed (rgg)");
  graph->add_option("--out", graph_out, "Output edge-list file")->required();

  std::string rates_graph, sketch = "rk";
  std::size_t tau = 1, mc_samples = 10000;
  std::uint64_t rates_seed = 0;
  std::optional<double> omega, beta;
  auto* rates = app.add_subcommand("rates", "Print spectral quantities and rate constants");
  rates->add_option("--graph", rates_graph, "Edge-list file")->required()->check(CLI::ExistingFile);
  rates->add_option("--sketch", sketch, "rk or block")->check(CLI::IsMember({"rk", "block"}));
  rates->add_option("--tau", tau, "Block size for --sketch block");
  rates->add_option("--mc-samples", mc_samples, "Monte Carlo subsets when exact enumeration is too large");
  rates->add_option("--seed", rates_seed, "Monte Carlo seed");
  rates->add_option("--omega", omega, "Relaxation");
  rates->add_option("--beta", beta, "Momentum");

  std::string run_config;
  std::optional<std::string> run_output;
  auto* run = app.add_subcommand("run", "Run an experiment config and write its trace CSVs");
  run->add_option("--config", run_config, "Experiment config (JSON)")->required();
  run->add_option("--out", run_output, "Override the config's output path");

  std::string compare_config;
  auto* compare = app.add_subcommand("compare", "Run the momentum, shift-register and block comparisons");
  compare->add_option("--config", compare_config, "Comparison config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (graph->parsed()) return cmd_graph(graph_spec, graph_out);
    if (rates->parsed()) return cmd_rates(rates_graph, sketch, tau, mc_samples, rates_seed, omega, beta);
    if (run->parsed()) return cmd_run(run_config, run_output);
    if (compare->parsed()) return cmd_compare(compare_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
