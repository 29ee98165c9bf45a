#include "gossip/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gossip/error.hpp"
#include "gossip/graph_io.hpp"
#include "gossip/rng.hpp"

namespace gossip {

namespace {

using json = nlohmann::json;

constexpr std::string_view kInitialStream = "__initial__";

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw InvalidParameter(std::string(where) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidParameter(std::string(where) + ": unknown key `" + key + "`");
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("config key `") + key + "`: " + e.what());
  }
}

GraphSpec parse_graph_spec(const json& j) {
  require_keys(j, {"family", "n", "rows", "cols", "seed", "path"}, "graph");
  GraphSpec g;
  g.family = get_or<std::string>(j, "family", "cycle");
  g.n = get_or<int>(j, "n", 0);
  g.rows = get_or<int>(j, "rows", 0);
  g.cols = get_or<int>(j, "cols", 0);
  g.seed = get_or<std::uint64_t>(j, "seed", 0);
  g.path = get_or<std::string>(j, "path", "");
  return g;
}

LabeledProtocol parse_protocol(const json& j) {
  require_keys(j, {"label", "kind", "omega", "beta", "tau", "b_diag", "edge_probabilities"}, "protocol");
  LabeledProtocol p;
  p.label = get_or<std::string>(j, "label", "");
  p.config.kind = parse_protocol_kind(get_or<std::string>(j, "kind", "baseline"));
  if (p.label.empty()) p.label = std::string(to_string(p.config.kind));
  p.config.omega = get_or<double>(j, "omega", 1.0);
  p.config.beta = get_or<double>(j, "beta", 0.0);
  p.config.tau = get_or<std::size_t>(j, "tau", 1);
  if (j.contains("b_diag")) {
    const auto b = get_or<std::vector<double>>(j, "b_diag", {});
    p.config.b_diag = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  if (j.contains("edge_probabilities")) {
    p.config.edge_dist = SketchDistribution::row_probabilities(get_or<std::vector<double>>(j, "edge_probabilities", {}));
  }
  return p;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParameter(std::string("config is not valid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_param(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Graph GraphSpec::build() const {
  if (family == "cycle") return make_cycle(n);
  if (family == "grid") return make_grid2d(rows, cols);
  if (family == "rgg") return make_rgg(n, seed);
  if (family == "file") return load_edge_list(path);
  throw InvalidParameter("unknown graph family `" + family + "`");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  if (iters < 1) throw InvalidParameter("iters must be >= 1");
  if (threads < 1) throw InvalidParameter("threads must be >= 1");
  if (protocols.empty()) throw InvalidParameter("experiment needs at least one protocol");
  std::set<std::string> seen;
  for (const auto& p : protocols) {
    if (p.label.empty()) throw InvalidParameter("protocol label is empty");
    if (p.label == kInitialStream) throw InvalidParameter("protocol label `" + p.label + "` is reserved");
    if (p.label.find_first_of(",\"\n\r") != std::string::npos) {
      throw InvalidParameter("protocol label `" + p.label + "` contains a comma, quote or newline");
    }
    if (!seen.insert(p.label).second) throw InvalidParameter("duplicate protocol label `" + p.label + "`");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  require_keys(j, {"graph", "protocols", "trials", "iters", "master_seed", "output", "dump_states", "threads"},
               "experiment");
  ExperimentConfig cfg;
  if (!j.contains("graph")) throw InvalidParameter("experiment: missing `graph`");
  cfg.graph = parse_graph_spec(j.at("graph"));
  if (!j.contains("protocols") || !j.at("protocols").is_array()) {
    throw InvalidParameter("experiment: `protocols` must be an array");
  }
  for (const auto& p : j.at("protocols")) cfg.protocols.push_back(parse_protocol(p));
  cfg.trials = get_or<int>(j, "trials", 1);
  cfg.iters = get_or<std::int64_t>(j, "iters", 1);
  cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", 0);
  cfg.output = get_or<std::string>(j, "output", "");
  cfg.dump_states = get_or<bool>(j, "dump_states", false);
  cfg.threads = get_or<int>(j, "threads", 1);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) { return parse_experiment_config(read_file(path)); }

Eigen::VectorXd initial_values(std::uint64_t master_seed, int trial, int n) {
  Rng rng = Rng::derive(master_seed, static_cast<std::uint64_t>(trial), kInitialStream);
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = rng.normal();
  return c;
}

TraceTable run_experiment(const ExperimentConfig& cfg, const Graph& g) {
  cfg.validate();
  for (const auto& p : cfg.protocols) p.config.validate(g);

  const std::size_t P = cfg.protocols.size();
  TraceTable table;
  table.trials = cfg.trials;
  table.iters = cfg.iters;
  for (const auto& p : cfg.protocols) table.labels.push_back(p.label);
  table.series.assign(P, std::vector<std::vector<double>>(cfg.trials));
  if (cfg.dump_states) table.states.assign(P, std::vector<std::vector<Eigen::VectorXd>>(cfg.trials));

  auto run_trial = [&](int t) {
    const Eigen::VectorXd c = initial_values(cfg.master_seed, t, g.num_nodes());
    for (std::size_t p = 0; p < P; ++p) {
      const auto& proto = cfg.protocols[p];
      Rng rng = Rng::derive(cfg.master_seed, static_cast<std::uint64_t>(t), proto.label);
      ProtocolTrace trace = run_protocol(proto.config, g, c, cfg.iters, rng, cfg.dump_states);
      table.series[p][t] = std::move(trace.rel_err);
      if (cfg.dump_states) {
        auto& out = table.states[p][t];
        out.reserve(trace.states.size());
        for (const auto& st : trace.states) {
          out.push_back(proto.config.kind == ProtocolKind::LazyMRK ? lazy_materialize(st, proto.config.beta)
                                                                   : st.values);
        }
      }
    }
  };

  // Every trial owns its streams and output slots, so the thread count does
  // not change the result.
  const int workers = std::min(cfg.threads, cfg.trials);
  if (workers <= 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next++; t < cfg.trials; t = next++) {
          try {
            run_trial(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  table.mean.assign(P, std::vector<double>(static_cast<std::size_t>(cfg.iters) + 1, 0.0));
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t k = 0; k <= static_cast<std::size_t>(cfg.iters); ++k) {
      double sum = 0.0;
      for (int t = 0; t < cfg.trials; ++t) sum += table.series[p][t][k];
      table.mean[p][k] = sum / cfg.trials;
    }
  }
  return table;
}

TraceTable run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, cfg.graph.build()); }

void write_trace_csv(std::ostream& out, const TraceTable& table) {
  out << std::setprecision(17) << "label,trial,iter,rel_err\n";
  for (std::size_t p = 0; p < table.labels.size(); ++p) {
    for (int t = 0; t < table.trials; ++t) {
      const auto& s = table.series[p][t];
      for (std::size_t k = 0; k < s.size(); ++k) out << table.labels[p] << ',' << t << ',' << k << ',' << s[k] << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const TraceTable& table) {
  out << std::setprecision(17) << "label,iter,mean_rel_err\n";
  for (std::size_t p = 0; p < table.labels.size(); ++p) {
    for (std::size_t k = 0; k < table.mean[p].size(); ++k) out << table.labels[p] << ',' << k << ',' << table.mean[p][k] << '\n';
  }
}

void write_states_csv(std::ostream& out, const TraceTable& table) {
  out << std::setprecision(17) << "label,trial,iter,node,value\n";
  for (std::size_t p = 0; p < table.states.size(); ++p) {
    for (std::size_t t = 0; t < table.states[p].size(); ++t) {
      const auto& snaps = table.states[p][t];
      for (std::size_t k = 0; k < snaps.size(); ++k) {
        for (Eigen::Index i = 0; i < snaps[k].size(); ++i) {
          out << table.labels[p] << ',' << t << ',' << k << ',' << i << ',' << snaps[k][i] << '\n';
        }
      }
    }
  }
}

std::string aggregate_path(const std::string& output) {
  if (ends_with(output, ".csv")) return output.substr(0, output.size() - 4) + ".agg.csv";
  return output + ".agg.csv";
}

std::string states_path(const std::string& output) {
  if (ends_with(output, ".csv")) return output.substr(0, output.size() - 4) + ".states.csv";
  return output + ".states.csv";
}

void write_outputs(const TraceTable& table, const std::string& output) {
  if (output.empty()) throw InvalidParameter("no output path given");
  std::vector<std::pair<std::string, std::string>> staged;  // temp -> final
  auto stage = [&](const std::string& final_path, auto&& writer) {
    const std::string tmp = final_path + ".tmp";
    std::ofstream out(tmp);
    if (!out) throw InvalidParameter("cannot open " + tmp + " for writing");
    writer(out);
    out.close();
    if (!out) throw InvalidParameter("failed writing " + tmp);
    staged.emplace_back(tmp, final_path);
  };
  try {
    stage(output, [&](std::ostream& o) { write_trace_csv(o, table); });
    stage(aggregate_path(output), [&](std::ostream& o) { write_aggregate_csv(o, table); });
    if (!table.states.empty()) stage(states_path(output), [&](std::ostream& o) { write_states_csv(o, table); });
  } catch (...) {
    for (const auto& [tmp, _] : staged) std::filesystem::remove(tmp);
    throw;
  }
  for (const auto& [tmp, final_path] : staged) std::filesystem::rename(tmp, final_path);
}

ComparisonConfig parse_comparison_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  require_keys(j, {"graph", "trials", "iters", "master_seed", "output", "betas", "shift_omegas", "tau", "threads"},
               "comparison");
  ComparisonConfig cfg;
  if (!j.contains("graph")) throw InvalidParameter("comparison: missing `graph`");
  cfg.graph = parse_graph_spec(j.at("graph"));
  cfg.trials = get_or<int>(j, "trials", cfg.trials);
  cfg.iters = get_or<std::int64_t>(j, "iters", cfg.iters);
  cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", cfg.master_seed);
  cfg.output_prefix = get_or<std::string>(j, "output", cfg.output_prefix);
  cfg.betas = get_or<std::vector<double>>(j, "betas", cfg.betas);
  cfg.shift_omegas = get_or<std::vector<double>>(j, "shift_omegas", cfg.shift_omegas);
  cfg.tau = get_or<std::size_t>(j, "tau", cfg.tau);
  cfg.threads = get_or<int>(j, "threads", cfg.threads);
  return cfg;
}

ComparisonConfig load_comparison_config(const std::string& path) { return parse_comparison_config(read_file(path)); }

std::vector<ExperimentConfig> comparison_suite(const ComparisonConfig& cfg) {
  auto base = [&](const std::string& suffix) {
    ExperimentConfig e;
    e.graph = cfg.graph;
    e.trials = cfg.trials;
    e.iters = cfg.iters;
    e.master_seed = cfg.master_seed;
    e.threads = cfg.threads;
    e.output = cfg.output_prefix + "." + suffix + ".csv";
    e.protocols.push_back({"baseline", ProtocolConfig{}});
    return e;
  };
  auto mrk = [](double omega, double beta) {
    ProtocolConfig p;
    p.kind = ProtocolKind::MRK;
    p.omega = omega;
    p.beta = beta;
    return p;
  };

  ExperimentConfig momentum = base("momentum");
  for (double b : cfg.betas) momentum.protocols.push_back({"mrk beta=" + format_param(b), mrk(1.0, b)});

  ExperimentConfig shift = base("shift");
  for (double w : cfg.shift_omegas) {
    shift.protocols.push_back({"mrk omega=" + format_param(w) + " beta=" + format_param(w - 1.0), mrk(w, w - 1.0)});
    ProtocolConfig sr;
    sr.kind = ProtocolKind::ShiftRegister;
    sr.omega = w;
    shift.protocols.push_back({"shift-register omega=" + format_param(w), sr});
  }

  ExperimentConfig block = base("block");
  for (double b : cfg.betas) {
    ProtocolConfig p;
    p.kind = ProtocolKind::MRBK;
    p.omega = 1.0;
    p.beta = b;
    p.tau = cfg.tau;
    block.protocols.push_back({"mrbk tau=" + std::to_string(cfg.tau) + " beta=" + format_param(b), p});
  }

  for (const auto* e : {&momentum, &shift, &block}) e->validate();
  return {momentum, shift, block};
}

}  // namespace gossip
