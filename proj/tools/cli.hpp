#pragma once

// Command-line driver: argument parsing into a RunConfig and the `run` entry point.

#include <thermoflow/thermoflow.hpp>
#include <thermoflow/oracles.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermoflow::cli {

/// Bad flags or inputs that are not a library error; exit status 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string graph_source;
  std::optional<NodeId> source;
  std::optional<NodeId> target;
  double beta = 0.0;
  std::string betas;  // "lo:hi:count" (log spaced) or a comma list
  double p = 1.0;
  bool allow_sublinear = false;
  std::string out;          // primary output; stdout when empty
  std::string dot;          // DOT of the simple flow
  std::string dot_net;      // DOT of the net flow
  std::string diagnostics;  // flow: diagnostics JSON
  std::string nodes;        // centrality: node table
  std::string observed;     // calibrate: observed flow CSV
  std::optional<double> observed_time;
  std::uint64_t seed = 1;
  std::size_t walks = 20000;
  unsigned threads = 1;
  bool describe = false;
};

struct ResolvedGraph {
  std::string name;
  Graph graph;
  std::optional<NodeId> default_source;
  std::optional<NodeId> default_target;
  std::string description;
};

inline std::size_t parse_count(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long value = std::stoul(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + ": '" + text + "'");
  }
}

/// Builtins: A, B, C, grid:m (or grid:mxm), path:n, cliques:k; anything else is a file.
inline ResolvedGraph resolve_graph(const std::string& source) {
  auto from_builtin = [](BuiltinGraph b) {
    return ResolvedGraph{b.name, std::move(b.graph), b.source, b.target, std::move(b.description)};
  };
  if (source == "A") return from_builtin(builtin_A());
  if (source == "B") return from_builtin(builtin_B());
  if (source == "C") return from_builtin(builtin_C());
  const auto colon = source.find(':');
  if (colon != std::string::npos) {
    const std::string kind = source.substr(0, colon);
    std::string arg = source.substr(colon + 1);
    if (kind == "grid") {
      const auto x = arg.find('x');
      if (x != std::string::npos) {
        if (arg.substr(0, x) != arg.substr(x + 1)) throw ConfigError("only square grids are supported");
        arg = arg.substr(0, x);
      }
      const std::size_t m = parse_count(arg, "grid size");
      return {source, grid_graph(m), 0, m * m - 1,
              std::to_string(m) + "x" + std::to_string(m) + " grid, node id = " + std::to_string(m) +
                  "*row + col; default s = 0, t = " + std::to_string(m * m - 1)};
    }
    if (kind == "path") {
      const std::size_t n = parse_count(arg, "path length");
      return {source, path_graph(n), 0, n - 1,
              "path 0-...-" + std::to_string(n - 1) + "; default s = 0, t = " + std::to_string(n - 1)};
    }
    if (kind == "cliques") {
      const std::size_t k = parse_count(arg, "clique size");
      return {source, two_cliques(k), 2, k + 2,
              "two K" + std::to_string(k) + " (nodes 0-" + std::to_string(k - 1) + ", " +
                  std::to_string(k) + "-" + std::to_string(2 * k - 1) + ") joined by 0-" +
                  std::to_string(k) + " and 1-" + std::to_string(k + 1) + "; default s = 2, t = " +
                  std::to_string(k + 2)};
    }
    throw ConfigError("unknown builtin graph '" + source + "'");
  }
  return {source, io::load_graph(source), std::nullopt, std::nullopt, "graph file " + source};
}

/// "lo:hi:count" gives a log-spaced grid; otherwise a comma-separated list.
inline std::vector<double> parse_beta_grid(const std::string& text) {
  std::vector<double> grid;
  try {
    if (text.find(':') != std::string::npos) {
      std::stringstream in(text);
      std::string lo, hi, count;
      std::getline(in, lo, ':');
      std::getline(in, hi, ':');
      std::getline(in, count, ':');
      grid = log_grid(std::stod(lo), std::stod(hi), parse_count(count, "grid size"));
    } else {
      std::stringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) grid.push_back(std::stod(item));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad beta grid '" + text + "'");
  }
  if (grid.empty()) throw ConfigError("empty beta grid");
  return grid;
}

class OutputFile {
public:
  explicit OutputFile(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

private:
  std::ofstream file_;
  std::ostream* stream_;
};

namespace detail {

inline std::pair<NodeId, NodeId> endpoints(const RunConfig& cfg, const ResolvedGraph& rg) {
  const auto s = cfg.source ? cfg.source : rg.default_source;
  const auto t = cfg.target ? cfg.target : rg.default_target;
  if (!s || !t) throw ConfigError(cfg.command + " needs --s and --t");
  if (*s >= rg.graph.size() || *t >= rg.graph.size()) throw ConfigError("--s/--t out of range");
  if (*s == *t) throw ConfigError("--s and --t must differ");
  return {*s, *t};
}

inline void describe(const ResolvedGraph& rg, std::ostream& out) {
  out << rg.name << ": " << rg.description << "\n";
  out << "node,label,degree\n";
  const Eigen::VectorXd deg = degrees(rg.graph);
  for (NodeId i = 0; i < rg.graph.size(); ++i)
    out << i << ',' << rg.graph.label(i) << ',' << deg(static_cast<Eigen::Index>(i)) << '\n';
}

inline int run_flow(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  const auto [s, t] = endpoints(cfg, rg);
  const ProblemSpec spec{s, t, cfg.beta, cfg.p, cfg.allow_sublinear};
  const FlowSolution sol = solve_flow(rg.graph, spec);
  OutputFile csv(cfg.out, out);
  io::write_flow_csv(csv.stream(), rg.graph, sol.flow);
  if (!cfg.dot.empty()) {
    OutputFile dot(cfg.dot, out);
    io::write_dot(dot.stream(), rg.graph, sol.flow.x, "flow", s, t);
  }
  if (!cfg.dot_net.empty()) {
    OutputFile dot(cfg.dot_net, out);
    io::write_dot(dot.stream(), rg.graph, net_flow(sol.flow).nu, "net_flow", s, t);
  }
  if (!cfg.diagnostics.empty()) {
    OutputFile json(cfg.diagnostics, out);
    json.stream() << io::diagnostics_to_json(sol.flow, sol.diagnostics).dump(2) << '\n';
  }
  return 0;
}

inline int run_centrality(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  if (cfg.source || cfg.target) throw ConfigError("centrality averages over all pairs; drop --s/--t");
  CentralityOptions opts;
  opts.threads = cfg.threads;
  const CentralityTable table = mean_flow_centrality(rg.graph, cfg.beta, cfg.p, opts);
  OutputFile edges(cfg.out, out);
  io::write_edge_table(edges.stream(), rg.graph, table);
  if (!cfg.nodes.empty()) {
    OutputFile nodes(cfg.nodes, out);
    io::write_node_table(nodes.stream(), table);
  }
  if (!cfg.dot.empty()) {
    OutputFile dot(cfg.dot, out);
    io::write_dot(dot.stream(), rg.graph, table.mean_flow, "mean_flow");
  }
  if (!cfg.dot_net.empty()) {
    OutputFile dot(cfg.dot_net, out);
    io::write_dot(dot.stream(), rg.graph, table.mean_net_flow, "mean_net_flow");
  }
  return 0;
}

inline int run_abacus(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  const auto [s, t] = endpoints(cfg, rg);
  const auto grid = parse_beta_grid(cfg.betas.empty() ? "0.001:50:30" : cfg.betas);
  OutputFile csv(cfg.out, out);
  io::write_abacus_csv(csv.stream(), build_abacus(rg.graph, s, t, grid, rg.name));
  return 0;
}

inline int run_calibrate(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  const auto [s, t] = endpoints(cfg, rg);
  OutputFile report(cfg.out, out);
  if (cfg.observed_time) {
    const auto grid = parse_beta_grid(cfg.betas.empty() ? "0.001:50:30" : cfg.betas);
    const double temperature =
        calibrate_from_total_time(build_abacus(rg.graph, s, t, grid, rg.name), *cfg.observed_time);
    report.stream() << nlohmann::json{{"T_hat", temperature}, {"beta_hat", 1.0 / temperature},
                                      {"method", "total_time"}}.dump(2)
                    << '\n';
    return 0;
  }
  if (cfg.observed.empty()) throw ConfigError("calibrate needs --observed or --observed-time");
  std::ifstream in(cfg.observed);
  if (!in) throw ConfigError("cannot open " + cfg.observed);
  const Flow observed = io::read_flow_csv(in, rg.graph.size(), s, t);
  report.stream() << io::calibration_to_json(calibrate_from_energy(rg.graph, s, t, observed)).dump(2)
                  << '\n';
  return 0;
}

inline int run_correlate(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  const auto grid = parse_beta_grid(cfg.betas.empty() ? "0.001:50:40" : cfg.betas);
  CentralityOptions opts;
  opts.threads = cfg.threads;
  OutputFile csv(cfg.out, out);
  io::write_correlation_csv(csv.stream(), centrality_correlation(rg.graph, grid, opts));
  return 0;
}

inline int run_generate(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  OutputFile json(cfg.out, out);
  json.stream() << io::graph_to_json(rg.graph).dump(2) << '\n';
  return 0;
}

// Oracle comparisons for one (s, t, beta); prints one line per check.
inline int run_crosscheck(const RunConfig& cfg, const ResolvedGraph& rg, std::ostream& out) {
  const auto [s, t] = endpoints(cfg, rg);
  const Graph& g = rg.graph;
  bool all = true;
  auto report = [&](const std::string& name, double error, double tolerance) {
    const bool ok = error <= tolerance;
    all = all && ok;
    out << (ok ? "PASS " : "FAIL ") << name << " error=" << io::format_number(error)
        << " tolerance=" << io::format_number(tolerance) << '\n';
  };

  const FlowSolution rw = solve_linear_flow(g, {s, t, 0.0});
  report("random_walk_vs_absorbing_chain",
         (rw.flow.x - oracles::absorbing_chain_visits(g, s, t)).cwiseAbs().maxCoeff(), 1e-9);

  const FlowSolution sol = solve_linear_flow(g, {s, t, cfg.beta});
  report("conservation", conservation_residual(sol.flow), 1e-10);
  report("free_energy_identity", verify_min_free_energy_identity(g, {s, t, cfg.beta}, sol.flow, sol.diagnostics),
         1e-8 * (1.0 + std::abs(sol.diagnostics.free_energy)));
  report("energy_above_dijkstra",
         std::max(0.0, oracles::dijkstra_cost(g, s, t) - sol.diagnostics.energy), 1e-9);

  const auto walks = oracles::simulate_killed_walks(g, {s, t, cfg.beta}, cfg.walks, cfg.seed);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sol.flow.x.rows(); ++i)
    for (Eigen::Index j = 0; j < sol.flow.x.cols(); ++j) {
      const double se = walks.standard_errors(i, j);
      const double diff = std::abs(walks.edge_counts(i, j) - sol.flow.x(i, j));
      if (se > 0.0) worst = std::max(worst, diff / se);
    }
  report("monte_carlo_edges_in_standard_errors", worst, 4.0);
  report("monte_carlo_survival_in_standard_errors",
         std::abs(walks.survival_rate - std::exp(sol.diagnostics.log_z_source)) /
             std::max(walks.survival_standard_error, 1.0 / static_cast<double>(walks.n_walks)),
         4.0);
  return all ? 0 : 1;
}

}  // namespace detail

/// Executes one command. Library errors print `ERROR <CODE>: message` and return 1;
/// configuration errors return 2.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ResolvedGraph rg = resolve_graph(cfg.graph_source);
    if (cfg.describe) {
      detail::describe(rg, out);
      return 0;
    }
    if (cfg.command == "flow") return detail::run_flow(cfg, rg, out);
    if (cfg.command == "centrality") return detail::run_centrality(cfg, rg, out);
    if (cfg.command == "abacus") return detail::run_abacus(cfg, rg, out);
    if (cfg.command == "calibrate") return detail::run_calibrate(cfg, rg, out);
    if (cfg.command == "correlate") return detail::run_correlate(cfg, rg, out);
    if (cfg.command == "generate") return detail::run_generate(cfg, rg, out);
    if (cfg.command == "crosscheck") return detail::run_crosscheck(cfg, rg, out);
    throw ConfigError("unknown command '" + cfg.command + "'");
  } catch (const ConfigError& e) {
    err << "ERROR CONFIG: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "ERROR " << code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
}

/// Parses argv and runs. Exit status as for `run`.
inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Temperature-controlled st-flows between random walks and shortest paths"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph_source, "A, B, C, grid:m, path:n, cliques:k or a .json/.csv file")
        ->required();
    sub->add_flag("--describe", cfg.describe, "List node ids of the graph and exit");
    sub->add_option("--out", cfg.out, "Primary output file (default stdout)");
  };
  auto add_endpoints = [&cfg](CLI::App* sub) {
    sub->add_option("--s", cfg.source, "Source node");
    sub->add_option("--t", cfg.target, "Target node");
  };
  auto add_beta = [&cfg](CLI::App* sub) {
    sub->add_option("--beta", cfg.beta, "Inverse temperature")->check(CLI::NonNegativeNumber);
  };
  auto add_grid = [&cfg](CLI::App* sub) {
    sub->add_option("--betas", cfg.betas, "Beta grid: lo:hi:count (log spaced) or a comma list");
  };

  auto* flow = app.add_subcommand("flow", "Optimal st-flow: edge CSV i,j,x,net");
  add_common(flow);
  add_endpoints(flow);
  add_beta(flow);
  flow->add_option("--p", cfg.p, "Cost exponent, phi(x) = x^p");
  flow->add_flag("--allow-sublinear", cfg.allow_sublinear, "Accept 0 < p < 1");
  flow->add_option("--dot", cfg.dot, "DOT file of the simple flow");
  flow->add_option("--dot-net", cfg.dot_net, "DOT file of the net flow");
  flow->add_option("--diagnostics", cfg.diagnostics, "Diagnostics JSON file");

  auto* centrality = app.add_subcommand("centrality", "All-pairs mean flow and mean net flow tables");
  add_common(centrality);
  add_endpoints(centrality);
  add_beta(centrality);
  centrality->add_option("--p", cfg.p, "Cost exponent, phi(x) = x^p");
  centrality->add_option("--nodes", cfg.nodes, "Node table CSV");
  centrality->add_option("--dot", cfg.dot, "DOT file of the mean flow");
  centrality->add_option("--dot-net", cfg.dot_net, "DOT file of the mean net flow");
  centrality->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* abacus = app.add_subcommand("abacus", "Total time x_..(beta): CSV beta,total_time");
  add_common(abacus);
  add_endpoints(abacus);
  add_grid(abacus);

  auto* calibrate = app.add_subcommand("calibrate", "Estimate the temperature of an observed flow");
  add_common(calibrate);
  add_endpoints(calibrate);
  add_grid(calibrate);
  calibrate->add_option("--observed", cfg.observed, "Observed flow CSV (i,j,x)");
  calibrate->add_option("--observed-time", cfg.observed_time, "Observed total time (abacus reading)");

  auto* correlate = app.add_subcommand("correlate", "Correlation sweep of mean net flow node centrality");
  add_common(correlate);
  add_grid(correlate);
  correlate->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* generate = app.add_subcommand("generate", "Write a graph as JSON");
  add_common(generate);

  auto* crosscheck = app.add_subcommand("crosscheck", "Compare the solver with reference computations");
  crosscheck->group("");
  add_common(crosscheck);
  add_endpoints(crosscheck);
  add_beta(crosscheck);
  crosscheck->add_option("--walks", cfg.walks, "Monte Carlo walks");
  crosscheck->add_option("--seed", cfg.seed, "Monte Carlo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "ERROR CONFIG: " << e.what() << '\n';
    return 2;
  }
  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  return run(cfg, out, err);
}

}  // namespace thermoflow::cli
