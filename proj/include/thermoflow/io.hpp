#pragma once

#include <thermoflow/calibration.hpp>
#include <thermoflow/centrality.hpp>
#include <thermoflow/error.hpp>
#include <thermoflow/flow.hpp>
#include <thermoflow/graph.hpp>
#include <thermoflow/solver.hpp>

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace thermoflow::io {

/// Shortest representation that parses back to the same double.
inline std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

// --- graphs ----------------------------------------------------------------

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json doc;
  doc["n"] = g.size();
  nlohmann::json edges = nlohmann::json::array();
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = 0; j < g.size(); ++j)
      if (g.has_arc(i, j)) edges.push_back({{"from", i}, {"to", j}, {"w", g.w(i, j)}, {"r", g.r(i, j)}});
  doc["edges"] = std::move(edges);
  if (!g.labels().empty()) doc["labels"] = g.labels();
  return doc;
}

inline Graph graph_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size, size);
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(size, size, kNoArc);
    for (const auto& edge : doc.at("edges")) {
      const auto i = edge.at("from").get<std::size_t>();
      const auto j = edge.at("to").get<std::size_t>();
      if (i >= n || j >= n) throw Error(ErrorCode::ParseError, "edge endpoint out of range");
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = edge.at("w").get<double>();
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = edge.at("r").get<double>();
    }
    std::vector<std::string> labels;
    if (doc.contains("labels")) labels = doc.at("labels").get<std::vector<std::string>>();
    return validate_graph(w, r, std::move(labels));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph JSON: ") + e.what());
  }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) {
    field.erase(0, field.find_first_not_of(" \t\r"));
    field.erase(field.find_last_not_of(" \t\r") + 1);
    fields.push_back(field);
  }
  return fields;
}

inline double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, context + ": not a number: '" + text + "'");
  }
}

inline std::size_t parse_index(const std::string& text, const std::string& context) {
  const double value = parse_double(text, context);
  if (value < 0.0 || value != std::floor(value))
    throw Error(ErrorCode::ParseError, context + ": not a node index: '" + text + "'");
  return static_cast<std::size_t>(value);
}

inline bool is_header(const std::vector<std::string>& fields) {
  return !fields.empty() && !fields[0].empty() &&
         !(std::isdigit(static_cast<unsigned char>(fields[0][0])) || fields[0][0] == '-' ||
           fields[0][0] == '+' || fields[0][0] == '.');
}

}  // namespace detail

/// Undirected `i,j,r` edge list (optional header) under the simple symmetric model.
inline Graph graph_from_edge_csv(std::istream& in) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_csv(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    if (line_no == 1 && detail::is_header(fields)) continue;
    const std::string context = "edge list line " + std::to_string(line_no);
    if (fields.size() != 3) throw Error(ErrorCode::ParseError, context + ": expected i,j,r");
    const auto i = detail::parse_index(fields[0], context);
    const auto j = detail::parse_index(fields[1], context);
    edges.emplace_back(i, j, detail::parse_double(fields[2], context));
    n = std::max({n, i + 1, j + 1});
  }
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(size, size);
  Eigen::MatrixXd r = Eigen::MatrixXd::Ones(size, size);
  for (const auto& [i, j, resistance] : edges) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    if (adjacency(a, b) != 0.0 && r(a, b) != resistance)
      throw Error(ErrorCode::ParseError, "edge " + std::to_string(i) + "-" + std::to_string(j) +
                                             " listed with two resistances");
    adjacency(a, b) = adjacency(b, a) = 1.0;
    r(a, b) = r(b, a) = resistance;
  }
  return simple_symmetric_graph(adjacency, r);
}

/// Loads a graph file; `.csv` is read as an edge list, anything else as JSON.
inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return graph_from_edge_csv(in);
  try {
    return graph_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

// --- flows -----------------------------------------------------------------

/// `i,j,x,net`, one row per directed arc of the graph's support.
inline void write_flow_csv(std::ostream& out, const Graph& g, const Flow& f) {
  out << "i,j,x,net\n";
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = 0; j < g.size(); ++j)
      if (g.has_arc(i, j))
        out << i << ',' << j << ',' << format_number(f(i, j)) << ','
            << format_number(std::abs(f(i, j) - f(j, i))) << '\n';
}

/// Reads `i,j,x[,...]` rows into a flow for the given endpoints.
inline Flow read_flow_csv(std::istream& in, std::size_t n, NodeId s, NodeId t) {
  const auto size = static_cast<Eigen::Index>(n);
  Flow f{Eigen::MatrixXd::Zero(size, size), s, t, 1.0};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_csv(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    if (line_no == 1 && detail::is_header(fields)) continue;
    const std::string context = "flow line " + std::to_string(line_no);
    if (fields.size() < 3) throw Error(ErrorCode::ParseError, context + ": expected i,j,x");
    const auto i = detail::parse_index(fields[0], context);
    const auto j = detail::parse_index(fields[1], context);
    if (i >= n || j >= n) throw Error(ErrorCode::ParseError, context + ": node out of range");
    f.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = detail::parse_double(fields[2], context);
  }
  return f;
}

inline nlohmann::json numbers(const Eigen::VectorXd& v) {
  nlohmann::json array = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v(i));
  return array;
}

/// `{"z": [...], "lambda": [...], "U":, "G":, "F":, "total_time":}`; z and lambda have one
/// entry per node (z_t = 1).
inline nlohmann::json diagnostics_to_json(const Flow& f, const SolverDiagnostics& d) {
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
  for (std::size_t k = 0; k < d.nodes.size(); ++k)
    z(static_cast<Eigen::Index>(d.nodes[k])) = d.z(static_cast<Eigen::Index>(k));
  return {{"z", numbers(z)},
          {"lambda", numbers(d.lambda)},
          {"U", d.energy},
          {"G", d.entropy},
          {"F", d.free_energy},
          {"total_time", f.total_time()}};
}

// --- centrality, sweeps, calibration --------------------------------------

inline void write_edge_table(std::ostream& out, const Graph& g, const CentralityTable& table) {
  out << "i,j,mean_flow,rel_mean_flow,mean_net_flow\n";
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = 0; j < g.size(); ++j) {
      if (!g.has_arc(i, j)) continue;
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      out << i << ',' << j << ',' << format_number(table.mean_flow(a, b)) << ','
          << format_number(table.rel_mean_flow(a, b)) << ',' << format_number(table.mean_net_flow(a, b))
          << '\n';
    }
}

inline void write_node_table(std::ostream& out, const CentralityTable& table) {
  out << "i,mean_flow,rel,mean_net_flow,closeness_out,closeness_in\n";
  for (Eigen::Index i = 0; i < table.node_mean_flow.size(); ++i)
    out << i << ',' << format_number(table.node_mean_flow(i)) << ','
        << format_number(table.node_rel_mean_flow(i)) << ',' << format_number(table.node_mean_net_flow(i))
        << ',' << format_number(table.closeness_out(i)) << ',' << format_number(table.closeness_in(i))
        << '\n';
}

inline void write_correlation_csv(std::ostream& out, const CorrelationSweep& sweep) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << "beta,corr0,corr_inf,sum\n";
  for (const auto& p : sweep.points)
    out << format_number(p.beta) << ',' << format_number(p.corr_low.value_or(nan)) << ','
        << format_number(p.corr_high.value_or(nan)) << ',' << format_number(p.sum().value_or(nan)) << '\n';
}

inline void write_abacus_csv(std::ostream& out, const AbacusCurve& curve) {
  out << "beta,total_time\n";
  for (std::size_t k = 0; k < curve.betas.size(); ++k)
    out << format_number(curve.betas[k]) << ',' << format_number(curve.total_times[k]) << '\n';
}

inline nlohmann::json calibration_to_json(const EnergyCalibration& c) {
  nlohmann::json doc{{"T_hat", c.temperature},
                     {"beta_hat", c.beta},
                     {"residual", c.residual},
                     {"bracket", {c.bracket_lo, c.bracket_hi}},
                     {"monotone", c.monotone}};
  if (c.pinned != BracketPin::None) doc["pinned"] = c.pinned == BracketPin::Lower ? "lower" : "upper";
  if (!c.crossings.empty()) doc["crossings"] = c.crossings;
  return doc;
}

// --- DOT -------------------------------------------------------------------

/// Grey level on a 10-step ramp: the largest value is black (gray0), small values
/// light grey (gray90).
inline std::string grey_for(double value, double max_value) {
  const double level = max_value > 0.0 ? std::clamp(value / max_value, 0.0, 1.0) : 0.0;
  const int step = static_cast<int>(std::lround(level * 9.0));
  return "gray" + std::to_string(90 - 10 * step);
}

/// Undirected drawing with one edge per node pair, darkness proportional to `values(i,j)`
/// (symmetrized by taking the larger direction). Source drawn as a black square, target
/// as a white square.
inline void write_dot(std::ostream& out, const Graph& g, const Eigen::MatrixXd& values,
                      const std::string& name, std::optional<NodeId> source = std::nullopt,
                      std::optional<NodeId> target = std::nullopt) {
  double max_value = 0.0;
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = i + 1; j < g.size(); ++j)
      if (g.has_arc(i, j) || g.has_arc(j, i))
        max_value = std::max({max_value, values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                              values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))});
  out << "graph \"" << name << "\" {\n";
  out << "  node [shape=circle, style=filled, fillcolor=white, fontsize=10];\n";
  for (NodeId i = 0; i < g.size(); ++i) {
    out << "  " << i << " [label=\"" << g.label(i) << "\"";
    if (source && *source == i) out << ", shape=square, fillcolor=black, fontcolor=white";
    if (target && *target == i) out << ", shape=square, fillcolor=white";
    out << "];\n";
  }
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = i + 1; j < g.size(); ++j) {
      if (!g.has_arc(i, j) && !g.has_arc(j, i)) continue;
      const double v = std::max(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                                values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
      out << "  " << i << " -- " << j << " [color=" << grey_for(v, max_value)
          << ", penwidth=2, tooltip=\"" << format_number(v) << "\"];\n";
    }
  out << "}\n";
}

}  // namespace thermoflow::io
