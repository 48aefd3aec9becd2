#pragma once

#include <thermoflow/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace thermoflow {

using NodeId = std::size_t;

/// Resistance stored wherever there is no arc. Never used in arithmetic.
inline constexpr double kNoArc = std::numeric_limits<double>::infinity();

/// Tolerance on row sums of the transition matrix.
inline constexpr double kStochasticTolerance = 1e-12;

class Graph;
Graph validate_graph(const Eigen::MatrixXd& transitions, const Eigen::MatrixXd& resistances,
                     std::vector<std::string> labels);

/// A validated pair (W, R): W row-stochastic and irreducible, R > 0 on the support of W.
/// Immutable once built; obtain instances through validate_graph or the generators.
class Graph {
public:
  std::size_t size() const { return static_cast<std::size_t>(w_.rows()); }
  const Eigen::MatrixXd& transitions() const { return w_; }
  const Eigen::MatrixXd& resistances() const { return r_; }
  const std::vector<std::string>& labels() const { return labels_; }

  bool has_arc(NodeId i, NodeId j) const { return w_(index(i), index(j)) > 0.0; }
  double w(NodeId i, NodeId j) const { return w_(index(i), index(j)); }
  double r(NodeId i, NodeId j) const { return r_(index(i), index(j)); }

  /// Number of arcs (i, j) with w_ij > 0.
  std::size_t arc_count() const {
    return static_cast<std::size_t>((w_.array() > 0.0).count());
  }

  /// Largest resistance on the support.
  double max_resistance() const {
    double best = 0.0;
    for (Eigen::Index i = 0; i < w_.rows(); ++i)
      for (Eigen::Index j = 0; j < w_.cols(); ++j)
        if (w_(i, j) > 0.0) best = std::max(best, r_(i, j));
    return best;
  }

  /// Copy with the resistance of arc (i, j) replaced; the result is re-validated.
  Graph with_resistance(NodeId i, NodeId j, double resistance) const {
    Eigen::MatrixXd r = r_;
    r(index(i), index(j)) = resistance;
    return validate_graph(w_, r, labels_);
  }

  std::string label(NodeId i) const {
    return i < labels_.size() ? labels_[i] : std::to_string(i);
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.size() != b.size() || a.labels_ != b.labels_) return false;
    if (a.w_ != b.w_) return false;
    for (Eigen::Index i = 0; i < a.w_.rows(); ++i)
      for (Eigen::Index j = 0; j < a.w_.cols(); ++j)
        if (a.w_(i, j) > 0.0 && a.r_(i, j) != b.r_(i, j)) return false;
    return true;
  }

private:
  Graph(Eigen::MatrixXd w, Eigen::MatrixXd r, std::vector<std::string> labels)
      : w_(std::move(w)), r_(std::move(r)), labels_(std::move(labels)) {}

  Eigen::Index index(NodeId i) const {
    if (i >= size())
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(i) + " out of range");
    return static_cast<Eigen::Index>(i);
  }

  friend Graph validate_graph(const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                              std::vector<std::string>);

  Eigen::MatrixXd w_;
  Eigen::MatrixXd r_;
  std::vector<std::string> labels_;
};

namespace detail {

// Nodes reachable from `start` following arcs in `support` (transposed when `reverse`).
inline std::vector<bool> reachable(const Eigen::MatrixXd& support, NodeId start, bool reverse) {
  const auto n = static_cast<std::size_t>(support.rows());
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v = 0; v < n; ++v) {
      const double a = reverse ? support(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u))
                               : support(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (a > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

inline bool all_of(const std::vector<bool>& flags) {
  for (bool f : flags)
    if (!f) return false;
  return true;
}

}  // namespace detail

/// Checks the Markov-chain and resistance invariants and builds a Graph.
/// Resistances off the support of W are replaced by kNoArc.
inline Graph validate_graph(const Eigen::MatrixXd& transitions, const Eigen::MatrixXd& resistances,
                            std::vector<std::string> labels = {}) {
  const Eigen::Index n = transitions.rows();
  if (transitions.cols() != n || resistances.rows() != n || resistances.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "W and R must be square matrices of equal size");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "a graph needs at least two nodes");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n))
    throw Error(ErrorCode::InvalidArgument, "label count does not match node count");

  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n, n, kNoArc);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = transitions(i, j);
      if (!std::isfinite(w))
        throw Error(ErrorCode::NotStochastic, "non-finite transition w(" + std::to_string(i) +
                                                  "," + std::to_string(j) + ")");
      if (w < 0.0 || w > 1.0)
        throw Error(ErrorCode::NegativeEntry, "transition w(" + std::to_string(i) + "," +
                                                  std::to_string(j) + ") outside [0,1]");
      row += w;
      if (w > 0.0) {
        const double rij = resistances(i, j);
        if (!(rij > 0.0) || !std::isfinite(rij))
          throw Error(ErrorCode::ZeroOrNegativeResistanceOnEdge,
                      "arc (" + std::to_string(i) + "," + std::to_string(j) +
                          ") needs a finite positive resistance");
        r(i, j) = rij;
      }
    }
    if (std::abs(row - 1.0) > kStochasticTolerance)
      throw Error(ErrorCode::NotStochastic,
                  "row " + std::to_string(i) + " sums to " + std::to_string(row));
  }

  if (!detail::all_of(detail::reachable(transitions, 0, false)) ||
      !detail::all_of(detail::reachable(transitions, 0, true)))
    throw Error(ErrorCode::NotIrreducible, "support of W is not strongly connected");

  return Graph(transitions, std::move(r), std::move(labels));
}

/// Simple symmetric model: uniform transitions on existing edges, resistances taken from
/// `resistances` on edges (must be symmetric there).
inline Graph simple_symmetric_graph(const Eigen::MatrixXd& adjacency,
                                    const Eigen::MatrixXd& resistances,
                                    std::vector<std::string> labels = {}) {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n || resistances.rows() != n || resistances.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "adjacency and resistances must be square and equal");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "a graph needs at least two nodes");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0)
      throw Error(ErrorCode::NotSymmetric, "adjacency has a nonzero diagonal entry");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = adjacency(i, j);
      if (a != 0.0 && a != 1.0)
        throw Error(ErrorCode::InvalidArgument, "adjacency entries must be 0 or 1");
      if (a != adjacency(j, i) || (a != 0.0 && resistances(i, j) != resistances(j, i)))
        throw Error(ErrorCode::NotSymmetric, "adjacency or resistance not symmetric at (" +
                                                 std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  if (!detail::all_of(detail::reachable(adjacency, 0, false)))
    throw Error(ErrorCode::Disconnected, "adjacency graph is disconnected");

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double degree = adjacency.row(i).sum();
    for (Eigen::Index j = 0; j < n; ++j)
      if (adjacency(i, j) != 0.0) w(i, j) = 1.0 / degree;
  }
  return validate_graph(w, resistances, std::move(labels));
}

/// Unit resistances on every edge.
inline Graph simple_symmetric_graph(const Eigen::MatrixXd& adjacency,
                                    std::vector<std::string> labels = {}) {
  return simple_symmetric_graph(adjacency, Eigen::MatrixXd::Ones(adjacency.rows(), adjacency.cols()),
                                std::move(labels));
}

/// Node degrees of the support (out-degree; equal to in-degree for symmetric graphs).
inline Eigen::VectorXd degrees(const Graph& g) {
  return (g.transitions().array() > 0.0).cast<double>().rowwise().sum();
}

/// Undirected edge list builder used by the generators.
class EdgeListBuilder {
public:
  explicit EdgeListBuilder(std::size_t n)
      : adjacency_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
        resistances_(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {}

  EdgeListBuilder& edge(NodeId i, NodeId j, double resistance = 1.0) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    adjacency_(a, b) = adjacency_(b, a) = 1.0;
    resistances_(a, b) = resistances_(b, a) = resistance;
    return *this;
  }

  EdgeListBuilder& clique(NodeId first, std::size_t k) {
    for (NodeId i = first; i < first + k; ++i)
      for (NodeId j = i + 1; j < first + k; ++j) edge(i, j);
    return *this;
  }

  Graph build(std::vector<std::string> labels = {}) const {
    return simple_symmetric_graph(adjacency_, resistances_, std::move(labels));
  }

private:
  Eigen::MatrixXd adjacency_;
  Eigen::MatrixXd resistances_;
};

/// m x m square grid; node (row, col) has id row*m + col.
inline Graph grid_graph(std::size_t m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "grid side must be at least 2");
  EdgeListBuilder b(m * m);
  std::vector<std::string> labels;
  for (std::size_t row = 0; row < m; ++row)
    for (std::size_t col = 0; col < m; ++col) {
      const NodeId id = row * m + col;
      if (col + 1 < m) b.edge(id, id + 1);
      if (row + 1 < m) b.edge(id, id + m);
      labels.push_back("r" + std::to_string(row) + "c" + std::to_string(col));
    }
  return b.build(std::move(labels));
}

/// Path 0 - 1 - ... - (n-1).
inline Graph path_graph(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least two nodes");
  EdgeListBuilder b(n);
  for (NodeId i = 0; i + 1 < n; ++i) b.edge(i, i + 1);
  return b.build();
}

/// Two cliques K_k (nodes 0..k-1 and k..2k-1) joined by the edges (0, k) and (1, k+1).
inline Graph two_cliques(std::size_t k) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "cliques need at least three nodes");
  EdgeListBuilder b(2 * k);
  b.clique(0, k).clique(k, k).edge(0, k).edge(1, k + 1);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < 2 * k; ++i)
    labels.push_back((i < k ? "a" : "b") + std::to_string(i % k));
  return b.build(std::move(labels));
}

/// Graph A: the 7x7 square grid.
inline Graph make_graph_A(std::size_t m = 7) { return grid_graph(m); }

/// Graph B: two K4 joined by two edges.
inline Graph make_graph_B() { return two_cliques(4); }

/// Graph C: two K5 (nodes 0-4 and 5-9) joined by a five-edge unit path
/// 0-10-11-12-13-5 and a two-edge path 1-14-6 whose edges have resistance 10.
inline Graph make_graph_C() {
  EdgeListBuilder b(15);
  b.clique(0, 5).clique(5, 5);
  b.edge(0, 10).edge(10, 11).edge(11, 12).edge(12, 13).edge(13, 5);
  b.edge(1, 14, 10.0).edge(14, 6, 10.0);
  std::vector<std::string> labels{"a0", "a1", "a2", "a3", "a4", "b0", "b1", "b2",
                                  "b3", "b4", "u1", "u2", "u3", "u4", "h1"};
  return b.build(std::move(labels));
}

/// A builtin graph with its default source and target.
struct BuiltinGraph {
  std::string name;
  Graph graph;
  NodeId source;
  NodeId target;
  std::string description;
};

inline BuiltinGraph builtin_A() {
  return {"A", make_graph_A(), 0, 48,
          "7x7 grid, node id = 7*row + col, unit resistances; default s = 0 (r0c0), t = 48 (r6c6)"};
}

inline BuiltinGraph builtin_B() {
  return {"B", make_graph_B(), 2, 6,
          "two K4 (nodes 0-3, 4-7) joined by edges 0-4 and 1-5; default s = 2, t = 6"};
}

inline BuiltinGraph builtin_C() {
  return {"C", make_graph_C(), 2, 7,
          "two K5 (nodes 0-4, 5-9); unit path 0-10-11-12-13-5; path 1-14-6 with r = 10 "
          "per edge; default s = 2, t = 7"};
}

}  // namespace thermoflow
