#pragma once

// Reference computations used to check the solver. Nothing here calls into solver.hpp:
// the linear algebra, the shortest paths and the walk simulation are written out separately.

#include <thermoflow/error.hpp>
#include <thermoflow/flow.hpp>
#include <thermoflow/graph.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <utility>
#include <vector>

namespace thermoflow::oracles {

namespace detail {

// Inverse by Gauss-Jordan elimination with partial pivoting. Returns false when a pivot
// falls below `tiny`.
inline bool gauss_jordan_inverse(Eigen::MatrixXd a, Eigen::MatrixXd& inverse, double tiny = 1e-13) {
  const Eigen::Index n = a.rows();
  inverse = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < tiny) return false;
    a.row(col).swap(a.row(pivot));
    inverse.row(col).swap(inverse.row(pivot));
    const double scale = 1.0 / a(col, col);
    a.row(col) *= scale;
    inverse.row(col) *= scale;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col || a(r, col) == 0.0) continue;
      const double factor = a(r, col);
      a.row(r) -= factor * a.row(col);
      inverse.row(r) -= factor * inverse.row(col);
    }
  }
  return true;
}

}  // namespace detail

/// Expected transition counts of the W-walk started at s and absorbed at t, from the
/// fundamental matrix N = (I - Q)^{-1} of the chain with t made absorbing.
inline Eigen::MatrixXd absorbing_chain_visits(const Graph& g, NodeId s, NodeId t) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (s >= g.size() || t >= g.size() || s == t)
    throw Error(ErrorCode::InvalidArgument, "need distinct in-range s and t");
  const auto ti = static_cast<Eigen::Index>(t);
  auto shrink = [ti](Eigen::Index i) { return i < ti ? i : i - 1; };

  Eigen::MatrixXd transient = Eigen::MatrixXd::Identity(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != ti && j != ti) transient(shrink(i), shrink(j)) -= g.transitions()(i, j);

  Eigen::MatrixXd fundamental;
  if (!detail::gauss_jordan_inverse(transient, fundamental))
    throw Error(ErrorCode::TargetUnreachable, "I - Q is singular");

  const Eigen::Index row = shrink(static_cast<Eigen::Index>(s));
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == ti) continue;
    const double visits = fundamental(row, shrink(i));
    for (Eigen::Index j = 0; j < n; ++j) counts(i, j) = visits * g.transitions()(i, j);
  }
  return counts;
}

/// Cheapest directed s -> t route cost (binary-heap Dijkstra over arcs with w > 0).
inline double dijkstra_cost(const Graph& g, NodeId s, NodeId t,
                            std::vector<NodeId>* route = nullptr) {
  const std::size_t n = g.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<NodeId> parent(n, n);
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[s] = 0.0;
  heap.emplace(0.0, s);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (u == t) break;
    for (NodeId v = 0; v < n; ++v) {
      if (!g.has_arc(u, v)) continue;
      const double candidate = d + g.r(u, v);
      if (candidate < dist[v]) {
        dist[v] = candidate;
        parent[v] = u;
        heap.emplace(candidate, v);
      }
    }
  }
  if (route) {
    route->clear();
    for (NodeId v = t; v != n; v = parent[v]) route->insert(route->begin(), v);
  }
  return dist[t];
}

/// Unit current from s to t through conductances 1/r_ij (Kirchhoff balance with t
/// grounded). Entry (i, j) is the current flowing from i to j when positive, else 0.
inline Eigen::MatrixXd electric_current(const Graph& g, NodeId s, NodeId t) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (s >= g.size() || t >= g.size() || s == t)
    throw Error(ErrorCode::InvalidArgument, "need distinct in-range s and t");
  Eigen::MatrixXd conductance = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (g.transitions()(i, j) == 0.0) continue;
      if (g.transitions()(j, i) > 0.0 && g.resistances()(i, j) != g.resistances()(j, i))
        throw Error(ErrorCode::InvalidArgument, "electric network needs symmetric resistances");
      conductance(i, j) = conductance(j, i) = 1.0 / g.resistances()(i, j);
    }

  const auto ti = static_cast<Eigen::Index>(t);
  auto shrink = [ti](Eigen::Index i) { return i < ti ? i : i - 1; };
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == ti) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || conductance(i, j) == 0.0) continue;
      laplacian(shrink(i), shrink(i)) += conductance(i, j);
      if (j != ti) laplacian(shrink(i), shrink(j)) -= conductance(i, j);
    }
  }
  Eigen::MatrixXd inverse;
  if (!detail::gauss_jordan_inverse(laplacian, inverse))
    throw Error(ErrorCode::SingularNetwork, "reduced Laplacian is singular");

  // Potentials: inverse column for the source, zero at t.
  Eigen::VectorXd potential = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != ti) potential(i) = inverse(shrink(i), shrink(static_cast<Eigen::Index>(s)));

  Eigen::MatrixXd current = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && conductance(i, j) > 0.0)
        current(i, j) = std::max(0.0, (potential(i) - potential(j)) * conductance(i, j));
  return current;
}

struct KilledWalkStats {
  Eigen::MatrixXd edge_counts;      // mean transition counts over walks that reach t
  Eigen::MatrixXd standard_errors;  // of those means
  double survival_rate = 0.0;
  double survival_standard_error = 0.0;
  std::size_t n_walks = 0;
  std::size_t survivors = 0;
};

/// Walk-specific generator: the stream depends only on (seed, walk index).
inline std::mt19937_64 walk_stream(std::uint64_t seed, std::uint64_t walk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(walk), static_cast<std::uint32_t>(walk >> 32)};
  return std::mt19937_64(seq);
}

/// Simulates the chain with a cemetery state: from i move to j with probability
/// w_ij exp(-beta r_ij), otherwise die. Only walks that reach t are averaged.
inline KilledWalkStats simulate_killed_walks(const Graph& g, const ProblemSpec& spec,
                                             std::size_t n_walks, std::uint64_t seed,
                                             std::size_t max_steps = 10'000'000) {
  if (n_walks == 0) throw Error(ErrorCode::InvalidArgument, "need at least one walk");
  if (spec.p != 1.0) throw Error(ErrorCode::InvalidArgument, "killed walks model p = 1 only");
  if (spec.source >= g.size() || spec.target >= g.size() || spec.source == spec.target)
    throw Error(ErrorCode::InvalidArgument, "need distinct in-range s and t");
  const auto n = static_cast<Eigen::Index>(g.size());

  // Per-node outgoing arcs with their killed-chain probabilities.
  std::vector<std::vector<std::pair<Eigen::Index, double>>> arcs(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (g.transitions()(i, j) > 0.0)
        arcs[static_cast<std::size_t>(i)].emplace_back(
            j, g.transitions()(i, j) * std::exp(-spec.beta * g.resistances()(i, j)));

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd walk_counts = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> visited;
  std::size_t survivors = 0;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto t = static_cast<Eigen::Index>(spec.target);

  for (std::size_t walk = 0; walk < n_walks; ++walk) {
    auto rng = walk_stream(seed, walk);
    visited.clear();
    auto node = static_cast<Eigen::Index>(spec.source);
    bool absorbed = false;
    for (std::size_t step = 0; step < max_steps; ++step) {
      double u = uniform(rng);
      Eigen::Index next = -1;
      for (const auto& [j, p] : arcs[static_cast<std::size_t>(node)]) {
        if (u < p) {
          next = j;
          break;
        }
        u -= p;
      }
      if (next < 0) break;  // killed
      if (walk_counts(node, next) == 0.0) visited.emplace_back(node, next);
      walk_counts(node, next) += 1.0;
      node = next;
      if (node == t) {
        absorbed = true;
        break;
      }
    }
    if (absorbed) {
      ++survivors;
      for (const auto& [i, j] : visited) {
        sum(i, j) += walk_counts(i, j);
        sum_sq(i, j) += walk_counts(i, j) * walk_counts(i, j);
      }
    }
    for (const auto& [i, j] : visited) walk_counts(i, j) = 0.0;
  }
  if (survivors == 0)
    throw Error(ErrorCode::AllWalksKilled, "no walk reached the target");

  KilledWalkStats stats;
  stats.n_walks = n_walks;
  stats.survivors = survivors;
  const auto k = static_cast<double>(survivors);
  stats.edge_counts = sum / k;
  const Eigen::MatrixXd variance =
      ((sum_sq / k - stats.edge_counts.cwiseProduct(stats.edge_counts)) * (k / std::max(1.0, k - 1.0)))
          .cwiseMax(0.0);
  stats.standard_errors = (variance / k).cwiseSqrt();
  stats.survival_rate = k / static_cast<double>(n_walks);
  stats.survival_standard_error =
      std::sqrt(stats.survival_rate * (1.0 - stats.survival_rate) / static_cast<double>(n_walks));
  return stats;
}

/// Connected Erdos-Renyi graph under the simple symmetric model (rejection sampling).
inline Graph random_connected_graph(std::size_t n, double edge_probability, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(edge_probability);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
      for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j)
        if (coin(rng)) adjacency(i, j) = adjacency(j, i) = 1.0;
    try {
      return simple_symmetric_graph(adjacency);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Disconnected) throw;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "could not draw a connected graph");
}

}  // namespace thermoflow::oracles
