#pragma once

#include <thermoflow/error.hpp>
#include <thermoflow/flow.hpp>
#include <thermoflow/graph.hpp>
#include <thermoflow/solver.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace thermoflow {

/// nu_ij = |x_ij - x_ji|
struct NetFlow {
  Eigen::MatrixXd nu;
  Eigen::VectorXd node_net;  // nu_i.
};

inline NetFlow net_flow(const Flow& f) {
  NetFlow net;
  net.nu = (f.x - f.x.transpose()).cwiseAbs();
  net.node_net = net.nu.rowwise().sum();
  return net;
}

/// All-pairs averages of simple flow, net flow and total time at one temperature.
struct CentralityTable {
  double beta = 0.0;
  Eigen::MatrixXd mean_flow;       // <x_ij>
  Eigen::VectorXd node_mean_flow;  // <x_i.>
  Eigen::MatrixXd rel_mean_flow;   // c_ij = <x_ij> / <x_..>
  Eigen::VectorXd node_rel_mean_flow;
  Eigen::MatrixXd mean_net_flow;   // <nu_ij>
  Eigen::VectorXd node_mean_net_flow;
  double grand_total = 0.0;        // <x_..>
  Eigen::VectorXd closeness_out;   // T^out_s
  Eigen::VectorXd closeness_in;    // T^in_t
};

struct CentralityOptions {
  /// Worker threads for the sweep over targets. Each worker reduces a contiguous block of
  /// targets in order and blocks are summed in order, so a fixed count is bit-reproducible.
  unsigned threads = 1;
  SolverOptions solver{};
  FixedPointOptions fixed_point{};
};

namespace detail {

struct PairSums {
  Eigen::MatrixXd flow;
  Eigen::MatrixXd net;
  Eigen::VectorXd out_time;
  Eigen::VectorXd in_time;

  explicit PairSums(Eigen::Index n)
      : flow(Eigen::MatrixXd::Zero(n, n)), net(Eigen::MatrixXd::Zero(n, n)),
        out_time(Eigen::VectorXd::Zero(n)), in_time(Eigen::VectorXd::Zero(n)) {}

  void add(const Flow& f) {
    flow += f.x;
    net += (f.x - f.x.transpose()).cwiseAbs();
    const double total = f.total_time();
    out_time(static_cast<Eigen::Index>(f.source)) += total;
    in_time(static_cast<Eigen::Index>(f.target)) += total;
  }

  PairSums& operator+=(const PairSums& other) {
    flow += other.flow;
    net += other.net;
    out_time += other.out_time;
    in_time += other.in_time;
    return *this;
  }
};

inline std::string pair_note(NodeId s, NodeId t) {
  return " (s=" + std::to_string(s) + ", t=" + std::to_string(t) + ")";
}

// Contribution of every source for one target.
inline void accumulate_target(const Graph& g, NodeId t, double beta, double p,
                              const CentralityOptions& opts, PairSums& sums) {
  if (p == 1.0) {
    std::optional<TargetSystem> system;
    try {
      system.emplace(g, t, beta, effective_costs(g, CostShape{1.0}, nullptr, 0.0), opts.solver);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (t=" + std::to_string(t) + ")");
    }
    const Eigen::MatrixXd rows = system->all_source_rows();
    for (std::size_t k = 0; k < system->nodes().size(); ++k) {
      const NodeId s = system->nodes()[k];
      sums.add(system->flow(s, rows.col(static_cast<Eigen::Index>(k))));
    }
    return;
  }
  for (NodeId s = 0; s < g.size(); ++s) {
    if (s == t) continue;
    try {
      sums.add(solve_power_flow(g, {s, t, beta, p, p < 1.0}, opts.fixed_point, opts.solver).flow);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + pair_note(s, t));
    }
  }
}

}  // namespace detail

/// Mean flow betweenness, mean net flow and closeness over all ordered pairs s != t.
inline CentralityTable mean_flow_centrality(const Graph& g, double beta, double p = 1.0,
                                            const CentralityOptions& opts = {}) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw Error(ErrorCode::InvalidArgument, "beta must be finite and non-negative");
  const auto n = static_cast<Eigen::Index>(g.size());
  const std::size_t workers = std::clamp<std::size_t>(opts.threads, 1, g.size());

  std::vector<detail::PairSums> blocks(workers, detail::PairSums(n));
  std::vector<std::exception_ptr> failures(workers);
  auto run_block = [&](std::size_t b) {
    const std::size_t first = b * g.size() / workers;
    const std::size_t last = (b + 1) * g.size() / workers;
    try {
      for (NodeId t = first; t < last; ++t) detail::accumulate_target(g, t, beta, p, opts, blocks[b]);
    } catch (...) {
      failures[b] = std::current_exception();
    }
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t b = 0; b < workers; ++b) pool.emplace_back(run_block, b);
    for (auto& th : pool) th.join();
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  detail::PairSums total(n);
  for (const auto& block : blocks) total += block;

  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  CentralityTable table;
  table.beta = beta;
  table.mean_flow = total.flow / pairs;
  table.node_mean_flow = table.mean_flow.rowwise().sum();
  table.grand_total = table.mean_flow.sum();
  table.rel_mean_flow = table.mean_flow / table.grand_total;
  table.node_rel_mean_flow = table.node_mean_flow / table.grand_total;
  table.mean_net_flow = total.net / pairs;
  table.node_mean_net_flow = table.mean_net_flow.rowwise().sum();
  table.closeness_out = total.out_time / static_cast<double>(n - 1);
  table.closeness_in = total.in_time / static_cast<double>(n - 1);
  return table;
}

/// Commute time x^st_.. + x^ts_.. at inverse temperature beta.
inline double commute_time(const Graph& g, NodeId s, NodeId t, double beta,
                           const SolverOptions& opts = {}) {
  return solve_linear_flow(g, {s, t, beta}, opts).flow.total_time() +
         solve_linear_flow(g, {t, s, beta}, opts).flow.total_time();
}

/// Pearson correlation; empty when either vector has zero variance.
inline std::optional<double> pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double va = da.square().sum();
  const double vb = db.square().sum();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  const double floor = 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(a.size());
  if (va <= floor || vb <= floor) return std::nullopt;
  return (da * db).sum() / std::sqrt(va * vb);
}

struct CorrelationPoint {
  double beta = 0.0;
  std::optional<double> corr_low;   // against the smallest grid beta
  std::optional<double> corr_high;  // against the largest grid beta
  /// Sum of both; empty when either correlation is undefined.
  std::optional<double> sum() const {
    if (!corr_low || !corr_high) return std::nullopt;
    return *corr_low + *corr_high;
  }
  /// Set to ErrorCode::DegenerateVariance when a correlation is undefined.
  std::optional<ErrorCode> status;
};

struct CorrelationSweep {
  std::vector<CorrelationPoint> points;
  std::vector<Eigen::VectorXd> node_net;  // <nu_i.> at each grid beta
};

/// Correlation across nodes of <nu_i.>(beta) with its value at the ends of the grid.
inline CorrelationSweep centrality_correlation(const Graph& g, const std::vector<double>& betas,
                                               const CentralityOptions& opts = {}) {
  if (betas.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two grid points");
  if (!std::is_sorted(betas.begin(), betas.end()))
    throw Error(ErrorCode::InvalidArgument, "beta grid must be sorted ascending");
  CorrelationSweep sweep;
  for (double beta : betas) sweep.node_net.push_back(mean_flow_centrality(g, beta, 1.0, opts).node_mean_net_flow);
  for (std::size_t k = 0; k < betas.size(); ++k) {
    CorrelationPoint point;
    point.beta = betas[k];
    point.corr_low = pearson(sweep.node_net[k], sweep.node_net.front());
    point.corr_high = pearson(sweep.node_net[k], sweep.node_net.back());
    if (!point.sum()) point.status = ErrorCode::DegenerateVariance;
    sweep.points.push_back(point);
  }
  return sweep;
}

/// n points spaced evenly in log beta over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2)
    throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < lo < hi and at least two points");
  std::vector<double> grid(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo * std::exp(step * static_cast<double>(k));
  grid.back() = hi;
  return grid;
}

/// d<x_..>/dr_ij by central differences with absolute step `step`.
inline double trip_duration_sensitivity(const Graph& g, double beta, NodeId i, NodeId j, double step,
                                        const CentralityOptions& opts = {}) {
  if (!g.has_arc(i, j)) throw Error(ErrorCode::InvalidArgument, "no arc at the requested edge");
  if (!(step > 0.0) || !(step < g.r(i, j)))
    throw Error(ErrorCode::InvalidArgument, "step must be positive and below r_ij");
  const double r = g.r(i, j);
  const double up = mean_flow_centrality(g.with_resistance(i, j, r + step), beta, 1.0, opts).grand_total;
  const double down = mean_flow_centrality(g.with_resistance(i, j, r - step), beta, 1.0, opts).grand_total;
  return (up - down) / (2.0 * step);
}

}  // namespace thermoflow
