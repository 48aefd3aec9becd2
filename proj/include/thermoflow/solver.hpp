#pragma once

#include <thermoflow/error.hpp>
#include <thermoflow/flow.hpp>
#include <thermoflow/graph.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace thermoflow {

struct SolverOptions {
  /// Largest allowed beta * (largest cost-to-target).
  double exponent_limit = 1e9;
  /// Below this reciprocal condition number the system counts as singular.
  double min_rcond = 1e-14;
  /// Scaled survival probability of the source below which the target is unreachable.
  double min_survival = 1e-300;
  /// Also compute the auxiliary vectors a and b.
  bool auxiliary_vectors = false;
};

/// Everything the solve produces besides X. Vectors of length n-1 are indexed by
/// `nodes` (every node except the target, in increasing order).
struct SolverDiagnostics {
  std::vector<NodeId> nodes;
  Eigen::MatrixXd v;          // v_ij = w_ij exp(-beta r_ij phi'(x_ij)), i,j != t
  Eigen::VectorXd q;          // v_it
  Eigen::VectorXd z;          // survival probabilities; may underflow at low temperature
  Eigen::VectorXd log_z;      // exact logarithm of z
  Eigen::VectorXd rho;        // one-step killing probabilities
  Eigen::VectorXd m_source;   // m_si, expected visits to i starting from s
  Eigen::VectorXd lambda;     // n multipliers, lambda_t = 0
  std::optional<Eigen::VectorXd> a;
  std::optional<Eigen::VectorXd> b;
  double log_z_source = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  double free_energy = 0.0;

  /// -T ln z_s, taken as its beta -> 0 limit (the expected route cost) at beta = 0.
  double survival_free_energy(NodeId source) const { return -lambda(static_cast<Eigen::Index>(source)); }
};

struct FlowSolution {
  Flow flow;
  SolverDiagnostics diagnostics;
  int iterations = 1;
};

namespace detail {

// Cheapest cost from every node to `target` over arcs of W (dense Dijkstra, O(n^2)).
inline Eigen::VectorXd cost_to_target(const Graph& g, NodeId target, const Eigen::MatrixXd& cost) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto t = static_cast<Eigen::Index>(target);
  Eigen::VectorXd h = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<bool> settled(static_cast<std::size_t>(n), false);
  h(t) = 0.0;
  for (Eigen::Index round = 0; round < n; ++round) {
    Eigen::Index u = -1;
    for (Eigen::Index k = 0; k < n; ++k)
      if (!settled[static_cast<std::size_t>(k)] && (u < 0 || h(k) < h(u))) u = k;
    if (u < 0 || !std::isfinite(h(u))) break;
    settled[static_cast<std::size_t>(u)] = true;
    for (Eigen::Index i = 0; i < n; ++i)
      if (g.transitions()(i, u) > 0.0) h(i) = std::min(h(i), cost(i, u) + h(u));
  }
  return h;
}

// The linear system for one target and one arc-cost matrix, factorized once and reusable
// for every source. Stored in the basis rescaled by exp(beta h), h the cost-to-target,
// where every weight is exp(-beta * slack) w_ij with slack >= 0.
class TargetSystem {
public:
  TargetSystem(const Graph& g, NodeId target, double beta, const Eigen::MatrixXd& cost,
               const SolverOptions& opts = {})
      : graph_(&g), target_(target), beta_(beta), cost_(cost) {
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto t = static_cast<Eigen::Index>(target);
    h_ = cost_to_target(g, target, cost);
    const double scale = beta * h_.maxCoeff();
    if (!(scale <= opts.exponent_limit))
      throw Error(ErrorCode::UnderflowGuardTripped,
                  "beta * cost scale = " + std::to_string(scale) + " exceeds " +
                      std::to_string(opts.exponent_limit) + "; largest usable beta is " +
                      std::to_string(opts.exponent_limit / h_.maxCoeff()));

    index_.assign(g.size(), -1);
    for (Eigen::Index i = 0, k = 0; i < n; ++i)
      if (i != t) {
        index_[static_cast<std::size_t>(i)] = k++;
        nodes_.push_back(static_cast<NodeId>(i));
      }

    const Eigen::Index m = n - 1;
    vs_ = Eigen::MatrixXd::Zero(m, m);
    qs_ = Eigen::VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto i = static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)]);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = g.transitions()(i, j);
        if (w == 0.0) continue;
        const double slack = std::max(0.0, cost(i, j) + h_(j) - h_(i));
        const double weight = beta == 0.0 ? w : w * std::exp(-beta * slack);
        if (j == t)
          qs_(a) = weight;
        else
          vs_(a, index_[static_cast<std::size_t>(j)]) = weight;
      }
    }

    lu_.compute(Eigen::MatrixXd::Identity(m, m) - vs_);
    const double rcond = lu_.rcond();
    if (!(rcond >= opts.min_rcond))
      throw Error(ErrorCode::TargetUnreachableAtBeta,
                  "I - V is numerically singular (rcond " + std::to_string(rcond) + ")");
    zs_ = lu_.solve(qs_);
    if (!zs_.allFinite() || !(zs_.minCoeff() > opts.min_survival))
      throw Error(ErrorCode::TargetUnreachableAtBeta,
                  "survival probability underflows for target " + std::to_string(target));
  }

  std::size_t reduced_size() const { return nodes_.size(); }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  Eigen::Index reduced(NodeId i) const { return index_[i]; }
  NodeId target() const { return target_; }
  const Eigen::VectorXd& potential() const { return h_; }

  /// Scaled row m~_s. of the fundamental matrix.
  Eigen::VectorXd source_row(NodeId source) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes_.size()));
    e(reduced(source)) = 1.0;
    Eigen::VectorXd u = lu_.transpose().solve(e);
    return u.cwiseMax(0.0);
  }

  /// Column k holds the scaled row m~_s. for the source nodes()[k].
  Eigen::MatrixXd all_source_rows() const {
    const auto m = static_cast<Eigen::Index>(nodes_.size());
    Eigen::MatrixXd rows = lu_.transpose().solve(Eigen::MatrixXd::Identity(m, m));
    return rows.cwiseMax(0.0);
  }

  /// Flow for source s given its scaled fundamental row u.
  Flow flow(NodeId source, const Eigen::Ref<const Eigen::VectorXd>& u) const {
    const auto n = static_cast<Eigen::Index>(graph_->size());
    const auto t = static_cast<Eigen::Index>(target_);
    const double zs = zs_(reduced(source));
    Flow f{Eigen::MatrixXd::Zero(n, n), source, target_, 1.0};
    const auto m = static_cast<Eigen::Index>(nodes_.size());
    for (Eigen::Index a = 0; a < m; ++a) {
      if (u(a) == 0.0) continue;
      const auto i = static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)]);
      const double lead = u(a) / zs;
      for (Eigen::Index b = 0; b < m; ++b)
        if (vs_(a, b) != 0.0)
          f.x(i, static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(b)])) = lead * vs_(a, b) * zs_(b);
      f.x(i, t) = lead * qs_(a);
    }
    return f;
  }

  /// x_.. for source s given its scaled fundamental row u.
  double total_time(NodeId source, const Eigen::Ref<const Eigen::VectorXd>& u) const {
    return u.dot(zs_) / zs_(reduced(source));
  }

  /// Full diagnostics for one source.
  SolverDiagnostics diagnostics(NodeId source, const Eigen::Ref<const Eigen::VectorXd>& u,
                                bool auxiliary) const {
    const Graph& g = *graph_;
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto m = static_cast<Eigen::Index>(nodes_.size());
    const auto t = static_cast<Eigen::Index>(target_);
    const Eigen::Index sa = reduced(source);
    const double hs = h_(static_cast<Eigen::Index>(source));

    SolverDiagnostics d;
    d.nodes = nodes_;
    d.v = Eigen::MatrixXd::Zero(m, m);
    d.q = Eigen::VectorXd::Zero(m);
    d.rho = Eigen::VectorXd::Zero(m);
    d.log_z.resize(m);
    d.m_source.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto i = static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)]);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = g.transitions()(i, j);
        if (w == 0.0) continue;
        const double v = w * std::exp(-beta_ * cost_(i, j));
        if (j == t)
          d.q(a) = v;
        else
          d.v(a, index_[static_cast<std::size_t>(j)]) = v;
        d.rho(a) += w * -std::expm1(-beta_ * cost_(i, j));
      }
      d.log_z(a) = std::log(zs_(a)) - beta_ * h_(i);
      d.m_source(a) = u(a) == 0.0 ? 0.0 : std::exp(std::log(u(a)) + beta_ * (h_(i) - hs));
    }
    d.z = d.log_z.array().exp().matrix();
    d.log_z_source = d.log_z(sa);

    d.lambda = Eigen::VectorXd::Zero(n);
    if (beta_ > 0.0) {
      for (Eigen::Index a = 0; a < m; ++a)
        d.lambda(static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)])) = d.log_z(a) / beta_;
    } else {
      // beta -> 0 limit of T ln z_i: minus the expected cost accumulated from i to t.
      Eigen::VectorXd step_cost = Eigen::VectorXd::Zero(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto i = static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)]);
        for (Eigen::Index j = 0; j < n; ++j)
          if (g.transitions()(i, j) > 0.0) step_cost(a) += g.transitions()(i, j) * cost_(i, j);
      }
      const Eigen::VectorXd expected = lu_.solve(step_cost);
      for (Eigen::Index a = 0; a < m; ++a)
        d.lambda(static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)])) = -expected(a);
    }

    if (auxiliary) {
      d.a = (d.m_source.array().log() - d.log_z_source).exp().matrix();
      d.b = d.z;
    }
    return d;
  }

private:
  const Graph* graph_;
  NodeId target_;
  double beta_;
  Eigen::MatrixXd cost_;
  Eigen::VectorXd h_;
  std::vector<Eigen::Index> index_;
  std::vector<NodeId> nodes_;
  Eigen::MatrixXd vs_;
  Eigen::VectorXd qs_;
  Eigen::VectorXd zs_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Arc costs r_ij phi'(x_ij) for the current flow.
inline Eigen::MatrixXd effective_costs(const Graph& g, const CostShape& phi, const Flow* current,
                                       double slope_floor) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (g.transitions()(i, j) > 0.0)
        cost(i, j) = g.resistances()(i, j) *
                     (current ? phi.slope(current->x(i, j), slope_floor) : 1.0);
  return cost;
}

inline FlowSolution solve_with_costs(const Graph& g, const ProblemSpec& spec,
                                     const Eigen::MatrixXd& cost, const SolverOptions& opts) {
  const TargetSystem system(g, spec.target, spec.beta, cost, opts);
  const Eigen::VectorXd u = system.source_row(spec.source);
  FlowSolution sol{system.flow(spec.source, u),
                   system.diagnostics(spec.source, u, opts.auxiliary_vectors), 1};
  const FunctionalValues fv = evaluate_functionals(g, spec, sol.flow);
  sol.diagnostics.energy = fv.energy;
  sol.diagnostics.entropy = fv.entropy;
  sol.diagnostics.free_energy = fv.free_energy;
  return sol;
}

}  // namespace detail

/// Free-energy-minimizing unit st-flow for phi(x) = x, in one factorization.
inline FlowSolution solve_linear_flow(const Graph& g, const ProblemSpec& spec,
                                      const SolverOptions& opts = {}) {
  check_spec(g, spec);
  if (spec.p != 1.0)
    throw Error(ErrorCode::InvalidArgument, "solve_linear_flow requires p = 1");
  return detail::solve_with_costs(g, spec, detail::effective_costs(g, CostShape{1.0}, nullptr, 0.0),
                                  opts);
}

struct FixedPointOptions {
  /// Initial weight of the new solve in X <- (1 - eta) X + eta Solve(V(X)).
  double damping = 0.5;
  /// Floor for the adaptive damping.
  double min_damping = 1e-6;
  /// Max-norm distance between X and Solve(V(X)) at convergence.
  double tolerance = 1e-10;
  int max_iterations = 10000;
  /// phi' arguments are raised to this value when p < 1.
  double slope_floor = 1e-12;
};

/// Fixed point of X = Solve(V(X)) for phi(x) = x^p, started from the random-walk flow.
/// The damping is halved whenever the residual grows and recovers slowly while it shrinks.
inline FlowSolution solve_power_flow(const Graph& g, const ProblemSpec& spec,
                                     const FixedPointOptions& fp = {},
                                     const SolverOptions& opts = {}) {
  check_spec(g, spec);
  if (spec.p == 1.0) return solve_linear_flow(g, spec, opts);
  const CostShape phi{spec.p};

  ProblemSpec random_walk = spec;
  random_walk.beta = 0.0;
  Flow current = detail::solve_with_costs(
                     g, random_walk, detail::effective_costs(g, CostShape{1.0}, nullptr, 0.0), opts)
                     .flow;
  // At beta = 0 the weights do not depend on X; one solve is the fixed point.
  if (spec.beta == 0.0)
    return detail::solve_with_costs(g, spec, detail::effective_costs(g, phi, &current, fp.slope_floor),
                                    opts);

  double eta = fp.damping;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= fp.max_iterations; ++it) {
    FlowSolution next = detail::solve_with_costs(
        g, spec, detail::effective_costs(g, phi, &current, fp.slope_floor), opts);
    const double residual = (next.flow.x - current.x).cwiseAbs().maxCoeff();
    if (residual < fp.tolerance) {
      next.flow = current;
      const FunctionalValues fv = evaluate_functionals(g, spec, current);
      next.diagnostics.energy = fv.energy;
      next.diagnostics.entropy = fv.entropy;
      next.diagnostics.free_energy = fv.free_energy;
      next.iterations = it;
      return next;
    }
    if (residual > previous)
      eta = std::max(fp.min_damping, 0.5 * eta);
    else
      eta = std::min(fp.damping, 1.05 * eta);
    previous = residual;
    current.x = (1.0 - eta) * current.x + eta * next.flow.x;
  }
  throw Error(ErrorCode::NoConvergence, "fixed point not reached in " +
                                            std::to_string(fp.max_iterations) + " iterations");
}

/// Dispatches on p.
inline FlowSolution solve_flow(const Graph& g, const ProblemSpec& spec,
                               const FixedPointOptions& fp = {}, const SolverOptions& opts = {}) {
  return spec.p == 1.0 ? solve_linear_flow(g, spec, opts) : solve_power_flow(g, spec, fp, opts);
}

/// The curvature term sum r_ij [phi(x_ij) - phi'(x_ij) x_ij]; zero for p = 1, negative for p > 1.
inline double curvature_term(const Graph& g, const ProblemSpec& spec, const Flow& f,
                             double slope_floor = 1e-12) {
  const CostShape phi{spec.p};
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.x.rows(); ++i)
    for (Eigen::Index j = 0; j < f.x.cols(); ++j)
      if (g.transitions()(i, j) > 0.0) {
        const double x = f.x(i, j);
        total += g.resistances()(i, j) * (phi.value(x) - phi.slope(x, slope_floor) * x);
      }
  return total;
}

/// |F - (sum r_ij [phi(x_ij) - phi'(x_ij) x_ij] + lambda_t - lambda_s)|
inline double verify_min_free_energy_identity(const Graph& g, const ProblemSpec& spec, const Flow& f,
                                              const SolverDiagnostics& d,
                                              double slope_floor = 1e-12) {
  const double gap = d.lambda(static_cast<Eigen::Index>(f.target)) -
                     d.lambda(static_cast<Eigen::Index>(f.source));
  const double free_energy = evaluate_functionals(g, spec, f).free_energy;
  return std::abs(free_energy - (curvature_term(g, spec, f, slope_floor) + gap));
}

}  // namespace thermoflow
