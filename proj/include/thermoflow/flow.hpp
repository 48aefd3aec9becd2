#pragma once

#include <thermoflow/error.hpp>
#include <thermoflow/graph.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace thermoflow {

/// Source, target, inverse temperature and the exponent p of the cost shape phi(x) = x^p.
struct ProblemSpec {
  NodeId source = 0;
  NodeId target = 1;
  double beta = 0.0;
  double p = 1.0;
  /// Required for 0 < p < 1, where the free energy is not convex.
  bool allow_sublinear = false;

  double temperature() const {
    return beta > 0.0 ? 1.0 / beta : std::numeric_limits<double>::infinity();
  }
};

inline void check_spec(const Graph& g, const ProblemSpec& spec) {
  if (spec.source >= g.size() || spec.target >= g.size())
    throw Error(ErrorCode::InvalidArgument, "source or target out of range");
  if (spec.source == spec.target)
    throw Error(ErrorCode::InvalidArgument, "source and target must differ");
  if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta))
    throw Error(ErrorCode::InvalidArgument, "beta must be finite and non-negative");
  if (!(spec.p > 0.0) || !std::isfinite(spec.p))
    throw Error(ErrorCode::InvalidArgument, "exponent p must be positive");
  if (spec.p < 1.0 && !spec.allow_sublinear)
    throw Error(ErrorCode::InvalidArgument, "p < 1 requires the allow_sublinear opt-in");
}

/// phi(x) = x^p and its derivative.
struct CostShape {
  double p = 1.0;

  double value(double x) const { return p == 1.0 ? x : (x > 0.0 ? std::pow(x, p) : 0.0); }

  /// phi'(x); arguments below `floor` are raised to it (only matters for p < 1).
  double slope(double x, double floor = 1e-12) const {
    if (p == 1.0) return 1.0;
    if (p < 1.0) x = std::max(x, floor);
    if (x <= 0.0) return 0.0;
    return p * std::pow(x, p - 1.0);
  }
};

/// Expected transition counts X for `value` units of mass sent from source to target.
struct Flow {
  Eigen::MatrixXd x;
  NodeId source = 0;
  NodeId target = 1;
  double value = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  Eigen::VectorXd row_sums() const { return x.rowwise().sum(); }
  Eigen::VectorXd col_sums() const { return x.colwise().sum().transpose(); }
  /// x_.. : expected number of transitions.
  double total_time() const { return x.sum(); }
  double operator()(NodeId i, NodeId j) const {
    return x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

/// max_i |x_i. - x_.i - v (delta_is - delta_it)|
inline double conservation_residual(const Flow& f) {
  const Eigen::VectorXd balance = f.row_sums() - f.col_sums();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < balance.size(); ++i) {
    double expected = 0.0;
    if (static_cast<NodeId>(i) == f.source) expected += f.value;
    if (static_cast<NodeId>(i) == f.target) expected -= f.value;
    worst = std::max(worst, std::abs(balance(i) - expected));
  }
  return worst;
}

/// Largest violation of positivity, absorption at the target, or the support of W.
inline double support_residual(const Graph& g, const Flow& f) {
  double worst = 0.0;
  const auto n = static_cast<Eigen::Index>(g.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = f.x(i, j);
      worst = std::max(worst, -x);
      if (g.transitions()(i, j) == 0.0 || static_cast<NodeId>(i) == f.target)
        worst = std::max(worst, std::abs(x));
    }
  return worst;
}

struct FunctionalValues {
  double energy = 0.0;       // U
  double entropy = 0.0;      // G
  double free_energy = 0.0;  // F = U + T G
  Eigen::VectorXd node_divergence;  // K_i(X||W), zero on unvisited nodes
};

/// U, G and F = U + T G for an arbitrary flow on the graph's support.
///
/// At beta = 0 the temperature is infinite; F is then U for a flow whose transition
/// kernel matches W (G = 0 up to `random_walk_tolerance` per unit of total time),
/// and +inf otherwise.
inline FunctionalValues evaluate_functionals(const Graph& g, const ProblemSpec& spec, const Flow& f,
                                             double random_walk_tolerance = 1e-12) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (f.x.rows() != n || f.x.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "flow and graph sizes differ");
  const CostShape phi{spec.p};
  const Eigen::VectorXd out = f.row_sums();

  FunctionalValues fv;
  fv.node_divergence = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double divergence = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = f.x(i, j);
      const double w = g.transitions()(i, j);
      if (x == 0.0) continue;
      if (w == 0.0)
        throw Error(ErrorCode::SupportViolation, "flow on missing arc (" + std::to_string(i) + "," +
                                                     std::to_string(j) + ")");
      fv.energy += g.resistances()(i, j) * phi.value(x);
      divergence += x * std::log(x / (out(i) * w));
    }
    fv.entropy += divergence;
    if (out(i) > 0.0) fv.node_divergence(i) = divergence / out(i);
  }

  if (spec.beta > 0.0) {
    fv.free_energy = fv.energy + fv.entropy / spec.beta;
  } else {
    const double scale = std::max(1.0, f.total_time());
    fv.free_energy = std::abs(fv.entropy) <= random_walk_tolerance * scale
                         ? fv.energy
                         : std::numeric_limits<double>::infinity();
  }
  return fv;
}

/// Multiplies every count by v; the result carries value v times the original value.
inline Flow scale_flow(const Flow& f, double v) {
  if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "flow value must be non-negative");
  Flow scaled = f;
  scaled.x *= v;
  scaled.value = f.value * v;
  return scaled;
}

/// alpha X + (1 - alpha) Y for two flows with the same endpoints and value.
inline Flow mix_flows(const Flow& a, const Flow& b, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "mixing weight must lie in [0,1]");
  if (a.size() != b.size() || a.source != b.source || a.target != b.target || a.value != b.value)
    throw Error(ErrorCode::IncompatibleEndpoints, "flows differ in size, endpoints or value");
  Flow mixed = a;
  mixed.x = alpha * a.x + (1.0 - alpha) * b.x;
  return mixed;
}

}  // namespace thermoflow
