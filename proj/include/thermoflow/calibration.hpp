#pragma once

#include <thermoflow/centrality.hpp>
#include <thermoflow/error.hpp>
#include <thermoflow/flow.hpp>
#include <thermoflow/graph.hpp>
#include <thermoflow/solver.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace thermoflow {

/// Expected total time x_..(beta) along a grid of inverse temperatures.
struct AbacusCurve {
  std::vector<double> betas;
  std::vector<double> total_times;
  std::string graph_id;
  NodeId source = 0;
  NodeId target = 1;
};

inline AbacusCurve build_abacus(const Graph& g, NodeId s, NodeId t, const std::vector<double>& betas,
                                std::string graph_id = {}, const SolverOptions& opts = {}) {
  if (betas.empty()) throw Error(ErrorCode::InvalidArgument, "empty beta grid");
  if (!std::is_sorted(betas.begin(), betas.end()))
    throw Error(ErrorCode::InvalidArgument, "beta grid must be sorted ascending");
  AbacusCurve curve{betas, {}, std::move(graph_id), s, t};
  curve.total_times.reserve(betas.size());
  for (double beta : betas) {
    try {
      curve.total_times.push_back(solve_linear_flow(g, {s, t, beta}, opts).flow.total_time());
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (beta=" + std::to_string(beta) + ")");
    }
  }
  return curve;
}

/// True when total_times never increases by more than `tolerance` (relative).
inline bool is_non_increasing(const AbacusCurve& curve, double tolerance = 1e-12) {
  for (std::size_t k = 1; k < curve.total_times.size(); ++k)
    if (curve.total_times[k] > curve.total_times[k - 1] * (1.0 + tolerance)) return false;
  return true;
}

/// Reads a temperature off the abacus: piecewise-linear interpolation in ln beta.
/// A time equal to a grid value returns that grid point exactly.
inline double calibrate_from_total_time(const AbacusCurve& curve, double observed_time) {
  const auto& b = curve.betas;
  const auto& tt = curve.total_times;
  if (b.size() != tt.size() || b.empty())
    throw Error(ErrorCode::InvalidArgument, "malformed abacus curve");
  const auto [lo, hi] = std::minmax_element(tt.begin(), tt.end());
  if (!(observed_time >= *lo && observed_time <= *hi))
    throw Error(ErrorCode::OutsideCurveRange,
                "observed time " + std::to_string(observed_time) + " outside [" +
                    std::to_string(*lo) + ", " + std::to_string(*hi) + "]");
  for (std::size_t k = 0; k < tt.size(); ++k)
    if (tt[k] == observed_time) return 1.0 / b[k];
  for (std::size_t k = 0; k + 1 < tt.size(); ++k) {
    const double a = tt[k];
    const double c = tt[k + 1];
    if ((a - observed_time) * (c - observed_time) > 0.0) continue;
    const double fraction = (a - observed_time) / (a - c);
    double beta;
    if (b[k] > 0.0)
      beta = std::exp(std::log(b[k]) + fraction * (std::log(b[k + 1]) - std::log(b[k])));
    else
      beta = b[k] + fraction * (b[k + 1] - b[k]);
    return 1.0 / beta;
  }
  throw Error(ErrorCode::OutsideCurveRange, "observed time not bracketed by the curve");
}

enum class BracketPin { None, Lower, Upper };

struct EnergyCalibration {
  double temperature = 0.0;  // T_hat
  double beta = 0.0;         // 1 / T_hat
  double residual = 0.0;     // |U(X(T_hat)) - U(observed)|
  double bracket_lo = 1e-6;
  double bracket_hi = 1e3;
  bool monotone = true;
  BracketPin pinned = BracketPin::None;
  /// Every solution found on the dense fallback grid (only filled when not monotone).
  std::vector<double> crossings;
};

struct EnergyCalibrationOptions {
  double t_lo = 1e-6;
  double t_hi = 1e3;
  std::size_t check_points = 40;
  std::size_t dense_points = 400;
  /// Energies within this relative distance count as equal.
  double energy_tolerance = 1e-12;
  int max_bisections = 200;
  SolverOptions solver{};
};

namespace detail {

inline double optimal_energy(const Graph& g, NodeId s, NodeId t, double temperature,
                             const SolverOptions& opts) {
  const double beta = temperature > 0.0 && std::isfinite(temperature) ? 1.0 / temperature : 0.0;
  return solve_linear_flow(g, {s, t, beta}, opts).diagnostics.energy;
}

// Root of U(T) = target on [lo, hi] (U increasing there), bisected in ln T.
inline double bisect_temperature(const Graph& g, NodeId s, NodeId t, double target, double lo,
                                 double hi, const EnergyCalibrationOptions& opts) {
  double f_lo = optimal_energy(g, s, t, lo, opts.solver) - target;
  for (int it = 0; it < opts.max_bisections && hi / lo > 1.0 + 1e-14; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double f_mid = optimal_energy(g, s, t, mid, opts.solver) - target;
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

}  // namespace detail

/// Temperature at which the optimal flow has the same energy U as the observed flow.
inline EnergyCalibration calibrate_from_energy(const Graph& g, NodeId s, NodeId t, const Flow& observed,
                                               const EnergyCalibrationOptions& opts = {}) {
  if (observed.source != s || observed.target != t)
    throw Error(ErrorCode::IncompatibleEndpoints, "observed flow has other endpoints");
  if (!(opts.t_lo > 0.0 && opts.t_hi > opts.t_lo))
    throw Error(ErrorCode::InvalidArgument, "temperature bracket must satisfy 0 < lo < hi");
  const double u_obs = evaluate_functionals(g, {s, t, 1.0}, observed).energy;
  const double tol = opts.energy_tolerance * (1.0 + std::abs(u_obs));

  EnergyCalibration result;
  result.bracket_lo = opts.t_lo;
  result.bracket_hi = opts.t_hi;
  auto finish = [&](double temperature) {
    result.temperature = temperature;
    result.beta = 1.0 / temperature;
    result.residual = std::abs(detail::optimal_energy(g, s, t, temperature, opts.solver) - u_obs);
    return result;
  };

  const std::vector<double> grid = log_grid(opts.t_lo, opts.t_hi, opts.check_points);
  std::vector<double> energies;
  for (double temperature : grid) energies.push_back(detail::optimal_energy(g, s, t, temperature, opts.solver));
  const double u_random_walk = detail::optimal_energy(g, s, t, 0.0, opts.solver);
  for (std::size_t k = 1; k < energies.size(); ++k)
    if (energies[k] < energies[k - 1] - tol) result.monotone = false;

  const double u_lo = energies.front();
  const double u_hi = energies.back();
  if (u_obs < u_lo - tol || u_obs > u_random_walk + tol)
    throw Error(ErrorCode::TargetOutsideRange,
                "observed energy " + std::to_string(u_obs) + " outside [" + std::to_string(u_lo) +
                    ", " + std::to_string(u_random_walk) + "]");
  if (u_obs <= u_lo + tol) {
    result.pinned = BracketPin::Lower;
    return finish(opts.t_lo);
  }
  if (u_obs >= u_hi && result.monotone) {
    result.pinned = BracketPin::Upper;
    return finish(opts.t_hi);
  }

  if (result.monotone) {
    for (std::size_t k = 1; k < grid.size(); ++k)
      if (energies[k] >= u_obs)
        return finish(detail::bisect_temperature(g, s, t, u_obs, grid[k - 1], grid[k], opts));
  }

  // Non-monotone: scan a dense grid and keep every crossing.
  const std::vector<double> dense = log_grid(opts.t_lo, opts.t_hi, opts.dense_points);
  double previous = detail::optimal_energy(g, s, t, dense.front(), opts.solver) - u_obs;
  for (std::size_t k = 1; k < dense.size(); ++k) {
    const double current = detail::optimal_energy(g, s, t, dense[k], opts.solver) - u_obs;
    if ((previous <= 0.0) != (current <= 0.0))
      result.crossings.push_back(detail::bisect_temperature(g, s, t, u_obs, dense[k - 1], dense[k], opts));
    previous = current;
  }
  if (result.crossings.empty())
    throw Error(ErrorCode::NonBracketed, "no temperature in the bracket reproduces the observed energy");
  return finish(result.crossings.front());
}

}  // namespace thermoflow
