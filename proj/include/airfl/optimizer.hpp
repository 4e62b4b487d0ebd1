#pragma once

#include <vector>

#include "airfl/channel.hpp"
#include "airfl/common.hpp"
#include "airfl/mse_model.hpp"
#include "airfl/scenario.hpp"
#include "airfl/subproblem.hpp"

namespace airfl {

// Per-dimension aggregation error (the Eq-22 MSE divided by D):
//   sigma^2/2 * zeta'zeta + (upsilon - K zeta)' rho (upsilon - K zeta).
inline double aggregation_objective(const Eigen::MatrixXd& gains,
                                    const Eigen::VectorXd& zeta,
                                    const Eigen::MatrixXd& rho,
                                    const Eigen::VectorXd& upsilon,
                                    double sigma2) {
  const Eigen::VectorXd residual = upsilon - gains * zeta;
  return sigma2 / 2.0 * zeta.squaredNorm() + residual.dot(rho * residual);
}

struct RoundedSolution {
  Eigen::MatrixXi alpha;   // binary coverage, M x N
  Eigen::MatrixXd gains;   // exact gain matrix K*
  Eigen::VectorXd zeta;    // re-optimized combiner for K*
  double mse_per_dim = 0.0;
};

// Rounds the relaxed solution back to binary coverage: alpha from the actual
// coverage test along u*, exact gains, and a fresh closed-form zeta. Reports
// the true per-dimension MSE of the rounded point.
inline RoundedSolution finalize_rounding(const Trajectory& traj,
                                         const Scenario& sc,
                                         const Eigen::MatrixXd& rho,
                                         const Eigen::VectorXd& upsilon,
                                         bool allow_minimum_norm = false) {
  traj.validate(sc.max_step());
  RoundedSolution out;
  const int m_dev = sc.num_devices();
  const int n_slots = traj.slots();
  out.alpha.resize(m_dev, n_slots);
  for (int n = 0; n < n_slots; ++n) {
    const Vec2& u = traj.points[static_cast<std::size_t>(n) + 1];
    for (int m = 0; m < m_dev; ++m)
      out.alpha(m, n) = coverage_indicator(u, sc.devices[static_cast<std::size_t>(m)],
                                           sc.uav.coverage_radius);
  }
  out.gains = gain_matrix(traj, sc);
  out.zeta = optimal_zeta(out.gains, rho, upsilon, sc.channel.noise_power,
                          allow_minimum_norm);
  out.mse_per_dim =
      aggregation_objective(out.gains, out.zeta, rho, upsilon, sc.channel.noise_power);
  return out;
}

struct TraceEntry {
  int outer_iter = 0;
  double objective = 0.0;  // Eq-23a scale
  double max_constraint_violation = 0.0;
  double zeta_norm = 0.0;
};

struct OptimizationResult {
  Trajectory trajectory;       // u*[0..N]
  Eigen::VectorXd zeta;        // zeta* for the rounded gains
  Eigen::MatrixXi alpha;       // rounded binary coverage
  Eigen::MatrixXd gains;       // exact K* of the rounded solution
  std::vector<TraceEntry> trace;  // entry 0 is the initialization
  int iterations = 0;
  bool converged = false;
  double relaxed_objective = 0.0;   // last trace value (Eq-23a scale)
  double rounded_mse_per_dim = 0.0; // true per-dimension MSE after rounding
};

struct AlternatingOptions {
  SubproblemOptions subproblem;
  bool allow_minimum_norm_zeta = false;
};

// Alternating optimization: (i) expand the coverage bound at the current
// trajectory and solve the convex (K, U) subproblem with zeta fixed,
// (ii) closed-form zeta update; repeat until the fractional objective
// decrease drops below epsilon or the outer budget runs out. Each block step
// cannot increase the objective, so the trace is non-increasing.
inline OptimizationResult optimize_alternating(const Scenario& sc,
                                               const Eigen::MatrixXd& rho,
                                               const Eigen::VectorXd& upsilon,
                                               const Trajectory& initial,
                                               const Eigen::VectorXd& initial_zeta,
                                               const AlternatingOptions& opt = {}) {
  require(initial.is_feasible(sc.max_step()),
          "optimize_alternating: infeasible initial trajectory");
  require(initial.slots() == sc.uav.n_slots,
          "optimize_alternating: initial trajectory slot count != scenario");
  require(initial_zeta.size() == sc.uav.n_slots,
          "optimize_alternating: initial zeta length != N");
  require(initial_zeta.allFinite(), "optimize_alternating: initial zeta not finite");

  Trajectory traj = initial;
  {
    // The start/end anchor is u_start; snap sub-micron config round-off.
    const double tol = 1e-9 * std::max(1.0, sc.uav.start.norm());
    require((traj.points.front() - sc.uav.start).norm() <= tol,
            "optimize_alternating: initial trajectory must start at u_start");
    traj.points.front() = sc.uav.start;
    traj.points.back() = sc.uav.start;
    traj.validate(sc.max_step());
  }

  const Eigen::MatrixXd rho_psd = floor_psd(((rho + rho.transpose()) / 2.0).eval());
  const double sigma2 = sc.channel.noise_power;

  OptimizationResult result;

  // Degenerate correlation: the objective reduces to sigma^2/2 * zeta'zeta,
  // minimized by zeta = 0 on any feasible trajectory.
  if (rho_psd.norm() == 0.0) {
    result.trajectory = traj;
    result.converged = true;
    const Eigen::VectorXd zeta0 = Eigen::VectorXd::Zero(sc.uav.n_slots);
    result.trace.push_back({0, 0.0, 0.0, 0.0});
    const RoundedSolution rounded =
        finalize_rounding(traj, sc, rho_psd, upsilon, true);
    result.zeta = Eigen::VectorXd::Zero(sc.uav.n_slots);
    result.alpha = rounded.alpha;
    result.gains = rounded.gains;
    result.rounded_mse_per_dim =
        aggregation_objective(rounded.gains, result.zeta, rho_psd, upsilon, sigma2);
    return result;
  }

  Eigen::VectorXd zeta = initial_zeta;
  // Initial relaxed gains: the coverage bound at the initial trajectory (the
  // tangent there equals the bound, so this is feasible by construction).
  SubproblemSpec spec = build_subproblem(traj, zeta, sc);
  Eigen::MatrixXd gains = spec.psi;

  double objective = aggregation_objective(gains, zeta, rho_psd, upsilon, sigma2);
  result.trace.push_back({0, objective,
                          subproblem_max_violation(spec, gains, traj), zeta.norm()});

  for (int iter = 1; iter <= sc.optimizer.max_outer_iters; ++iter) {
    for (int inner = 0; inner < sc.optimizer.inner_iters; ++inner) {
      spec = build_subproblem(traj, zeta, sc);
      SubproblemResult sub = solve_subproblem(spec, rho_psd, upsilon, gains,
                                              opt.subproblem);
      gains = std::move(sub.gains);
      traj = std::move(sub.trajectory);
    }
    zeta = optimal_zeta(gains, rho_psd, upsilon, sigma2, opt.allow_minimum_norm_zeta);

    const double next = aggregation_objective(gains, zeta, rho_psd, upsilon, sigma2);
    result.trace.push_back({iter, next,
                            subproblem_max_violation(spec, gains, traj), zeta.norm()});
    result.iterations = iter;

    const double decrease = (objective - next) / std::max(std::abs(objective), 1e-300);
    objective = next;
    if (decrease < sc.optimizer.epsilon) {
      result.converged = true;
      break;
    }
  }

  result.relaxed_objective = objective;
  result.trajectory = traj;

  const RoundedSolution rounded = finalize_rounding(traj, sc, rho_psd, upsilon,
                                                    opt.allow_minimum_norm_zeta);
  result.alpha = rounded.alpha;
  result.gains = rounded.gains;
  result.zeta = rounded.zeta;
  result.rounded_mse_per_dim = rounded.mse_per_dim;
  return result;
}

// Feasible starting path: the circle around the device barycenter passing
// through u_start when the per-slot arc allows it, otherwise hovering at
// u_start.
inline Trajectory initial_trajectory(const Scenario& sc) {
  const Vec2 center = barycenter(sc.devices, sc.weights);
  const double radius = (sc.uav.start - center).norm();
  const double arc = 2.0 * M_PI * radius / sc.uav.n_slots;
  if (radius > 0.0 && arc <= sc.max_step()) {
    Trajectory t = circular_trajectory(center, radius, sc);
    t.points.front() = sc.uav.start;
    t.points.back() = sc.uav.start;
    return t;
  }
  return hover_trajectory(sc.uav.start, sc.uav.n_slots);
}

struct CircularBaseline {
  Trajectory trajectory;
  Eigen::VectorXd zeta;
  Vec2 center;
  double radius = 0.0;
  double mse_per_dim = 0.0;
};

// Circular baseline with center and radius tuned by grid search over the
// device bounding box and the arc-feasible radius range, scored by the
// per-dimension MSE with the closed-form zeta.
inline CircularBaseline tuned_circular_trajectory(const Scenario& sc,
                                                  const Eigen::MatrixXd& rho,
                                                  const Eigen::VectorXd& upsilon,
                                                  int center_grid = 7,
                                                  int radius_grid = 8) {
  require(center_grid >= 1 && radius_grid >= 2,
          "tuned_circular_trajectory: grid sizes too small");
  const Eigen::MatrixXd rho_psd = floor_psd(((rho + rho.transpose()) / 2.0).eval());
  Vec2 lo = sc.devices.front(), hi = sc.devices.front();
  for (const auto& v : sc.devices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double r_max = sc.max_step() * sc.uav.n_slots / (2.0 * M_PI);

  CircularBaseline best;
  best.mse_per_dim = std::numeric_limits<double>::infinity();
  std::vector<Vec2> centers;
  centers.push_back(barycenter(sc.devices, sc.weights));
  for (int i = 0; i < center_grid; ++i) {
    for (int j = 0; j < center_grid; ++j) {
      const double fx = center_grid == 1 ? 0.5 : static_cast<double>(i) / (center_grid - 1);
      const double fy = center_grid == 1 ? 0.5 : static_cast<double>(j) / (center_grid - 1);
      centers.emplace_back(lo.x() + fx * (hi.x() - lo.x()),
                           lo.y() + fy * (hi.y() - lo.y()));
    }
  }
  for (const auto& center : centers) {
    for (int k = 0; k < radius_grid; ++k) {
      const double radius = r_max * k / (radius_grid - 1);
      const Trajectory traj = circular_trajectory(center, radius, sc);
      const Eigen::MatrixXd gains = gain_matrix(traj, sc);
      Eigen::VectorXd zeta;
      try {
        zeta = optimal_zeta(gains, rho_psd, upsilon, sc.channel.noise_power);
      } catch (const Error&) {
        continue;  // singular at sigma^2 = 0 with no coverage; not a candidate
      }
      const double score =
          aggregation_objective(gains, zeta, rho_psd, upsilon, sc.channel.noise_power);
      if (score < best.mse_per_dim) {
        best.trajectory = traj;
        best.zeta = zeta;
        best.center = center;
        best.radius = radius;
        best.mse_per_dim = score;
      }
    }
  }
  require(std::isfinite(best.mse_per_dim),
          "tuned_circular_trajectory: no feasible candidate");
  return best;
}

// Static ground PS modeled as an aerial-equivalent PS hovering at the device
// barycenter with the coverage limitation waived (alpha == 1 for everyone).
struct StaticPsBaseline {
  Trajectory trajectory;
  Eigen::MatrixXd gains;  // unmasked path-loss gains
  Vec2 position;
};

inline StaticPsBaseline static_ps_baseline(const Scenario& sc) {
  StaticPsBaseline out;
  out.position = barycenter(sc.devices, sc.weights);
  out.trajectory = hover_trajectory(out.position, sc.uav.n_slots);
  out.gains = gain_matrix_unmasked(out.trajectory, sc);
  return out;
}

}  // namespace airfl
