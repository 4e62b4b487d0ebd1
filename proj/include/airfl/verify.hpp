#pragma once

#include <string>
#include <vector>

#include "airfl/common.hpp"
#include "airfl/mse_model.hpp"
#include "airfl/rng.hpp"
#include "airfl/sca.hpp"
#include "airfl/scenario.hpp"

namespace airfl {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;   // worst observed metric (check-specific)
  double limit = 0.0;   // the tolerance it was held against
  std::string detail;
};

// Random aggregation instance at unit scale: correlation with unit diagonal,
// positive signal scales, nonnegative gains with a coverage-like zero
// pattern, and a combiner of matching magnitude.
struct RandomInstance {
  Eigen::MatrixXd rho;
  Eigen::VectorXd upsilon;
  Eigen::MatrixXd gains;
  Eigen::VectorXd zeta;
  double sigma2 = 0.0;
  int dim = 0;
};

inline RandomInstance make_random_instance(Rng& rng, int max_devices,
                                           int max_slots, int dim) {
  RandomInstance inst;
  const int m = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_devices - 1)));
  const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_slots - 1)));
  inst.dim = dim;

  // Correlation from a random factor, rescaled to unit diagonal.
  const int rank = std::max(2, m / 2 + 1);
  Eigen::MatrixXd factor(m, rank);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < rank; ++j) factor(i, j) = rng.gaussian();
  Eigen::MatrixXd rho = factor * factor.transpose();
  Eigen::VectorXd scale = rho.diagonal().cwiseSqrt().cwiseMax(1e-9);
  inst.rho = scale.cwiseInverse().asDiagonal() * rho * scale.cwiseInverse().asDiagonal();
  inst.rho = ((inst.rho + inst.rho.transpose()) / 2.0).eval();

  inst.upsilon.resize(m);
  for (int i = 0; i < m; ++i) inst.upsilon(i) = 0.2 + rng.uniform01();

  inst.gains.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      inst.gains(i, j) = rng.uniform01() < 0.35 ? 0.0 : rng.uniform01();

  inst.zeta.resize(n);
  for (int j = 0; j < n; ++j) inst.zeta(j) = rng.gaussian();

  inst.sigma2 = 0.05 + 0.5 * rng.uniform01();
  return inst;
}

// Analytic MSE vs. the sampling oracle, relative agreement.
inline CheckResult check_mse_monte_carlo(int instances, int trials, double tol,
                                         std::uint64_t seed, int max_devices = 20,
                                         int max_slots = 120, int dim = 100) {
  CheckResult res{"mse-monte-carlo-agreement", true, 0.0, tol, ""};
  Rng rng(derive_seed(seed, 0x6d636567ULL));
  for (int i = 0; i < instances; ++i) {
    const RandomInstance inst = make_random_instance(rng, max_devices, max_slots, dim);
    const double analytic = mse(inst.upsilon, inst.rho, inst.gains, inst.zeta,
                                inst.sigma2, inst.dim);
    const double sampled =
        mse_monte_carlo(inst.upsilon, inst.rho, inst.gains, inst.zeta,
                        inst.sigma2, inst.dim, trials,
                        derive_seed(seed, 0x7472ULL, static_cast<std::uint64_t>(i)));
    const double rel = std::abs(sampled - analytic) / std::max(analytic, 1e-300);
    if (rel > res.worst) {
      res.worst = rel;
      res.detail = "instance " + std::to_string(i) + ": analytic " +
                   format_double(analytic) + " vs sampled " + format_double(sampled);
    }
  }
  res.passed = res.worst <= tol;
  return res;
}

// zeta* beats random combiners and zeroes the analytic gradient.
inline CheckResult check_zeta_optimality(int instances, int random_zetas,
                                         std::uint64_t seed, int max_devices = 20,
                                         int max_slots = 120) {
  CheckResult res{"zeta-star-optimality", true, 0.0, 1e-8, ""};
  Rng rng(derive_seed(seed, 0x7a65746121ULL));
  for (int i = 0; i < instances; ++i) {
    const RandomInstance inst = make_random_instance(rng, max_devices, max_slots, 4);
    const Eigen::MatrixXd rho = floor_psd(inst.rho);
    const Eigen::VectorXd zeta_star =
        optimal_zeta(inst.gains, rho, inst.upsilon, inst.sigma2);
    const double best = mse(inst.upsilon, rho, inst.gains, zeta_star,
                            inst.sigma2, inst.dim);
    const double grad_norm =
        mse_zeta_gradient(inst.upsilon, rho, inst.gains, zeta_star, inst.sigma2)
            .norm();
    const double grad_rel = grad_norm / (1.0 + zeta_star.norm());
    if (grad_rel > res.worst) res.worst = grad_rel;
    if (grad_rel > res.limit) {
      res.passed = false;
      res.detail = "gradient norm " + format_double(grad_norm) + " at instance " +
                   std::to_string(i);
    }
    for (int k = 0; k < random_zetas; ++k) {
      Eigen::VectorXd zeta = zeta_star;
      for (int j = 0; j < zeta.size(); ++j)
        zeta(j) += (0.01 + rng.uniform01()) * rng.gaussian();
      const double other =
          mse(inst.upsilon, rho, inst.gains, zeta, inst.sigma2, inst.dim);
      if (other < best * (1.0 - 1e-12)) {
        res.passed = false;
        res.detail = "random zeta beat zeta* at instance " + std::to_string(i);
      }
    }
  }
  // Hand case M = N = 1, rho = 1, upsilon = 1, K = 1, sigma2 = 1.
  {
    Eigen::MatrixXd one(1, 1);
    one.setOnes();
    const Eigen::VectorXd zeta_star =
        optimal_zeta(one, one, Eigen::VectorXd::Ones(1), 1.0);
    if (std::abs(zeta_star(0) - 2.0 / 3.0) > 1e-15) {
      res.passed = false;
      res.detail = "hand case: zeta* = " + format_double(zeta_star(0)) + " != 2/3";
    }
  }
  return res;
}

// Tangent under-estimates the coverage bound everywhere and touches at the
// expansion point.
inline CheckResult check_tangent_bounds(const Scenario& sc, int pairs,
                                        double s_max, std::uint64_t seed) {
  CheckResult res{"sca-tangent-bounds", true, 0.0, 1e-12, ""};
  Rng rng(derive_seed(seed, 0x74616e67ULL));
  const double d = sc.uav.coverage_radius, z = sc.uav.altitude;
  const double rho_g = sc.channel.rho_gain, p0 = sc.channel.tx_power;
  for (int i = 0; i < pairs; ++i) {
    const double s_tilde = rng.uniform(0.0, s_max);
    const double s = rng.uniform(0.0, s_max);
    const TangentCoefficients tc = tangent_coefficients(s_tilde, d, z, rho_g, p0);
    const double f_s = coverage_bound(s, d, z, rho_g, p0);
    const double tangent = tc.value + tc.slope * (s - s_tilde);
    const double violation = (tangent - f_s) / std::max(f_s, 1e-300);
    if (violation > res.worst) res.worst = violation;
    if (violation > res.limit) {
      res.passed = false;
      res.detail = "tangent above bound at s_tilde=" + format_double(s_tilde) +
                   " s=" + format_double(s);
    }
    const double f_tilde = coverage_bound(s_tilde, d, z, rho_g, p0);
    const double eq_err = std::abs(tc.value - f_tilde) / std::max(f_tilde, 1e-300);
    if (eq_err > res.limit) {
      res.passed = false;
      res.detail = "expansion-point mismatch at s_tilde=" + format_double(s_tilde);
    }
  }
  return res;
}

// The implemented slope against central finite differences of the bound.
inline CheckResult check_tangent_slope_fd(const Scenario& sc, int points,
                                          double s_max) {
  CheckResult res{"tangent-slope-finite-difference", true, 0.0, 1e-6, ""};
  const double d = sc.uav.coverage_radius, z = sc.uav.altitude;
  const double rho_g = sc.channel.rho_gain, p0 = sc.channel.tx_power;
  for (int i = 0; i < points; ++i) {
    // Log-spaced expansion points from 1e-2 up to s_max.
    const double s_tilde =
        std::pow(10.0, -2.0 + (std::log10(s_max) + 2.0) * i / (points - 1));
    const double h = std::max(1.0, s_tilde) * 1e-6;
    const double fplus = coverage_bound(s_tilde + h, d, z, rho_g, p0);
    const double fminus = coverage_bound(std::max(s_tilde - h, 0.0), d, z, rho_g, p0);
    const double denom = s_tilde - h >= 0.0 ? 2.0 * h : h;
    const double fd = (fplus - fminus) / denom;
    const double slope = tangent_coefficients(s_tilde, d, z, rho_g, p0).slope;
    const double rel = std::abs(slope - fd) / std::max(std::abs(fd), 1e-300);
    if (rel > res.worst) {
      res.worst = rel;
      res.detail = "s_tilde=" + format_double(s_tilde);
    }
  }
  res.passed = res.worst <= res.limit;
  return res;
}

struct VerifyOptions {
  int mc_instances = 10;
  int mc_trials = 10000;
  double mc_tol = 0.02;
  int zeta_instances = 20;
  int zeta_random = 100;
  int tangent_pairs = 1000;
  double tangent_s_max = 8e6;
  int fd_points = 20;
  std::uint64_t seed = 1234;
};

inline std::vector<CheckResult> run_verification(const Scenario& sc,
                                                 const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  out.push_back(check_mse_monte_carlo(opt.mc_instances, opt.mc_trials, opt.mc_tol,
                                      opt.seed));
  out.push_back(check_zeta_optimality(opt.zeta_instances, opt.zeta_random, opt.seed));
  out.push_back(check_tangent_bounds(sc, opt.tangent_pairs, opt.tangent_s_max,
                                     opt.seed));
  out.push_back(check_tangent_slope_fd(sc, opt.fd_points, opt.tangent_s_max));
  return out;
}

}  // namespace airfl
