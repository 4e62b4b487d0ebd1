#pragma once

#include <vector>

#include "airfl/airphy.hpp"
#include "airfl/common.hpp"
#include "airfl/rng.hpp"

namespace airfl {

// rho_hat = G~' G~ / D, symmetrized to kill round-off asymmetry. With exactly
// normalized input the diagonal is 1 up to arithmetic noise.
inline Eigen::MatrixXd estimate_correlation(const NormalizedBatch& batch) {
  require(batch.dim() >= 1, "estimate_correlation: D >= 1 required");
  Eigen::MatrixXd rho =
      batch.values.transpose() * batch.values / static_cast<double>(batch.dim());
  return ((rho + rho.transpose()) / 2.0).eval();
}

// Clamps negative eigenvalues to zero. Finite-D sampling noise can leave the
// estimated correlation slightly indefinite, which breaks factorizations
// downstream; entries more negative than the tolerance are a caller bug.
inline Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& sym,
                                 double rel_tol = 1e-8) {
  require(sym.rows() == sym.cols(), "floor_psd: square matrix required");
  require(sym.isApprox(sym.transpose(), 1e-12), "floor_psd: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  require(eig.info() == Eigen::Success, "floor_psd: eigendecomposition failed");
  const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  require(eig.eigenvalues().minCoeff() >= -rel_tol * std::max(scale, 1e-300),
          "floor_psd: matrix is not PSD within tolerance");
  Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

// upsilon_m = b_m * sqrt(variance_m): the per-device signal scale the global
// combiner has to reproduce.
inline Eigen::VectorXd weighted_stds(const NormalizedBatch& batch,
                                     const std::vector<double>& weights) {
  require(batch.num_devices() == static_cast<int>(weights.size()),
          "weighted_stds: weights length != batch devices");
  Eigen::VectorXd v(batch.num_devices());
  for (int m = 0; m < batch.num_devices(); ++m)
    v(m) = weights[static_cast<std::size_t>(m)] * batch.stds(m);
  return v;
}

// Aggregation MSE: D*(upsilon - K zeta)' rho (upsilon - K zeta)
//                  + (D sigma^2 / 2) * zeta' zeta.
// The optimizer objective is this value divided by D.
inline double mse(const Eigen::VectorXd& upsilon, const Eigen::MatrixXd& rho,
                  const Eigen::MatrixXd& gains, const Eigen::VectorXd& zeta,
                  double sigma2, int dim) {
  require(rho.rows() == upsilon.size() && rho.cols() == upsilon.size(),
          "mse: rho dimensions mismatch upsilon");
  require(gains.rows() == upsilon.size(), "mse: gains rows != upsilon length");
  require(gains.cols() == zeta.size(), "mse: gains cols != zeta length");
  require(dim >= 1, "mse: D >= 1 required");
  require(sigma2 >= 0.0, "mse: sigma2 must be >= 0");
  const Eigen::VectorXd residual = upsilon - gains * zeta;
  return dim * residual.dot(rho * residual) +
         dim * sigma2 / 2.0 * zeta.squaredNorm();
}

// Closed-form optimal combiner:
//   zeta* = ((sigma^2/2) I + K' rho K)^{-1} K' rho upsilon,
// through a symmetric LDLT solve. With sigma^2 = 0 the system can be
// singular; the minimum-norm answer hides modeling bugs, so it is opt-in.
inline Eigen::VectorXd optimal_zeta(const Eigen::MatrixXd& gains,
                                    const Eigen::MatrixXd& rho,
                                    const Eigen::VectorXd& upsilon,
                                    double sigma2,
                                    bool allow_minimum_norm = false) {
  require(rho.rows() == upsilon.size() && rho.cols() == upsilon.size(),
          "optimal_zeta: rho dimensions mismatch upsilon");
  require(gains.rows() == upsilon.size(), "optimal_zeta: gains rows != upsilon");
  require(sigma2 >= 0.0, "optimal_zeta: sigma2 must be >= 0");
  const Eigen::MatrixXd rho_k = rho * gains;
  Eigen::MatrixXd normal = gains.transpose() * rho_k;
  normal = ((normal + normal.transpose()) / 2.0).eval();
  normal.diagonal().array() += sigma2 / 2.0;
  const Eigen::VectorXd rhs = rho_k.transpose() * upsilon;
  if (sigma2 > 0.0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    require(ldlt.info() == Eigen::Success, "optimal_zeta: LDLT failed");
    return ldlt.solve(rhs);
  }
  // sigma2 == 0: accept only if the normal system is solvable.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(normal);
  const Eigen::VectorXd zeta = cod.solve(rhs);
  const double residual = (normal * zeta - rhs).norm();
  const double scale = std::max(rhs.norm(), 1e-300);
  if (!allow_minimum_norm) {
    require(cod.rank() == normal.rows(),
            "optimal_zeta: singular system at sigma2 = 0; pass "
            "allow_minimum_norm to accept the minimum-norm solution");
  }
  require(residual <= 1e-8 * scale + 1e-300,
          "optimal_zeta: normal equations inconsistent at sigma2 = 0");
  return zeta;
}

// Gradient of the Eq-23a-scale objective (mse / D) in zeta; vanishes at
// zeta*. Used by optimality checks.
inline Eigen::VectorXd mse_zeta_gradient(const Eigen::VectorXd& upsilon,
                                         const Eigen::MatrixXd& rho,
                                         const Eigen::MatrixXd& gains,
                                         const Eigen::VectorXd& zeta,
                                         double sigma2) {
  return sigma2 * zeta - 2.0 * gains.transpose() * (rho * (upsilon - gains * zeta));
}

// Factor L with rho = L L' for sampling. Plain Cholesky when possible,
// eigenvalue-floored square root otherwise.
inline Eigen::MatrixXd psd_sampling_factor(const Eigen::MatrixXd& rho,
                                           double rel_tol = 1e-8) {
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
  require(eig.info() == Eigen::Success, "psd_sampling_factor: eigensolver failed");
  const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  require(eig.eigenvalues().minCoeff() >= -rel_tol * std::max(scale, 1e-300),
          "psd_sampling_factor: matrix is not PSD within tolerance");
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lam.asDiagonal();
}

// Monte-Carlo estimate of E||e||^2 under the gradient-correlation model:
// draws D rows z_d ~ N(0, rho), forms e = G~ (upsilon - K zeta) - noise sum
// and averages ||e||^2 over trials. The per-slot AWGN combination
// sum_n zeta[n] n_r[n] is a zero-mean Gaussian with per-entry variance
// (sigma^2/2)*||zeta||^2, and is drawn as such in one shot — distributionally
// identical to drawing N slot vectors. Trials are independently seeded, so
// the average is order-independent; pairwise summation keeps the reduction
// reproducible under regrouping.
inline double mse_monte_carlo(const Eigen::VectorXd& upsilon,
                              const Eigen::MatrixXd& rho,
                              const Eigen::MatrixXd& gains,
                              const Eigen::VectorXd& zeta, double sigma2,
                              int dim, int trials, std::uint64_t seed) {
  require(trials >= 1, "mse_monte_carlo: trials >= 1 required");
  require(dim >= 1, "mse_monte_carlo: D >= 1 required");
  require(sigma2 >= 0.0, "mse_monte_carlo: sigma2 must be >= 0");
  const Eigen::MatrixXd factor = psd_sampling_factor(rho);
  const Eigen::VectorXd residual = upsilon - gains * zeta;
  // z_d' residual == g' (L' residual) for g std normal, z_d = L g.
  const Eigen::VectorXd projected = factor.transpose() * residual;
  const double noise_std = std::sqrt(sigma2 / 2.0) * zeta.norm();
  const int m_devices = static_cast<int>(projected.size());

  std::vector<double> per_trial(static_cast<std::size_t>(trials));
  Eigen::VectorXd g(m_devices);
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, 0x6d63ULL, static_cast<std::uint64_t>(trial)));
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) {
      for (int m = 0; m < m_devices; ++m) g(m) = rng.gaussian();
      double e = g.dot(projected);
      if (noise_std > 0.0) e -= noise_std * rng.gaussian();
      acc += e * e;
    }
    per_trial[static_cast<std::size_t>(trial)] = acc;
  }
  return pairwise_mean(per_trial);
}

}  // namespace airfl
