#pragma once

#include "airfl/common.hpp"

namespace airfl {

// Relaxed coverage gain bound as a function of squared horizontal distance s:
//   f(s) = d_thr^2 * sqrt(rho*P0) / ((d_thr^2 + s) * (z^2 + s)^(1/2)).
// Convex and decreasing in s, and equal to the true in-coverage gain at s = 0.
inline double coverage_bound(double s, double d_thr, double z, double rho_gain,
                             double tx_power) {
  require(s >= 0.0, "coverage_bound: s must be >= 0");
  const double a = sq(d_thr);
  return a * std::sqrt(rho_gain * tx_power) / ((a + s) * std::sqrt(sq(z) + s));
}

struct TangentCoefficients {
  double value;  // Psi   = f(s_tilde)
  double slope;  // Psi'  = df/ds at s_tilde (negative)
};

// First-order expansion of coverage_bound at s_tilde. The slope is the
// analytically exact derivative
//   Psi' = -d_thr^2 sqrt(rho*P0) (z^2 + d_thr^2/2 + (3/2) s_tilde)
//          / ((d_thr^2 + s_tilde)^2 (z^2 + s_tilde)^(3/2)),
// which makes Psi + Psi'(s - s_tilde) a global under-estimator of f (tangent
// of a convex function) with equality at the expansion point.
inline TangentCoefficients tangent_coefficients(double s_tilde, double d_thr,
                                                double z, double rho_gain,
                                                double tx_power) {
  require(s_tilde >= 0.0, "tangent_coefficients: s_tilde must be >= 0");
  const double a = sq(d_thr);
  const double b = sq(z);
  const double amp = a * std::sqrt(rho_gain * tx_power);
  TangentCoefficients t;
  t.value = amp / ((a + s_tilde) * std::sqrt(b + s_tilde));
  t.slope = -amp * (b + 0.5 * a + 1.5 * s_tilde) /
            (sq(a + s_tilde) * (b + s_tilde) * std::sqrt(b + s_tilde));
  return t;
}

// Slope as printed in some write-ups of this bound: the z^2 term appears as 1
// and the linear distance term is unsquared. Kept only for side-by-side
// comparison; tangent_coefficients carries the derivative that the
// finite-difference check validates.
inline double tangent_slope_as_printed(double s_tilde, double d_thr, double z,
                                       double rho_gain, double tx_power) {
  require(s_tilde >= 0.0, "tangent_slope_as_printed: s_tilde must be >= 0");
  const double a = sq(d_thr);
  const double b = sq(z);
  return -a * (1.0 + 0.5 * a + 1.5 * std::sqrt(s_tilde)) *
         std::sqrt(rho_gain * tx_power) /
         (sq(a + s_tilde) * (b + s_tilde) * std::sqrt(b + s_tilde));
}

}  // namespace airfl
