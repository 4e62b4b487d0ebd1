#pragma once

#include <complex>

#include "airfl/common.hpp"
#include "airfl/scenario.hpp"
#include "airfl/trajectory.hpp"

namespace airfl {

// 1 iff the device at v is within coverage of the UAV at u. The boundary is
// inclusive: a device exactly at distance d_thr transmits.
inline int coverage_indicator(const Vec2& u, const Vec2& v, double d_thr) {
  require(d_thr > 0.0, "coverage_indicator: d_thr must be > 0");
  return (u - v).squaredNorm() <= sq(d_thr) ? 1 : 0;
}

// LoS free-space channel: magnitude sqrt(rho / (z^2 + ||u-v||^2)), carrier
// phase supplied by the caller.
inline std::complex<double> channel_coefficient(const Vec2& u, const Vec2& v,
                                                double z, double rho_gain,
                                                double phase) {
  require(z > 0.0, "channel_coefficient: z must be > 0");
  require(rho_gain > 0.0, "channel_coefficient: rho must be > 0");
  const double mag = std::sqrt(rho_gain / (sq(z) + (u - v).squaredNorm()));
  return std::polar(mag, phase);
}

// Effective uplink magnitude for one device-slot pair, coverage applied:
// alpha * sqrt(rho*P0) / sqrt(z^2 + ||u-v||^2).
inline double effective_gain(const Vec2& u, const Vec2& v, double z,
                             double rho_gain, double tx_power, double d_thr) {
  if (!coverage_indicator(u, v, d_thr)) return 0.0;
  return std::sqrt(rho_gain * tx_power / (sq(z) + (u - v).squaredNorm()));
}

// M x N matrix of effective gains over slots 1..N (u[0] participates only in
// the closure constraint). Entries are zero exactly where coverage is zero.
inline Eigen::MatrixXd gain_matrix(const Trajectory& traj, const Scenario& sc) {
  traj.validate(sc.max_step());
  const int n_slots = traj.slots();
  const int m_devices = sc.num_devices();
  Eigen::MatrixXd gains(m_devices, n_slots);
  for (int n = 0; n < n_slots; ++n) {
    const Vec2& u = traj.points[static_cast<std::size_t>(n) + 1];
    for (int m = 0; m < m_devices; ++m) {
      gains(m, n) = effective_gain(u, sc.devices[static_cast<std::size_t>(m)],
                                   sc.uav.altitude, sc.channel.rho_gain,
                                   sc.channel.tx_power, sc.uav.coverage_radius);
    }
  }
  return gains;
}

// Same path-loss law with the coverage mask waived (alpha == 1 everywhere).
// Used by the static-PS baseline, whose coverage limitation is lifted.
inline Eigen::MatrixXd gain_matrix_unmasked(const Trajectory& traj,
                                            const Scenario& sc) {
  traj.validate(sc.max_step());
  const int n_slots = traj.slots();
  const int m_devices = sc.num_devices();
  Eigen::MatrixXd gains(m_devices, n_slots);
  for (int n = 0; n < n_slots; ++n) {
    const Vec2& u = traj.points[static_cast<std::size_t>(n) + 1];
    for (int m = 0; m < m_devices; ++m) {
      const Vec2& v = sc.devices[static_cast<std::size_t>(m)];
      gains(m, n) = std::sqrt(sc.channel.rho_gain * sc.channel.tx_power /
                              (sq(sc.uav.altitude) + (u - v).squaredNorm()));
    }
  }
  return gains;
}

}  // namespace airfl
