#pragma once

#include <complex>
#include <vector>

#include "airfl/channel.hpp"
#include "airfl/common.hpp"
#include "airfl/rng.hpp"
#include "airfl/scenario.hpp"

namespace airfl {

// D x M local gradients, one column per device. D must be even (the modulator
// pairs the two halves into C = D/2 complex entries).
struct GradientBatch {
  Eigen::MatrixXd values;  // D x M

  int dim() const { return static_cast<int>(values.rows()); }
  int num_devices() const { return static_cast<int>(values.cols()); }

  void validate() const {
    require(dim() >= 2 && dim() % 2 == 0, "GradientBatch: D must be even and >= 2");
    require(num_devices() >= 1, "GradientBatch: M >= 1 required");
  }
};

// Per-column standardized gradients plus the scalars needed to undo the
// normalization (transmitted losslessly out of band).
struct NormalizedBatch {
  Eigen::MatrixXd values;   // D x M, columns zero-mean unit-variance
  Eigen::VectorXd means;    // g_bar_m
  Eigen::VectorXd stds;     // sqrt(upsilon_m), population convention

  int dim() const { return static_cast<int>(values.rows()); }
  int num_devices() const { return static_cast<int>(values.cols()); }
};

// Column m becomes (g_m - mean_m) / std_m with population (divide-by-D)
// variance. A constant column has no scale to transmit; by default that is
// an error, with allow_zero_variance mapping it to a zero column with
// std 0 (which reconstructs exactly, since the mean scalar carries it).
inline NormalizedBatch normalize_gradients(const GradientBatch& batch,
                                           bool allow_zero_variance = false) {
  batch.validate();
  const int d = batch.dim();
  const int m_devices = batch.num_devices();
  NormalizedBatch out;
  out.values.resize(d, m_devices);
  out.means.resize(m_devices);
  out.stds.resize(m_devices);
  for (int m = 0; m < m_devices; ++m) {
    const auto col = batch.values.col(m);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / d;
    if (var == 0.0) {
      require(allow_zero_variance,
              "normalize_gradients: device " + std::to_string(m) +
                  " has a constant gradient (zero variance)");
      out.values.col(m).setZero();
      out.means(m) = mean;
      out.stds(m) = 0.0;
      continue;
    }
    const double std = std::sqrt(var);
    out.values.col(m) = (col.array() - mean) / std;
    out.means(m) = mean;
    out.stds(m) = std;
  }
  return out;
}

// r = g(1:C) + j*g(C+1:2C), C = D/2.
inline Eigen::VectorXcd modulate(const Eigen::VectorXd& g) {
  const int d = static_cast<int>(g.size());
  require(d >= 2 && d % 2 == 0, "modulate: D must be even and >= 2");
  const int c = d / 2;
  Eigen::VectorXcd r(c);
  r.real() = g.head(c);
  r.imag() = g.tail(c);
  return r;
}

inline Eigen::VectorXd demodulate(const Eigen::VectorXcd& r) {
  Eigen::VectorXd g(2 * r.size());
  g.head(r.size()) = r.real();
  g.tail(r.size()) = r.imag();
  return g;
}

// One complex C-vector per slot n = 1..N.
struct ReceivedSlots {
  std::vector<Eigen::VectorXcd> y;

  int num_slots() const { return static_cast<int>(y.size()); }
};

// Per-slot superposition y[n] = sum_m K_{m,n} r_m + noise, with noise entries
// circularly-symmetric complex Gaussian of total variance sigma^2.
//
// Each device transmits beta_m[n] * r_m with beta_m[n] = conj(theta) * sqrt(P0);
// the channel applies theta. The two phases compose additively, so the
// compensated channel-phase angle is exactly zero and only the magnitudes in
// K remain — the phase draws below are kept to pin the (m, n) stream layout.
inline ReceivedSlots simulate_partial_aggregation(const NormalizedBatch& batch,
                                                  const Eigen::MatrixXd& gains,
                                                  double sigma2,
                                                  std::uint64_t noise_seed) {
  require(sigma2 >= 0.0, "simulate_partial_aggregation: sigma2 must be >= 0");
  require(gains.rows() == batch.num_devices(),
          "simulate_partial_aggregation: gains rows != batch devices");
  const int n_slots = static_cast<int>(gains.cols());
  const int c = batch.dim() / 2;

  std::vector<Eigen::VectorXcd> symbols;
  symbols.reserve(static_cast<std::size_t>(batch.num_devices()));
  for (int m = 0; m < batch.num_devices(); ++m)
    symbols.push_back(modulate(batch.values.col(m)));

  ReceivedSlots out;
  out.y.resize(static_cast<std::size_t>(n_slots));
  const double noise_scale = std::sqrt(sigma2 / 2.0);
  for (int n = 0; n < n_slots; ++n) {
    Rng rng(derive_seed(noise_seed, 0x736c6f74ULL, static_cast<std::uint64_t>(n)));
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(c);
    for (int m = 0; m < batch.num_devices(); ++m) {
      const double channel_phase = rng.uniform(0.0, 2.0 * M_PI);
      const double compensation = -channel_phase;
      const std::complex<double> rotation = std::polar(1.0, channel_phase + compensation);
      if (gains(m, n) != 0.0) y += (gains(m, n) * rotation) * symbols[static_cast<std::size_t>(m)];
    }
    if (sigma2 > 0.0) {
      for (int i = 0; i < c; ++i)
        y(i) += std::complex<double>(noise_scale * rng.gaussian(),
                                     noise_scale * rng.gaussian());
    }
    out.y[static_cast<std::size_t>(n)] = std::move(y);
  }
  return out;
}

// a = sum_n zeta[n] y[n]; returns [Re a; Im a] + (sum_m b_m mean_m) * 1_D.
inline Eigen::VectorXd global_aggregate_and_reconstruct(
    const ReceivedSlots& slots, const Eigen::VectorXd& zeta,
    const Eigen::VectorXd& means, const std::vector<double>& weights) {
  require(zeta.size() == slots.num_slots(),
          "global_aggregate_and_reconstruct: zeta length != slot count");
  require(means.size() == static_cast<Eigen::Index>(weights.size()),
          "global_aggregate_and_reconstruct: means length != weights length");
  require(slots.num_slots() >= 1, "global_aggregate_and_reconstruct: no slots");
  const Eigen::Index c = slots.y.front().size();
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(c);
  for (int n = 0; n < slots.num_slots(); ++n)
    a += zeta(n) * slots.y[static_cast<std::size_t>(n)];
  double mean = 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m)
    mean += weights[m] * means(static_cast<Eigen::Index>(m));
  return demodulate(a).array() + mean;
}

struct RoundOutcome {
  Eigen::VectorXd estimate;  // g_hat
  Eigen::VectorXd error;     // sum_m b_m g_m - g_hat
};

inline RoundOutcome simulate_round_with_gains(const GradientBatch& batch,
                                              const Eigen::MatrixXd& gains,
                                              const Eigen::VectorXd& zeta,
                                              const Scenario& sc,
                                              std::uint64_t noise_seed,
                                              bool allow_zero_variance = false) {
  const NormalizedBatch normalized = normalize_gradients(batch, allow_zero_variance);
  const ReceivedSlots slots = simulate_partial_aggregation(
      normalized, gains, sc.channel.noise_power, noise_seed);
  RoundOutcome out;
  out.estimate = global_aggregate_and_reconstruct(slots, zeta, normalized.means,
                                                  sc.weights);
  Eigen::VectorXd ideal = Eigen::VectorXd::Zero(batch.dim());
  for (int m = 0; m < batch.num_devices(); ++m)
    ideal += sc.weights[static_cast<std::size_t>(m)] * batch.values.col(m);
  out.error = ideal - out.estimate;
  return out;
}

// Full uplink round: normalize -> modulate -> per-slot superposition ->
// global combining -> reconstruction, plus the error against the ideal
// weighted aggregate.
inline RoundOutcome simulate_round(const GradientBatch& batch,
                                   const Trajectory& traj,
                                   const Eigen::VectorXd& zeta,
                                   const Scenario& sc, std::uint64_t noise_seed,
                                   bool allow_zero_variance = false) {
  require(batch.num_devices() == sc.num_devices(),
          "simulate_round: batch devices != scenario devices");
  const Eigen::MatrixXd gains = gain_matrix(traj, sc);
  return simulate_round_with_gains(batch, gains, zeta, sc, noise_seed,
                                   allow_zero_variance);
}

}  // namespace airfl
