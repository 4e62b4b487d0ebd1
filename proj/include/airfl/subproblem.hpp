#pragma once

#include <limits>
#include <vector>

#include "airfl/common.hpp"
#include "airfl/sca.hpp"
#include "airfl/scenario.hpp"
#include "airfl/trajectory.hpp"

namespace airfl {

// One SCA subproblem: minimize over (K, u[1..N])
//     zeta~' K' rho K zeta~  -  2 upsilon' rho K zeta~
// subject to
//     0 <= K_{m,n} <= Psi_{m,n} + Psi'_{m,n} (||u[n]-v_m||^2 - s~_{m,n}),
//     u[0] = u[N] = anchor,   ||u[n+1]-u[n]||^2 <= max_step^2.
// The tangent upper bound is concave in u (Psi' < 0), so the problem is
// convex. Built by expanding the coverage bound at the current trajectory.
struct SubproblemSpec {
  std::vector<Vec2> devices;   // v_m
  Trajectory expansion;        // u~[0..N]; endpoints pinned to anchor
  Eigen::VectorXd zeta;        // fixed zeta~, length N
  Eigen::MatrixXd psi;         // M x N tangent values, > 0
  Eigen::MatrixXd psi_slope;   // M x N tangent slopes, < 0
  Eigen::MatrixXd s_tilde;     // M x N expansion squared distances
  Vec2 anchor;                 // u_start
  double max_step = 0.0;       // V_max * delta

  int num_devices() const { return static_cast<int>(devices.size()); }
  int num_slots() const { return static_cast<int>(zeta.size()); }

  // Tangent upper bound for device m at slot n when the UAV sits at u.
  double bound(int m, int n, const Vec2& u) const {
    const double s = (u - devices[static_cast<std::size_t>(m)]).squaredNorm();
    return psi(m, n) + psi_slope(m, n) * (s - s_tilde(m, n));
  }

  void validate() const {
    const int m_dev = num_devices();
    const int n_slots = num_slots();
    require(m_dev >= 1 && n_slots >= 1, "SubproblemSpec: empty problem");
    require(psi.rows() == m_dev && psi.cols() == n_slots &&
                psi_slope.rows() == m_dev && psi_slope.cols() == n_slots &&
                s_tilde.rows() == m_dev && s_tilde.cols() == n_slots,
            "SubproblemSpec: coefficient shapes mismatch");
    require(static_cast<int>(expansion.points.size()) == n_slots + 1,
            "SubproblemSpec: expansion length != N+1");
    expansion.validate(max_step);
    require((expansion.points.front() - anchor).norm() == 0.0,
            "SubproblemSpec: expansion does not start at the anchor");
    require((psi.array() > 0.0).all(), "SubproblemSpec: Psi must be > 0");
    require((psi_slope.array() < 0.0).all(), "SubproblemSpec: Psi' must be < 0");
  }
};

inline SubproblemSpec build_subproblem(const Trajectory& expansion,
                                       const Eigen::VectorXd& zeta,
                                       const Scenario& sc) {
  const int m_dev = sc.num_devices();
  const int n_slots = expansion.slots();
  require(zeta.size() == n_slots, "build_subproblem: zeta length != N");
  SubproblemSpec spec;
  spec.devices = sc.devices;
  spec.expansion = expansion;
  spec.zeta = zeta;
  spec.anchor = expansion.points.front();
  spec.max_step = sc.max_step();
  spec.psi.resize(m_dev, n_slots);
  spec.psi_slope.resize(m_dev, n_slots);
  spec.s_tilde.resize(m_dev, n_slots);
  for (int n = 0; n < n_slots; ++n) {
    const Vec2& u = expansion.points[static_cast<std::size_t>(n) + 1];
    for (int m = 0; m < m_dev; ++m) {
      const double s = (u - sc.devices[static_cast<std::size_t>(m)]).squaredNorm();
      const TangentCoefficients tc =
          tangent_coefficients(s, sc.uav.coverage_radius, sc.uav.altitude,
                               sc.channel.rho_gain, sc.channel.tx_power);
      spec.s_tilde(m, n) = s;
      spec.psi(m, n) = tc.value;
      spec.psi_slope(m, n) = tc.slope;
    }
  }
  spec.validate();
  return spec;
}

// q(K) = zeta~' K' rho K zeta~ - 2 upsilon' rho K zeta~ (the subproblem
// objective; differs from the full Eq-23a-scale objective by constants).
inline double subproblem_objective(const Eigen::MatrixXd& gains,
                                   const Eigen::VectorXd& zeta,
                                   const Eigen::MatrixXd& rho,
                                   const Eigen::VectorXd& upsilon) {
  const Eigen::VectorXd w = gains * zeta;
  return w.dot(rho * w) - 2.0 * upsilon.dot(rho * w);
}

// Largest raw violation over all subproblem constraint families (0 when the
// point is feasible). Diagnostic only.
inline double subproblem_max_violation(const SubproblemSpec& spec,
                                       const Eigen::MatrixXd& gains,
                                       const Trajectory& traj) {
  double worst = (traj.points.front() - spec.anchor).norm();
  worst = std::max(worst, (traj.points.back() - spec.anchor).norm());
  const double limit = sq(spec.max_step);
  for (std::size_t n = 0; n + 1 < traj.points.size(); ++n)
    worst = std::max(worst,
                     (traj.points[n + 1] - traj.points[n]).squaredNorm() - limit);
  for (int n = 0; n < spec.num_slots(); ++n) {
    const Vec2& u = traj.points[static_cast<std::size_t>(n) + 1];
    for (int m = 0; m < spec.num_devices(); ++m) {
      worst = std::max(worst, -gains(m, n));
      worst = std::max(worst, gains(m, n) - spec.bound(m, n, u));
    }
  }
  return std::max(worst, 0.0);
}

struct SubproblemOptions {
  double tol_kkt = 1e-6;      // duality-gap target, relative to 1+|objective|
  int max_newton_steps = 500;
  double barrier_mu = 20.0;   // t multiplier per stage
  double newton_tol = 1e-11;  // stop stage when decrement^2/2 below this
  int max_inner_steps = 60;
};

struct SubproblemResult {
  Eigen::MatrixXd gains;   // K+
  Trajectory trajectory;   // u+[0..N]
  double objective = 0.0;  // q at the returned point (natural units)
  double kkt_residual = 0.0;
  int newton_steps = 0;
  bool converged = false;
};

// Log-barrier interior method. The Newton system is solved by eliminating
// the K block: its Hessian is diag + (zeta zeta') (x) (2t rho), inverted with
// the Woodbury identity (one M x M solve), and the trajectory block goes
// through a dense Schur complement of size 2(N-1). Iterates stay strictly
// feasible throughout, so the best point so far is always returnable.
class SubproblemSolver {
 public:
  SubproblemSolver(const SubproblemSpec& spec, const Eigen::MatrixXd& rho,
                   const Eigen::VectorXd& upsilon)
      : spec_(spec), m_(spec.num_devices()), n_(spec.num_slots()),
        free_(std::max(0, n_ - 1)) {
    spec_.validate();
    require(rho.rows() == m_ && rho.cols() == m_,
            "solve_subproblem: rho dimensions mismatch");
    require(upsilon.size() == m_, "solve_subproblem: upsilon length mismatch");

    // Internal scaling: gains in units of the largest tangent value, lengths
    // in units of max_step, upsilon in units of its largest entry. Keeps the
    // barrier Hessian blocks near unit scale.
    gain_scale_ = std::max(spec_.psi.maxCoeff(), 1e-300);
    len_scale_ = spec_.max_step;
    ups_scale_ = upsilon.cwiseAbs().maxCoeff();
    if (ups_scale_ <= 0.0) ups_scale_ = 1.0;

    rho_ = rho;
    upsilon_hat_ = upsilon / ups_scale_;
    zeta_hat_ = spec_.zeta * (gain_scale_ / ups_scale_);
    psi_hat_ = spec_.psi / gain_scale_;
    slope_hat_ = spec_.psi_slope * (sq(len_scale_) / gain_scale_);
    s_tilde_hat_ = spec_.s_tilde / sq(len_scale_);
    devices_hat_.resize(static_cast<std::size_t>(m_));
    for (int m = 0; m < m_; ++m)
      devices_hat_[static_cast<std::size_t>(m)] =
          spec_.devices[static_cast<std::size_t>(m)] / len_scale_;
    anchor_hat_ = spec_.anchor / len_scale_;
    n_speed_ = n_ >= 2 ? n_ : 0;  // with N = 1 both endpoints are pinned
    n_constraints_ = 2 * m_ * n_ + n_speed_;
  }

  SubproblemResult solve(const Eigen::MatrixXd& warm_gains,
                         const SubproblemOptions& opt) {
    require(warm_gains.rows() == m_ && warm_gains.cols() == n_,
            "solve_subproblem: warm-start gain shape mismatch");
    // Warm start must be feasible for the subproblem (small relative slack
    // for round-off); the expansion point always is.
    {
      const double tol = 1e-9 * gain_scale_;
      for (int n = 0; n < n_; ++n) {
        const Vec2& u = spec_.expansion.points[static_cast<std::size_t>(n) + 1];
        for (int m = 0; m < m_; ++m) {
          require(warm_gains(m, n) >= -tol &&
                      warm_gains(m, n) <= spec_.bound(m, n, u) + tol,
                  "solve_subproblem: infeasible warm start at (m=" +
                      std::to_string(m) + ", n=" + std::to_string(n + 1) + ")");
        }
      }
    }

    const double warm_objective =
        subproblem_objective(warm_gains, spec_.zeta, rho_, upsilon_hat_ * ups_scale_);

    SubproblemResult result;
    result.gains = warm_gains;
    result.trajectory = spec_.expansion;
    result.objective = warm_objective;

    // Degenerate objective: nothing depends on K, the warm start is optimal.
    if (zeta_hat_.norm() == 0.0 || rho_.norm() == 0.0) {
      result.converged = true;
      return result;
    }

    init_point(warm_gains);

    const double obj_scale = sq(ups_scale_);
    double t = 1.0;
    {
      const double q0 = std::abs(objective_scaled());
      t = std::max(1.0, static_cast<double>(n_constraints_) / (q0 + 1.0) * 0.1);
    }

    int total_steps = 0;
    bool gap_met = false;
    for (int stage = 0; stage < 64 && !gap_met; ++stage) {
      for (int inner = 0; inner < opt.max_inner_steps; ++inner) {
        if (total_steps >= opt.max_newton_steps) break;
        const double dec = newton_step(t);
        ++total_steps;
        if (dec < 0.0) break;  // stalled line search
        if (dec / 2.0 <= opt.newton_tol) break;
      }
      const double obj_nat = objective_scaled() * obj_scale;
      const double gap_nat = obj_scale * static_cast<double>(n_constraints_) / t;
      if (gap_nat <= opt.tol_kkt * (1.0 + std::abs(obj_nat))) {
        gap_met = true;
        result.kkt_residual = gap_nat;
      } else if (total_steps >= opt.max_newton_steps) {
        result.kkt_residual = gap_nat;
        break;
      } else {
        t *= opt.barrier_mu;
      }
    }

    result.newton_steps = total_steps;
    result.converged = gap_met;

    // Extract the candidate and keep whichever of {candidate, warm start} is
    // better; the candidate is strictly feasible by construction.
    Eigen::MatrixXd cand_gains = kappa_ * gain_scale_;
    Trajectory cand_traj = spec_.expansion;
    for (int j = 0; j < free_; ++j)
      cand_traj.points[static_cast<std::size_t>(j) + 1] =
          Vec2(x_(2 * j), x_(2 * j + 1)) * len_scale_;
    cand_traj.points.front() = spec_.anchor;
    cand_traj.points.back() = spec_.anchor;
    const double cand_objective =
        subproblem_objective(cand_gains, spec_.zeta, rho_, upsilon_hat_ * ups_scale_);
    if (cand_objective <= warm_objective) {
      result.gains = std::move(cand_gains);
      result.trajectory = std::move(cand_traj);
      result.objective = cand_objective;
    }
    return result;
  }

 private:
  // --- problem data (scaled) ---
  SubproblemSpec spec_;
  int m_, n_, free_;
  int n_speed_ = 0, n_constraints_ = 0;
  double gain_scale_ = 1.0, len_scale_ = 1.0, ups_scale_ = 1.0;
  Eigen::MatrixXd rho_;
  Eigen::VectorXd upsilon_hat_, zeta_hat_;
  Eigen::MatrixXd psi_hat_, slope_hat_, s_tilde_hat_;
  std::vector<Vec2> devices_hat_;
  Vec2 anchor_hat_;

  // --- iterate ---
  Eigen::MatrixXd kappa_;  // M x N scaled gains, strictly inside (0, bound)
  Eigen::VectorXd x_;      // 2*(N-1) free waypoint coordinates

  Vec2 waypoint(int n) const {
    if (n <= 0 || n >= n_) return anchor_hat_;
    return Vec2(x_(2 * (n - 1)), x_(2 * (n - 1) + 1));
  }

  double bound_hat(int m, int n, const Vec2& u) const {
    const double s = (u - devices_hat_[static_cast<std::size_t>(m)]).squaredNorm();
    return psi_hat_(m, n) + slope_hat_(m, n) * (s - s_tilde_hat_(m, n));
  }

  void init_point(const Eigen::MatrixXd& warm_gains) {
    // Free waypoints from the expansion, contracted toward the anchor just
    // enough to leave every speed constraint strictly slack.
    x_.resize(2 * free_);
    double max_chord = 0.0;
    for (int n = 0; n + 1 <= n_; ++n) {
      const Vec2 a = spec_.expansion.points[static_cast<std::size_t>(n)] / len_scale_;
      const Vec2 b = spec_.expansion.points[static_cast<std::size_t>(n) + 1] / len_scale_;
      max_chord = std::max(max_chord, (b - a).norm());
    }
    double shrink = 1.0;
    if (max_chord >= 1.0 - 1e-9) shrink = (1.0 - 1e-9) / std::max(max_chord, 1e-300);
    for (int j = 0; j < free_; ++j) {
      const Vec2 u = spec_.expansion.points[static_cast<std::size_t>(j) + 1] / len_scale_;
      const Vec2 v = anchor_hat_ + shrink * (u - anchor_hat_);
      x_(2 * j) = v.x();
      x_(2 * j + 1) = v.y();
    }
    // Gains clamped strictly inside their (positive) intervals.
    kappa_.resize(m_, n_);
    for (int n = 0; n < n_; ++n) {
      const Vec2 u = waypoint(n + 1);
      for (int m = 0; m < m_; ++m) {
        const double b = bound_hat(m, n, u);
        require(b > 0.0, "solve_subproblem: internal: nonpositive bound at start");
        const double lo = 1e-4 * b;
        const double hi = (1.0 - 1e-4) * b;
        kappa_(m, n) = std::min(std::max(warm_gains(m, n) / gain_scale_, lo), hi);
      }
    }
  }

  double objective_scaled() const {
    const Eigen::VectorXd w = kappa_ * zeta_hat_;
    return w.dot(rho_ * w) - 2.0 * upsilon_hat_.dot(rho_ * w);
  }

  // Barrier value at (kappa, x); +inf when any slack is nonpositive.
  double barrier_value(double t, const Eigen::MatrixXd& kappa,
                       const Eigen::VectorXd& x) const {
    double logs = 0.0;
    for (int n = 0; n < n_; ++n) {
      const Vec2 u = waypoint_of(x, n + 1);
      for (int m = 0; m < m_; ++m) {
        const double k = kappa(m, n);
        const double g = bound_hat(m, n, u) - k;
        if (k <= 0.0 || g <= 0.0) return std::numeric_limits<double>::infinity();
        logs += std::log(k) + std::log(g);
      }
    }
    for (int n = 0; n < n_speed_; ++n) {
      const double c = 1.0 - (waypoint_of(x, n + 1) - waypoint_of(x, n)).squaredNorm();
      if (c <= 0.0) return std::numeric_limits<double>::infinity();
      logs += std::log(c);
    }
    const Eigen::VectorXd w = kappa * zeta_hat_;
    const double q = w.dot(rho_ * w) - 2.0 * upsilon_hat_.dot(rho_ * w);
    return t * q - logs;
  }

  Vec2 waypoint_of(const Eigen::VectorXd& x, int n) const {
    if (n <= 0 || n >= n_) return anchor_hat_;
    return Vec2(x(2 * (n - 1)), x(2 * (n - 1) + 1));
  }

  // One damped Newton step on the barrier at parameter t. Returns the Newton
  // decrement (lambda^2), or -1 if the line search failed to move.
  double newton_step(double t) {
    const Eigen::VectorXd w = kappa_ * zeta_hat_;
    const Eigen::VectorXd r = rho_ * (w - upsilon_hat_);

    // Slack data.
    Eigen::MatrixXd slack_g(m_, n_);   // bound - kappa
    std::vector<Vec2> dvec(static_cast<std::size_t>(m_ * n_));  // dB/du[n]
    for (int n = 0; n < n_; ++n) {
      const Vec2 u = waypoint(n + 1);
      for (int m = 0; m < m_; ++m) {
        slack_g(m, n) = bound_hat(m, n, u) - kappa_(m, n);
        dvec[static_cast<std::size_t>(m * n_ + n)] =
            2.0 * slope_hat_(m, n) * (u - devices_hat_[static_cast<std::size_t>(m)]);
      }
    }

    // K-block gradient and diagonal.
    Eigen::MatrixXd grad_k(m_, n_), diag(m_, n_);
    for (int n = 0; n < n_; ++n) {
      for (int m = 0; m < m_; ++m) {
        grad_k(m, n) = 2.0 * t * r(m) * zeta_hat_(n) - 1.0 / kappa_(m, n) +
                       1.0 / slack_g(m, n);
        diag(m, n) = 1.0 / sq(kappa_(m, n)) + 1.0 / sq(slack_g(m, n));
      }
    }

    // Trajectory-block gradient and Hessian (free waypoints only).
    Eigen::VectorXd grad_u = Eigen::VectorXd::Zero(2 * free_);
    Eigen::MatrixXd h_uu = Eigen::MatrixXd::Zero(2 * free_, 2 * free_);
    for (int n = 1; n <= n_ - 1; ++n) {
      const int j = n - 1;
      Eigen::Vector2d gsum = Eigen::Vector2d::Zero();
      Eigen::Matrix2d hsum = Eigen::Matrix2d::Zero();
      for (int m = 0; m < m_; ++m) {
        const Vec2& d = dvec[static_cast<std::size_t>(m * n_ + (n - 1))];
        const double g = slack_g(m, n - 1);
        gsum -= d / g;
        hsum += (d * d.transpose()) / sq(g);
        hsum -= (2.0 * slope_hat_(m, n - 1) / g) * Eigen::Matrix2d::Identity();
      }
      grad_u.segment<2>(2 * j) += gsum;
      h_uu.block<2, 2>(2 * j, 2 * j) += hsum;
    }
    for (int n = 0; n < n_speed_; ++n) {
      const Vec2 delta = waypoint(n + 1) - waypoint(n);
      const double c = 1.0 - delta.squaredNorm();
      const Eigen::Matrix2d blk =
          (2.0 / c) * Eigen::Matrix2d::Identity() +
          (4.0 / sq(c)) * (delta * delta.transpose());
      const bool lo_free = n >= 1 && n <= n_ - 1;
      const bool hi_free = n + 1 >= 1 && n + 1 <= n_ - 1;
      if (lo_free) {
        grad_u.segment<2>(2 * (n - 1)) -= 2.0 * delta / c;
        h_uu.block<2, 2>(2 * (n - 1), 2 * (n - 1)) += blk;
      }
      if (hi_free) {
        grad_u.segment<2>(2 * n) += 2.0 * delta / c;
        h_uu.block<2, 2>(2 * n, 2 * n) += blk;
      }
      if (lo_free && hi_free) {
        h_uu.block<2, 2>(2 * (n - 1), 2 * n) -= blk;
        h_uu.block<2, 2>(2 * n, 2 * (n - 1)) -= blk;
      }
    }

    // Woodbury pieces for H_kk = diag + (zeta zeta') (x) (2t rho).
    const Eigen::MatrixXd s_mat = 2.0 * t * rho_;
    Eigen::VectorXd w_diag = Eigen::VectorXd::Zero(m_);
    for (int n = 0; n < n_; ++n)
      w_diag += sq(zeta_hat_(n)) * diag.col(n).cwiseInverse();
    Eigen::MatrixXd core = Eigen::MatrixXd::Identity(m_, m_) + w_diag.asDiagonal() * s_mat;
    Eigen::PartialPivLU<Eigen::MatrixXd> core_lu(core);
    const Eigen::MatrixXd s_core = s_mat * core_lu.inverse();  // S (I + W S)^{-1}

    const auto apply_hkk_inv = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
      const Eigen::MatrixXd v1 = v.cwiseQuotient(diag);
      const Eigen::VectorXd y = v1 * zeta_hat_;
      const Eigen::VectorXd z2 = s_core * y;
      return v1 - (z2 * zeta_hat_.transpose()).cwiseQuotient(diag);
    };

    Eigen::VectorXd dx = Eigen::VectorXd::Zero(2 * free_);
    Eigen::MatrixXd dk;
    if (free_ > 0) {
      // Schur complement on the trajectory block.
      Eigen::MatrixXd e_mat = Eigen::MatrixXd::Zero(2 * free_, m_);
      Eigen::MatrixXd schur = h_uu;
      for (int n = 1; n <= n_ - 1; ++n) {
        const int j = n - 1;
        Eigen::Matrix2d bd = Eigen::Matrix2d::Zero();
        for (int m = 0; m < m_; ++m) {
          const Vec2& d = dvec[static_cast<std::size_t>(m * n_ + (n - 1))];
          const Vec2 h = -d / sq(slack_g(m, n - 1));  // H_ku entry
          const double inv_d = 1.0 / diag(m, n - 1);
          bd += inv_d * (h * h.transpose());
          e_mat.block<2, 1>(2 * j, m) = zeta_hat_(n - 1) * inv_d * h;
        }
        schur.block<2, 2>(2 * j, 2 * j) -= bd;
      }
      schur += e_mat * s_core * e_mat.transpose();

      // rhs_u = -grad_u + H_ku' H_kk^{-1} grad_k
      const Eigen::MatrixXd hkkinv_gk = apply_hkk_inv(grad_k);
      Eigen::VectorXd rhs_u = -grad_u;
      for (int n = 1; n <= n_ - 1; ++n) {
        const int j = n - 1;
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int m = 0; m < m_; ++m) {
          const Vec2& d = dvec[static_cast<std::size_t>(m * n_ + (n - 1))];
          acc += (-d / sq(slack_g(m, n - 1))) * hkkinv_gk(m, n - 1);
        }
        rhs_u.segment<2>(2 * j) += acc;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
      if (ldlt.info() != Eigen::Success) {
        schur.diagonal().array() += 1e-10 * (1.0 + schur.diagonal().maxCoeff());
        ldlt.compute(schur);
        require(ldlt.info() == Eigen::Success,
                "solve_subproblem: Schur factorization failed");
      }
      dx = ldlt.solve(rhs_u);

      // dk = -H_kk^{-1} (grad_k + H_ku dx)
      Eigen::MatrixXd hku_dx = Eigen::MatrixXd::Zero(m_, n_);
      for (int n = 1; n <= n_ - 1; ++n) {
        const int j = n - 1;
        const Eigen::Vector2d step = dx.segment<2>(2 * j);
        for (int m = 0; m < m_; ++m) {
          const Vec2& d = dvec[static_cast<std::size_t>(m * n_ + (n - 1))];
          hku_dx(m, n - 1) = (-d / sq(slack_g(m, n - 1))).dot(step);
        }
      }
      dk = -apply_hkk_inv(grad_k + hku_dx);
    } else {
      dk = -apply_hkk_inv(grad_k);
    }

    const double decrement =
        -(grad_k.cwiseProduct(dk).sum() + grad_u.dot(dx));
    if (!(decrement > 0.0)) return 0.0;  // at (numerical) optimum

    // Backtracking line search: first into the strictly feasible region,
    // then Armijo sufficient decrease.
    const double phi0 = barrier_value(t, kappa_, x_);
    const double slope = -decrement;
    double alpha = 1.0;
    for (int it = 0; it < 70; ++it) {
      const Eigen::MatrixXd kap_new = kappa_ + alpha * dk;
      const Eigen::VectorXd x_new = x_ + alpha * dx;
      const double phi = barrier_value(t, kap_new, x_new);
      if (phi <= phi0 + 1e-4 * alpha * slope) {
        kappa_ = kap_new;
        x_ = x_new;
        return decrement;
      }
      alpha *= 0.5;
    }
    return -1.0;  // no acceptable step
  }
};

inline SubproblemResult solve_subproblem(const SubproblemSpec& spec,
                                         const Eigen::MatrixXd& rho,
                                         const Eigen::VectorXd& upsilon,
                                         const Eigen::MatrixXd& warm_gains,
                                         const SubproblemOptions& opt = {}) {
  SubproblemSolver solver(spec, rho, upsilon);
  return solver.solve(warm_gains, opt);
}

}  // namespace airfl
