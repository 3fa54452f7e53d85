#pragma once

#include <utility>
#include <vector>

#include "gait/model.hpp"

namespace gait {

/// Process and measurement noise settings. Phase itself carries no process noise;
/// it is a noiseless integration of phase rate.
struct NoiseConfig {
  Eigen::Vector3d sigma_q;   // std devs for (phase_rate, stride, incline)
  Vector6d sigma_sensor;     // per-channel measurement std devs
  std::vector<Matrix6d> xsub;  // cross-subject covariance at the 150 phase knots

  /// Treadmill tuning: sigma_q = (6e-4, 9e-4, 6e-3).
  static NoiseConfig defaults() {
    NoiseConfig n;
    n.sigma_q << 6e-4, 9e-4, 6e-3;
    n.sigma_sensor << 1.0, 10.0, 7.0, 20.0, 0.01, 0.08;
    return n;
  }

  /// Faster-response tuning for rough terrain: sigma_q = (1e-3, 2e-3, 5e-2).
  static NoiseConfig outdoor() {
    NoiseConfig n = defaults();
    n.sigma_q << 1e-3, 2e-3, 5e-2;
    return n;
  }
};

/// Arctan stride-length transform: maps the unbounded pseudo state l_p to a physical
/// stride length in (0, 4L) meters. Returns (l, dl/dl_p).
inline std::pair<double, double> stride_transform(double l_p, double leg_length) {
  constexpr double kQuarterPi = 0.78539816339744830961566084581988;
  const double u = kQuarterPi * l_p;
  const double l = leg_length * ((4.0 / 3.1415926535897932384626433832795) * std::atan(u) + 2.0);
  const double dl = leg_length / (1.0 + u * u);
  return {l, dl};
}

inline double stride_transform_inverse(double l_meters, double leg_length) {
  constexpr double kPi = 3.1415926535897932384626433832795;
  return (4.0 / kPi) * std::tan((kPi / 4.0) * (l_meters / leg_length - 2.0));
}

/// Phase-dependent measurement covariance: constant sensor noise plus the
/// cross-subject knot table, linearly interpolated and periodic across the wrap.
/// Writes into `out`; an empty table contributes zero.
inline void het_noise_into(const NoiseConfig& noise, double phase, Matrix6d& out) {
  out = noise.sigma_sensor.array().square().matrix().asDiagonal();
  if (noise.xsub.empty()) return;
  const int n = static_cast<int>(noise.xsub.size());
  const double t = wrap_phase(phase) * n;
  int i0 = static_cast<int>(t);
  if (i0 >= n) i0 = n - 1;
  const int i1 = (i0 + 1) % n;
  const double frac = t - i0;
  out += (1.0 - frac) * noise.xsub[static_cast<std::size_t>(i0)] +
         frac * noise.xsub[static_cast<std::size_t>(i1)];
}

inline Matrix6d het_noise(const NoiseConfig& noise, double phase) {
  Matrix6d out;
  het_noise_into(noise, phase, out);
  return out;
}

/// Kinematic measurement model h(x) = (theta_f, theta_f_dot, theta_s, theta_s_dot,
/// p_f, p_u) over the internal state (p, p_dot, l_p, r), with its analytic Jacobian.
/// Owns preallocated regressor workspace so evaluation never allocates.
class MeasurementModel {
 public:
  MeasurementModel(GaitModel model, double leg_length)
      : model_(std::move(model)), leg_length_(leg_length) {
    const int dim = model_.dim();
    r0_.resize(dim);
    rp_.resize(dim);
    rpp_.resize(dim);
    rl_.resize(dim);
    rr_.resize(dim);
    rpl_.resize(dim);
    rpr_.resize(dim);
  }

  const GaitModel& model() const { return model_; }
  double leg_length() const { return leg_length_; }

  /// Predicted measurement only.
  void eval(const Eigen::Vector4d& x, Vector6d& h) { eval_impl(x, h, nullptr); }

  /// Predicted measurement and 6x4 Jacobian with respect to (p, p_dot, l_p, r).
  /// The l_p column carries the dl/dl_p chain factor of the stride transform.
  void eval(const Eigen::Vector4d& x, Vector6d& h, Matrix64d& jac) {
    eval_impl(x, h, &jac);
  }

 private:
  void eval_impl(const Eigen::Vector4d& x, Vector6d& h, Matrix64d* jac) {
    const double p = x(0);
    const double rate = x(1);
    const double ramp = x(3);
    const double u = 0.78539816339744830961566084581988 * x(2);
    // Normalized stride input and the normalized chain factor d(l/L)/d(l_p).
    const double l_norm = (4.0 / 3.1415926535897932384626433832795) * std::atan(u) + 2.0;
    const double dln_dlp = 1.0 / (1.0 + u * u);

    const int order = model_.order;
    regressor_into(p, l_norm, ramp, order, {}, r0_);
    regressor_into(p, l_norm, ramp, order, {.dp = 1}, rp_);

    const auto& c = model_.coeffs;
    const double dtf_dp = rp_.dot(c.col(kThetaF));
    const double dts_dp = rp_.dot(c.col(kThetaS));
    h(kFootAngle) = r0_.dot(c.col(kThetaF));
    h(kFootVel) = dtf_dp * rate;
    h(kShankAngle) = r0_.dot(c.col(kThetaS));
    h(kShankVel) = dts_dp * rate;
    h(kHeelForward) = r0_.dot(c.col(kPf));
    h(kHeelUpward) = r0_.dot(c.col(kPu));
    if (!jac) return;

    regressor_into(p, l_norm, ramp, order, {.dp = 2}, rpp_);
    regressor_into(p, l_norm, ramp, order, {.dl = 1}, rl_);
    regressor_into(p, l_norm, ramp, order, {.dr = 1}, rr_);
    regressor_into(p, l_norm, ramp, order, {.dp = 1, .dl = 1}, rpl_);
    regressor_into(p, l_norm, ramp, order, {.dp = 1, .dr = 1}, rpr_);

    auto& J = *jac;
    // Angle and position rows: no dependence on phase rate.
    for (auto [row, col] : {std::pair{kFootAngle, kThetaF}, {kShankAngle, kThetaS},
                            {kHeelForward, kPf}, {kHeelUpward, kPu}}) {
      J(row, 0) = rp_.dot(c.col(col));
      J(row, 1) = 0.0;
      J(row, 2) = rl_.dot(c.col(col)) * dln_dlp;
      J(row, 3) = rr_.dot(c.col(col));
    }
    // Velocity rows: chain rule through both arguments of (dtheta/dp) * rate.
    for (auto [row, col] : {std::pair{kFootVel, kThetaF}, {kShankVel, kThetaS}}) {
      J(row, 0) = rpp_.dot(c.col(col)) * rate;
      J(row, 1) = rp_.dot(c.col(col));
      J(row, 2) = rpl_.dot(c.col(col)) * rate * dln_dlp;
      J(row, 3) = rpr_.dot(c.col(col)) * rate;
    }
  }

  GaitModel model_;
  double leg_length_;
  RowVecX r0_, rp_, rpp_, rl_, rr_, rpl_, rpr_;
};

/// Predicted measurement for a fitted model at an internal state. Convenience
/// wrapper that allocates its own workspace.
inline Vector6d measurement_model(const GaitModel& model, const Eigen::Vector4d& x,
                                  double leg_length) {
  MeasurementModel mm(model, leg_length);
  Vector6d h;
  mm.eval(x, h);
  return h;
}

inline Matrix64d measurement_jacobian(const GaitModel& model, const Eigen::Vector4d& x,
                                      double leg_length) {
  MeasurementModel mm(model, leg_length);
  Vector6d h;
  Matrix64d jac;
  mm.eval(x, h, jac);
  return jac;
}

/// Four-state phase/task extended Kalman filter over (p, p_dot, l_p, r).
/// One instance drives one sensor stream; predict/update steps are sequential and
/// allocation-free after construction.
class PhaseEkf {
 public:
  PhaseEkf(GaitModel model, NoiseConfig noise, double leg_length, double dt)
      : meas_(std::move(model), leg_length), noise_(std::move(noise)), dt_(dt) {
    if (dt <= 0.0) throw ConfigError("PhaseEkf: dt must be positive");
    x_.setZero();
    x_(1) = 1.0;
    P_ = 1e-3 * Eigen::Matrix4d::Identity();
    sigma_q_sq_ = noise_.sigma_q.array().square();
  }

  void reset(const Eigen::Vector4d& x0, const Eigen::Matrix4d& P0) {
    x_ = x0;
    x_(0) = wrap_phase(x_(0));
    P_ = P0;
  }

  /// Propagate the linear dynamics: integrate phase rate, wrap phase, inflate P.
  void predict() {
    x_(0) = wrap_phase(x_(0) + dt_ * x_(1));
    // F P F^T with F = I + dt * e0 e1^T, expanded in place (rows 0 and 1 are disjoint).
    P_.row(0) += dt_ * P_.row(1);
    P_.col(0) += dt_ * P_.col(1);
    P_(1, 1) += sigma_q_sq_(0) * dt_;
    P_(2, 2) += sigma_q_sq_(1) * dt_;
    P_(3, 3) += sigma_q_sq_(2) * dt_;
  }

  struct UpdateResult {
    Vector6d residual;      // pre-update innovation z - h(x)
    double ssr_increment;   // squared norm of the innovation
  };

  /// Standard EKF measurement update with the phase-dependent noise matrix,
  /// followed by covariance symmetrization. Throws NumericalError when the
  /// innovation covariance is ill-conditioned (condition number > 1e12).
  UpdateResult update(const Vector6d& z) {
    meas_.eval(x_, h_, H_);
    het_noise_into(noise_, x_(0), S_);
    S_.noalias() += H_ * P_ * H_.transpose();

    eig_.compute(S_, Eigen::EigenvaluesOnly);
    const double lmin = eig_.eigenvalues().minCoeff();
    const double lmax = eig_.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax > 1e12 * lmin)
      throw NumericalError("EKF update: innovation covariance is not invertible");

    const Vector6d y = z - h_;
    ldlt_.compute(S_);
    HP_.noalias() = H_ * P_;
    Kt_.noalias() = ldlt_.solve(HP_);  // K^T, 6x4
    x_.noalias() += Kt_.transpose() * y;
    P_.noalias() -= Kt_.transpose() * HP_;
    P_ = 0.5 * (P_ + P_.transpose()).eval();
    return {y, y.squaredNorm()};
  }

  const Eigen::Vector4d& internal_state() const { return x_; }
  const Eigen::Matrix4d& covariance() const { return P_; }
  double dt() const { return dt_; }
  double leg_length() const { return meas_.leg_length(); }
  MeasurementModel& measurement() { return meas_; }
  const NoiseConfig& noise() const { return noise_; }
  NoiseConfig& noise() { return noise_; }

  /// Public state with the pseudo stride length mapped to meters.
  GaitState state() const {
    GaitState s;
    s.phase = wrap_phase(x_(0));
    s.phase_rate = x_(1);
    s.stride_length = stride_transform(x_(2), meas_.leg_length()).first;
    s.incline = x_(3);
    return s;
  }

 private:
  MeasurementModel meas_;
  NoiseConfig noise_;
  double dt_;
  Eigen::Array3d sigma_q_sq_;
  Eigen::Vector4d x_;
  Eigen::Matrix4d P_;
  // Preallocated step workspace.
  Vector6d h_;
  Matrix64d H_;
  Matrix6d S_;
  Eigen::Matrix<double, 6, 4> HP_, Kt_;
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig_;
  Eigen::LDLT<Matrix6d> ldlt_;
};

}  // namespace gait
