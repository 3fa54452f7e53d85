#include "gait/backup.hpp"

namespace gait {

bool HeelStrikeDetector::step(double t, const Vector6d& z) {
  const double vel = z(kFootVel);
  bool fired = false;
  if (has_prev_ && prev_vel_ >= config_.foot_vel_threshold &&
      vel < config_.foot_vel_threshold && z(kHeelUpward) < config_.heel_height_max) {
    if (log_.timestamps.empty() || t - log_.timestamps.back() > config_.refractory_s) {
      log_.timestamps.push_back(t);
      fired = true;
    }
  }
  prev_vel_ = vel;
  has_prev_ = true;
  return fired;
}

std::optional<double> tbe_phase(double t, const HeelStrikeLog& log) {
  if (log.size() < 2) return std::nullopt;
  const double t_last = log.timestamps.back();
  const double period = t_last - log.timestamps[log.size() - 2];
  const double p = (t - t_last) / period;
  return std::clamp(p, 0.0, std::nextafter(1.0, 0.0));
}

BackupEstimator::BackupEstimator(GaitModel model, NoiseConfig noise, double leg_length,
                                 double dt, double initial_phase_rate)
    : meas_(std::move(model), leg_length),
      noise_(std::move(noise)),
      dt_(dt),
      phase_rate_(initial_phase_rate) {
  if (dt <= 0.0) throw ConfigError("BackupEstimator: dt must be positive");
}

BackupEstimator::StepResult BackupEstimator::step(double t, const Vector6d& z,
                                                  bool hs_event) {
  StepResult result;
  if (hs_event) {
    result.completed_stride_ssr = stride_ssr_;
    if (last_hs_) {
      const double period = t - *last_hs_;
      if (period > 0.0) phase_rate_ = 1.0 / period;
    }
    last_hs_ = t;
    phase_ = 0.0;
    stride_ssr_ = 0.0;
  } else {
    phase_ = wrap_phase(phase_ + dt_ * phase_rate_);
  }

  // Reduced-order predict over (l_p, r): identity dynamics, shared process noise.
  P_(0, 0) += noise_.sigma_q(1) * noise_.sigma_q(1) * dt_;
  P_(1, 1) += noise_.sigma_q(2) * noise_.sigma_q(2) * dt_;

  const Eigen::Vector4d x{phase_, phase_rate_, task_(0), task_(1)};
  meas_.eval(x, h_, H_);
  const auto Ht = H_.rightCols<2>();  // columns of (l_p, r)

  het_noise_into(noise_, phase_, S_);
  S_.noalias() += Ht * P_ * Ht.transpose();
  eig_.compute(S_, Eigen::EigenvaluesOnly);
  const double lmin = eig_.eigenvalues().minCoeff();
  const double lmax = eig_.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax > 1e12 * lmin)
    throw NumericalError("backup update: innovation covariance is not invertible");

  const Vector6d y = z - h_;
  ldlt_.compute(S_);
  HP_.noalias() = Ht * P_;
  Kt_.noalias() = ldlt_.solve(HP_);
  task_.noalias() += Kt_.transpose() * y;
  P_.noalias() -= Kt_.transpose() * HP_;
  P_ = 0.5 * (P_ + P_.transpose()).eval();

  result.ssr_increment = y.squaredNorm();
  stride_ssr_ += result.ssr_increment;
  return result;
}

bool ssr_compare_and_reset(double ekf_ssr, double backup_ssr, PhaseEkf& filter,
                           const BackupEstimator& backup, double beta) {
  if (!(backup_ssr < beta * ekf_ssr)) return false;
  filter.reset(backup.internal_state(), 1e-3 * Eigen::Matrix4d::Identity());
  return true;
}

}  // namespace gait
