#pragma once

#include <optional>
#include <vector>

#include "gait/ekf.hpp"

namespace gait {

/// Heel-strike event timestamps, strictly increasing.
struct HeelStrikeLog {
  std::vector<double> timestamps;

  std::size_t size() const { return timestamps.size(); }
};

struct HeelStrikeConfig {
  double foot_vel_threshold = -60.0;  // deg/s, downward crossing fires
  double heel_height_max = 0.08;      // m, gate: heel must be near the ground
  double refractory_s = 0.3;          // minimum inter-event gap
};

/// Causal threshold detector: fires when foot angular velocity crosses the
/// threshold downward while the heel is below the height gate, with a refractory
/// period against double fires.
class HeelStrikeDetector {
 public:
  explicit HeelStrikeDetector(HeelStrikeConfig config = {}) : config_(config) {}

  /// Feed one sample; returns true when a heel strike fires at time t.
  bool step(double t, const Vector6d& z);

  const HeelStrikeLog& log() const { return log_; }

 private:
  HeelStrikeConfig config_;
  HeelStrikeLog log_;
  double prev_vel_ = 0.0;
  bool has_prev_ = false;
};

/// Timing-based phase estimate: time since the last heel strike normalized by the
/// previous stride period, clamped to [0, 1). Needs at least two logged events;
/// callers hold phase at 0 until then.
std::optional<double> tbe_phase(double t, const HeelStrikeLog& log);

/// Backup estimator: the timing-based phase generator fused with a reduced-order
/// EKF over (l_p, r). Phase rate changes only at heel strikes; stride length and
/// incline update continuously from the same measurement model as the main filter.
class BackupEstimator {
 public:
  BackupEstimator(GaitModel model, NoiseConfig noise, double leg_length, double dt,
                  double initial_phase_rate = 0.9);

  struct StepResult {
    double ssr_increment = 0.0;
    /// Set when a heel strike completed a stride: the SSR accumulated over it.
    std::optional<double> completed_stride_ssr;
  };

  /// Advance one sample. `hs_event` marks a heel strike at time t (from the
  /// detector or from ground-truth flags, depending on the harness mode).
  StepResult step(double t, const Vector6d& z, bool hs_event);

  double phase() const { return phase_; }
  double phase_rate() const { return phase_rate_; }
  /// Internal state in main-filter layout (p, p_dot, l_p, r).
  Eigen::Vector4d internal_state() const {
    return {phase_, phase_rate_, task_(0), task_(1)};
  }
  double stride_ssr() const { return stride_ssr_; }
  void reset_stride_ssr() { stride_ssr_ = 0.0; }

 private:
  MeasurementModel meas_;
  NoiseConfig noise_;
  double dt_;
  double phase_ = 0.0;
  double phase_rate_;
  Eigen::Vector2d task_{0.0, 0.0};  // (l_p, r)
  Eigen::Matrix2d P_ = 1e-3 * Eigen::Matrix2d::Identity();
  double stride_ssr_ = 0.0;
  std::optional<double> last_hs_;
  // Step workspace.
  Vector6d h_;
  Matrix64d H_;
  Matrix6d S_;
  Eigen::Matrix<double, 6, 2> HP_, Kt_;
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig_;
  Eigen::LDLT<Matrix6d> ldlt_;
};

/// Stride-boundary arbitration: when the backup explained the last stride much
/// better (backup_ssr < beta * ekf_ssr), overwrite the main filter state with the
/// backup state and reset its covariance to 1e-3 * I. Returns whether it fired.
bool ssr_compare_and_reset(double ekf_ssr, double backup_ssr, PhaseEkf& filter,
                           const BackupEstimator& backup, double beta);

}  // namespace gait
