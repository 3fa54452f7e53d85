#pragma once

#include <vector>

#include "gait/simulate.hpp"

namespace gait {

/// Signed phase error on the circle, in [-0.5, 0.5).
inline double phase_error(double est, double truth) {
  double d = est - truth + 0.5;
  d -= std::floor(d);
  return d - 0.5;
}

/// Per-sample estimator outputs aligned with a LabeledStream. Empty vectors mean
/// the estimator (or torque channel) was not run.
struct EstimateTrace {
  std::vector<GaitState> ekf;
  std::vector<double> ekf_torque;    // desired torque from EKF states
  std::vector<double> truth_torque;  // desired torque from ground-truth states
  std::vector<double> tbe_phase;     // NaN where undefined (fewer than 2 heel strikes)
  std::vector<GaitState> backup;
};

/// Per-stride RMSEs, stride boundaries taken from the stream's heel-strike flags.
/// Phase RMSEs are percent of a cycle, computed on wrapped errors.
struct StrideMetricsRow {
  int stride_index = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  int n_samples = 0;
  double ekf_phase_rmse_pct = 0.0;
  double ekf_phase_rate_rmse = 0.0;
  double ekf_stride_length_rmse = 0.0;
  double ekf_incline_rmse = 0.0;
  double ekf_torque_rmse = 0.0;
  double tbe_phase_rmse_pct = 0.0;
  double backup_phase_rmse_pct = 0.0;
  double backup_stride_length_rmse = 0.0;
  double backup_incline_rmse = 0.0;
  bool tbe_valid = false;
  bool has_backup = false;
  bool has_torque = false;
};

/// Segments the stream at heel-strike flags and reduces each complete stride.
/// Throws ConfigError when trace lengths disagree with the stream.
std::vector<StrideMetricsRow> stride_metrics(const LabeledStream& stream,
                                             const EstimateTrace& trace);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
  bool degenerate_equal = false;     // all differences exactly zero
  bool degenerate_infinite = false;  // nonzero mean difference, zero variance
};

/// Two-tailed paired t-test. Degenerate inputs are flagged instead of divided by zero.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Two-tailed p-value of the Student t distribution (regularized incomplete beta).
double student_t_two_tailed_p(double t, int dof);

}  // namespace gait
