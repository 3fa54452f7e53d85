#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gait {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix64d = Eigen::Matrix<double, 6, 4>;
using RowVecX = Eigen::RowVectorXd;
// Writable row view that also binds rows of column-major matrices.
using RowVecRef = Eigen::Ref<RowVecX, 0, Eigen::InnerStride<>>;

/// Gait-state vector: where the wearer is in the cycle and what task they are doing.
struct GaitState {
  double phase = 0.0;          // fraction of gait cycle, stored wrapped to [0,1)
  double phase_rate = 0.0;     // 1/s
  double stride_length = 0.0;  // meters
  double incline = 0.0;        // degrees, negative for declines
};

/// Wrap a phase value into [0,1). Wrapping never touches phase rate.
inline double wrap_phase(double p) {
  double w = p - std::floor(p);
  return (w >= 1.0) ? 0.0 : w;  // guard against floor rounding at the boundary
}

/// Measurement channel order used throughout the estimator.
enum MeasChannel : int {
  kFootAngle = 0,      // theta_f, deg
  kFootVel = 1,        // theta_f dot, deg/s
  kShankAngle = 2,     // theta_s, deg
  kShankVel = 3,       // theta_s dot, deg/s
  kHeelForward = 4,    // p_f, m
  kHeelUpward = 5,     // p_u, m
};

/// Model output column order.
enum ModelOutput : int {
  kThetaS = 0,
  kThetaF = 1,
  kPf = 2,
  kPu = 3,
};

/// Bad inputs, malformed files, impossible configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Singular systems, non-invertible innovation covariance, rank deficiency.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gait
