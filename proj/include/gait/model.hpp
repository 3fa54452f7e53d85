#pragma once

#include <array>
#include <string>

#include "gait/basis.hpp"
#include "gait/types.hpp"

namespace gait {

/// Width of the full regressor: ramp(2) x stride(2) x phase(2N+1).
inline int regressor_dim(int order) { return 4 * phase_basis_dim(order); }

/// Fitted kinematic model: columns map regressor outputs to (theta_s, theta_f, p_f, p_u).
/// The stride input is leg-length normalized; angle outputs are degrees, positions meters.
struct GaitModel {
  int order = 20;
  Eigen::MatrixXd coeffs;  // regressor_dim(order) x 4
  std::array<std::string, 4> output_names{"theta_s", "theta_f", "p_f", "p_u"};

  int dim() const { return regressor_dim(order); }
};

/// Which derivative of the regressor to build. dp in {0,1,2}; dl, dr in {0,1}.
struct RegressorDeriv {
  int dp = 0;
  int dl = 0;
  int dr = 0;
};

/// Regressor row for normalized inputs (p periodic, l leg-length normalized, r degrees).
/// Writes into `out` of size regressor_dim(order); no allocation.
void regressor_into(double p, double l_norm, double r, int order, RegressorDeriv d,
                    RowVecRef out);

RowVecX regressor_normalized(double p, double l_norm, double r, int order,
                             RegressorDeriv d = {});

/// Regressor for a physical gait state; stride length is normalized by leg length here.
RowVecX regressor(const GaitState& state, int order, double leg_length);

/// Model outputs (theta_s, theta_f, p_f, p_u) at a physical gait state.
Eigen::Vector4d evaluate_gait(const GaitModel& model, const GaitState& state,
                              double leg_length);

/// Analytic partials of the four outputs with respect to (phase, stride_length [m], incline).
/// The stride column carries the 1/leg_length chain factor so it matches finite
/// differences of evaluate_gait.
Eigen::Matrix<double, 4, 3> gait_partials(const GaitModel& model, const GaitState& state,
                                          double leg_length);

}  // namespace gait
