#pragma once

#include <vector>

#include "gait/constraints.hpp"
#include "gait/dataset.hpp"
#include "gait/model.hpp"

namespace gait {

/// Equality-constrained least-squares fit of the kinematic model, solved per output
/// column through the KKT system of the normal equations. Throws NumericalError when
/// the KKT system is singular (naming the deficient directions) or when the returned
/// coefficients violate a constraint by more than 1e-8.
GaitModel fit_gait_model(const StrideDataset& data, const ConstraintSet& constraints,
                         int order);

/// Total sum of squared residuals of the model over all dataset samples and outputs.
double sum_squared_error(const GaitModel& model, const StrideDataset& data);

/// Cross-subject residual covariance at each of the 150 phase knots, pooled over all
/// strides. Channel order (theta_f, theta_f_dot, theta_s, theta_s_dot, p_f, p_u);
/// velocity channels come from the band-limited spectral derivative of the stride data
/// multiplied by the labeled phase rate. Throws if fewer than 2 strides pool at a knot.
std::vector<Matrix6d> residual_covariance_table(const StrideDataset& data,
                                                const GaitModel& model);

/// Band-limited periodic derivative of one stride channel with respect to phase:
/// projects the 150 samples onto harmonics 1..band and differentiates the projection.
/// Exact for data that is a trigonometric polynomial of degree <= band.
Eigen::VectorXd spectral_phase_derivative(const Eigen::VectorXd& phase,
                                          const Eigen::VectorXd& values, int band);

}  // namespace gait
