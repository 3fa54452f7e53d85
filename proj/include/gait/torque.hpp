#pragma once

#include "gait/dataset.hpp"
#include "gait/model.hpp"

namespace gait {

/// Desired ankle torque surface over (phase, stride length, incline), regressed from
/// biological ankle torques divided by `scale` and floored at zero when evaluated
/// (the device only applies plantarflexion torque).
struct TorqueSurface {
  int order = 20;
  Eigen::VectorXd coeffs;  // regressor_dim(order)
  double scale = 5.0;      // training torques were divided by this

  int dim() const { return regressor_dim(order); }
};

/// Unconstrained least-squares fit of torque/scale against the gait regressor.
/// Requires every stride to carry the torque channel.
TorqueSurface fit_torque_model(const StrideDataset& data, int order, double scale = 5.0);

/// Floored surface evaluation, N*m (at the trained scale). Plantarflexion positive.
double evaluate_torque(const TorqueSurface& surface, const GaitState& state,
                       double leg_length);

/// Raw surface value without the dorsiflexion floor (used for fitting diagnostics).
double evaluate_torque_unfloored(const TorqueSurface& surface, const GaitState& state,
                                 double leg_length);

}  // namespace gait
