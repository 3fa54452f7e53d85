#include "gait/torque.hpp"

namespace gait {

TorqueSurface fit_torque_model(const StrideDataset& data, int order, double scale) {
  if (data.empty()) throw ConfigError("torque fit: dataset is empty");
  if (!data.has_torque())
    throw ConfigError("torque fit: dataset is missing the torque channel");

  const int dim = regressor_dim(order);
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd block(kSamplesPerStride, dim);
  Eigen::VectorXd yblock(kSamplesPerStride);
  for (const auto& subj : data.subjects) {
    for (const auto& st : subj.strides) {
      for (int k = 0; k < kSamplesPerStride; ++k) {
        regressor_into(st.phase(k), st.stride_length(k) / subj.leg_length, st.incline_deg,
                       order, {}, block.row(k));
        yblock(k) = st.torque(k) / scale;
      }
      xtx.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
      xty.noalias() += block.transpose() * yblock;
    }
  }
  xtx = xtx.selfadjointView<Eigen::Lower>();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible())
    throw NumericalError("torque fit: rank-deficient normal equations");

  TorqueSurface surface;
  surface.order = order;
  surface.scale = scale;
  surface.coeffs = lu.solve(xty);
  return surface;
}

double evaluate_torque_unfloored(const TorqueSurface& surface, const GaitState& state,
                                 double leg_length) {
  return regressor(state, surface.order, leg_length).dot(surface.coeffs);
}

double evaluate_torque(const TorqueSurface& surface, const GaitState& state,
                       double leg_length) {
  return std::max(0.0, evaluate_torque_unfloored(surface, state, leg_length));
}

}  // namespace gait
