#include "gait/model.hpp"

#include <cassert>

namespace gait {

void regressor_into(double p, double l_norm, double r, int order, RegressorDeriv d,
                    RowVecRef out) {
  const int m = phase_basis_dim(order);
  assert(out.size() == 4 * m);

  const Eigen::RowVector2d br = d.dr ? basis_affine_deriv() : basis_ramp(r);
  const Eigen::RowVector2d bl = d.dl ? basis_affine_deriv() : basis_stride(l_norm);

  // Fill the phase basis once into the last block, then scale copies into place.
  basis_phase_into(p, order, d.dp, out.segment(3 * m, m));
  const auto phase_block = out.segment(3 * m, m);
  out.segment(0 * m, m) = (br(0) * bl(0)) * phase_block;
  out.segment(1 * m, m) = (br(0) * bl(1)) * phase_block;
  out.segment(2 * m, m) = (br(1) * bl(0)) * phase_block;
  out.segment(3 * m, m) *= br(1) * bl(1);
}

RowVecX regressor_normalized(double p, double l_norm, double r, int order, RegressorDeriv d) {
  RowVecX out(regressor_dim(order));
  regressor_into(p, l_norm, r, order, d, out);
  return out;
}

RowVecX regressor(const GaitState& state, int order, double leg_length) {
  return regressor_normalized(state.phase, state.stride_length / leg_length, state.incline,
                              order);
}

Eigen::Vector4d evaluate_gait(const GaitModel& model, const GaitState& state,
                              double leg_length) {
  return (regressor(state, model.order, leg_length) * model.coeffs).transpose();
}

Eigen::Matrix<double, 4, 3> gait_partials(const GaitModel& model, const GaitState& state,
                                          double leg_length) {
  const double l_norm = state.stride_length / leg_length;
  Eigen::Matrix<double, 4, 3> out;
  out.col(0) = (regressor_normalized(state.phase, l_norm, state.incline, model.order,
                                     {.dp = 1}) *
                model.coeffs)
                   .transpose();
  out.col(1) = (regressor_normalized(state.phase, l_norm, state.incline, model.order,
                                     {.dl = 1}) *
                model.coeffs)
                   .transpose() /
               leg_length;
  out.col(2) = (regressor_normalized(state.phase, l_norm, state.incline, model.order,
                                     {.dr = 1}) *
                model.coeffs)
                   .transpose();
  return out;
}

}  // namespace gait
