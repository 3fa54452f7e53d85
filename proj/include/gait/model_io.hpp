#pragma once

#include <string>
#include <vector>

#include "gait/model.hpp"
#include "gait/torque.hpp"

namespace gait {

/// On-disk model container: Fourier order, coefficient matrix (row-major doubles),
/// stride-normalization flag, optional output scale and optional 150-knot residual
/// covariance table. Little-endian binary with a versioned header.
struct ModelContainer {
  int order = 20;
  bool stride_normalized = true;
  double output_scale = 1.0;           // training outputs were divided by this
  Eigen::MatrixXd coeffs;              // dim x n_outputs
  std::vector<Matrix6d> covariance;    // empty or kSamplesPerStride entries

  static ModelContainer from_gait_model(const GaitModel& model,
                                        std::vector<Matrix6d> covariance = {});
  static ModelContainer from_torque_surface(const TorqueSurface& surface);

  GaitModel to_gait_model() const;       // throws if shape is not dim x 4
  TorqueSurface to_torque_surface() const;  // throws if not a single column
};

void save_model(const std::string& path, const ModelContainer& container);
ModelContainer load_model(const std::string& path);

}  // namespace gait
