#pragma once

#include <cstdint>
#include <vector>

#include "gait/dataset.hpp"
#include "gait/model.hpp"
#include "gait/rng.hpp"
#include "gait/torque.hpp"

namespace gait {

/// Reference kinematic surfaces: analytic gait-like waveforms (low-order Fourier
/// foot/shank/heel traces) expressed directly in the model basis. They satisfy the
/// standing and flat-foot constraint families exactly by construction, so a
/// constrained fit on data generated from them recovers them to round-off.
/// Requires order >= 6.
GaitModel reference_gait_model(int order = 20);

/// Matching biological ankle-torque surface (N*m, before the 1/5 scaling).
Eigen::VectorXd reference_biological_torque(int order = 20);

/// The biological surface divided by 5: what fit_torque_model recovers.
TorqueSurface reference_torque_surface(int order = 20);

/// Smooth per-subject perturbation of a coefficient column: low-harmonic deltas
/// added identically to the two stride-scaled blocks, so standing behavior is
/// untouched and the perturbation scales with stride length.
void perturb_column(Eigen::Ref<Eigen::VectorXd> column, int order, double rel_sigma,
                    Rng& rng);

struct SyntheticDatasetConfig {
  int n_subjects = 10;
  int strides_per_condition = 2;
  std::vector<double> speeds{0.8, 1.0, 1.2};
  std::vector<double> inclines{-10, -7.5, -5, -2.5, 0, 2.5, 5, 7.5, 10};
  double coeff_jitter = 0.05;     // relative inter-subject model variation
  double duration_jitter = 0.03;  // relative stride-period variation
  // Motion-capture grade channel noise: theta_s, theta_f (deg), p_f, p_u (m).
  Eigen::Vector4d kin_noise{0.25, 0.25, 0.0025, 0.0025};
  double torque_noise = 1.5;  // N*m
  bool with_torque = true;
  int order = 20;
  std::uint64_t seed = 1;
};

/// Labeled multi-subject stride data drawn from per-subject perturbations of the
/// reference model across the speed x incline condition grid.
StrideDataset make_synthetic_dataset(const SyntheticDatasetConfig& config);

}  // namespace gait
