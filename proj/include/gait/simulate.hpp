#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gait/dataset.hpp"
#include "gait/ekf.hpp"
#include "gait/model.hpp"

namespace gait {

/// Piecewise-linear schedule over time; clamped at both ends.
struct Schedule {
  std::vector<std::pair<double, double>> points;  // (t, value), t ascending

  static Schedule constant(double v) { return {{{0.0, v}}}; }
  double at(double t) const;
};

/// Synthetic walking scenario with known truth at every sample.
struct ScenarioProfile {
  double duration_s = 60.0;
  double sample_rate_hz = 100.0;
  Schedule phase_rate = Schedule::constant(0.8);      // 1/s
  Schedule stride_length_m = Schedule::constant(1.25);
  Schedule incline_deg = Schedule::constant(0.0);
  Vector6d noise_sigma = Vector6d::Zero();  // measurement noise per channel
  double subject_jitter = 0.0;              // relative model perturbation
  double leg_length = 0.9;
  std::uint64_t seed = 0;
};

struct StreamSample {
  double t = 0.0;
  Vector6d z = Vector6d::Zero();
  GaitState truth;
  bool hs = false;  // ground-truth heel strike (phase wrap)
};

/// Continuous measurement stream with ground truth for all four states.
struct LabeledStream {
  double dt = 0.01;
  std::vector<StreamSample> samples;

  std::size_t hs_count() const;
};

/// Integrates true phase from the schedule and emits model measurements plus noise.
/// The measured subject is `model_true` perturbed by the profile's jitter (seeded),
/// so the stream can differ from the model the filter carries, as real subjects do.
LabeledStream generate_synthetic_stream(const ScenarioProfile& profile,
                                        const GaitModel& model_true);

enum class TruthPhaseMode {
  kConstantRate,   // truth phase integrates a per-stride constant rate
  kDatasetLabels,  // truth phase interpolates the stride's phase labels
};

/// Resamples dataset strides to wall-clock rate and appends them into one stream.
/// Velocity channels come from the band-limited spectral derivative of the stride
/// data; ground-truth phase resets at each stride boundary (heel-strike flags).
LabeledStream concatenate_strides(const Subject& subject, const std::vector<int>& order,
                                  double rate_hz,
                                  TruthPhaseMode mode = TruthPhaseMode::kConstantRate);

}  // namespace gait
