#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gait/backup.hpp"
#include "gait/ekf.hpp"
#include "gait/metrics.hpp"
#include "gait/model_io.hpp"
#include "gait/reference.hpp"
#include "gait/simulate.hpp"

namespace gait {

/// Filter initialization in physical units; stride length maps to l_p internally.
struct FilterInit {
  double phase = 0.0;
  double phase_rate = 0.9;
  double stride_length = 1.25;  // m
  double incline = 0.0;         // deg
};

/// Options for driving one stream through the estimator stack.
struct RunOptions {
  FilterInit init;
  double beta = 0.5;           // backup SSR reset ratio
  bool oracle_hs = true;       // heel strikes from ground-truth flags vs detector
  bool freeze_task = false;    // pin (l_p, r) process noise and initial P to 1e-12
  bool measure_latency = false;
  bool run_backup = true;
  HeelStrikeConfig hs_config;
};

/// Full per-sample record of one closed-loop run.
struct StreamRunResult {
  EstimateTrace trace;
  std::vector<StrideMetricsRow> metrics;
  HeelStrikeLog hs_log;
  int resets = 0;
  std::vector<double> latency_us;  // per-step predict+update wall time
};

/// Drives EKF + backup + TBE (+ torque) over a labeled stream in causal order.
StreamRunResult run_stream(const LabeledStream& stream, const GaitModel& model,
                           const TorqueSurface* torque, const NoiseConfig& noise,
                           double leg_length, const RunOptions& options);

struct ExperimentConfig {
  std::string mode;  // fit | replay | crossval | ablation | gen | report
  std::string dataset_path;          // stride CSV; empty -> synthetic dataset
  std::string gait_model_path;       // model container to load or write
  std::string torque_model_path;
  std::string output_dir = ".";
  std::vector<std::string> inputs;   // report mode: per-stride CSVs

  SyntheticDatasetConfig synthetic;
  ScenarioProfile scenario;
  int order = 20;

  Eigen::Vector3d sigma_q{6e-4, 9e-4, 6e-3};
  Vector6d sigma_sensor{(Vector6d() << 1.0, 10.0, 7.0, 20.0, 0.01, 0.08).finished()};
  double beta = 0.5;
  double rate_hz = 100.0;
  FilterInit init;
  HeelStrikeConfig hs_config;
  bool tbe_oracle_hs = true;
  TruthPhaseMode truth_mode = TruthPhaseMode::kConstantRate;
  std::uint64_t seed = 1;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

/// Applies keys of `j` (same layout config_to_json emits) over `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);

/// Named walking scenarios: "steady", "speed_pulse" (alternating fast/slow
/// segments), "incline_ramp" (level then a long ramp to +10 deg),
/// "decline_ramp" (to -10 deg).
ScenarioProfile scenario_preset(const std::string& name);

/// Fit gait + torque models and the covariance table; write model containers and a
/// JSON summary. Returns the report.
nlohmann::json run_fit(const ExperimentConfig& config);

/// Write a synthetic dataset CSV (and return a summary). Deterministic under seed.
nlohmann::json run_gen(const ExperimentConfig& config);

/// Leave-one-out cross-validation: per held-out subject, fit on the rest, replay the
/// concatenated held-out stream through EKF/TBE/backup, aggregate stride metrics.
/// Writes report JSON and a per-stride CSV under output_dir.
nlohmann::json run_crossval(const ExperimentConfig& config);

/// Crossval with task states frozen (process noise and initial covariance 1e-12),
/// paired against the full filter on identical streams.
nlohmann::json run_ablation(const ExperimentConfig& config);

/// Scenario replay through the full stack with per-step latency statistics.
nlohmann::json run_replay(const ExperimentConfig& config);

/// Re-aggregate per-stride CSVs produced by crossval/replay.
nlohmann::json run_report(const ExperimentConfig& config);

void write_stride_csv(const std::string& path, const std::string& subject,
                      const std::vector<StrideMetricsRow>& rows, bool append = false);

}  // namespace gait
