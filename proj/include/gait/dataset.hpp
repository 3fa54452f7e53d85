#pragma once

#include <string>
#include <vector>

#include "gait/types.hpp"

namespace gait {

inline constexpr int kSamplesPerStride = 150;

/// One labeled stride: 150 samples uniform in phase, plus its walking condition.
struct Stride {
  double speed_mps = 0.0;
  double incline_deg = 0.0;
  Eigen::VectorXd phase;          // 150, monotone from 0 toward 1
  Eigen::VectorXd phase_rate;     // 1/s
  Eigen::VectorXd stride_length;  // m
  Eigen::VectorXd theta_s;        // deg
  Eigen::VectorXd theta_f;        // deg
  Eigen::VectorXd p_f;            // m
  Eigen::VectorXd p_u;            // m
  Eigen::VectorXd torque;         // N*m, size 0 when the channel is absent

  bool has_torque() const { return torque.size() == kSamplesPerStride; }
  double mean_phase_rate() const { return phase_rate.mean(); }
  double mean_stride_length() const { return stride_length.mean(); }
};

struct Subject {
  std::string id;
  double leg_length = 0.9;  // m
  std::vector<Stride> strides;
};

/// Labeled stride data across subjects and conditions.
struct StrideDataset {
  std::vector<Subject> subjects;

  bool empty() const { return subjects.empty(); }
  std::size_t stride_count() const;
  std::size_t sample_count() const { return stride_count() * kSamplesPerStride; }
  bool has_torque() const;
};

/// Reads the stride CSV schema. Throws ConfigError with the offending row number
/// on schema violations, stride length mismatches, or non-monotone phase.
StrideDataset load_stride_dataset(const std::string& path);

void save_stride_dataset(const std::string& path, const StrideDataset& data);

}  // namespace gait
