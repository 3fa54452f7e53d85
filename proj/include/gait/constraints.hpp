#pragma once

#include <vector>

#include "gait/model.hpp"

namespace gait {

/// One family of equality constraints on the parameter matrix.
/// `output < 0` means the rows apply to every output column and `rhs` is rows x 4;
/// otherwise the rows pin a single output column and `rhs` is rows x 1.
struct ConstraintBlock {
  Eigen::MatrixXd A;    // rows x regressor_dim(order)
  Eigen::MatrixXd rhs;  // rows x 4 or rows x 1
  int output = -1;
};

/// Equality constraints for the least-squares fit, assembled per output column
/// with linearly dependent (but consistent) rows removed.
class ConstraintSet {
 public:
  ConstraintSet() = default;  // empty set: unconstrained fit
  ConstraintSet(int order, std::vector<ConstraintBlock> blocks);

  int order() const { return order_; }
  bool empty() const { return blocks_.empty(); }
  const std::vector<ConstraintBlock>& blocks() const { return blocks_; }

  /// Deduplicated system for one output column. A is full row rank.
  const Eigen::MatrixXd& A(int output) const { return assembled_[output].A; }
  const Eigen::VectorXd& b(int output) const { return assembled_[output].b; }

  /// Largest absolute violation of every original constraint row by `coeffs`.
  double max_violation(const Eigen::MatrixXd& coeffs) const;

 private:
  struct System {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
  };
  int order_ = 0;
  std::vector<ConstraintBlock> blocks_;
  std::array<System, 4> assembled_;
};

/// The three constraint families of the gait model:
///  (a) zero stride: all sinusoid coefficients of the stationary blocks vanish,
///      so kinematics are constant in phase when standing still;
///  (b) zero stride constant terms: shank vertical, foot aligned with the ramp,
///      heel positions at zero, pinned at r = 0 and r = 10;
///  (c) flat foot: theta_f equals the ramp angle at p = 0.2 for every stride
///      length and ramp, pinned on the corners r in {0,10}, l in {0,1}.
ConstraintSet build_gait_constraints(int order);

}  // namespace gait
