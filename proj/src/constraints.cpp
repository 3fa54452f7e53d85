#include "gait/constraints.hpp"

#include <cassert>

namespace gait {

// Assembly keeps rows that enlarge the row space, drops rows that are consistent
// linear combinations of kept rows, and rejects inconsistent dependent rows.
ConstraintSet::ConstraintSet(int order, std::vector<ConstraintBlock> blocks)
    : order_(order), blocks_(std::move(blocks)) {
  const int dim = regressor_dim(order_);
  for (int out = 0; out < 4; ++out) {
    // Stack the rows that apply to this output, in block order.
    std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
    for (const auto& blk : blocks_) {
      if (blk.output >= 0 && blk.output != out) continue;
      assert(blk.A.cols() == dim);
      for (Eigen::Index i = 0; i < blk.A.rows(); ++i) {
        const double rhs = (blk.output < 0) ? blk.rhs(i, out) : blk.rhs(i, 0);
        rows.emplace_back(blk.A.row(i), rhs);
      }
    }

    Eigen::MatrixXd kept(static_cast<Eigen::Index>(rows.size()), dim);
    Eigen::VectorXd kept_b(static_cast<Eigen::Index>(rows.size()));
    Eigen::MatrixXd ortho(static_cast<Eigen::Index>(rows.size()), dim);  // orthonormal span
    Eigen::Index n_kept = 0;

    for (auto& [a, b] : rows) {
      // Project onto the span of kept rows (twice, for numerical stability).
      Eigen::RowVectorXd resid = a;
      Eigen::VectorXd combo = Eigen::VectorXd::Zero(n_kept);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index k = 0; k < n_kept; ++k) {
          const double c = resid.dot(ortho.row(k));
          combo(k) += c;
          resid -= c * ortho.row(k);
        }
      }
      const double scale = std::max(1.0, a.norm());
      if (resid.norm() > 1e-10 * scale) {
        kept.row(n_kept) = a;
        kept_b(n_kept) = b;
        ortho.row(n_kept) = resid / resid.norm();
        ++n_kept;
        continue;
      }
      // Row is in the span: recover its expansion in the kept rows to test the rhs.
      // ortho = T * kept for a lower-triangular T we never formed, so solve directly.
      Eigen::VectorXd coef =
          kept.topRows(n_kept).transpose().colPivHouseholderQr().solve(a.transpose());
      const double implied = coef.dot(kept_b.head(n_kept));
      if (std::abs(implied - b) > 1e-8 * scale) {
        throw NumericalError(
            "constraint assembly: rank-deficient rows with inconsistent right-hand sides "
            "(output column " +
            std::to_string(out) + ")");
      }
      // Consistent duplicate: drop.
    }

    assembled_[out].A = kept.topRows(n_kept);
    assembled_[out].b = kept_b.head(n_kept);
  }
}

double ConstraintSet::max_violation(const Eigen::MatrixXd& coeffs) const {
  double worst = 0.0;
  for (const auto& blk : blocks_) {
    if (blk.output < 0) {
      worst = std::max(worst, (blk.A * coeffs - blk.rhs).cwiseAbs().maxCoeff());
    } else {
      worst = std::max(worst,
                       (blk.A * coeffs.col(blk.output) - blk.rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

ConstraintSet build_gait_constraints(int order) {
  const int m = phase_basis_dim(order);
  const int dim = regressor_dim(order);
  std::vector<ConstraintBlock> blocks;

  // (a) For both ramp blocks, the stationary (1-l) sub-block has zero sinusoid
  // coefficients in every output: 4N rows of zeros on the right.
  {
    ConstraintBlock blk;
    blk.A = Eigen::MatrixXd::Zero(2 * (m - 1), dim);
    blk.rhs = Eigen::MatrixXd::Zero(2 * (m - 1), 4);
    Eigen::Index row = 0;
    for (int ramp_block : {0, 1}) {
      const int base = (2 * ramp_block + 1) * m;  // (ramp_block, stride block 1)
      for (int j = 1; j < m; ++j) blk.A(row++, base + j) = 1.0;
    }
    blocks.push_back(std::move(blk));
  }

  // (b) Standing constant terms at r = 0 and r = 10: shank vertical, foot on the
  // ramp, heel positions zero. Output order (theta_s, theta_f, p_f, p_u).
  {
    ConstraintBlock blk;
    blk.A = Eigen::MatrixXd::Zero(2, dim);
    blk.rhs = Eigen::MatrixXd::Zero(2, 4);
    int row = 0;
    for (double r : {0.0, 10.0}) {
      const Eigen::RowVector2d br = basis_ramp(r);
      blk.A(row, 1 * m) = br(0);  // (r block, 1-l block, constant term)
      blk.A(row, 3 * m) = br(1);  // (1-r block, 1-l block, constant term)
      blk.rhs(row, kThetaF) = r;
      ++row;
    }
    blocks.push_back(std::move(blk));
  }

  // (c) Flat foot: theta_f(p=0.2, l, r) = r, pinned on the (r,l) corner grid.
  {
    ConstraintBlock blk;
    blk.A = Eigen::MatrixXd::Zero(4, dim);
    blk.rhs = Eigen::MatrixXd::Zero(4, 1);
    blk.output = kThetaF;
    int row = 0;
    for (double r : {0.0, 10.0}) {
      for (double l : {0.0, 1.0}) {
        RowVecX a(dim);
        regressor_into(0.2, l, r, order, {}, a);
        blk.A.row(row) = a;
        blk.rhs(row, 0) = r;
        ++row;
      }
    }
    blocks.push_back(std::move(blk));
  }

  return ConstraintSet(order, std::move(blocks));
}

}  // namespace gait
