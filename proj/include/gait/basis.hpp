#pragma once

#include "gait/types.hpp"

namespace gait {

/// Affine ramp basis (r, 1-r). r is in degrees; entries go negative outside [0,1].
inline Eigen::RowVector2d basis_ramp(double r) { return {r, 1.0 - r}; }

/// Affine stride-length basis (l, 1-l). l is leg-length normalized.
inline Eigen::RowVector2d basis_stride(double l) { return {l, 1.0 - l}; }

/// Derivative of either affine basis with respect to its argument.
inline Eigen::RowVector2d basis_affine_deriv() { return {1.0, -1.0}; }

/// Number of Fourier terms for a given harmonic order.
inline int phase_basis_dim(int order) { return 2 * order + 1; }

/// Fourier phase basis (1, cos 2pi p, sin 2pi p, ..., cos 2piNp, sin 2piNp),
/// differentiated `deriv` times (0, 1 or 2) with respect to p.
/// Writes into `out`, which must have size 2*order+1.
void basis_phase_into(double p, int order, int deriv, RowVecRef out);

RowVecX basis_phase(double p, int order, int deriv = 0);

/// Kronecker product: (a1 B, a2 B, ..., an B) for row vectors, block matrix form in
/// general. Returns a row vector when both inputs are compile-time row vectors.
template <typename A, typename B>
auto kronecker(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  constexpr bool kRowResult =
      A::RowsAtCompileTime == 1 && B::RowsAtCompileTime == 1;
  using Result = std::conditional_t<kRowResult, RowVecX, Eigen::MatrixXd>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace gait
