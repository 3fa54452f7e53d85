#include "gait/basis.hpp"

#include <cassert>

namespace gait {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void basis_phase_into(double p, int order, int deriv, RowVecRef out) {
  assert(order >= 1 && deriv >= 0 && deriv <= 2);
  assert(out.size() == phase_basis_dim(order));
  out(0) = (deriv == 0) ? 1.0 : 0.0;
  for (int n = 1; n <= order; ++n) {
    const double w = kTwoPi * n;
    const double c = std::cos(w * p);
    const double s = std::sin(w * p);
    switch (deriv) {
      case 0:
        out(2 * n - 1) = c;
        out(2 * n) = s;
        break;
      case 1:
        out(2 * n - 1) = -w * s;
        out(2 * n) = w * c;
        break;
      default:  // 2
        out(2 * n - 1) = -w * w * c;
        out(2 * n) = -w * w * s;
        break;
    }
  }
}

RowVecX basis_phase(double p, int order, int deriv) {
  RowVecX out(phase_basis_dim(order));
  basis_phase_into(p, order, deriv, out);
  return out;
}

}  // namespace gait
