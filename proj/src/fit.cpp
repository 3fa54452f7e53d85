#include "gait/fit.hpp"

#include <sstream>

namespace gait {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kConstraintTol = 1e-8;

struct NormalEquations {
  Eigen::MatrixXd xtx;  // D x D
  Eigen::MatrixXd xty;  // D x 4
};

NormalEquations accumulate_normal_equations(const StrideDataset& data, int order) {
  const int dim = regressor_dim(order);
  NormalEquations ne{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, 4)};
  Eigen::MatrixXd block(kSamplesPerStride, dim);
  Eigen::MatrixXd yblock(kSamplesPerStride, 4);
  for (const auto& subj : data.subjects) {
    for (const auto& st : subj.strides) {
      for (int k = 0; k < kSamplesPerStride; ++k) {
        regressor_into(st.phase(k), st.stride_length(k) / subj.leg_length, st.incline_deg,
                       order, {}, block.row(k));
        yblock(k, kThetaS) = st.theta_s(k);
        yblock(k, kThetaF) = st.theta_f(k);
        yblock(k, kPf) = st.p_f(k);
        yblock(k, kPu) = st.p_u(k);
      }
      ne.xtx.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
      ne.xty.noalias() += block.transpose() * yblock;
    }
  }
  ne.xtx = ne.xtx.selfadjointView<Eigen::Lower>();
  return ne;
}

std::string describe_deficient_directions(const Eigen::FullPivLU<Eigen::MatrixXd>& lu,
                                          int dim) {
  const Eigen::MatrixXd kernel = lu.kernel();
  std::ostringstream os;
  os << "singular KKT system, " << kernel.cols() << " deficient direction(s):";
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(kernel.cols(), 4); ++c) {
    Eigen::Index worst = 0;
    kernel.col(c).head(dim).cwiseAbs().maxCoeff(&worst);
    os << " coeff[" << worst << "]";
  }
  return os.str();
}

Eigen::VectorXd solve_kkt(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty,
                          const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const int dim = static_cast<int>(xtx.rows());
  const int m = static_cast<int>(a.rows());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim + m, dim + m);
  kkt.topLeftCorner(dim, dim) = xtx;
  if (m > 0) {
    kkt.topRightCorner(dim, m) = a.transpose();
    kkt.bottomLeftCorner(m, dim) = a;
  }
  Eigen::VectorXd rhs(dim + m);
  rhs.head(dim) = xty;
  rhs.tail(m) = b;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) throw NumericalError(describe_deficient_directions(lu, dim));
  return lu.solve(rhs).head(dim);
}

}  // namespace

GaitModel fit_gait_model(const StrideDataset& data, const ConstraintSet& constraints,
                         int order) {
  if (data.empty()) throw ConfigError("fit: dataset is empty");
  const int dim = regressor_dim(order);
  if (static_cast<std::size_t>(dim) > data.sample_count())
    throw ConfigError("fit: fewer samples than coefficients");
  if (!constraints.empty() && constraints.order() != order)
    throw ConfigError("fit: constraint set was built for a different order");

  const NormalEquations ne = accumulate_normal_equations(data, order);

  GaitModel model;
  model.order = order;
  model.coeffs.resize(dim, 4);
  static const Eigen::MatrixXd kEmpty;
  for (int out = 0; out < 4; ++out) {
    const Eigen::MatrixXd& a = constraints.empty() ? kEmpty : constraints.A(out);
    const Eigen::VectorXd b =
        constraints.empty() ? Eigen::VectorXd() : constraints.b(out);
    model.coeffs.col(out) = solve_kkt(ne.xtx, ne.xty.col(out), a, b);
  }

  if (!constraints.empty()) {
    const double viol = constraints.max_violation(model.coeffs);
    if (viol > kConstraintTol)
      throw NumericalError("fit: constraint violation " + std::to_string(viol) +
                           " exceeds tolerance");
  }
  return model;
}

double sum_squared_error(const GaitModel& model, const StrideDataset& data) {
  double sse = 0.0;
  RowVecX row(model.dim());
  for (const auto& subj : data.subjects) {
    for (const auto& st : subj.strides) {
      for (int k = 0; k < kSamplesPerStride; ++k) {
        regressor_into(st.phase(k), st.stride_length(k) / subj.leg_length, st.incline_deg,
                       model.order, {}, row);
        const Eigen::RowVector4d pred = row * model.coeffs;
        sse += std::pow(st.theta_s(k) - pred(kThetaS), 2) +
               std::pow(st.theta_f(k) - pred(kThetaF), 2) +
               std::pow(st.p_f(k) - pred(kPf), 2) + std::pow(st.p_u(k) - pred(kPu), 2);
      }
    }
  }
  return sse;
}

Eigen::VectorXd spectral_phase_derivative(const Eigen::VectorXd& phase,
                                          const Eigen::VectorXd& values, int band) {
  const int n = static_cast<int>(values.size());
  const double scale = 2.0 / n;
  Eigen::VectorXd deriv = Eigen::VectorXd::Zero(n);
  for (int h = 1; h <= band; ++h) {
    const double w = kTwoPi * h;
    double a = 0.0, b = 0.0;
    for (int j = 0; j < n; ++j) {
      a += values(j) * std::cos(w * phase(j));
      b += values(j) * std::sin(w * phase(j));
    }
    a *= scale;
    b *= scale;
    for (int j = 0; j < n; ++j) {
      deriv(j) += w * (-a * std::sin(w * phase(j)) + b * std::cos(w * phase(j)));
    }
  }
  return deriv;
}

std::vector<Matrix6d> residual_covariance_table(const StrideDataset& data,
                                                const GaitModel& model) {
  const std::size_t n_strides = data.stride_count();
  if (n_strides < 2)
    throw NumericalError("residual covariance: need at least 2 strides per knot, have " +
                         std::to_string(n_strides));

  // One residual row per stride per knot.
  std::vector<Eigen::MatrixXd> pooled(kSamplesPerStride);
  for (auto& m : pooled) m.resize(static_cast<Eigen::Index>(n_strides), 6);

  RowVecX row(model.dim());
  RowVecX drow(model.dim());
  Eigen::Index stride_row = 0;
  for (const auto& subj : data.subjects) {
    for (const auto& st : subj.strides) {
      const Eigen::VectorXd dtheta_f =
          spectral_phase_derivative(st.phase, st.theta_f, model.order);
      const Eigen::VectorXd dtheta_s =
          spectral_phase_derivative(st.phase, st.theta_s, model.order);
      for (int k = 0; k < kSamplesPerStride; ++k) {
        const double l_norm = st.stride_length(k) / subj.leg_length;
        regressor_into(st.phase(k), l_norm, st.incline_deg, model.order, {}, row);
        regressor_into(st.phase(k), l_norm, st.incline_deg, model.order, {.dp = 1}, drow);
        const Eigen::RowVector4d pred = row * model.coeffs;
        const Eigen::RowVector4d dpred = drow * model.coeffs;
        const double rate = st.phase_rate(k);
        auto r = pooled[k].row(stride_row);
        r(kFootAngle) = st.theta_f(k) - pred(kThetaF);
        r(kFootVel) = dtheta_f(k) * rate - dpred(kThetaF) * rate;
        r(kShankAngle) = st.theta_s(k) - pred(kThetaS);
        r(kShankVel) = dtheta_s(k) * rate - dpred(kThetaS) * rate;
        r(kHeelForward) = st.p_f(k) - pred(kPf);
        r(kHeelUpward) = st.p_u(k) - pred(kPu);
      }
      ++stride_row;
    }
  }

  std::vector<Matrix6d> table(kSamplesPerStride);
  for (int k = 0; k < kSamplesPerStride; ++k) {
    auto& rows = pooled[k];
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    rows.rowwise() -= mean;
    table[k] = (rows.transpose() * rows) / static_cast<double>(n_strides - 1);
  }
  return table;
}

}  // namespace gait
