#include "gait/reference.hpp"

#include <algorithm>

namespace gait {

namespace {

// Order-6 Fourier coefficients (const, cos1, sin1, ..., cos6, sin6), all per unit of
// leg-length-normalized stride. Angles in degrees, positions in meters, torque N*m.
constexpr int kWaveOrder = 6;
constexpr int kWaveLen = 2 * kWaveOrder + 1;

// Foot-angle swing component; vanishes at p = 0.2 so theta_f = r there (flat foot).
constexpr double kFootSwing[kWaveLen] = {
    -2.85052077208,  6.47387466379,  3.86827468145,   1.71485168667, -4.80913014556,
    0.244229645626,  -0.538637389126, 0.765607505966, -0.678995463042, 0.433970576489,
    -0.345949339889, 0.334952718649, -0.161638192798};
// Shank-angle swing about vertical.
constexpr double kShankSwing[kWaveLen] = {
    -1.79995625704, 16.1272328705,  1.18208410265,  -1.09361195275, -2.12627167973,
    0.0549981458798, 0.591059123818, 0.101051787799, -0.227706176835, 0.0810780800914,
    0.162096009525, 0.114487884837, -0.112911716329};
// Small ramp-coupled shank lean.
constexpr double kShankRamp[kWaveLen] = {0.08, 0.06, -0.04, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
// Forward heel excursion.
constexpr double kHeelForwardArc[kWaveLen] = {
    0.02400093023,     0.303573898058,      0.0839136184762, 0.0172484550359,
    -0.0489667043728,  -0.00277039755893,   0.0031149839515, 0.00360411077415,
    -0.0017396602722,  5.31627173837e-07,   -2.77896370267e-09, 0.00160196913814,
    0.000773180049998};
// Upward heel clearance; near zero through stance, peaks in swing.
constexpr double kHeelUpwardArc[kWaveLen] = {
    0.0598998618498,  -0.0450212504964, -0.049021091525,    -0.000175133454523,
    0.00664314323249, -0.00400033400176, 0.0026488379784,   -0.000169383316248,
    -0.000286557410651, 0.000239830242132, 0.000729284857062, -0.000117076915977,
    8.81013948034e-05};
// Biological plantarflexion torque; goes negative in swing (floored downstream).
constexpr double kAnkleTorque[kWaveLen] = {
    17.7749507892,   -27.0915179981, 11.8306434911,   13.4792574885, -2.60649452644,
    -5.90377749056,  -0.856879756249, 2.11596685762,  1.55700217761, -0.486265950536,
    -1.175217789,    0.0502240247404, 0.548795975659};

// Incline gain on the torque surface: tau = l * T(p) * (1 + kTorqueRampGain * r).
constexpr double kTorqueRampGain = 0.03;

// Regressor block offsets: 0 = r*l, 1 = r*(1-l), 2 = (1-r)*l, 3 = (1-r)*(1-l).
void add_wave(Eigen::Ref<Eigen::VectorXd> column, int order, int block,
              const double* wave, double gain = 1.0) {
  const int m = phase_basis_dim(order);
  for (int i = 0; i < kWaveLen; ++i) column(block * m + i) += gain * wave[i];
}

}  // namespace

GaitModel reference_gait_model(int order) {
  if (order < kWaveOrder) throw ConfigError("reference model needs order >= 6");
  GaitModel model;
  model.order = order;
  model.coeffs = Eigen::MatrixXd::Zero(regressor_dim(order), 4);

  // theta_s = l * shank_swing(p) + r * l * shank_ramp(p)
  add_wave(model.coeffs.col(kThetaS), order, 0, kShankSwing);
  add_wave(model.coeffs.col(kThetaS), order, 2, kShankSwing);
  add_wave(model.coeffs.col(kThetaS), order, 0, kShankRamp);
  // theta_f = r + l * foot_swing(p)
  model.coeffs(0 * phase_basis_dim(order), kThetaF) += 1.0;  // r*l block, constant
  model.coeffs(1 * phase_basis_dim(order), kThetaF) += 1.0;  // r*(1-l) block, constant
  add_wave(model.coeffs.col(kThetaF), order, 0, kFootSwing);
  add_wave(model.coeffs.col(kThetaF), order, 2, kFootSwing);
  // p_f = l * heel_forward(p), p_u = l * heel_upward(p)
  add_wave(model.coeffs.col(kPf), order, 0, kHeelForwardArc);
  add_wave(model.coeffs.col(kPf), order, 2, kHeelForwardArc);
  add_wave(model.coeffs.col(kPu), order, 0, kHeelUpwardArc);
  add_wave(model.coeffs.col(kPu), order, 2, kHeelUpwardArc);
  return model;
}

Eigen::VectorXd reference_biological_torque(int order) {
  if (order < kWaveOrder) throw ConfigError("reference torque needs order >= 6");
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(regressor_dim(order));
  add_wave(coeffs, order, 0, kAnkleTorque, 1.0 + kTorqueRampGain);
  add_wave(coeffs, order, 2, kAnkleTorque);
  return coeffs;
}

TorqueSurface reference_torque_surface(int order) {
  TorqueSurface s;
  s.order = order;
  s.scale = 5.0;
  s.coeffs = reference_biological_torque(order) / 5.0;
  return s;
}

void perturb_column(Eigen::Ref<Eigen::VectorXd> column, int order, double rel_sigma,
                    Rng& rng) {
  if (rel_sigma <= 0.0) return;
  const int m = phase_basis_dim(order);
  const double amp = column.cwiseAbs().maxCoeff();
  const int max_harmonic = 3;
  for (int j = 0; j <= 2 * max_harmonic; ++j) {
    const int harmonic = (j + 1) / 2;
    const double delta = rel_sigma * amp / (1.0 + harmonic) * rng.normal();
    column(0 * m + j) += delta;  // r*l block
    column(2 * m + j) += delta;  // (1-r)*l block: together this is an l-scaled delta
  }
}

StrideDataset make_synthetic_dataset(const SyntheticDatasetConfig& config) {
  if (config.n_subjects < 1) throw ConfigError("synthetic dataset: need >= 1 subject");
  const GaitModel base = reference_gait_model(config.order);
  const Eigen::VectorXd torque_base = reference_biological_torque(config.order);

  StrideDataset data;
  data.subjects.reserve(config.n_subjects);
  RowVecX row(regressor_dim(config.order));

  for (int s = 0; s < config.n_subjects; ++s) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(s)));
    Subject subj;
    subj.id = "S" + std::string(s < 9 ? "0" : "") + std::to_string(s + 1);
    subj.leg_length = 0.9 * (1.0 + 0.07 * (2.0 * rng.uniform() - 1.0));

    GaitModel model = base;
    for (int c = 0; c < 4; ++c)
      perturb_column(model.coeffs.col(c), config.order, config.coeff_jitter, rng);
    Eigen::VectorXd torque = torque_base;
    perturb_column(torque, config.order, config.coeff_jitter, rng);

    for (double speed : config.speeds) {
      for (double incline : config.inclines) {
        const double base_len =
            (1.25 + 0.6 * (speed - 1.0)) * (1.0 - 0.006 * incline) * (subj.leg_length / 0.9);
        for (int k = 0; k < config.strides_per_condition; ++k) {
          double eps = config.duration_jitter * rng.normal();
          eps = std::clamp(eps, -3.0 * config.duration_jitter, 3.0 * config.duration_jitter);
          const double period = (base_len / speed) * (1.0 + eps);
          const double length = speed * period;  // treadmill: speed is enforced
          const double l_norm = length / subj.leg_length;

          Stride st;
          st.speed_mps = speed;
          st.incline_deg = incline;
          st.phase.resize(kSamplesPerStride);
          st.phase_rate = Eigen::VectorXd::Constant(kSamplesPerStride, 1.0 / period);
          st.stride_length = Eigen::VectorXd::Constant(kSamplesPerStride, length);
          st.theta_s.resize(kSamplesPerStride);
          st.theta_f.resize(kSamplesPerStride);
          st.p_f.resize(kSamplesPerStride);
          st.p_u.resize(kSamplesPerStride);
          if (config.with_torque) st.torque.resize(kSamplesPerStride);

          for (int i = 0; i < kSamplesPerStride; ++i) {
            const double p = static_cast<double>(i) / kSamplesPerStride;
            st.phase(i) = p;
            regressor_into(p, l_norm, incline, config.order, {}, row);
            const Eigen::RowVector4d y = row * model.coeffs;
            st.theta_s(i) = y(kThetaS) + config.kin_noise(0) * rng.normal();
            st.theta_f(i) = y(kThetaF) + config.kin_noise(1) * rng.normal();
            st.p_f(i) = y(kPf) + config.kin_noise(2) * rng.normal();
            st.p_u(i) = y(kPu) + config.kin_noise(3) * rng.normal();
            if (config.with_torque)
              st.torque(i) = row.dot(torque) + config.torque_noise * rng.normal();
          }
          subj.strides.push_back(std::move(st));
        }
      }
    }
    data.subjects.push_back(std::move(subj));
  }
  return data;
}

}  // namespace gait
