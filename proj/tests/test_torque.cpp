#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gait/fit.hpp"
#include "gait/reference.hpp"
#include "gait/rng.hpp"

using namespace gait;

namespace {

StrideDataset torque_dataset(int order, double noise = 0.0) {
  SyntheticDatasetConfig cfg;
  cfg.n_subjects = 2;
  cfg.strides_per_condition = 1;
  cfg.coeff_jitter = 0.0;
  cfg.duration_jitter = 0.0;
  cfg.kin_noise.setZero();
  cfg.torque_noise = noise;
  cfg.order = order;
  cfg.seed = 9;
  return make_synthetic_dataset(cfg);
}

}  // namespace

TEST_CASE("torque fit recovers the generating surface at the 1/5 scale") {
  const int order = 8;
  const StrideDataset data = torque_dataset(order);
  const TorqueSurface fitted = fit_torque_model(data, order);
  const TorqueSurface truth = reference_torque_surface(order);
  const double scale = truth.coeffs.cwiseAbs().maxCoeff();
  CHECK((fitted.coeffs - truth.coeffs).cwiseAbs().maxCoeff() < 1e-6 * scale);
  CHECK(fitted.scale == 5.0);
}

TEST_CASE("fit of identically zero torque gives zero coefficients") {
  const int order = 6;
  StrideDataset data = torque_dataset(order);
  for (auto& subj : data.subjects)
    for (auto& st : subj.strides) st.torque.setZero();
  const TorqueSurface fitted = fit_torque_model(data, order);
  CHECK(fitted.coeffs.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("missing torque channel is a config error") {
  const int order = 6;
  StrideDataset data = torque_dataset(order);
  data.subjects[0].strides[0].torque.resize(0);
  CHECK_THROWS_AS(fit_torque_model(data, order), ConfigError);
}

TEST_CASE("evaluation floors dorsiflexion torque at zero") {
  const TorqueSurface s = reference_torque_surface(10);
  const double L = 0.9;
  // Swing phases of the reference surface are negative before the floor.
  bool saw_negative_raw = false;
  for (double p = 0.0; p < 1.0; p += 0.001) {
    const GaitState x{p, 0.9, 1.2, 0.0};
    const double raw = evaluate_torque_unfloored(s, x, L);
    const double floored = evaluate_torque(s, x, L);
    CHECK(floored >= 0.0);
    CHECK(floored == doctest::Approx(std::max(0.0, raw)));
    if (raw < -0.5) saw_negative_raw = true;
  }
  CHECK(saw_negative_raw);
}

TEST_CASE("torque evaluation is periodic in phase") {
  const TorqueSurface s = reference_torque_surface(10);
  for (double p : {0.1, 0.45, 0.77}) {
    const double a = evaluate_torque(s, {p, 0.9, 1.3, 5.0}, 0.9);
    const double b = evaluate_torque(s, {p + 1.0, 0.9, 1.3, 5.0}, 0.9);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("non-negativity after floor over random states") {
  const TorqueSurface s = reference_torque_surface(12);
  Rng rng(77);
  for (int i = 0; i < 10000; ++i) {
    const GaitState x{rng.uniform(), 0.5 + rng.uniform(), 0.5 + 1.5 * rng.uniform(),
                      20.0 * rng.uniform() - 10.0};
    CHECK(evaluate_torque(s, x, 0.9) >= 0.0);
  }
}

TEST_CASE("surface is Lipschitz-continuous on a phase grid") {
  const TorqueSurface s = reference_torque_surface(12);
  const double delta = 1e-4;
  double max_step = 0.0;
  for (double p = 0.0; p < 1.0; p += delta) {
    const double a = evaluate_torque(s, {p, 0.9, 1.2, 3.0}, 0.9);
    const double b = evaluate_torque(s, {p + delta, 0.9, 1.2, 3.0}, 0.9);
    max_step = std::max(max_step, std::abs(b - a));
  }
  // Bounded slope: steps shrink proportionally with delta.
  CHECK(max_step < 1500.0 * delta);
}

TEST_CASE("synthetic biological torque peaks near the expected magnitude when scaled") {
  // The delivered (1/5-scale) profile should peak around 20 N*m for a typical stride.
  const TorqueSurface s = reference_torque_surface(10);
  double peak = 0.0;
  for (double p = 0.0; p < 1.0; p += 0.002)
    for (double l : {1.0, 1.2, 1.4})
      for (double r : {-10.0, 0.0, 10.0})
        peak = std::max(peak, evaluate_torque(s, {p, 0.9, l, r}, 0.9));
  CHECK(peak > 10.0);
  CHECK(peak < 30.0);
}
