#include "gait/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gait/fit.hpp"
#include "gait/reference.hpp"
#include "gait/rng.hpp"

namespace gait {

double Schedule::at(double t) const {
  if (points.empty()) throw ConfigError("schedule has no points");
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (t <= points[i].first) {
      const auto& [t0, v0] = points[i - 1];
      const auto& [t1, v1] = points[i];
      const double frac = (t - t0) / (t1 - t0);
      return v0 + frac * (v1 - v0);
    }
  }
  return points.back().second;
}

std::size_t LabeledStream::hs_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.hs ? 1 : 0;
  return n;
}

LabeledStream generate_synthetic_stream(const ScenarioProfile& profile,
                                        const GaitModel& model_true) {
  if (profile.sample_rate_hz <= 0 || profile.duration_s <= 0)
    throw ConfigError("scenario: rate and duration must be positive");

  Rng rng(mix_seed(profile.seed, 0x5eed));
  GaitModel subject = model_true;
  if (profile.subject_jitter > 0.0) {
    for (int c = 0; c < 4; ++c)
      perturb_column(subject.coeffs.col(c), subject.order, profile.subject_jitter, rng);
  }
  MeasurementModel meas(std::move(subject), profile.leg_length);

  LabeledStream stream;
  stream.dt = 1.0 / profile.sample_rate_hz;
  const auto n = static_cast<std::size_t>(profile.duration_s * profile.sample_rate_hz);
  stream.samples.reserve(n);

  double phase = 0.0;
  Vector6d h;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / profile.sample_rate_hz;
    StreamSample s;
    s.t = t;
    if (k == 0) {
      s.hs = true;  // the stream starts at a stride boundary
    } else {
      const double t_prev = static_cast<double>(k - 1) / profile.sample_rate_hz;
      phase += profile.phase_rate.at(t_prev) * stream.dt;
      if (phase >= 1.0) {
        phase -= 1.0;
        s.hs = true;
      }
    }
    s.truth.phase = phase;
    s.truth.phase_rate = profile.phase_rate.at(t);
    s.truth.stride_length = profile.stride_length_m.at(t);
    s.truth.incline = profile.incline_deg.at(t);

    const Eigen::Vector4d x{
        phase, s.truth.phase_rate,
        stride_transform_inverse(s.truth.stride_length, profile.leg_length),
        s.truth.incline};
    meas.eval(x, h);
    s.z = h;
    for (int c = 0; c < 6; ++c)
      if (profile.noise_sigma(c) > 0.0) s.z(c) += profile.noise_sigma(c) * rng.normal();
    stream.samples.push_back(s);
  }
  return stream;
}

namespace {

// Phase label at a fraction of the stride's duration, interpolated over the
// sample grid (distinct from the constant-rate definition when labels are
// non-uniform in time).
double label_at_fraction(const Eigen::VectorXd& labels, double u) {
  const int n = static_cast<int>(labels.size());
  const double x = std::clamp(u, 0.0, 1.0) * n;
  int i0 = static_cast<int>(x);
  if (i0 >= n) i0 = n - 1;
  const double frac = x - i0;
  const double v0 = labels(i0);
  const double v1 = (i0 + 1 < n) ? labels(i0 + 1) : labels(0) + 1.0;
  return wrap_phase(v0 + frac * (v1 - v0));
}

// Periodic linear interpolation over a stride's phase grid.
double interp_periodic(const Eigen::VectorXd& phase, const Eigen::VectorXd& values,
                       double p) {
  const int n = static_cast<int>(phase.size());
  p = wrap_phase(p);
  if (p < phase(0)) p += 1.0;  // before the first knot: wrap segment
  int lo = 0, hi = n;          // find last knot <= p
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (phase(mid) <= p) lo = mid;
    else hi = mid;
  }
  const double p0 = phase(lo);
  const double p1 = (lo + 1 < n) ? phase(lo + 1) : phase(0) + 1.0;
  const double v0 = values(lo);
  const double v1 = (lo + 1 < n) ? values(lo + 1) : values(0);
  const double span = p1 - p0;
  const double frac = (span > 0.0) ? (p - p0) / span : 0.0;
  return v0 + frac * (v1 - v0);
}

}  // namespace

LabeledStream concatenate_strides(const Subject& subject, const std::vector<int>& order,
                                  double rate_hz, TruthPhaseMode mode) {
  if (subject.strides.empty() || order.empty())
    throw ConfigError("concatenate: no strides selected");
  for (int idx : order)
    if (idx < 0 || idx >= static_cast<int>(subject.strides.size()))
      throw ConfigError("concatenate: stride index out of range");

  struct Prepared {
    const Stride* stride;
    double period;
    double t_start;
    Eigen::VectorXd dtheta_f, dtheta_s;  // phase derivatives at the knots
  };
  std::vector<Prepared> strides;
  strides.reserve(order.size());
  double t_total = 0.0;
  for (int idx : order) {
    const Stride& st = subject.strides[static_cast<std::size_t>(idx)];
    Prepared p;
    p.stride = &st;
    p.period = 1.0 / st.mean_phase_rate();
    p.t_start = t_total;
    // Derivative band capped by the Nyquist limit of the 150-knot grid.
    const int band = std::min(20, kSamplesPerStride / 2 - 1);
    p.dtheta_f = spectral_phase_derivative(st.phase, st.theta_f, band);
    p.dtheta_s = spectral_phase_derivative(st.phase, st.theta_s, band);
    t_total += p.period;
    strides.push_back(std::move(p));
  }

  LabeledStream stream;
  stream.dt = 1.0 / rate_hz;
  stream.samples.reserve(static_cast<std::size_t>(t_total * rate_hz) + 1);

  std::size_t cur = 0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    if (t >= t_total) break;
    bool hs = (k == 0);
    while (cur + 1 < strides.size() &&
           t >= strides[cur + 1].t_start) {
      ++cur;
      hs = true;
    }
    const Prepared& pre = strides[cur];
    const Stride& st = *pre.stride;
    const double p_local = (t - pre.t_start) / pre.period;
    const double rate = 1.0 / pre.period;

    StreamSample s;
    s.t = t;
    s.hs = hs;
    s.z(kFootAngle) = interp_periodic(st.phase, st.theta_f, p_local);
    s.z(kFootVel) = interp_periodic(st.phase, pre.dtheta_f, p_local) * rate;
    s.z(kShankAngle) = interp_periodic(st.phase, st.theta_s, p_local);
    s.z(kShankVel) = interp_periodic(st.phase, pre.dtheta_s, p_local) * rate;
    s.z(kHeelForward) = interp_periodic(st.phase, st.p_f, p_local);
    s.z(kHeelUpward) = interp_periodic(st.phase, st.p_u, p_local);

    s.truth.phase = (mode == TruthPhaseMode::kConstantRate)
                        ? p_local
                        : label_at_fraction(st.phase, p_local);
    s.truth.phase_rate = rate;
    s.truth.stride_length = st.mean_stride_length();
    s.truth.incline = st.incline_deg;
    stream.samples.push_back(s);
  }
  return stream;
}

}  // namespace gait
