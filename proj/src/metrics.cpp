#include "gait/metrics.hpp"

#include <cmath>
#include <limits>

namespace gait {

namespace {

// Regularized incomplete beta by Lentz's continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double rmse(const std::vector<double>& errs) {
  if (errs.empty()) return 0.0;
  double ss = 0.0;
  for (double e : errs) ss += e * e;
  return std::sqrt(ss / static_cast<double>(errs.size()));
}

}  // namespace

double student_t_two_tailed_p(double t, int dof) {
  const double nu = static_cast<double>(dof);
  return betai(0.5 * nu, 0.5, nu / (nu + t * t));
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("paired t-test: length mismatch");
  if (a.size() < 2) throw ConfigError("paired t-test: need at least 2 pairs");
  const auto n = static_cast<double>(a.size());

  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) all_zero = false;
    ss += (d - mean) * (d - mean);
  }

  TTestResult r;
  r.dof = static_cast<int>(a.size()) - 1;
  if (all_zero) {
    r.degenerate_equal = true;
    r.t = 0.0;
    r.p = 1.0;
    return r;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    r.degenerate_infinite = true;
    r.t = std::numeric_limits<double>::infinity() * (mean > 0 ? 1.0 : -1.0);
    r.p = 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  r.p = student_t_two_tailed_p(r.t, r.dof);
  return r;
}

std::vector<StrideMetricsRow> stride_metrics(const LabeledStream& stream,
                                             const EstimateTrace& trace) {
  const std::size_t n = stream.samples.size();
  auto check = [n](std::size_t sz, const char* what) {
    if (sz != 0 && sz != n)
      throw ConfigError(std::string("stride metrics: ") + what +
                        " trace length does not match the stream");
  };
  check(trace.ekf.size(), "ekf");
  check(trace.ekf_torque.size(), "ekf torque");
  check(trace.truth_torque.size(), "truth torque");
  check(trace.tbe_phase.size(), "tbe");
  check(trace.backup.size(), "backup");
  if (trace.ekf.empty()) throw ConfigError("stride metrics: no EKF trace");

  // Stride boundaries: consecutive heel-strike flags.
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < n; ++i)
    if (stream.samples[i].hs) bounds.push_back(i);

  std::vector<StrideMetricsRow> rows;
  const bool has_torque = !trace.ekf_torque.empty() && !trace.truth_torque.empty();
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const std::size_t lo = bounds[s], hi = bounds[s + 1];
    StrideMetricsRow row;
    row.stride_index = static_cast<int>(s);
    row.t_start = stream.samples[lo].t;
    row.t_end = stream.samples[hi].t;
    row.n_samples = static_cast<int>(hi - lo);
    row.has_torque = has_torque;
    row.has_backup = !trace.backup.empty();
    row.tbe_valid = !trace.tbe_phase.empty();

    std::vector<double> e_p, e_pr, e_l, e_r, e_tau, e_tbe, e_bp, e_bl, e_br;
    for (std::size_t i = lo; i < hi; ++i) {
      const GaitState& truth = stream.samples[i].truth;
      const GaitState& est = trace.ekf[i];
      e_p.push_back(phase_error(est.phase, truth.phase));
      e_pr.push_back(est.phase_rate - truth.phase_rate);
      e_l.push_back(est.stride_length - truth.stride_length);
      e_r.push_back(est.incline - truth.incline);
      if (has_torque) e_tau.push_back(trace.ekf_torque[i] - trace.truth_torque[i]);
      if (!trace.tbe_phase.empty()) {
        const double tp = trace.tbe_phase[i];
        if (std::isnan(tp)) {
          row.tbe_valid = false;
        } else {
          e_tbe.push_back(phase_error(tp, truth.phase));
        }
      }
      if (!trace.backup.empty()) {
        e_bp.push_back(phase_error(trace.backup[i].phase, truth.phase));
        e_bl.push_back(trace.backup[i].stride_length - truth.stride_length);
        e_br.push_back(trace.backup[i].incline - truth.incline);
      }
    }
    row.ekf_phase_rmse_pct = 100.0 * rmse(e_p);
    row.ekf_phase_rate_rmse = rmse(e_pr);
    row.ekf_stride_length_rmse = rmse(e_l);
    row.ekf_incline_rmse = rmse(e_r);
    row.ekf_torque_rmse = rmse(e_tau);
    row.tbe_phase_rmse_pct = row.tbe_valid ? 100.0 * rmse(e_tbe)
                                           : std::numeric_limits<double>::quiet_NaN();
    row.backup_phase_rmse_pct = 100.0 * rmse(e_bp);
    row.backup_stride_length_rmse = rmse(e_bl);
    row.backup_incline_rmse = rmse(e_br);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gait
