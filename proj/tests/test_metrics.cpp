#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gait/metrics.hpp"

using namespace gait;

TEST_CASE("wrapped phase error") {
  CHECK(phase_error(0.99, 0.01) == doctest::Approx(-0.02));
  CHECK(phase_error(0.01, 0.99) == doctest::Approx(0.02));
  CHECK(phase_error(0.42, 0.42) == 0.0);
  // Boundary convention: opposite phases map to -0.5.
  CHECK(phase_error(0.25, 0.75) == doctest::Approx(-0.5));
  CHECK(phase_error(0.75, 0.25) == doctest::Approx(-0.5));
}

namespace {

LabeledStream two_stride_stream() {
  LabeledStream stream;
  stream.dt = 0.01;
  for (int k = 0; k < 200; ++k) {
    StreamSample s;
    s.t = k * 0.01;
    s.hs = (k == 0 || k == 100);
    s.truth.phase = (k % 100) / 100.0;
    s.truth.phase_rate = 1.0;
    s.truth.stride_length = 1.2;
    s.truth.incline = 0.0;
    stream.samples.push_back(s);
  }
  // Terminal boundary so the second stride is complete.
  StreamSample end;
  end.t = 2.0;
  end.hs = true;
  end.truth.phase = 0.0;
  end.truth.phase_rate = 1.0;
  end.truth.stride_length = 1.2;
  end.truth.incline = 0.0;
  stream.samples.push_back(end);
  return stream;
}

}  // namespace

TEST_CASE("exact estimates give zero RMSE, constant offsets give their magnitude") {
  const LabeledStream stream = two_stride_stream();
  EstimateTrace trace;
  for (const auto& s : stream.samples) {
    trace.ekf.push_back(s.truth);
  }
  auto rows = stride_metrics(stream, trace);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.ekf_phase_rmse_pct == 0.0);
    CHECK(r.ekf_stride_length_rmse == 0.0);
  }

  // A constant 0.02-cycle offset reads as exactly 2% phase RMSE.
  EstimateTrace offset;
  for (const auto& s : stream.samples) {
    GaitState g = s.truth;
    g.phase = wrap_phase(g.phase + 0.02);
    offset.ekf.push_back(g);
  }
  rows = stride_metrics(stream, offset);
  for (const auto& r : rows) CHECK(r.ekf_phase_rmse_pct == doctest::Approx(2.0));
}

TEST_CASE("length mismatches are rejected") {
  const LabeledStream stream = two_stride_stream();
  EstimateTrace trace;
  trace.ekf.assign(stream.samples.size() - 1, GaitState{});
  CHECK_THROWS_AS(stride_metrics(stream, trace), ConfigError);
}

TEST_CASE("paired t-test: identical and constant-shift degeneracies") {
  std::vector<double> a{1, 2, 3, 4, 5};
  const auto eq = paired_ttest(a, a);
  CHECK(eq.degenerate_equal);
  CHECK(eq.p == 1.0);

  std::vector<double> b;
  for (double x : a) b.push_back(x - 0.5);
  const auto shift = paired_ttest(a, b);
  CHECK(shift.degenerate_infinite);
  CHECK(shift.p == 0.0);
  CHECK(std::isinf(shift.t));
}

TEST_CASE("paired t-test matches an independent quadrature oracle") {
  const std::vector<double> a{2.31, 1.92, 2.56, 2.10, 2.44, 1.99, 2.61, 2.05, 2.38, 2.22};
  const std::vector<double> b{2.05, 1.98, 2.30, 2.14, 2.09, 1.86, 2.42, 2.01, 2.19, 2.06};
  const auto res = paired_ttest(a, b);

  // Direct textbook computation of the statistic.
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double t_direct = mean / (sd / std::sqrt(static_cast<double>(n)));
  CHECK(res.t == doctest::Approx(t_direct).epsilon(1e-12));
  CHECK(res.dof == 9);

  // p-value oracle: adaptive Simpson quadrature of the Student-t density.
  const double nu = 9.0;
  auto pdf = [nu](double x) {
    return std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) /
           std::sqrt(nu * M_PI) * std::pow(1.0 + x * x / nu, -(nu + 1) / 2);
  };
  std::function<double(double, double, double, double, double, int)> simpson =
      [&](double lo, double hi, double flo, double fhi, double fmid, int depth) {
        const double mid = 0.5 * (lo + hi);
        const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
        const double flmid = pdf(lmid), frmid = pdf(rmid);
        const double whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4 * flmid + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4 * frmid + fhi);
        if (depth > 40 || std::abs(left + right - whole) < 1e-14)
          return left + right + (left + right - whole) / 15.0;
        return simpson(lo, mid, flo, fmid, flmid, depth + 1) +
               simpson(mid, hi, fmid, fhi, frmid, depth + 1);
      };
  const double T = std::abs(res.t);
  const double body =
      simpson(0.0, T, pdf(0.0), pdf(T), pdf(0.5 * T), 0);
  const double p_oracle = 1.0 - 2.0 * body;
  CHECK(res.p == doctest::Approx(p_oracle).epsilon(1e-10));
}

TEST_CASE("t-test p-values decrease with separation and match known quantiles") {
  // t = 2.262 at dof 9 is the classic two-tailed 5% quantile.
  CHECK(student_t_two_tailed_p(2.262, 9) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(student_t_two_tailed_p(0.0, 9) == doctest::Approx(1.0));
  CHECK(student_t_two_tailed_p(5.0, 9) < 0.001);
}
