#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gait/experiments.hpp"
#include "gait/fit.hpp"

using namespace gait;

namespace {

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig c;
  c.mode = "crossval";
  c.output_dir = out_dir;
  c.order = 8;
  c.synthetic.n_subjects = 3;
  c.synthetic.strides_per_condition = 1;
  c.synthetic.speeds = {0.8, 1.2};
  c.synthetic.inclines = {-5.0, 0.0, 5.0};
  c.synthetic.order = 8;
  c.seed = 314;
  std::filesystem::create_directories(out_dir);
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config json round trip preserves every field") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_cfg");
  c.sigma_q << 1e-3, 2e-3, 5e-2;
  c.beta = 0.4;
  c.init.phase_rate = 1.1;
  c.truth_mode = TruthPhaseMode::kDatasetLabels;
  c.scenario = scenario_preset("speed_pulse");
  const nlohmann::json j = config_to_json(c);
  const ExperimentConfig back = config_from_json(j, ExperimentConfig{});
  CHECK(config_to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("scenario presets have the advertised shapes") {
  const ScenarioProfile pulse = scenario_preset("speed_pulse");
  CHECK(pulse.duration_s == 80.0);
  CHECK(pulse.phase_rate.at(5.0) > pulse.phase_rate.at(30.0));  // fast then slow
  const ScenarioProfile ramp = scenario_preset("incline_ramp");
  CHECK(ramp.incline_deg.at(0.0) == 0.0);
  CHECK(ramp.incline_deg.at(45.0) == doctest::Approx(5.0));
  CHECK(ramp.incline_deg.at(85.0) == 10.0);
  CHECK_THROWS_AS(scenario_preset("nope"), ConfigError);
}

TEST_CASE("crossval rejects fewer than 3 subjects") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_cv_small");
  c.synthetic.n_subjects = 1;
  CHECK_THROWS_AS(run_crossval(c), ConfigError);
  c.synthetic.n_subjects = 2;
  CHECK_THROWS_AS(run_crossval(c), ConfigError);
}

TEST_CASE("crossval smoke: EKF tracks, reports aggregate both estimators") {
  const ExperimentConfig c = tiny_config("/tmp/gaitekf_cv");
  const nlohmann::json j = run_crossval(c);
  CHECK(j.at("subjects").size() == 3);
  CHECK(j.at("pooled").at("strides").get<int>() > 6);
  CHECK(j.at("pooled").at("ekf_phase_rmse_pct").at("mean").get<double>() < 5.0);
  CHECK(j.contains("ekf_vs_tbe"));
  CHECK(std::filesystem::exists("/tmp/gaitekf_cv/crossval_strides.csv"));
  CHECK(std::filesystem::exists("/tmp/gaitekf_cv/crossval_report.json"));
}

TEST_CASE("fixed seed makes crossval byte-identical") {
  const ExperimentConfig a = tiny_config("/tmp/gaitekf_det_a");
  const ExperimentConfig b = tiny_config("/tmp/gaitekf_det_b");
  const nlohmann::json ja = run_crossval(a);
  const nlohmann::json jb = run_crossval(b);
  CHECK(ja.dump() == jb.dump());
  CHECK(slurp("/tmp/gaitekf_det_a/crossval_strides.csv") ==
        slurp("/tmp/gaitekf_det_b/crossval_strides.csv"));
  // Reports embed the config hash and seed.
  CHECK(ja.at("config_hash") == config_hash(a));
  CHECK(ja.at("seed").get<std::uint64_t>() == 314);
}

TEST_CASE("frozen task states stay at initialization") {
  const GaitModel model = reference_gait_model(8);
  ScenarioProfile p;
  p.duration_s = 10.0;
  p.phase_rate = Schedule::constant(0.8);
  p.stride_length_m = Schedule::constant(1.25);
  p.incline_deg = Schedule::constant(6.0);  // far from the frozen init of 0
  p.noise_sigma << 0.5, 5, 0.5, 5, 0.005, 0.005;
  p.seed = 11;
  const LabeledStream stream = generate_synthetic_stream(p, model);

  RunOptions opt;
  opt.freeze_task = true;
  opt.run_backup = false;
  opt.init.stride_length = 1.25;
  const StreamRunResult run = run_stream(stream, model, nullptr,
                                         NoiseConfig::defaults(), 0.9, opt);
  const double l0 = run.trace.ekf.front().stride_length;
  const double r0 = run.trace.ekf.front().incline;
  for (const auto& g : run.trace.ekf) {
    CHECK(std::abs(g.stride_length - l0) < 1e-6);
    CHECK(std::abs(g.incline - r0) < 1e-6);
  }
}

TEST_CASE("ablation smoke produces the paired comparison") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_abl");
  c.mode = "ablation";
  const nlohmann::json j = run_ablation(c);
  CHECK(j.contains("full"));
  CHECK(j.contains("no_task"));
  CHECK(j.contains("no_task_vs_full"));
  CHECK(std::filesystem::exists("/tmp/gaitekf_abl/ablation_strides.csv"));
}

TEST_CASE("replay smoke: runs a preset scenario and reports latency") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_replay");
  c.mode = "replay";
  c.scenario = scenario_preset("steady");
  c.scenario.duration_s = 12.0;
  c.scenario.noise_sigma << 1, 10, 7, 20, 0.01, 0.08;
  c.scenario.seed = 5;
  const nlohmann::json j = run_replay(c);
  CHECK(j.at("summary").at("strides").get<int>() >= 6);
  CHECK(j.at("latency_us").contains("p99"));
  CHECK(std::filesystem::exists("/tmp/gaitekf_replay/replay_trace.csv"));
  // Matched model, mild noise: phase tracking well under 3%.
  CHECK(j.at("summary").at("ekf_phase_rmse_pct").at("mean").get<double>() < 3.0);
}

namespace {

struct ReplayRun {
  LabeledStream stream;
  StreamRunResult run;
};

ReplayRun run_preset(const std::string& preset) {
  SyntheticDatasetConfig syn;
  syn.n_subjects = 4;
  syn.strides_per_condition = 1;
  syn.coeff_jitter = 0.04;
  syn.order = 20;
  syn.seed = 101;
  const StrideDataset data = make_synthetic_dataset(syn);
  const GaitModel model = fit_gait_model(data, build_gait_constraints(20), 20);

  ScenarioProfile p = scenario_preset(preset);
  p.noise_sigma << 1, 10, 7, 20, 0.01, 0.08;
  p.seed = 5;
  // Matched model: this exercises schedule tracking; subject-mismatch robustness
  // is the cross-validation tests' job.
  ReplayRun out{generate_synthetic_stream(p, model), {}};

  NoiseConfig noise = NoiseConfig::defaults();
  noise.xsub = residual_covariance_table(data, model);
  RunOptions opt;
  opt.init = FilterInit{0.0, p.phase_rate.at(0.0), p.stride_length_m.at(0.0), 0.0};
  out.run = run_stream(out.stream, model, nullptr, noise, 0.9, opt);
  return out;
}

}  // namespace

TEST_CASE("replay: phase rate tracks the speed-pulse schedule") {
  const ReplayRun rr = run_preset("speed_pulse");
  const double rate_change = scenario_preset("speed_pulse").phase_rate.at(0.0) -
                             scenario_preset("speed_pulse").phase_rate.at(30.0);
  REQUIRE(rate_change > 0.1);

  // Per-stride mean rate error over strides inside the constant-speed segments
  // (strides straddling a 2 s speed ramp measure the schedule's own transition,
  // not the filter's settled accuracy).
  const double segments[4][2] = {{0.5, 19.0}, {21.5, 39.0}, {41.5, 59.0}, {61.5, 80.0}};
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < rr.stream.samples.size(); ++i)
    if (rr.stream.samples[i].hs) bounds.push_back(i);
  double total = 0.0;
  int n = 0;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const double t0 = rr.stream.samples[bounds[s]].t;
    const double t1 = rr.stream.samples[bounds[s + 1]].t;
    bool steady = false;
    for (const auto& seg : segments) steady |= (t0 >= seg[0] && t1 <= seg[1]);
    if (!steady) continue;
    double mean_err = 0.0;
    for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i)
      mean_err += rr.run.trace.ekf[i].phase_rate - rr.stream.samples[i].truth.phase_rate;
    mean_err /= static_cast<double>(bounds[s + 1] - bounds[s]);
    total += std::abs(mean_err);
    ++n;
  }
  REQUIRE(n > 40);
  CHECK(total / n < 0.05 * rate_change);
}

TEST_CASE("replay: incline estimate stays within 2.5 deg RMSE on the long ramp") {
  for (const char* preset : {"incline_ramp", "decline_ramp"}) {
    const ReplayRun rr = run_preset(preset);
    double ss = 0.0;
    for (std::size_t i = 0; i < rr.stream.samples.size(); ++i) {
      const double e = rr.run.trace.ekf[i].incline - rr.stream.samples[i].truth.incline;
      ss += e * e;
    }
    const double rmse = std::sqrt(ss / static_cast<double>(rr.stream.samples.size()));
    CHECK(rmse < 2.5);
  }
}

TEST_CASE("fit mode writes loadable model containers") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_fit");
  c.mode = "fit";
  c.gait_model_path = "/tmp/gaitekf_fit/gait_model.bin";
  c.torque_model_path = "/tmp/gaitekf_fit/torque_model.bin";
  const nlohmann::json j = run_fit(c);
  CHECK(j.at("max_constraint_violation").get<double>() <= 1e-8);
  const ModelContainer loaded = load_model(c.gait_model_path);
  CHECK(loaded.order == 8);
  CHECK(loaded.covariance.size() == kSamplesPerStride);
  const ModelContainer torque = load_model(c.torque_model_path);
  CHECK(torque.output_scale == 5.0);
}

TEST_CASE("gen writes a dataset CSV that reloads identically") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_gen");
  c.mode = "gen";
  c.dataset_path = "/tmp/gaitekf_gen/dataset.csv";
  const nlohmann::json j = run_gen(c);
  CHECK(j.at("strides").get<int>() == 3 * 6);
  const StrideDataset data = load_stride_dataset(c.dataset_path);
  CHECK(data.subjects.size() == 3);

  // Same seed, second run: identical bytes.
  ExperimentConfig c2 = c;
  c2.dataset_path = "/tmp/gaitekf_gen/dataset2.csv";
  run_gen(c2);
  CHECK(slurp(c.dataset_path) == slurp(c2.dataset_path));
}

TEST_CASE("report mode re-aggregates stride CSVs") {
  ExperimentConfig c = tiny_config("/tmp/gaitekf_rep");
  run_crossval(c);
  ExperimentConfig r;
  r.mode = "report";
  r.inputs = {"/tmp/gaitekf_rep/crossval_strides.csv"};
  const nlohmann::json j = run_report(r);
  CHECK(j.at("strides").get<int>() > 6);
  CHECK(j.contains("ekf_phase_rmse_pct"));
}
