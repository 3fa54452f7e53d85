#include "gait/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "gait/fit.hpp"

namespace gait {

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

StreamRunResult run_stream(const LabeledStream& stream, const GaitModel& model,
                           const TorqueSurface* torque, const NoiseConfig& noise,
                           double leg_length, const RunOptions& options) {
  const double dt = stream.dt;
  NoiseConfig filter_noise = noise;
  Eigen::Matrix4d P0 = 1e-3 * Eigen::Matrix4d::Identity();
  if (options.freeze_task) {
    // Pin the task-state noise variances and initial covariance at 1e-12 (not zero,
    // to avoid numerical issues in the covariance recursions).
    filter_noise.sigma_q(1) = 1e-6;
    filter_noise.sigma_q(2) = 1e-6;
    P0(2, 2) = 1e-12;
    P0(3, 3) = 1e-12;
  }

  PhaseEkf ekf(model, filter_noise, leg_length, dt);
  Eigen::Vector4d x0{options.init.phase, options.init.phase_rate,
                     stride_transform_inverse(options.init.stride_length, leg_length),
                     options.init.incline};
  ekf.reset(x0, P0);

  BackupEstimator backup(model, noise, leg_length, dt, options.init.phase_rate);
  HeelStrikeDetector detector(options.hs_config);
  HeelStrikeLog oracle_log;

  StreamRunResult out;
  const std::size_t n = stream.samples.size();
  out.trace.ekf.reserve(n);
  out.trace.tbe_phase.reserve(n);
  if (options.run_backup) out.trace.backup.reserve(n);
  if (torque) {
    out.trace.ekf_torque.reserve(n);
    out.trace.truth_torque.reserve(n);
  }
  if (options.measure_latency) out.latency_us.reserve(n);

  double ekf_stride_ssr = 0.0;
  for (const auto& sample : stream.samples) {
    bool hs_event;
    if (options.oracle_hs) {
      hs_event = sample.hs;
      if (hs_event) oracle_log.timestamps.push_back(sample.t);
    } else {
      hs_event = detector.step(sample.t, sample.z);
    }
    const HeelStrikeLog& log = options.oracle_hs ? oracle_log : detector.log();

    const auto t0 = std::chrono::steady_clock::now();
    ekf.predict();
    const auto res = ekf.update(sample.z);
    if (options.measure_latency) {
      const auto t1 = std::chrono::steady_clock::now();
      out.latency_us.push_back(
          std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    ekf_stride_ssr += res.ssr_increment;

    if (options.run_backup) {
      const auto bres = backup.step(sample.t, sample.z, hs_event);
      if (bres.completed_stride_ssr) {
        if (ssr_compare_and_reset(ekf_stride_ssr, *bres.completed_stride_ssr, ekf, backup,
                                  options.beta))
          ++out.resets;
        ekf_stride_ssr = 0.0;
      }
      out.trace.backup.push_back(GaitState{
          backup.phase(), backup.phase_rate(),
          stride_transform(backup.internal_state()(2), leg_length).first,
          backup.internal_state()(3)});
    }

    const GaitState est = ekf.state();
    out.trace.ekf.push_back(est);
    const auto tbe = tbe_phase(sample.t, log);
    out.trace.tbe_phase.push_back(tbe ? *tbe : std::numeric_limits<double>::quiet_NaN());
    if (torque) {
      out.trace.ekf_torque.push_back(evaluate_torque(*torque, est, leg_length));
      out.trace.truth_torque.push_back(evaluate_torque(*torque, sample.truth, leg_length));
    }
  }
  out.hs_log = options.oracle_hs ? oracle_log : detector.log();
  out.metrics = stride_metrics(stream, out.trace);
  return out;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["mode"] = c.mode;
  j["dataset_path"] = c.dataset_path;
  j["gait_model_path"] = c.gait_model_path;
  j["torque_model_path"] = c.torque_model_path;
  j["order"] = c.order;
  j["sigma_q"] = {c.sigma_q(0), c.sigma_q(1), c.sigma_q(2)};
  j["sigma_sensor"] = {c.sigma_sensor(0), c.sigma_sensor(1), c.sigma_sensor(2),
                       c.sigma_sensor(3), c.sigma_sensor(4), c.sigma_sensor(5)};
  j["beta"] = c.beta;
  j["rate_hz"] = c.rate_hz;
  j["init"] = {{"phase", c.init.phase},
               {"phase_rate", c.init.phase_rate},
               {"stride_length", c.init.stride_length},
               {"incline", c.init.incline}};
  j["hs_config"] = {{"foot_vel_threshold", c.hs_config.foot_vel_threshold},
                    {"heel_height_max", c.hs_config.heel_height_max},
                    {"refractory_s", c.hs_config.refractory_s}};
  j["tbe_oracle_hs"] = c.tbe_oracle_hs;
  j["truth_mode"] =
      c.truth_mode == TruthPhaseMode::kConstantRate ? "constant_rate" : "dataset_labels";
  j["seed"] = c.seed;
  j["synthetic"] = {{"n_subjects", c.synthetic.n_subjects},
                    {"strides_per_condition", c.synthetic.strides_per_condition},
                    {"speeds", c.synthetic.speeds},
                    {"inclines", c.synthetic.inclines},
                    {"coeff_jitter", c.synthetic.coeff_jitter},
                    {"duration_jitter", c.synthetic.duration_jitter},
                    {"kin_noise",
                     {c.synthetic.kin_noise(0), c.synthetic.kin_noise(1),
                      c.synthetic.kin_noise(2), c.synthetic.kin_noise(3)}},
                    {"torque_noise", c.synthetic.torque_noise},
                    {"with_torque", c.synthetic.with_torque},
                    {"order", c.synthetic.order},
                    {"seed", c.synthetic.seed}};
  auto sched = [](const Schedule& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [t, v] : s.points) arr.push_back({t, v});
    return arr;
  };
  j["scenario"] = {{"duration_s", c.scenario.duration_s},
                   {"sample_rate_hz", c.scenario.sample_rate_hz},
                   {"phase_rate", sched(c.scenario.phase_rate)},
                   {"stride_length_m", sched(c.scenario.stride_length_m)},
                   {"incline_deg", sched(c.scenario.incline_deg)},
                   {"noise_sigma",
                    {c.scenario.noise_sigma(0), c.scenario.noise_sigma(1),
                     c.scenario.noise_sigma(2), c.scenario.noise_sigma(3),
                     c.scenario.noise_sigma(4), c.scenario.noise_sigma(5)}},
                   {"subject_jitter", c.scenario.subject_jitter},
                   {"leg_length", c.scenario.leg_length},
                   {"seed", c.scenario.seed}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string s = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  auto get = [&j](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).template get<std::decay_t<decltype(target)>>();
  };
  get("mode", c.mode);
  get("dataset_path", c.dataset_path);
  get("gait_model_path", c.gait_model_path);
  get("torque_model_path", c.torque_model_path);
  get("output_dir", c.output_dir);
  get("order", c.order);
  get("beta", c.beta);
  get("rate_hz", c.rate_hz);
  get("tbe_oracle_hs", c.tbe_oracle_hs);
  get("seed", c.seed);
  get("inputs", c.inputs);
  if (j.contains("sigma_q")) {
    const auto v = j.at("sigma_q").get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("config: sigma_q needs 3 values");
    c.sigma_q = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (j.contains("sigma_sensor")) {
    const auto v = j.at("sigma_sensor").get<std::vector<double>>();
    if (v.size() != 6) throw ConfigError("config: sigma_sensor needs 6 values");
    for (int i = 0; i < 6; ++i) c.sigma_sensor(i) = v[static_cast<std::size_t>(i)];
  }
  if (j.contains("truth_mode")) {
    const auto s = j.at("truth_mode").get<std::string>();
    if (s == "constant_rate") c.truth_mode = TruthPhaseMode::kConstantRate;
    else if (s == "dataset_labels") c.truth_mode = TruthPhaseMode::kDatasetLabels;
    else throw ConfigError("config: unknown truth_mode '" + s + "'");
  }
  if (j.contains("init")) {
    const auto& ji = j.at("init");
    auto geti = [&ji](const char* key, double& t) {
      if (ji.contains(key)) t = ji.at(key).get<double>();
    };
    geti("phase", c.init.phase);
    geti("phase_rate", c.init.phase_rate);
    geti("stride_length", c.init.stride_length);
    geti("incline", c.init.incline);
  }
  if (j.contains("hs_config")) {
    const auto& jh = j.at("hs_config");
    if (jh.contains("foot_vel_threshold"))
      c.hs_config.foot_vel_threshold = jh.at("foot_vel_threshold").get<double>();
    if (jh.contains("heel_height_max"))
      c.hs_config.heel_height_max = jh.at("heel_height_max").get<double>();
    if (jh.contains("refractory_s"))
      c.hs_config.refractory_s = jh.at("refractory_s").get<double>();
  }
  if (j.contains("synthetic")) {
    const auto& js = j.at("synthetic");
    auto& s = c.synthetic;
    if (js.contains("n_subjects")) s.n_subjects = js.at("n_subjects").get<int>();
    if (js.contains("strides_per_condition"))
      s.strides_per_condition = js.at("strides_per_condition").get<int>();
    if (js.contains("speeds")) s.speeds = js.at("speeds").get<std::vector<double>>();
    if (js.contains("inclines")) s.inclines = js.at("inclines").get<std::vector<double>>();
    if (js.contains("coeff_jitter")) s.coeff_jitter = js.at("coeff_jitter").get<double>();
    if (js.contains("duration_jitter"))
      s.duration_jitter = js.at("duration_jitter").get<double>();
    if (js.contains("kin_noise")) {
      const auto v = js.at("kin_noise").get<std::vector<double>>();
      if (v.size() != 4) throw ConfigError("config: kin_noise needs 4 values");
      s.kin_noise = Eigen::Vector4d(v[0], v[1], v[2], v[3]);
    }
    if (js.contains("torque_noise")) s.torque_noise = js.at("torque_noise").get<double>();
    if (js.contains("with_torque")) s.with_torque = js.at("with_torque").get<bool>();
    if (js.contains("order")) s.order = js.at("order").get<int>();
    if (js.contains("seed")) s.seed = js.at("seed").get<std::uint64_t>();
  }
  if (j.contains("scenario")) {
    const auto& js = j.at("scenario");
    auto& s = c.scenario;
    if (js.contains("preset")) s = scenario_preset(js.at("preset").get<std::string>());
    if (js.contains("duration_s")) s.duration_s = js.at("duration_s").get<double>();
    if (js.contains("sample_rate_hz"))
      s.sample_rate_hz = js.at("sample_rate_hz").get<double>();
    auto sched = [&js](const char* key, Schedule& target) {
      if (!js.contains(key)) return;
      const auto& a = js.at(key);
      if (a.is_number()) {
        target = Schedule::constant(a.get<double>());
        return;
      }
      target.points.clear();
      for (const auto& pt : a)
        target.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
      if (target.points.empty()) throw ConfigError("config: empty schedule");
    };
    sched("phase_rate", s.phase_rate);
    sched("stride_length_m", s.stride_length_m);
    sched("incline_deg", s.incline_deg);
    if (js.contains("noise_sigma")) {
      const auto v = js.at("noise_sigma").get<std::vector<double>>();
      if (v.size() != 6) throw ConfigError("config: scenario noise_sigma needs 6 values");
      for (int i = 0; i < 6; ++i) s.noise_sigma(i) = v[static_cast<std::size_t>(i)];
    }
    if (js.contains("subject_jitter"))
      s.subject_jitter = js.at("subject_jitter").get<double>();
    if (js.contains("leg_length")) s.leg_length = js.at("leg_length").get<double>();
    if (js.contains("seed")) s.seed = js.at("seed").get<std::uint64_t>();
  }
  return c;
}

ScenarioProfile scenario_preset(const std::string& name) {
  ScenarioProfile p;
  auto rate_for = [](double speed) {
    const double len = 1.25 + 0.6 * (speed - 1.0);
    return speed / len;
  };
  auto len_for = [](double speed) { return 1.25 + 0.6 * (speed - 1.0); };
  if (name == "steady") {
    p.duration_s = 60.0;
    p.phase_rate = Schedule::constant(rate_for(1.0));
    p.stride_length_m = Schedule::constant(len_for(1.0));
    p.incline_deg = Schedule::constant(0.0);
    return p;
  }
  if (name == "speed_pulse") {
    // Four 20 s segments alternating 1.2 / 0.8 m/s with 2 s transitions.
    p.duration_s = 80.0;
    const double rf = rate_for(1.2), rs = rate_for(0.8);
    const double lf = len_for(1.2), ls = len_for(0.8);
    p.phase_rate.points = {{0, rf},  {19, rf}, {21, rs}, {39, rs},
                           {41, rf}, {59, rf}, {61, rs}, {80, rs}};
    p.stride_length_m.points = {{0, lf},  {19, lf}, {21, ls}, {39, ls},
                                {41, lf}, {59, lf}, {61, ls}, {80, ls}};
    p.incline_deg = Schedule::constant(0.0);
    return p;
  }
  if (name == "incline_ramp" || name == "decline_ramp") {
    // 10 s level at 1 m/s, then a 70 s ramp to +/-10 deg, then 10 s hold.
    const double target = (name == "incline_ramp") ? 10.0 : -10.0;
    p.duration_s = 90.0;
    p.phase_rate = Schedule::constant(rate_for(1.0));
    p.stride_length_m = Schedule::constant(len_for(1.0));
    p.incline_deg.points = {{10, 0.0}, {80, target}};
    return p;
  }
  throw ConfigError("unknown scenario preset '" + name + "'");
}

namespace {

StrideDataset obtain_dataset(const ExperimentConfig& config) {
  if (!config.dataset_path.empty()) return load_stride_dataset(config.dataset_path);
  SyntheticDatasetConfig syn = config.synthetic;
  syn.seed = config.seed;
  syn.order = config.order;
  return make_synthetic_dataset(syn);
}

NoiseConfig noise_from_config(const ExperimentConfig& config,
                              std::vector<Matrix6d> table) {
  NoiseConfig n;
  n.sigma_q = config.sigma_q;
  n.sigma_sensor = config.sigma_sensor;
  n.xsub = std::move(table);
  return n;
}

struct FoldModels {
  GaitModel gait;
  std::optional<TorqueSurface> torque;
  std::vector<Matrix6d> table;
};

FoldModels fit_on(const StrideDataset& data, int order) {
  FoldModels fm;
  fm.gait = fit_gait_model(data, build_gait_constraints(order), order);
  fm.table = residual_covariance_table(data, fm.gait);
  if (data.has_torque()) fm.torque = fit_torque_model(data, order);
  return fm;
}

nlohmann::json summarize_rows(const std::vector<StrideMetricsRow>& rows) {
  std::vector<double> ekf_p, tbe_p, backup_p, rate, len, inc, tau;
  for (const auto& r : rows) {
    ekf_p.push_back(r.ekf_phase_rmse_pct);
    rate.push_back(r.ekf_phase_rate_rmse);
    len.push_back(r.ekf_stride_length_rmse);
    inc.push_back(r.ekf_incline_rmse);
    if (r.has_torque) tau.push_back(r.ekf_torque_rmse);
    if (r.tbe_valid) tbe_p.push_back(r.tbe_phase_rmse_pct);
    if (r.has_backup) backup_p.push_back(r.backup_phase_rmse_pct);
  }
  nlohmann::json j;
  j["strides"] = rows.size();
  j["ekf_phase_rmse_pct"] = {{"mean", mean_of(ekf_p)}, {"std", stddev_of(ekf_p)}};
  j["ekf_phase_rate_rmse"] = {{"mean", mean_of(rate)}, {"std", stddev_of(rate)}};
  j["ekf_stride_length_rmse_m"] = {{"mean", mean_of(len)}, {"std", stddev_of(len)}};
  j["ekf_incline_rmse_deg"] = {{"mean", mean_of(inc)}, {"std", stddev_of(inc)}};
  if (!tau.empty())
    j["ekf_torque_rmse_Nm"] = {{"mean", mean_of(tau)}, {"std", stddev_of(tau)}};
  if (!tbe_p.empty())
    j["tbe_phase_rmse_pct"] = {{"mean", mean_of(tbe_p)}, {"std", stddev_of(tbe_p)}};
  if (!backup_p.empty())
    j["backup_phase_rmse_pct"] = {{"mean", mean_of(backup_p)}, {"std", stddev_of(backup_p)}};
  return j;
}

struct FoldResult {
  std::string subject;
  std::vector<StrideMetricsRow> rows;
  int resets = 0;
};

// Stride replay order: strides of one condition stay contiguous (the filter needs
// a few strides to lock onto each task), the condition blocks are shuffled.
std::vector<int> condition_grouped_order(const Subject& subject, Rng& rng) {
  std::vector<std::pair<std::pair<double, double>, std::vector<int>>> groups;
  for (std::size_t i = 0; i < subject.strides.size(); ++i) {
    const auto key = std::make_pair(subject.strides[i].speed_mps,
                                    subject.strides[i].incline_deg);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&key](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {static_cast<int>(i)}});
    } else {
      it->second.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t i = groups.size(); i > 1; --i)
    std::swap(groups[i - 1],
              groups[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);
  std::vector<int> order;
  for (const auto& g : groups) order.insert(order.end(), g.second.begin(), g.second.end());
  return order;
}

std::vector<FoldResult> crossval_folds(const ExperimentConfig& config,
                                       const StrideDataset& data, bool freeze_task,
                                       bool run_backup) {
  const auto n_subjects = data.subjects.size();
  std::vector<FoldResult> results(n_subjects);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_workers = std::min<std::size_t>(hw, n_subjects);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&]() {
    for (;;) {
      const std::size_t fold = next.fetch_add(1);
      if (fold >= n_subjects) return;
      try {
        StrideDataset training;
        for (std::size_t s = 0; s < n_subjects; ++s)
          if (s != fold) training.subjects.push_back(data.subjects[s]);
        const FoldModels fm = fit_on(training, config.order);

        const Subject& held_out = data.subjects[fold];
        Rng rng(mix_seed(config.seed, 0xf01d + fold));
        const std::vector<int> order = condition_grouped_order(held_out, rng);
        const LabeledStream stream =
            concatenate_strides(held_out, order, config.rate_hz, config.truth_mode);

        RunOptions options;
        options.init = config.init;
        options.beta = config.beta;
        options.oracle_hs = config.tbe_oracle_hs;
        options.freeze_task = freeze_task;
        options.run_backup = run_backup;
        options.hs_config = config.hs_config;
        const StreamRunResult run =
            run_stream(stream, fm.gait, fm.torque ? &*fm.torque : nullptr,
                       noise_from_config(config, fm.table), held_out.leg_length, options);
        results[fold] = FoldResult{held_out.id, run.metrics, run.resets};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(work);
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
  return results;
}

// Strides where both estimators are defined, pooled across folds in fold order.
void pooled_pairs(const std::vector<FoldResult>& folds, std::vector<double>& ekf,
                  std::vector<double>& tbe) {
  for (const auto& f : folds) {
    for (const auto& r : f.rows) {
      if (!r.tbe_valid) continue;
      ekf.push_back(r.ekf_phase_rmse_pct);
      tbe.push_back(r.tbe_phase_rmse_pct);
    }
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write report: " + path);
  os << j.dump(2) << "\n";
}

}  // namespace

void write_stride_csv(const std::string& path, const std::string& subject,
                      const std::vector<StrideMetricsRow>& rows, bool append) {
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw ConfigError("cannot write per-stride CSV: " + path);
  if (!append)
    os << "subject,stride_index,t_start,t_end,n_samples,ekf_phase_rmse_pct,"
          "ekf_phase_rate_rmse,ekf_stride_length_rmse,ekf_incline_rmse,ekf_torque_rmse,"
          "tbe_phase_rmse_pct,backup_phase_rmse_pct,backup_stride_length_rmse,"
          "backup_incline_rmse,tbe_valid\n";
  for (const auto& r : rows) {
    os << subject << ',' << r.stride_index << ',' << fmt_double(r.t_start) << ','
       << fmt_double(r.t_end) << ',' << r.n_samples << ','
       << fmt_double(r.ekf_phase_rmse_pct) << ',' << fmt_double(r.ekf_phase_rate_rmse)
       << ',' << fmt_double(r.ekf_stride_length_rmse) << ','
       << fmt_double(r.ekf_incline_rmse) << ',' << fmt_double(r.ekf_torque_rmse) << ','
       << (r.tbe_valid ? fmt_double(r.tbe_phase_rmse_pct) : std::string()) << ','
       << fmt_double(r.backup_phase_rmse_pct) << ','
       << fmt_double(r.backup_stride_length_rmse) << ','
       << fmt_double(r.backup_incline_rmse) << ',' << (r.tbe_valid ? 1 : 0) << "\n";
  }
}

nlohmann::json run_fit(const ExperimentConfig& config) {
  const StrideDataset data = obtain_dataset(config);
  const FoldModels fm = fit_on(data, config.order);
  const ConstraintSet constraints = build_gait_constraints(config.order);

  if (!config.gait_model_path.empty())
    save_model(config.gait_model_path, ModelContainer::from_gait_model(fm.gait, fm.table));
  if (fm.torque && !config.torque_model_path.empty())
    save_model(config.torque_model_path, ModelContainer::from_torque_surface(*fm.torque));

  nlohmann::json j;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["order"] = config.order;
  j["dim"] = regressor_dim(config.order);
  j["subjects"] = data.subjects.size();
  j["strides"] = data.stride_count();
  j["max_constraint_violation"] = constraints.max_violation(fm.gait.coeffs);
  j["sse"] = sum_squared_error(fm.gait, data);
  j["torque_fitted"] = fm.torque.has_value();
  return j;
}

nlohmann::json run_gen(const ExperimentConfig& config) {
  SyntheticDatasetConfig syn = config.synthetic;
  syn.seed = config.seed;
  syn.order = config.order;
  const StrideDataset data = make_synthetic_dataset(syn);
  if (config.dataset_path.empty())
    throw ConfigError("gen: dataset_path (output CSV) is required");
  save_stride_dataset(config.dataset_path, data);

  nlohmann::json j;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["subjects"] = data.subjects.size();
  j["strides"] = data.stride_count();
  j["path"] = config.dataset_path;
  return j;
}

nlohmann::json run_crossval(const ExperimentConfig& config) {
  const StrideDataset data = obtain_dataset(config);
  if (data.subjects.size() < 3)
    throw ConfigError("crossval: need at least 3 subjects to hold one out, have " +
                      std::to_string(data.subjects.size()));

  const auto folds = crossval_folds(config, data, /*freeze_task=*/false,
                                    /*run_backup=*/true);

  nlohmann::json j;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["mode"] = "crossval";
  j["subjects"] = nlohmann::json::array();
  std::vector<StrideMetricsRow> all_rows;
  int resets = 0;
  for (const auto& f : folds) {
    nlohmann::json s = summarize_rows(f.rows);
    s["subject"] = f.subject;
    s["resets"] = f.resets;
    j["subjects"].push_back(s);
    all_rows.insert(all_rows.end(), f.rows.begin(), f.rows.end());
    resets += f.resets;
  }
  j["pooled"] = summarize_rows(all_rows);
  j["resets"] = resets;

  std::vector<double> ekf, tbe;
  pooled_pairs(folds, ekf, tbe);
  if (ekf.size() >= 2) {
    const TTestResult tt = paired_ttest(ekf, tbe);
    j["ekf_vs_tbe"] = {{"t", tt.t},
                       {"p", tt.p},
                       {"dof", tt.dof},
                       {"degenerate", tt.degenerate_equal || tt.degenerate_infinite}};
  }

  const std::string csv = config.output_dir + "/crossval_strides.csv";
  bool append = false;
  for (const auto& f : folds) {
    write_stride_csv(csv, f.subject, f.rows, append);
    append = true;
  }
  j["stride_csv"] = "crossval_strides.csv";
  write_json(config.output_dir + "/crossval_report.json", j);
  return j;
}

nlohmann::json run_ablation(const ExperimentConfig& config) {
  const StrideDataset data = obtain_dataset(config);
  if (data.subjects.size() < 3)
    throw ConfigError("ablation: need at least 3 subjects, have " +
                      std::to_string(data.subjects.size()));

  // Both arms run without the backup: its resets would overwrite the frozen task
  // states and mask the comparison.
  const auto full = crossval_folds(config, data, /*freeze_task=*/false,
                                   /*run_backup=*/false);
  const auto frozen = crossval_folds(config, data, /*freeze_task=*/true,
                                     /*run_backup=*/false);

  std::vector<StrideMetricsRow> full_rows, frozen_rows;
  std::vector<double> full_phase, frozen_phase;
  for (std::size_t f = 0; f < full.size(); ++f) {
    full_rows.insert(full_rows.end(), full[f].rows.begin(), full[f].rows.end());
    frozen_rows.insert(frozen_rows.end(), frozen[f].rows.begin(), frozen[f].rows.end());
    const std::size_t n = std::min(full[f].rows.size(), frozen[f].rows.size());
    for (std::size_t i = 0; i < n; ++i) {
      full_phase.push_back(full[f].rows[i].ekf_phase_rmse_pct);
      frozen_phase.push_back(frozen[f].rows[i].ekf_phase_rmse_pct);
    }
  }

  nlohmann::json j;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["mode"] = "ablation";
  j["full"] = summarize_rows(full_rows);
  j["no_task"] = summarize_rows(frozen_rows);
  const TTestResult tt = paired_ttest(frozen_phase, full_phase);
  j["no_task_vs_full"] = {{"t", tt.t},
                          {"p", tt.p},
                          {"dof", tt.dof},
                          {"degenerate", tt.degenerate_equal || tt.degenerate_infinite}};

  const std::string csv = config.output_dir + "/ablation_strides.csv";
  bool append = false;
  for (std::size_t f = 0; f < full.size(); ++f) {
    write_stride_csv(csv, full[f].subject + "/full", full[f].rows, append);
    append = true;
    write_stride_csv(csv, frozen[f].subject + "/no_task", frozen[f].rows, true);
  }
  j["stride_csv"] = "ablation_strides.csv";
  write_json(config.output_dir + "/ablation_report.json", j);
  return j;
}

nlohmann::json run_replay(const ExperimentConfig& config) {
  // Models: load when paths are given, otherwise fit fresh on the synthetic dataset.
  GaitModel model;
  std::optional<TorqueSurface> torque;
  std::vector<Matrix6d> table;
  if (!config.gait_model_path.empty()) {
    const ModelContainer c = load_model(config.gait_model_path);
    model = c.to_gait_model();
    table = c.covariance;
  } else {
    const StrideDataset data = obtain_dataset(config);
    FoldModels fm = fit_on(data, config.order);
    model = std::move(fm.gait);
    torque = fm.torque;
    table = std::move(fm.table);
  }
  if (!config.torque_model_path.empty())
    torque = load_model(config.torque_model_path).to_torque_surface();

  ScenarioProfile profile = config.scenario;
  if (profile.seed == 0) profile.seed = config.seed;
  const LabeledStream stream =
      generate_synthetic_stream(profile, reference_gait_model(config.order));

  RunOptions options;
  options.init = config.init;
  options.beta = config.beta;
  options.oracle_hs = config.tbe_oracle_hs;
  options.hs_config = config.hs_config;
  options.measure_latency = true;
  const StreamRunResult run =
      run_stream(stream, model, torque ? &*torque : nullptr,
                 noise_from_config(config, table), profile.leg_length, options);

  // Per-sample trace CSV.
  const std::string trace_csv = config.output_dir + "/replay_trace.csv";
  {
    std::ofstream os(trace_csv);
    if (!os) throw ConfigError("cannot write " + trace_csv);
    os << "time_s,theta_f_deg,theta_f_dot_dps,theta_s_deg,theta_s_dot_dps,p_f_m,p_u_m,"
          "truth_phase,truth_phase_rate,truth_stride_m,truth_incline_deg,hs_flag,"
          "ekf_phase,ekf_phase_rate,ekf_stride_m,ekf_incline_deg,tbe_phase,torque_Nm\n";
    for (std::size_t i = 0; i < stream.samples.size(); ++i) {
      const auto& s = stream.samples[i];
      const auto& e = run.trace.ekf[i];
      os << fmt_double(s.t);
      for (int c = 0; c < 6; ++c) os << ',' << fmt_double(s.z(c));
      os << ',' << fmt_double(s.truth.phase) << ',' << fmt_double(s.truth.phase_rate)
         << ',' << fmt_double(s.truth.stride_length) << ','
         << fmt_double(s.truth.incline) << ',' << (s.hs ? 1 : 0) << ','
         << fmt_double(e.phase) << ',' << fmt_double(e.phase_rate) << ','
         << fmt_double(e.stride_length) << ',' << fmt_double(e.incline) << ','
         << (std::isnan(run.trace.tbe_phase[i]) ? std::string()
                                                : fmt_double(run.trace.tbe_phase[i]))
         << ','
         << (run.trace.ekf_torque.empty() ? std::string()
                                          : fmt_double(run.trace.ekf_torque[i]))
         << "\n";
    }
  }
  write_stride_csv(config.output_dir + "/replay_strides.csv", "replay", run.metrics);

  nlohmann::json j;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["mode"] = "replay";
  j["summary"] = summarize_rows(run.metrics);
  j["resets"] = run.resets;
  j["heel_strikes"] = run.hs_log.size();
  j["trace_csv"] = "replay_trace.csv";
  j["latency_us"] = {{"p50", quantile(run.latency_us, 0.5)},
                     {"p90", quantile(run.latency_us, 0.9)},
                     {"p99", quantile(run.latency_us, 0.99)},
                     {"max", run.latency_us.empty()
                                 ? 0.0
                                 : *std::max_element(run.latency_us.begin(),
                                                     run.latency_us.end())}};
  write_json(config.output_dir + "/replay_report.json", j);
  return j;
}

nlohmann::json run_report(const ExperimentConfig& config) {
  if (config.inputs.empty()) throw ConfigError("report: no input CSVs given");
  std::vector<double> ekf_p, tbe_p;
  std::size_t strides = 0;
  for (const auto& path : config.inputs) {
    std::ifstream is(path);
    if (!is) throw ConfigError("report: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("report: empty CSV " + path);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) f.push_back(field);
      if (f.size() < 15) throw ConfigError("report: malformed row in " + path);
      ++strides;
      ekf_p.push_back(std::stod(f[5]));
      if (f[14] == "1") tbe_p.push_back(std::stod(f[10]));
    }
  }
  nlohmann::json j;
  j["mode"] = "report";
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["strides"] = strides;
  j["ekf_phase_rmse_pct"] = {{"mean", mean_of(ekf_p)}, {"std", stddev_of(ekf_p)}};
  if (!tbe_p.empty())
    j["tbe_phase_rmse_pct"] = {{"mean", mean_of(tbe_p)}, {"std", stddev_of(tbe_p)}};
  return j;
}

}  // namespace gait
