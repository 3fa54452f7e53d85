// gaitekf: fit gait/torque models, generate synthetic walking data, and run the
// phase/task estimator through replay, cross-validation, and ablation experiments.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "gait/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

gait::ExperimentConfig load_config_file(const std::string& path,
                                        gait::ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw gait::ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw gait::ConfigError(path + ": " + e.what());
  }
  return gait::config_from_json(j, std::move(base));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gait phase/task estimator: model fitting, simulation and experiments"};
  app.require_subcommand(1);

  gait::ExperimentConfig config;
  std::string config_path;
  std::string preset;
  bool seed_given = false;

  app.add_option("--config", config_path, "JSON config file (overrides flags)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", config.seed, "RNG seed")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--out", config.output_dir, "output directory");
    sub->add_option("--order", config.order, "Fourier order of the gait model");
    sub->add_option("--data", config.dataset_path, "stride dataset CSV");
    sub->add_option("--model", config.gait_model_path, "gait model container path");
    sub->add_option("--torque-model", config.torque_model_path,
                    "torque model container path");
    sub->add_option("--rate", config.rate_hz, "stream sample rate, Hz");
    sub->add_option("--beta", config.beta, "backup SSR reset ratio");
    sub->add_option("--sigma-q", [&](const std::vector<std::string>& vals) {
      if (vals.size() != 3) return false;
      for (int i = 0; i < 3; ++i) config.sigma_q(i) = std::stod(vals[static_cast<std::size_t>(i)]);
      return true;
    }, "process noise std devs (phase_rate stride incline)")->expected(3);
    sub->add_flag_callback(
        "--outdoor", [&] { config.sigma_q << 1e-3, 2e-3, 5e-2; },
        "use the fast-response process noise preset");
    sub->add_option("--sigma-sensor", [&](const std::vector<std::string>& vals) {
      if (vals.size() != 6) return false;
      for (int i = 0; i < 6; ++i)
        config.sigma_sensor(i) = std::stod(vals[static_cast<std::size_t>(i)]);
      return true;
    }, "sensor noise std devs (6 channels)")->expected(6);
    sub->add_option("--subjects", config.synthetic.n_subjects, "synthetic subject count");
    sub->add_option("--strides-per-condition", config.synthetic.strides_per_condition,
                    "synthetic strides per condition");
    sub->add_option("--coeff-jitter", config.synthetic.coeff_jitter,
                    "inter-subject model variation");
    sub->add_flag("--detected-hs{false}", config.tbe_oracle_hs,
                  "use the threshold heel-strike detector instead of truth flags");
  };

  auto* fit = app.add_subcommand("fit", "fit gait + torque models from stride data");
  add_common(fit);
  auto* gen = app.add_subcommand("gen", "generate a synthetic stride dataset CSV");
  add_common(gen);
  auto* replay = app.add_subcommand("replay", "replay a scenario through the stack");
  add_common(replay);
  replay->add_option("--preset", preset, "scenario preset (steady, speed_pulse, incline_ramp, decline_ramp)");
  auto* crossval = app.add_subcommand("crossval", "leave-one-out cross-validation");
  add_common(crossval);
  auto* ablation = app.add_subcommand("ablation", "crossval with task states frozen");
  add_common(ablation);
  auto* report = app.add_subcommand("report", "re-aggregate per-stride CSVs");
  report->add_option("inputs", config.inputs, "per-stride CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!preset.empty()) config.scenario = gait::scenario_preset(preset);
    if (!config_path.empty()) config = load_config_file(config_path, std::move(config));

    nlohmann::json out;
    if (fit->parsed()) {
      config.mode = "fit";
      if (config.dataset_path.empty() && !seed_given)
        throw gait::ConfigError("fit on synthetic data requires an explicit --seed");
      out = gait::run_fit(config);
    } else if (gen->parsed()) {
      config.mode = "gen";
      if (!seed_given) throw gait::ConfigError("gen requires an explicit --seed");
      if (config.dataset_path.empty())
        throw gait::ConfigError("gen requires --data (output CSV path)");
      out = gait::run_gen(config);
    } else if (replay->parsed()) {
      config.mode = "replay";
      if (config.gait_model_path.empty() && config.dataset_path.empty() && !seed_given)
        throw gait::ConfigError("replay on synthetic data requires an explicit --seed");
      out = gait::run_replay(config);
    } else if (crossval->parsed()) {
      config.mode = "crossval";
      if (config.dataset_path.empty() && !seed_given)
        throw gait::ConfigError("crossval on synthetic data requires an explicit --seed");
      out = gait::run_crossval(config);
    } else if (ablation->parsed()) {
      config.mode = "ablation";
      if (config.dataset_path.empty() && !seed_given)
        throw gait::ConfigError("ablation on synthetic data requires an explicit --seed");
      out = gait::run_ablation(config);
    } else if (report->parsed()) {
      config.mode = "report";
      out = gait::run_report(config);
    }
    std::cout << out.dump(2) << std::endl;
    return kExitOk;
  } catch (const gait::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const gait::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitNumerical;
  }
}
