#include "confdist/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

namespace {

int run_command(const confdist::ExperimentConfig& config) {
  const auto report = confdist::run_experiment(config);
  for (const auto& warning : report.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
  if (!config.out_dir.empty()) {
    confdist::write_report_files(report, config, config.out_dir);
  }
  if (config.mode == confdist::ExperimentMode::crps) {
    std::printf("SCPS grid points: %zu, CCPS grid points: %zu\n",
                report.alphas.size(), report.ks.size());
    for (std::size_t i = 0; i < report.alphas.size(); ++i) {
      const auto stats = confdist::box_stats(report.scps_losses[i]);
      std::printf("scps alpha=%-5g median CRPS %.6g\n", report.alphas[i],
                  stats.median);
    }
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      const auto stats = confdist::box_stats(report.ccps_losses[i]);
      std::printf("ccps K=%-3d median CRPS %.6g\n", report.ks[i],
                  stats.median);
    }
  } else {
    double scps_dev = 0.0;
    double ccps_dev = 0.0;
    for (std::size_t i = 0; i < report.scps_curve.alphas.size(); ++i) {
      scps_dev = std::max(scps_dev,
                          std::abs(report.scps_curve.empirical_cdf[i] -
                                   report.scps_curve.alphas[i]));
      ccps_dev = std::max(ccps_dev,
                          std::abs(report.ccps_curve.empirical_cdf[i] -
                                   report.ccps_curve.alphas[i]));
    }
    std::printf("scps max |curve - diagonal| = %.4f (alpha = %g)\n", scps_dev,
                report.calibration_alpha);
    std::printf("ccps max |curve - diagonal| = %.4f (K = %d)\n", ccps_dev,
                report.calibration_k);
  }
  std::printf("done in %.2f s\n", report.seconds_total);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal predictive distributions toolkit"};
  app.require_subcommand(1);

  confdist::ExperimentConfig config;
  std::string regressor = "ls";
  std::string measure = "simple";
  std::string mode = "crps";
  bool tune_on = true;
  bool nw_heaviside = false;

  auto* run = app.add_subcommand("run", "Run the experiment protocol");
  auto* data_opt =
      run->add_option("--data", config.data_path, "CSV dataset (label last)");
  auto* synth_opt = run->add_option(
      "--synth", config.synth_name,
      "synthetic generator: homoscedastic_linear, heteroscedastic_linear, "
      "example1");
  data_opt->excludes(synth_opt);
  run->add_option("--synth-n", config.synth_size,
                  "synthetic dataset size (train + test)");
  run->add_option("--synth-noise", config.synth_noise,
                  "synthetic noise scale");
  run->add_option("--test-len", config.test_length, "test sequence length");
  run->add_option("--perms", config.permutations, "number of permutations");
  run->add_option("--alphas", config.alpha_grid,
                  "SCPS split fractions (comma separated)")
      ->delimiter(',');
  run->add_option("--ks", config.k_grid, "CCPS fold counts (comma separated)")
      ->delimiter(',');
  run->add_option("--regressor", regressor, "ls | ridge | knn")
      ->check(CLI::IsMember({"ls", "ridge", "knn"}));
  run->add_option("--ridge-lambda", config.regressor.ridge_lambda,
                  "ridge penalty (when not tuned)");
  run->add_option("--knn-k", config.regressor.knn_k,
                  "neighbor count (when not tuned)");
  run->add_option("--measure", measure, "simple | normalized | nw")
      ->check(CLI::IsMember({"simple", "normalized", "nw"}));
  run->add_option("--nw-hx", config.nw.bandwidth_x, "NW object bandwidth");
  run->add_option("--nw-hy", config.nw.bandwidth_y, "NW label bandwidth");
  run->add_flag("--nw-heaviside", nw_heaviside,
                "NW threshold kernel instead of the sigmoid");
  run->add_option("--mode", mode, "crps | calibration")
      ->check(CLI::IsMember({"crps", "calibration"}));
  run->add_option("--seed", config.seed, "random seed");
  run->add_option("--out", config.out_dir, "output directory");
  run->add_option("--tune", tune_on, "3-fold CV hyperparameter tuning")
      ->default_str("on");
  run->add_flag("--emit-raw", config.emit_raw, "dump all raw CRPS losses");
  run->add_flag("--conservative-2x", config.conservative_2x,
                "apply the min(2p, 1) p-value adjustment in calibration mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (config.data_path.empty() && config.synth_name.empty()) {
    std::cerr << "error: one of --data or --synth is required\n";
    return 1;
  }

  config.regressor.kind = regressor == "ls"
                              ? confdist::RegressorKind::least_squares
                          : regressor == "ridge"
                              ? confdist::RegressorKind::ridge
                              : confdist::RegressorKind::knn;
  config.measure = measure == "simple" ? confdist::MeasureKind::simple
                   : measure == "normalized"
                       ? confdist::MeasureKind::normalized
                       : confdist::MeasureKind::nadaraya_watson;
  config.nw.sigmoid_smoothing = !nw_heaviside;
  config.mode = mode == "crps" ? confdist::ExperimentMode::crps
                               : confdist::ExperimentMode::calibration;
  config.tune_enabled = tune_on;

  try {
    return run_command(config);
  } catch (const confdist::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
