#ifndef CONFDIST_HARNESS_HPP_
#define CONFDIST_HARNESS_HPP_

#include "confdist/ccps.hpp"
#include "confdist/conformity.hpp"
#include "confdist/core.hpp"
#include "confdist/metrics.hpp"
#include "confdist/regressors.hpp"
#include "confdist/scps.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace confdist {

/// Raised for malformed or unreadable input data (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic random helpers built on 53-bit uniforms; identical output
/// for a given seed on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, one value per call
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::uint64_t below(std::uint64_t n);

  void shuffle(std::vector<std::size_t>& values);

 private:
  std::mt19937_64 engine_;
};

/// Shortest round-trip decimal representation; '.' decimal separator
/// regardless of locale.
std::string format_double(double value);

/// Loads a numeric CSV: last column is the label, the rest are features.
/// A non-numeric first line is treated as a header and skipped. Parse
/// errors name the offending 1-based line.
Dataset load_csv(const std::filesystem::path& path);

/// Per-feature affine scaling fitted on training statistics.
struct Scaler {
  Vector mean;
  Vector scale;  // population std; 0 marks a constant feature
};

Scaler fit_scaler(const Dataset& train);

/// (x - mean) / scale per feature; constant features map to 0.
Dataset apply_scaler(const Scaler& scaler, const Dataset& data);

struct Standardized {
  Scaler scaler;
  std::vector<Dataset> datasets;  // train first, then the others
};

/// Fits the scaler on `train` and transforms train and the others with the
/// training statistics only.
Standardized standardize(const Dataset& train,
                         std::span<const Dataset> others);

/// Grid search over the spec's hyperparameter (ridge lambda or knn k) by
/// k-fold cross-validated mean squared error; least squares is returned
/// unchanged. Deterministic contiguous folds.
RegressorSpec tune(const RegressorSpec& spec, const Dataset& train,
                   int folds = 3);

/// Synthetic generators: homoscedastic_linear, heteroscedastic_linear, and
/// the two-class mixture example1. Reproducible given the seed.
Dataset synth(const std::string& name, std::size_t n, std::uint64_t seed,
              double noise_scale = 1.0);

enum class ExperimentMode { crps, calibration };

struct ExperimentConfig {
  std::string data_path;    // CSV input; empty when synthetic
  std::string synth_name;   // synthetic generator; empty when file-based
  std::size_t synth_size = 600;
  double synth_noise = 1.0;
  std::size_t test_length = 100;
  int permutations = 10;
  std::vector<double> alpha_grid;  // defaults applied when empty
  std::vector<int> k_grid;         // defaults applied when empty
  RegressorSpec regressor;
  MeasureKind measure = MeasureKind::simple;
  NwParams nw;
  ExperimentMode mode = ExperimentMode::crps;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: compute only, write no files
  bool tune_enabled = true;
  bool emit_raw = false;
  bool conservative_2x = false;
};

/// {0.01, 0.05, 0.10, ..., 0.95, 0.99}
std::vector<double> default_alpha_grid();
/// {2, ..., 20}
std::vector<int> default_k_grid();

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Five-number summary; quartiles by linear interpolation of order
/// statistics.
BoxStats box_stats(std::vector<double> values);

struct ExperimentReport {
  // CRPS mode: one loss multiset of size permutations * test_length per
  // feasible grid point.
  std::vector<double> alphas;
  std::vector<std::vector<double>> scps_losses;
  std::vector<int> ks;
  std::vector<std::vector<double>> ccps_losses;
  // Calibration mode: pooled crisp PIT values and their curves.
  double calibration_alpha = 0.0;
  int calibration_k = 0;
  std::vector<double> scps_pit;
  std::vector<double> ccps_pit;
  CalibrationCurve scps_curve;
  CalibrationCurve ccps_curve;
  // Bookkeeping.
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double seconds_scps = 0.0;
  double seconds_ccps = 0.0;
  double seconds_total = 0.0;
  std::vector<std::string> warnings;
};

/// Runs the permutation protocol: per permutation, split off the last
/// test_length observations, scale and tune on the training part only,
/// sweep SCPS over the alpha grid and CCPS over the K grid, and score
/// every test observation with the exact crisp CRPS (or pool crisp PIT
/// values in calibration mode). Deterministic given the seed.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes scps_boxstats.csv / ccps_boxstats.csv (CRPS mode),
/// calibration_scps.csv / calibration_ccps.csv (calibration mode), the raw
/// loss dumps when requested, and report.json.
void write_report_files(const ExperimentReport& report,
                        const ExperimentConfig& config,
                        const std::filesystem::path& out_dir);

}  // namespace confdist

#endif  // CONFDIST_HARNESS_HPP_
