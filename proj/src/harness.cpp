#include "confdist/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace confdist {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("below(0)");
  }
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % n;
}

void Rng::shuffle(std::vector<std::size_t>& values) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = below(i);
    std::swap(values[i - 1], values[j]);
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

namespace {

bool parse_cell(std::string_view cell, double& out) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
    cell.remove_prefix(1);
  }
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) {
    cell.remove_suffix(1);
  }
  if (cell.empty()) return false;
  const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return result.ec == std::errc{} && result.ptr == cell.data() + cell.size();
}

// Splits a CSV line; returns false (with `bad` set to the offending token)
// when any cell is non-numeric.
bool parse_row(const std::string& line, std::vector<double>& out,
               std::string& bad) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string cell = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    double value = 0.0;
    if (!parse_cell(cell, value)) {
      bad = cell;
      return false;
    }
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return true;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  Dataset data;
  std::string line;
  std::size_t line_number = 0;
  std::size_t expected_columns = 0;
  bool saw_first_row = false;
  std::vector<double> row;
  std::string bad;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) continue;
    if (!parse_row(line, row, bad)) {
      if (!saw_first_row) {
        continue;  // header line
      }
      throw DataError(path.string() + ": line " + std::to_string(line_number) +
                      ": non-numeric value '" + bad + "'");
    }
    if (!saw_first_row) {
      if (row.size() < 2) {
        throw DataError(path.string() + ": line " +
                        std::to_string(line_number) +
                        ": need at least one feature column and a label");
      }
      expected_columns = row.size();
      saw_first_row = true;
    } else if (row.size() != expected_columns) {
      throw DataError(path.string() + ": line " + std::to_string(line_number) +
                      ": expected " + std::to_string(expected_columns) +
                      " columns, got " + std::to_string(row.size()));
    }
    Observation obs;
    obs.x = Eigen::Map<const Vector>(row.data(),
                                     static_cast<Eigen::Index>(row.size() - 1));
    obs.y = row.back();
    data.push_back(std::move(obs));
  }
  if (data.empty()) {
    throw DataError(path.string() + ": no data rows");
  }
  return data;
}

Scaler fit_scaler(const Dataset& train) {
  if (train.empty()) {
    throw std::invalid_argument("cannot fit a scaler on an empty dataset");
  }
  const Eigen::Index d = train.feature_dim();
  Scaler scaler;
  scaler.mean = Vector::Zero(d);
  scaler.scale = Vector::Zero(d);
  for (const auto& obs : train) {
    scaler.mean += obs.x;
  }
  scaler.mean /= static_cast<double>(train.size());
  for (const auto& obs : train) {
    scaler.scale += (obs.x - scaler.mean).cwiseAbs2();
  }
  scaler.scale =
      (scaler.scale / static_cast<double>(train.size())).cwiseSqrt();
  return scaler;
}

Dataset apply_scaler(const Scaler& scaler, const Dataset& data) {
  Dataset out;
  for (const auto& obs : data) {
    if (obs.x.size() != scaler.mean.size()) {
      throw std::invalid_argument("scaler dimension mismatch");
    }
    Observation scaled;
    scaled.x = Vector::Zero(obs.x.size());
    for (Eigen::Index j = 0; j < obs.x.size(); ++j) {
      if (scaler.scale(j) > 0.0) {
        scaled.x(j) = (obs.x(j) - scaler.mean(j)) / scaler.scale(j);
      }
    }
    scaled.y = obs.y;
    out.push_back(std::move(scaled));
  }
  return out;
}

Standardized standardize(const Dataset& train,
                         std::span<const Dataset> others) {
  Standardized out;
  out.scaler = fit_scaler(train);
  out.datasets.reserve(others.size() + 1);
  out.datasets.push_back(apply_scaler(out.scaler, train));
  for (const auto& other : others) {
    out.datasets.push_back(apply_scaler(out.scaler, other));
  }
  return out;
}

namespace {

double cv_mse(const RegressorSpec& spec, const Dataset& train,
              const FoldPartition& partition) {
  double total = 0.0;
  for (std::size_t fold = 0; fold < partition.folds.size(); ++fold) {
    std::vector<std::size_t> complement;
    for (std::size_t other = 0; other < partition.folds.size(); ++other) {
      if (other == fold) continue;
      complement.insert(complement.end(), partition.folds[other].begin(),
                        partition.folds[other].end());
    }
    std::sort(complement.begin(), complement.end());
    const FittedRegressor model = fit(spec, train.select(complement));
    for (std::size_t i : partition.folds[fold]) {
      const double err = train[i].y - predict(model, train[i].x);
      total += err * err;
    }
  }
  return total / static_cast<double>(train.size());
}

}  // namespace

RegressorSpec tune(const RegressorSpec& spec, const Dataset& train,
                   int folds) {
  if (spec.kind == RegressorKind::least_squares) {
    return spec;  // nothing to tune
  }
  if (train.size() < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("tuning needs at least `folds` observations");
  }
  const FoldPartition partition = make_folds(train.size(), folds);
  std::size_t min_complement = train.size();
  for (const auto& fold : partition.folds) {
    min_complement = std::min(min_complement, train.size() - fold.size());
  }

  RegressorSpec best = spec;
  double best_mse = std::numeric_limits<double>::infinity();
  auto consider = [&](const RegressorSpec& candidate) {
    const double mse = cv_mse(candidate, train, partition);
    if (mse < best_mse) {
      best_mse = mse;
      best = candidate;
    }
  };

  if (spec.kind == RegressorKind::ridge) {
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0}) {
      RegressorSpec candidate = spec;
      candidate.ridge_lambda = lambda;
      consider(candidate);
    }
  } else {
    for (int k : {1, 3, 5, 10, 20}) {
      if (static_cast<std::size_t>(k) > min_complement) continue;
      RegressorSpec candidate = spec;
      candidate.knn_k = k;
      consider(candidate);
    }
  }
  return best;
}

Dataset synth(const std::string& name, std::size_t n, std::uint64_t seed,
              double noise_scale) {
  if (n < 1) {
    throw std::invalid_argument("synthetic dataset size must be positive");
  }
  Rng rng(seed);
  Dataset data;
  if (name == "homoscedastic_linear" || name == "heteroscedastic_linear") {
    const bool heteroscedastic = name == "heteroscedastic_linear";
    const Eigen::Vector3d weights(1.5, -2.0, 0.5);
    const double intercept = 0.7;
    for (std::size_t i = 0; i < n; ++i) {
      Observation obs;
      obs.x = Vector(3);
      for (Eigen::Index j = 0; j < 3; ++j) {
        obs.x(j) = rng.normal();
      }
      const double sigma =
          heteroscedastic ? 0.25 + std::abs(obs.x(0)) : 1.0;
      obs.y = weights.dot(obs.x) + intercept +
              noise_scale * sigma * rng.normal();
      data.push_back(std::move(obs));
    }
    return data;
  }
  if (name == "example1") {
    for (std::size_t i = 0; i < n; ++i) {
      Observation obs;
      obs.x = Vector(1);
      const bool class_one = rng.uniform() < 0.5;
      obs.x(0) = class_one ? 1.0 : 0.0;
      obs.y = class_one ? (rng.uniform() < 0.5 ? 1.0 : -1.0) : 0.0;
      data.push_back(std::move(obs));
    }
    return data;
  }
  throw std::invalid_argument("unknown synthetic generator '" + name + "'");
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  grid.push_back(0.01);
  for (int i = 1; i <= 19; ++i) {
    grid.push_back(static_cast<double>(i) * 0.05);
  }
  grid.push_back(0.99);
  return grid;
}

std::vector<int> default_k_grid() {
  std::vector<int> grid;
  for (int k = 2; k <= 20; ++k) {
    grid.push_back(k);
  }
  return grid;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("box_stats on an empty multiset");
  }
  std::sort(values.begin(), values.end());
  auto quantile_at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {values.front(), quantile_at(0.25), quantile_at(0.5),
          quantile_at(0.75), values.back()};
}

namespace {

std::vector<double> curve_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) {
    grid.push_back(static_cast<double>(i) * 0.01);
  }
  return grid;
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       since)
      .count();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();

  if (config.data_path.empty() == config.synth_name.empty()) {
    throw std::invalid_argument(
        "exactly one of data_path and synth_name must be set");
  }
  if (config.permutations < 1) {
    throw std::invalid_argument("permutations must be positive");
  }
  const Dataset base =
      config.synth_name.empty()
          ? load_csv(config.data_path)
          : synth(config.synth_name, config.synth_size, config.seed,
                  config.synth_noise);
  if (config.test_length < 1 || config.test_length >= base.size()) {
    throw std::invalid_argument(
        "test_length must satisfy 1 <= l < dataset size");
  }
  const std::size_t n = base.size() - config.test_length;

  ExperimentReport report;
  report.train_size = n;
  report.test_size = config.test_length;

  const std::vector<double> alpha_grid =
      config.alpha_grid.empty() ? default_alpha_grid() : config.alpha_grid;
  const std::vector<int> k_grid =
      config.k_grid.empty() ? default_k_grid() : config.k_grid;

  std::vector<std::size_t> proper_sizes;
  for (double alpha : alpha_grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("alpha grid entries must lie in (0, 1)");
    }
    const auto m = static_cast<std::size_t>(
        std::floor(alpha * static_cast<double>(n)));
    if (m < 1 || m + 1 > n) {
      report.warnings.push_back("skipping infeasible alpha " +
                                format_double(alpha));
      continue;
    }
    report.alphas.push_back(alpha);
    proper_sizes.push_back(m);
  }
  for (int k : k_grid) {
    if (k < 2 || static_cast<std::size_t>(k) > n) {
      report.warnings.push_back("skipping infeasible K " + std::to_string(k));
      continue;
    }
    report.ks.push_back(k);
  }

  const bool crps_mode = config.mode == ExperimentMode::crps;
  if (crps_mode) {
    report.scps_losses.resize(report.alphas.size());
    report.ccps_losses.resize(report.ks.size());
  } else {
    if (report.alphas.empty() || report.ks.empty()) {
      throw std::invalid_argument("calibration mode needs feasible grids");
    }
    // The curves are drawn for a single representative grid point each:
    // an even split for SCPS and the customary K = 5 for CCPS.
    const auto alpha_pick = std::min_element(
        report.alphas.begin(), report.alphas.end(),
        [](double a, double b) {
          return std::abs(a - 0.5) < std::abs(b - 0.5);
        });
    const auto k_pick = std::min_element(
        report.ks.begin(), report.ks.end(),
        [](int a, int b) { return std::abs(a - 5) < std::abs(b - 5); });
    report.calibration_alpha = *alpha_pick;
    report.calibration_k = *k_pick;
  }

  const ConformityMeasureSpec base_measure{config.measure, config.regressor,
                                           config.nw};
  Rng rng(config.seed + 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(base.size());

  for (int perm = 0; perm < config.permutations; ++perm) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const Dataset permuted = base.select(order);
    const Dataset raw_train = permuted.slice(0, n);
    const Dataset raw_test = permuted.slice(n, config.test_length);

    const Scaler scaler = fit_scaler(raw_train);
    const Dataset train = apply_scaler(scaler, raw_train);
    const Dataset test = apply_scaler(scaler, raw_test);

    ConformityMeasureSpec measure = base_measure;
    if (config.tune_enabled) {
      measure.regressor = tune(measure.regressor, train);
    }

    if (crps_mode) {
      const auto scps_start = std::chrono::steady_clock::now();
      for (std::size_t a = 0; a < report.alphas.size(); ++a) {
        const ScpsModel model = fit_scps(train, proper_sizes[a], measure);
        for (const auto& obs : test) {
          const StepDistribution dist = predict_scps(model, obs.x);
          report.scps_losses[a].push_back(crps_step(dist, obs.y));
        }
      }
      report.seconds_scps += elapsed_seconds(scps_start);

      const auto ccps_start = std::chrono::steady_clock::now();
      for (std::size_t b = 0; b < report.ks.size(); ++b) {
        const CcpsModel model = fit_ccps(train, report.ks[b], measure);
        for (const auto& obs : test) {
          const StepDistribution dist = predict_ccps(model, obs.x);
          report.ccps_losses[b].push_back(crps_step(dist, obs.y));
        }
      }
      report.seconds_ccps += elapsed_seconds(ccps_start);
    } else {
      const auto scps_start = std::chrono::steady_clock::now();
      const auto m = static_cast<std::size_t>(std::floor(
          report.calibration_alpha * static_cast<double>(n)));
      const ScpsModel scps = fit_scps(train, m, measure);
      for (const auto& obs : test) {
        double value = scps_q_crisp(scps, obs.x, obs.y);
        if (config.conservative_2x) value = conservative_p(value);
        report.scps_pit.push_back(value);
      }
      report.seconds_scps += elapsed_seconds(scps_start);

      const auto ccps_start = std::chrono::steady_clock::now();
      const CcpsModel ccps = fit_ccps(train, report.calibration_k, measure);
      for (const auto& obs : test) {
        double value = ccps_q_crisp(ccps, obs.x, obs.y);
        if (config.conservative_2x) value = conservative_p(value);
        report.ccps_pit.push_back(value);
      }
      report.seconds_ccps += elapsed_seconds(ccps_start);
    }
  }

  if (!crps_mode) {
    report.scps_curve = calibration_curve(report.scps_pit, curve_grid());
    report.ccps_curve = calibration_curve(report.ccps_pit, curve_grid());
  }
  report.seconds_total = elapsed_seconds(start);
  return report;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  return out;
}

void write_boxstats(const std::filesystem::path& path,
                    const std::string& key_column,
                    const std::vector<std::string>& keys,
                    const std::vector<std::vector<double>>& multisets) {
  auto out = open_output(path);
  out << key_column << ",min,q1,median,q3,max\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const BoxStats stats = box_stats(multisets[i]);
    out << keys[i] << ',' << format_double(stats.min) << ','
        << format_double(stats.q1) << ',' << format_double(stats.median) << ','
        << format_double(stats.q3) << ',' << format_double(stats.max) << '\n';
  }
}

void write_raw(const std::filesystem::path& path,
               const std::string& key_column,
               const std::vector<std::string>& keys,
               const std::vector<std::vector<double>>& multisets) {
  auto out = open_output(path);
  out << key_column << ",crps\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (double loss : multisets[i]) {
      out << keys[i] << ',' << format_double(loss) << '\n';
    }
  }
}

void write_curve(const std::filesystem::path& path,
                 const CalibrationCurve& curve) {
  auto out = open_output(path);
  out << "alpha,F_alpha\n";
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    out << format_double(curve.alphas[i]) << ','
        << format_double(curve.empirical_cdf[i]) << '\n';
  }
}

}  // namespace

void write_report_files(const ExperimentReport& report,
                        const ExperimentConfig& config,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> alpha_keys;
  for (double alpha : report.alphas) {
    alpha_keys.push_back(format_double(alpha));
  }
  std::vector<std::string> k_keys;
  for (int k : report.ks) {
    k_keys.push_back(std::to_string(k));
  }

  if (config.mode == ExperimentMode::crps) {
    write_boxstats(out_dir / "scps_boxstats.csv", "alpha", alpha_keys,
                   report.scps_losses);
    write_boxstats(out_dir / "ccps_boxstats.csv", "K", k_keys,
                   report.ccps_losses);
    if (config.emit_raw) {
      write_raw(out_dir / "scps_raw.csv", "alpha", alpha_keys,
                report.scps_losses);
      write_raw(out_dir / "ccps_raw.csv", "K", k_keys, report.ccps_losses);
    }
  } else {
    write_curve(out_dir / "calibration_scps.csv", report.scps_curve);
    write_curve(out_dir / "calibration_ccps.csv", report.ccps_curve);
  }

  nlohmann::json doc;
  doc["config"] = {
      {"data_path", config.data_path},
      {"synth_name", config.synth_name},
      {"synth_size", config.synth_size},
      {"synth_noise", config.synth_noise},
      {"test_length", config.test_length},
      {"permutations", config.permutations},
      {"alphas", report.alphas},
      {"ks", report.ks},
      {"regressor",
       config.regressor.kind == RegressorKind::least_squares ? "ls"
       : config.regressor.kind == RegressorKind::ridge       ? "ridge"
                                                             : "knn"},
      {"ridge_lambda", config.regressor.ridge_lambda},
      {"knn_k", config.regressor.knn_k},
      {"measure", config.measure == MeasureKind::simple       ? "simple"
                  : config.measure == MeasureKind::normalized ? "normalized"
                                                              : "nw"},
      {"mode",
       config.mode == ExperimentMode::crps ? "crps" : "calibration"},
      {"seed", config.seed},
      {"tune", config.tune_enabled},
      {"conservative_2x", config.conservative_2x},
  };
  doc["train_size"] = report.train_size;
  doc["test_size"] = report.test_size;
  if (config.mode == ExperimentMode::calibration) {
    doc["calibration_alpha"] = report.calibration_alpha;
    doc["calibration_k"] = report.calibration_k;
  }
  doc["timings"] = {{"scps_seconds", report.seconds_scps},
                    {"ccps_seconds", report.seconds_ccps},
                    {"total_seconds", report.seconds_total}};
  doc["warnings"] = report.warnings;

  auto out = open_output(out_dir / "report.json");
  out << doc.dump(2) << '\n';
}

}  // namespace confdist
