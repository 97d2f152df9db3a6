#include "confdist/scps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace confdist {

double split_transducer_q(std::span<const double> calibration_scores,
                          double test_score, double tau) {
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("tau must lie in [0, 1]");
  }
  std::size_t below = 0;
  std::size_t equal = 0;
  for (double s : calibration_scores) {
    below += s < test_score ? 1 : 0;
    equal += s == test_score ? 1 : 0;
  }
  return (static_cast<double>(below) + tau * static_cast<double>(equal) + tau) /
         static_cast<double>(calibration_scores.size() + 1);
}

double split_transducer_q_crisp(std::span<const double> calibration_scores,
                                double test_score) {
  if (calibration_scores.empty()) {
    throw std::runtime_error("no calibration points");
  }
  std::size_t below_or_equal = 0;
  for (double s : calibration_scores) {
    below_or_equal += s <= test_score ? 1 : 0;
  }
  return static_cast<double>(below_or_equal) /
         static_cast<double>(calibration_scores.size());
}

ScpsModel fit_scps(const Dataset& train, std::size_t proper_size,
                   const ConformityMeasureSpec& spec) {
  const std::size_t n = train.size();
  if (proper_size < 1 || proper_size + 1 > n) {
    throw std::invalid_argument(
        "proper training size must satisfy 1 <= m <= n - 1");
  }
  ScpsModel model;
  model.measure = train_measure(spec, train.slice(0, proper_size));
  model.calibration_scores.reserve(n - proper_size);
  model.calibration_label_min = train[proper_size].y;
  model.calibration_label_max = train[proper_size].y;
  for (std::size_t i = proper_size; i < n; ++i) {
    model.calibration_scores.push_back(score(model.measure, train[i]));
    model.calibration_label_min = std::min(model.calibration_label_min, train[i].y);
    model.calibration_label_max = std::max(model.calibration_label_max, train[i].y);
  }
  model.sorted_scores = model.calibration_scores;
  std::sort(model.sorted_scores.begin(), model.sorted_scores.end());
  return model;
}

ScpsModel fit_scps(const Dataset& train, double split_fraction,
                   const ConformityMeasureSpec& spec) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }
  const auto m = static_cast<std::size_t>(
      std::floor(split_fraction * static_cast<double>(train.size())));
  return fit_scps(train, m, spec);
}

double scps_q(const ScpsModel& model, const Vector& x, double y, double tau) {
  const double test_score = score(model.measure, Observation{x, y});
  return split_transducer_q(model.calibration_scores, test_score, tau);
}

double scps_q_crisp(const ScpsModel& model, const Vector& x, double y) {
  const double test_score = score(model.measure, Observation{x, y});
  return split_transducer_q_crisp(model.calibration_scores, test_score);
}

StepDistribution predict_scps(const ScpsModel& model, const Vector& x) {
  // The measure is isotonic, so inverting sorted scores keeps the jumps
  // sorted; repeated scores stay as repeated jumps.
  std::vector<double> jumps;
  try {
    jumps = invert_sorted(model.measure, x, model.sorted_scores);
  } catch (const std::runtime_error&) {
    throw std::runtime_error(
        "calibration score not attainable at this object; evaluate the "
        "transducer directly via scps_q_grid");
  }
  // Bisection roots of adjacent targets can land out of order by an ulp.
  for (std::size_t i = 1; i < jumps.size(); ++i) {
    jumps[i] = std::max(jumps[i], jumps[i - 1]);
  }
  return StepDistribution(std::move(jumps));
}

GridCurve scps_q_grid(const ScpsModel& model, const Vector& x, double tau,
                      std::size_t grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("grid_size must be at least 2");
  }
  const double range =
      model.calibration_label_max - model.calibration_label_min;
  const double pad = 0.1 * (range > 0.0 ? range : 1.0);
  const double lo = model.calibration_label_min - pad;
  const double hi = model.calibration_label_max + pad;
  GridCurve curve;
  curve.y.reserve(grid_size);
  curve.q.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double y = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(grid_size - 1);
    curve.y.push_back(y);
    curve.q.push_back(scps_q(model, x, y, tau));
  }
  return curve;
}

}  // namespace confdist
