#include "confdist/conformity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace confdist {

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// Kernel weights of the proper training objects at x, normalized to sum 1.
// Falls back to uniform weights when the kernel mass underflows, so scoring
// stays total far away from the training data.
struct NwWeights {
  std::vector<double> value;

  NwWeights(const TrainedMeasure& measure, const Vector& x) {
    const auto& train = measure.proper_train;
    const double hx = measure.spec.nw.bandwidth_x;
    value.reserve(train.size());
    double mass = 0.0;
    for (const auto& obs : train) {
      const double u = (obs.x - x).norm() / hx;
      const double w = std::exp(-0.5 * u * u);
      value.push_back(w);
      mass += w;
    }
    if (mass <= 0.0) {
      std::fill(value.begin(), value.end(), 1.0);
      mass = static_cast<double>(value.size());
    }
    for (double& w : value) {
      w /= mass;
    }
  }

  double cdf(const TrainedMeasure& measure, double y) const {
    const auto& train = measure.proper_train;
    const double hy = measure.spec.nw.bandwidth_y;
    const bool smooth = measure.spec.nw.sigmoid_smoothing;
    double total = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double u = (y - train[i].y) / hy;
      total += value[i] * (smooth ? sigmoid(u) : (u >= 0.0 ? 1.0 : 0.0));
    }
    return total;
  }
};

double invert_nw(const TrainedMeasure& measure, const NwWeights& weights,
                 double target) {
  const auto& train = measure.proper_train;
  double label_lo = train[0].y;
  double label_hi = train[0].y;
  for (const auto& obs : train) {
    label_lo = std::min(label_lo, obs.y);
    label_hi = std::max(label_hi, obs.y);
  }

  if (target <= 0.0) {
    // The infimum would be -inf, which cannot serve as a jump point.
    throw std::runtime_error("score not attainable");
  }

  if (!measure.spec.nw.sigmoid_smoothing) {
    // Heaviside threshold: the CDF only jumps at training labels, so the
    // smallest label reaching the target is found by scanning them.
    std::vector<std::pair<double, double>> by_label;  // (label, weight)
    by_label.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      by_label.emplace_back(train[i].y, weights.value[i]);
    }
    std::sort(by_label.begin(), by_label.end());
    double cum = 0.0;
    for (const auto& [label, weight] : by_label) {
      cum += weight;
      if (cum >= target) {
        return label;
      }
    }
    if (target <= 1.0 + 1e-9) {
      return by_label.back().first;
    }
    throw std::runtime_error("score not attainable");
  }

  if (target >= 1.0) {
    throw std::runtime_error("score not attainable");
  }
  const double hy = measure.spec.nw.bandwidth_y;
  double lo = label_lo - 10.0 * hy;
  double hi = label_hi + 10.0 * hy;
  double span = hi - lo > 0.0 ? hi - lo : hy;
  // Sigmoid tails are monotone, so doubling the bracket terminates.
  int guard = 0;
  while (weights.cdf(measure, lo) >= target) {
    lo -= span;
    span *= 2.0;
    if (++guard > 200) throw std::runtime_error("score not attainable");
  }
  span = hi - lo;
  guard = 0;
  while (weights.cdf(measure, hi) < target) {
    hi += span;
    span *= 2.0;
    if (++guard > 200) throw std::runtime_error("score not attainable");
  }
  // Invariant: cdf(lo) < target <= cdf(hi).
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (weights.cdf(measure, mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

TrainedMeasure train_measure(const ConformityMeasureSpec& spec,
                             const Dataset& proper_train) {
  if (proper_train.empty()) {
    throw std::invalid_argument("empty proper training sequence");
  }
  if (spec.kind == MeasureKind::nadaraya_watson &&
      (spec.nw.bandwidth_x <= 0.0 || spec.nw.bandwidth_y <= 0.0)) {
    throw std::invalid_argument("NW bandwidths must be positive");
  }
  TrainedMeasure out;
  out.spec = spec;
  out.proper_training_size = proper_train.size();
  if (spec.kind == MeasureKind::nadaraya_watson) {
    out.proper_train = proper_train;
  } else {
    out.regressor = fit(spec.regressor, proper_train);
  }
  return out;
}

double score(const TrainedMeasure& measure, const Observation& obs) {
  switch (measure.spec.kind) {
    case MeasureKind::simple:
      return obs.y - predict(measure.regressor, obs.x);
    case MeasureKind::normalized: {
      const auto pred = predict_with_scale(measure.regressor, obs.x);
      return (obs.y - pred.value) / pred.scale;
    }
    case MeasureKind::nadaraya_watson: {
      const NwWeights weights(measure, obs.x);
      return weights.cdf(measure, obs.y);
    }
  }
  throw std::logic_error("unknown measure kind");
}

double invert(const TrainedMeasure& measure, const Vector& x,
              double target_score) {
  switch (measure.spec.kind) {
    case MeasureKind::simple:
      return predict(measure.regressor, x) + target_score;
    case MeasureKind::normalized: {
      const auto pred = predict_with_scale(measure.regressor, x);
      return pred.value + pred.scale * target_score;
    }
    case MeasureKind::nadaraya_watson: {
      const NwWeights weights(measure, x);
      return invert_nw(measure, weights, target_score);
    }
  }
  throw std::logic_error("unknown measure kind");
}

std::vector<double> invert_sorted(const TrainedMeasure& measure,
                                  const Vector& x,
                                  std::span<const double> sorted_targets) {
  std::vector<double> out;
  out.reserve(sorted_targets.size());
  switch (measure.spec.kind) {
    case MeasureKind::simple: {
      const double center = predict(measure.regressor, x);
      for (double t : sorted_targets) out.push_back(center + t);
      return out;
    }
    case MeasureKind::normalized: {
      const auto pred = predict_with_scale(measure.regressor, x);
      for (double t : sorted_targets) {
        out.push_back(pred.value + pred.scale * t);
      }
      return out;
    }
    case MeasureKind::nadaraya_watson: {
      const NwWeights weights(measure, x);
      for (double t : sorted_targets) {
        out.push_back(invert_nw(measure, weights, t));
      }
      return out;
    }
  }
  throw std::logic_error("unknown measure kind");
}

bool check_isotonic(const TrainedMeasure& measure, const Vector& x,
                    std::span<const double> y_grid) {
  return check_isotonic(
      [&](double y) { return score(measure, Observation{x, y}); }, y_grid);
}

bool check_isotonic(const std::function<double(double)>& score_at_label,
                    std::span<const double> y_grid) {
  if (!std::is_sorted(y_grid.begin(), y_grid.end())) {
    throw std::invalid_argument("y_grid must be sorted");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (double y : y_grid) {
    const double s = score_at_label(y);
    if (s < prev) {
      return false;
    }
    prev = s;
  }
  return true;
}

}  // namespace confdist
