#include "confdist/svaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace confdist {

double IsotonicFit::at(double s) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
  if (it == breakpoints.begin()) {
    return levels.front();
  }
  return levels[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

IsotonicFit pava(std::span<const WeightedPoint> points) {
  if (points.empty()) {
    throw std::invalid_argument("pava requires at least one point");
  }
  std::vector<WeightedPoint> sorted(points.begin(), points.end());
  for (const auto& p : sorted) {
    if (!(p.weight > 0.0)) {
      throw std::invalid_argument("pava weights must be positive");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const WeightedPoint& a, const WeightedPoint& b) {
              return a.s < b.s;
            });

  // Merge exactly equal abscissas into weighted means.
  struct Merged {
    double s;
    double weight;
    double weighted_target;
  };
  std::vector<Merged> merged;
  merged.reserve(sorted.size());
  for (const auto& p : sorted) {
    if (!merged.empty() && merged.back().s == p.s) {
      merged.back().weight += p.weight;
      merged.back().weighted_target += p.weight * p.target;
    } else {
      merged.push_back({p.s, p.weight, p.weight * p.target});
    }
  }

  // Pool adjacent violators: each block carries its pooled weight and
  // weighted target sum; the fitted level is the block mean.
  struct Block {
    double weight;
    double weighted_target;
    std::size_t count;  // merged points covered

    double mean() const { return weighted_target / weight; }
  };
  std::vector<Block> blocks;
  blocks.reserve(merged.size());
  for (const auto& point : merged) {
    blocks.push_back({point.weight, point.weighted_target, 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].mean() >= blocks.back().mean()) {
      blocks[blocks.size() - 2].weight += blocks.back().weight;
      blocks[blocks.size() - 2].weighted_target += blocks.back().weighted_target;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }

  IsotonicFit fit;
  fit.breakpoints.reserve(merged.size());
  fit.levels.reserve(merged.size());
  std::size_t offset = 0;
  for (const auto& block : blocks) {
    const double level = block.mean();
    for (std::size_t i = 0; i < block.count; ++i) {
      fit.breakpoints.push_back(merged[offset + i].s);
      fit.levels.push_back(level);
    }
    offset += block.count;
  }
  return fit;
}

namespace {

// Nearest scored proper object; ties resolved to the smallest index.
std::size_t nearest_proper_index(std::span<const double> scores, std::size_t m,
                                 double t) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double dist = std::abs(scores[i] - t);
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

}  // namespace

double svaps_q_from_scores(std::span<const double> scores,
                           std::span<const double> labels, std::size_t m,
                           SvapsType type, double s, double y, int tau) {
  const std::size_t n = scores.size();
  if (labels.size() != n) {
    throw std::invalid_argument("scores and labels must have equal length");
  }
  if (m < 1 || m + 1 > n) {
    throw std::invalid_argument("split index must satisfy 1 <= m <= n - 1");
  }
  if (tau != 0 && tau != 1) {
    throw std::invalid_argument("tau must be 0 or 1");
  }

  auto binarized = [&](std::size_t i) { return labels[i] <= y ? 0.0 : 1.0; };

  std::size_t fit_first = 0;
  std::size_t fit_last = n;
  if (type == SvapsType::type1) fit_first = m;
  if (type == SvapsType::type2) fit_last = m;

  std::vector<WeightedPoint> points;
  points.reserve(fit_last - fit_first + 1);
  for (std::size_t i = fit_first; i < fit_last; ++i) {
    points.push_back({scores[i], binarized(i), 1.0});
  }
  if (type != SvapsType::type2) {
    // Type 2 drops the test addend from the objective, so the added point
    // would not influence the fit anyway.
    points.push_back({s, static_cast<double>(tau), 1.0});
  }
  const IsotonicFit g = pava(points);

  auto g_at = [&](double t) {
    if (type == SvapsType::type2) {
      return g.at(scores[nearest_proper_index(scores, m, t)]);
    }
    return g.at(t);
  };

  const double g_test = g_at(s);
  std::size_t same_level = 0;
  std::size_t same_level_above = 0;
  for (std::size_t i = m; i < n; ++i) {
    if (g_at(scores[i]) == g_test) {
      ++same_level;
      same_level_above += binarized(i) == 1.0 ? 1 : 0;
    }
  }
  return 1.0 - (static_cast<double>(same_level_above) + tau) /
                   (static_cast<double>(same_level) + 1.0);
}

double svaps_q(const SvapsConfig& config, const Dataset& train,
               const Vector& x, double y, int tau) {
  const std::size_t n = train.size();
  if (config.proper_size < 1 || config.proper_size + 1 > n) {
    throw std::invalid_argument("split index must satisfy 1 <= m <= n - 1");
  }
  const FittedRegressor model =
      fit(config.regressor, train.slice(0, config.proper_size));
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = predict(model, train[i].x);
  }
  return svaps_q_from_scores(scores, train.labels(), config.proper_size,
                             config.type, predict(model, x), y, tau);
}

SvapsBand svaps_band(const SvapsConfig& config, const Dataset& train,
                     const Vector& x, std::span<const double> y_grid) {
  if (!std::is_sorted(y_grid.begin(), y_grid.end())) {
    throw std::invalid_argument("y_grid must be sorted");
  }
  const std::size_t n = train.size();
  if (config.proper_size < 1 || config.proper_size + 1 > n) {
    throw std::invalid_argument("split index must satisfy 1 <= m <= n - 1");
  }
  const FittedRegressor model =
      fit(config.regressor, train.slice(0, config.proper_size));
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = predict(model, train[i].x);
  }
  const std::vector<double> labels = train.labels();
  const double s = predict(model, x);

  SvapsBand band;
  band.lower.reserve(y_grid.size());
  band.upper.reserve(y_grid.size());
  for (double y : y_grid) {
    band.lower.push_back(svaps_q_from_scores(scores, labels,
                                             config.proper_size, config.type,
                                             s, y, 0));
    band.upper.push_back(svaps_q_from_scores(scores, labels,
                                             config.proper_size, config.type,
                                             s, y, 1));
  }
  return band;
}

Example1Weights example1_asymptotics(std::size_t n_calibration, double a0,
                                     double a1, std::uint64_t seed) {
  if (n_calibration < 100) {
    throw std::invalid_argument("n_calibration must be at least 100");
  }
  std::mt19937_64 engine(seed);
  const std::size_t m = n_calibration;
  const std::size_t n = 2 * n_calibration;
  std::vector<double> scores(n);
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool class_one = (engine() & 1ULL) != 0;
    scores[i] = class_one ? a1 : a0;
    labels[i] = class_one ? ((engine() & 1ULL) != 0 ? 1.0 : -1.0) : 0.0;
  }

  auto masses = [&](double s) {
    const double at_lo = svaps_q_from_scores(scores, labels, m,
                                             SvapsType::type1, s, -0.5, 0);
    const double at_hi = svaps_q_from_scores(scores, labels, m,
                                             SvapsType::type1, s, 0.5, 0);
    return std::array<double, 3>{at_lo, at_hi - at_lo, 1.0 - at_hi};
  };
  return {masses(a0), masses(a1)};
}

}  // namespace confdist
