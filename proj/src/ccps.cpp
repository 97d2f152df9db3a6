#include "confdist/ccps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace confdist {

namespace {

struct FoldCounts {
  std::size_t below = 0;
  std::size_t equal = 0;
};

FoldCounts count_fold(const std::vector<double>& scores, double test_score) {
  FoldCounts counts;
  for (double s : scores) {
    counts.below += s < test_score ? 1 : 0;
    counts.equal += s == test_score ? 1 : 0;
  }
  return counts;
}

}  // namespace

std::size_t FoldPartition::total() const {
  std::size_t n = 0;
  for (const auto& fold : folds) {
    n += fold.size();
  }
  return n;
}

FoldPartition make_folds(std::size_t n, int num_folds) {
  if (num_folds < 2 || static_cast<std::size_t>(num_folds) > n) {
    throw std::invalid_argument("fold count must satisfy 2 <= K <= n");
  }
  FoldPartition partition;
  partition.folds.resize(static_cast<std::size_t>(num_folds));
  const auto k = static_cast<std::size_t>(num_folds);
  for (std::size_t fold = 0; fold < k; ++fold) {
    // ceil(fold * n / K) .. ceil((fold + 1) * n / K) - 1, 0-based.
    const std::size_t first = (fold * n + k - 1) / k;
    const std::size_t last = ((fold + 1) * n + k - 1) / k;
    for (std::size_t i = first; i < last; ++i) {
      partition.folds[fold].push_back(i);
    }
  }
  return partition;
}

CcpsModel fit_ccps(const Dataset& train, int num_folds,
                   const ConformityMeasureSpec& spec,
                   int score_averaging_rounds) {
  if (score_averaging_rounds < 1) {
    throw std::invalid_argument("score_averaging_rounds must be positive");
  }
  CcpsModel model;
  model.n = train.size();
  model.partition = make_folds(train.size(), num_folds);
  model.label_min_max = {train[0].y, train[0].y};
  for (const auto& obs : train) {
    model.label_min_max[0] = std::min(model.label_min_max[0], obs.y);
    model.label_min_max[1] = std::max(model.label_min_max[1], obs.y);
  }

  const auto k = static_cast<std::size_t>(num_folds);
  model.fold_measures.reserve(k);
  model.fold_scores.resize(k);
  for (std::size_t fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> complement;
    complement.reserve(train.size() - model.partition.folds[fold].size());
    for (std::size_t other = 0; other < k; ++other) {
      if (other == fold) continue;
      complement.insert(complement.end(), model.partition.folds[other].begin(),
                        model.partition.folds[other].end());
    }
    std::sort(complement.begin(), complement.end());
    const Dataset complement_data = train.select(complement);

    auto& scores = model.fold_scores[fold];
    scores.assign(model.partition.folds[fold].size(), 0.0);
    TrainedMeasure measure;
    for (int round = 0; round < score_averaging_rounds; ++round) {
      measure = train_measure(spec, complement_data);
      for (std::size_t j = 0; j < scores.size(); ++j) {
        scores[j] += score(measure, train[model.partition.folds[fold][j]]);
      }
    }
    for (double& s : scores) {
      s /= static_cast<double>(score_averaging_rounds);
    }
    model.fold_measures.push_back(std::move(measure));
  }
  return model;
}

double ccps_q(const CcpsModel& model, const Vector& x, double y, double tau) {
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("tau must lie in [0, 1]");
  }
  std::size_t below = 0;
  std::size_t equal = 0;
  for (std::size_t fold = 0; fold < model.fold_scores.size(); ++fold) {
    const double test_score =
        score(model.fold_measures[fold], Observation{x, y});
    const auto counts = count_fold(model.fold_scores[fold], test_score);
    below += counts.below;
    equal += counts.equal;
  }
  return (static_cast<double>(below) + tau * static_cast<double>(equal) + tau) /
         static_cast<double>(model.n + 1);
}

double ccps_q_crisp(const CcpsModel& model, const Vector& x, double y) {
  std::size_t below_or_equal = 0;
  for (std::size_t fold = 0; fold < model.fold_scores.size(); ++fold) {
    const double test_score =
        score(model.fold_measures[fold], Observation{x, y});
    const auto counts = count_fold(model.fold_scores[fold], test_score);
    below_or_equal += counts.below + counts.equal;
  }
  return static_cast<double>(below_or_equal) / static_cast<double>(model.n);
}

StepDistribution predict_ccps(const CcpsModel& model, const Vector& x) {
  std::vector<double> jumps;
  jumps.reserve(model.n);
  for (std::size_t fold = 0; fold < model.fold_scores.size(); ++fold) {
    std::vector<double> sorted_scores = model.fold_scores[fold];
    std::sort(sorted_scores.begin(), sorted_scores.end());
    std::vector<double> fold_jumps;
    try {
      fold_jumps = invert_sorted(model.fold_measures[fold], x, sorted_scores);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "fold score not attainable at this object; evaluate the "
          "transducer directly via ccps_q_grid");
    }
    jumps.insert(jumps.end(), fold_jumps.begin(), fold_jumps.end());
  }
  std::sort(jumps.begin(), jumps.end());
  return StepDistribution(std::move(jumps));
}

GridCurve ccps_q_grid(const CcpsModel& model, const Vector& x, double tau,
                      std::size_t grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("grid_size must be at least 2");
  }
  const double range = model.label_min_max[1] - model.label_min_max[0];
  const double pad = 0.1 * (range > 0.0 ? range : 1.0);
  const double lo = model.label_min_max[0] - pad;
  const double hi = model.label_min_max[1] + pad;
  GridCurve curve;
  curve.y.reserve(grid_size);
  curve.q.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double y = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(grid_size - 1);
    curve.y.push_back(y);
    curve.q.push_back(ccps_q(model, x, y, tau));
  }
  return curve;
}

double fold_p_value(const CcpsModel& model, int fold, const Vector& x,
                    double y, double tau) {
  if (fold < 1 || fold > model.partition.k()) {
    throw std::invalid_argument("fold index must satisfy 1 <= k <= K");
  }
  const auto idx = static_cast<std::size_t>(fold - 1);
  const double test_score = score(model.fold_measures[idx], Observation{x, y});
  return split_transducer_q(model.fold_scores[idx], test_score, tau);
}

double recombine_identity_residual(const CcpsModel& model, const Vector& x,
                                   double y, double tau) {
  const double aggregate = ccps_q(model, x, y, tau);
  const auto n_plus_1 = static_cast<double>(model.n + 1);
  double weighted = 0.0;
  for (int fold = 1; fold <= model.partition.k(); ++fold) {
    const auto fold_size = static_cast<double>(
        model.partition.folds[static_cast<std::size_t>(fold - 1)].size());
    weighted +=
        (fold_size + 1.0) / n_plus_1 * fold_p_value(model, fold, x, y, tau);
  }
  weighted -= (static_cast<double>(model.partition.k()) - 1.0) / n_plus_1 * tau;
  return aggregate - weighted;
}

double conservative_p(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("p-value must lie in [0, 1]");
  }
  return std::min(2.0 * p, 1.0);
}

}  // namespace confdist
