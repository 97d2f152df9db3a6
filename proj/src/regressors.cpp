#include "confdist/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace confdist {

namespace {

double label_range_floor(const Dataset& train) {
  double lo = train[0].y;
  double hi = train[0].y;
  for (const auto& obs : train) {
    lo = std::min(lo, obs.y);
    hi = std::max(hi, obs.y);
  }
  const double range = hi - lo;
  return 1e-8 * (range > 0.0 ? range : 1.0);
}

void fit_linear(const RegressorSpec& spec, const Dataset& train,
                FittedRegressor& out) {
  const auto n = static_cast<Eigen::Index>(train.size());
  const Eigen::Index d = train.feature_dim();
  Eigen::MatrixXd design(n, d);
  Vector labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design.row(i) = train[static_cast<std::size_t>(i)].x.transpose();
    labels(i) = train[static_cast<std::size_t>(i)].y;
  }

  Vector feature_mean = Vector::Zero(d);
  double label_mean = 0.0;
  if (spec.fit_intercept) {
    feature_mean = design.colwise().mean();
    label_mean = labels.mean();
    design.rowwise() -= feature_mean.transpose();
    labels.array() -= label_mean;
  }

  const double lambda =
      spec.kind == RegressorKind::ridge ? spec.ridge_lambda : 0.0;
  if (lambda > 0.0) {
    const Eigen::MatrixXd gram =
        design.transpose() * design + lambda * Eigen::MatrixXd::Identity(d, d);
    out.weights = gram.ldlt().solve(design.transpose() * labels);
  } else {
    // Pivoted decomposition: minimal-norm solution on rank deficiency.
    out.weights = design.completeOrthogonalDecomposition().solve(labels);
  }
  out.intercept =
      spec.fit_intercept ? label_mean - feature_mean.dot(out.weights) : 0.0;

  // Residuals are invariant to the centering above.
  const Vector residuals = labels - design * out.weights;
  out.residual_scale = std::sqrt(residuals.squaredNorm() / static_cast<double>(n));
}

struct Neighbor {
  double dist_sq;
  std::size_t index;
};

std::vector<Neighbor> nearest(const Dataset& train, const Vector& x, int k) {
  std::vector<Neighbor> all;
  all.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    all.push_back({(train[i].x - x).squaredNorm(), i});
  }
  auto by_dist_then_index = [](const Neighbor& a, const Neighbor& b) {
    return a.dist_sq != b.dist_sq ? a.dist_sq < b.dist_sq : a.index < b.index;
  };
  const auto kth = all.begin() + k;
  std::nth_element(all.begin(), kth - 1, all.end(), by_dist_then_index);
  std::sort(all.begin(), kth, by_dist_then_index);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

}  // namespace

FittedRegressor fit(const RegressorSpec& spec, const Dataset& train) {
  if (train.empty()) {
    throw std::invalid_argument("cannot fit a regressor on an empty dataset");
  }
  if (spec.ridge_lambda < 0.0) {
    throw std::invalid_argument("ridge_lambda must be nonnegative");
  }
  FittedRegressor out;
  out.spec = spec;
  out.training_size = train.size();
  out.feature_dim = train.feature_dim();
  out.scale_floor = label_range_floor(train);

  switch (spec.kind) {
    case RegressorKind::least_squares:
    case RegressorKind::ridge:
      fit_linear(spec, train, out);
      break;
    case RegressorKind::knn:
      if (spec.knn_k < 1) {
        throw std::invalid_argument("knn_k must be at least 1");
      }
      if (static_cast<std::size_t>(spec.knn_k) > train.size()) {
        throw std::invalid_argument("knn_k exceeds the training size");
      }
      out.knn_train = train;
      break;
  }
  return out;
}

double predict(const FittedRegressor& model, const Vector& x) {
  if (x.size() != model.feature_dim) {
    throw std::invalid_argument("feature dimension mismatch in predict");
  }
  if (model.spec.kind == RegressorKind::knn) {
    const auto neighbors = nearest(model.knn_train, x, model.spec.knn_k);
    double sum = 0.0;
    for (const auto& nb : neighbors) {
      sum += model.knn_train[nb.index].y;
    }
    return sum / static_cast<double>(neighbors.size());
  }
  return model.weights.dot(x) + model.intercept;
}

ScaledPrediction predict_with_scale(const FittedRegressor& model,
                                    const Vector& x) {
  if (x.size() != model.feature_dim) {
    throw std::invalid_argument("feature dimension mismatch in predict");
  }
  if (model.spec.kind == RegressorKind::knn) {
    const auto neighbors = nearest(model.knn_train, x, model.spec.knn_k);
    double mean = 0.0;
    for (const auto& nb : neighbors) {
      mean += model.knn_train[nb.index].y;
    }
    mean /= static_cast<double>(neighbors.size());
    double abs_dev = 0.0;
    for (const auto& nb : neighbors) {
      abs_dev += std::abs(model.knn_train[nb.index].y - mean);
    }
    abs_dev /= static_cast<double>(neighbors.size());
    return {mean, std::max(abs_dev, model.scale_floor)};
  }
  return {predict(model, x), std::max(model.residual_scale, model.scale_floor)};
}

}  // namespace confdist
