#ifndef CONFDIST_REGRESSORS_HPP_
#define CONFDIST_REGRESSORS_HPP_

#include "confdist/core.hpp"

namespace confdist {

enum class RegressorKind { least_squares, ridge, knn };

/// Configuration of an underlying point predictor. Linear kinds fit an
/// unpenalized intercept by default; set fit_intercept = false for the
/// pure penalized form.
struct RegressorSpec {
  RegressorKind kind = RegressorKind::least_squares;
  double ridge_lambda = 0.0;
  int knn_k = 5;
  bool fit_intercept = true;
};

/// Immutable fitted state. predict() is a pure function of (parameters, x).
struct FittedRegressor {
  RegressorSpec spec;
  // Linear kinds.
  Vector weights;
  double intercept = 0.0;
  double residual_scale = 0.0;
  // knn keeps the training set verbatim.
  Dataset knn_train;
  std::size_t training_size = 0;
  Eigen::Index feature_dim = 0;
  double scale_floor = 0.0;
};

/// Fits the spec on the training data. Deterministic; rank-deficient
/// unregularized systems resolve to the minimal-norm solution.
FittedRegressor fit(const RegressorSpec& spec, const Dataset& train);

double predict(const FittedRegressor& model, const Vector& x);

struct ScaledPrediction {
  double value = 0.0;
  double scale = 0.0;  // strictly positive (floored)
};

/// Point prediction plus a positive quality estimate: in-sample residual
/// RMS for linear kinds, mean absolute neighbor deviation for knn.
ScaledPrediction predict_with_scale(const FittedRegressor& model,
                                    const Vector& x);

}  // namespace confdist

#endif  // CONFDIST_REGRESSORS_HPP_
