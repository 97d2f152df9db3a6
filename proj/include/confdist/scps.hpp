#ifndef CONFDIST_SCPS_HPP_
#define CONFDIST_SCPS_HPP_

#include "confdist/conformity.hpp"
#include "confdist/core.hpp"

#include <span>
#include <vector>

namespace confdist {

/// Split conformal transducer fraction for one calibration score multiset:
/// (|{a_i < t}| + tau |{a_i = t}| + tau) / (N + 1).
double split_transducer_q(std::span<const double> calibration_scores,
                          double test_score, double tau);

/// Crisp variant: |{a_i <= t}| / N.
double split_transducer_q_crisp(std::span<const double> calibration_scores,
                                double test_score);

/// Split conformal predictive system: a measure trained on the training
/// sequence proper plus scores of the calibration sequence.
struct ScpsModel {
  TrainedMeasure measure;
  std::vector<double> calibration_scores;  // calibration order preserved
  std::vector<double> sorted_scores;       // cached for prediction
  double calibration_label_min = 0.0;      // for grid evaluation
  double calibration_label_max = 0.0;
};

/// Trains the measure on the first `proper_size` observations and scores
/// the remaining calibration sequence. Requires 1 <= m <= n - 1.
ScpsModel fit_scps(const Dataset& train, std::size_t proper_size,
                   const ConformityMeasureSpec& spec);

/// Split-fraction overload: m = floor(split_fraction * n).
ScpsModel fit_scps(const Dataset& train, double split_fraction,
                   const ConformityMeasureSpec& spec);

/// Direct evaluation of the transducer at a candidate observation.
double scps_q(const ScpsModel& model, const Vector& x, double y, double tau);

double scps_q_crisp(const ScpsModel& model, const Vector& x, double y);

/// Predictive distribution with jumps {invert(x, a_i)} and denominator
/// n - m + 1; its fuzzy evaluation coincides with scps_q. Throws when the
/// measure cannot be inverted (use scps_q_grid instead then).
StepDistribution predict_scps(const ScpsModel& model, const Vector& x);

struct GridCurve {
  std::vector<double> y;
  std::vector<double> q;
};

/// Fallback when inversion is unavailable: transducer values on a uniform
/// label grid spanning the calibration label range padded by 10%.
GridCurve scps_q_grid(const ScpsModel& model, const Vector& x, double tau,
                      std::size_t grid_size = 256);

}  // namespace confdist

#endif  // CONFDIST_SCPS_HPP_
