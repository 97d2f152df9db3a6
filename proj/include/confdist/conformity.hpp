#ifndef CONFDIST_CONFORMITY_HPP_
#define CONFDIST_CONFORMITY_HPP_

#include "confdist/core.hpp"
#include "confdist/regressors.hpp"

#include <functional>
#include <span>
#include <vector>

namespace confdist {

enum class MeasureKind { simple, normalized, nadaraya_watson };

struct NwParams {
  double bandwidth_x = 1.0;
  double bandwidth_y = 1.0;
  // Heaviside threshold is only weakly isotonic and its score inversion can
  // fail; the smooth sigmoid gives a unique inverse.
  bool sigmoid_smoothing = true;
};

/// Score family A(z_1..z_m, (x, y)): residual (simple), scaled residual
/// (normalized), or kernel-weighted conditional CDF estimate (NW).
struct ConformityMeasureSpec {
  MeasureKind kind = MeasureKind::simple;
  RegressorSpec regressor;  // used by simple / normalized
  NwParams nw;              // used by nadaraya_watson
};

/// Measure trained on the proper training sequence. Immutable and
/// shareable; score/invert are pure.
struct TrainedMeasure {
  ConformityMeasureSpec spec;
  FittedRegressor regressor;  // simple / normalized
  Dataset proper_train;       // nadaraya_watson keeps the multiset verbatim
  std::size_t proper_training_size = 0;
};

TrainedMeasure train_measure(const ConformityMeasureSpec& spec,
                             const Dataset& proper_train);

/// Conformity score of a candidate observation; strictly increasing in the
/// label for all kinds (weakly for NW with the Heaviside threshold).
double score(const TrainedMeasure& measure, const Observation& obs);

/// Smallest label C with score(measure, (x, C)) >= target_score. Closed
/// form for simple/normalized; bisection (sigmoid) or a scan over the label
/// jumps (Heaviside) for NW. Throws when the target is not attainable.
double invert(const TrainedMeasure& measure, const Vector& x,
              double target_score);

/// Batch inversion of sorted targets; shares kernel weights across targets
/// for the NW kind. Output preserves the (sorted) order of the targets.
std::vector<double> invert_sorted(const TrainedMeasure& measure,
                                  const Vector& x,
                                  std::span<const double> sorted_targets);

/// True iff the scores are nondecreasing along the sorted grid.
bool check_isotonic(const TrainedMeasure& measure, const Vector& x,
                    std::span<const double> y_grid);
bool check_isotonic(const std::function<double(double)>& score_at_label,
                    std::span<const double> y_grid);

}  // namespace confdist

#endif  // CONFDIST_CONFORMITY_HPP_
