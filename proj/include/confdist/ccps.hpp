#ifndef CONFDIST_CCPS_HPP_
#define CONFDIST_CCPS_HPP_

#include "confdist/conformity.hpp"
#include "confdist/core.hpp"
#include "confdist/scps.hpp"

#include <vector>

namespace confdist {

/// K disjoint nonempty index blocks covering {0..n-1}, sizes as equal as
/// possible.
struct FoldPartition {
  std::vector<std::vector<std::size_t>> folds;

  int k() const { return static_cast<int>(folds.size()); }
  std::size_t total() const;
};

/// Deterministic contiguous blocks: fold k (1-based) holds the 1-based
/// indices ceil((k-1) n / K) + 1 .. ceil(k n / K). No randomization;
/// permute the dataset upstream when shuffled folds are wanted.
FoldPartition make_folds(std::size_t n, int num_folds);

/// Cross-conformal predictive system: one measure per fold, trained on the
/// fold's complement, with every training observation scored exactly once.
struct CcpsModel {
  FoldPartition partition;
  std::vector<TrainedMeasure> fold_measures;       // one per fold
  std::vector<std::vector<double>> fold_scores;    // a_{i,k}, fold order
  std::vector<double> label_min_max = {0.0, 0.0};  // for grid evaluation
  std::size_t n = 0;
};

/// Fits the K fold measures. `score_averaging_rounds` averages conformity
/// scores over repeated measure fits, a stabilizer for randomized
/// underlying algorithms (a no-op for the deterministic regressors here).
CcpsModel fit_ccps(const Dataset& train, int num_folds,
                   const ConformityMeasureSpec& spec,
                   int score_averaging_rounds = 1);

/// Aggregated transducer value with denominator n + 1.
double ccps_q(const CcpsModel& model, const Vector& x, double y, double tau);

/// Crisp variant: (1/n) sum_k |{a_{i,k} <= a^y_k}|.
double ccps_q_crisp(const CcpsModel& model, const Vector& x, double y);

/// Predictive distribution over the multiset union of per-fold inversions,
/// denominator n + 1; fuzzy evaluation coincides with ccps_q.
StepDistribution predict_ccps(const CcpsModel& model, const Vector& x);

/// Grid fallback mirroring scps_q_grid when inversion is unavailable.
GridCurve ccps_q_grid(const CcpsModel& model, const Vector& x, double tau,
                      std::size_t grid_size = 256);

/// Separate p-value of fold k (1-based), denominator |S_k| + 1.
double fold_p_value(const CcpsModel& model, int fold, const Vector& x,
                    double y, double tau);

/// Residual of the recombination identity expressing the aggregate p-value
/// as a weighted average of the per-fold p-values and tau; zero up to
/// machine precision.
double recombine_identity_residual(const CcpsModel& model, const Vector& x,
                                   double y, double tau);

/// Conservative adjustment min(2p, 1) yielding provably valid p-values.
double conservative_p(double p);

}  // namespace confdist

#endif  // CONFDIST_CCPS_HPP_
