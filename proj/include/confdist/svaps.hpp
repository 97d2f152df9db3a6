#ifndef CONFDIST_SVAPS_HPP_
#define CONFDIST_SVAPS_HPP_

#include "confdist/core.hpp"
#include "confdist/regressors.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace confdist {

struct WeightedPoint {
  double s = 0.0;       // abscissa
  double target = 0.0;  // regression target
  double weight = 1.0;  // strictly positive
};

/// Monotone (nondecreasing) step fit: distinct sorted abscissas with their
/// fitted levels; each level is the weighted mean of its pooled block.
struct IsotonicFit {
  std::vector<double> breakpoints;
  std::vector<double> levels;

  /// Left-constant extension between breakpoints; the first level below
  /// the leftmost breakpoint.
  double at(double s) const;
};

/// Pool-adjacent-violators solver for weighted isotonic least squares.
/// Points sharing an abscissa are merged (weighted mean) before pooling.
/// Returns the unique minimizer among monotonically increasing functions.
IsotonicFit pava(std::span<const WeightedPoint> points);

enum class SvapsType { type1 = 1, type2 = 2, type3 = 3 };

/// Split Venn-Abers predictive system configuration. The type selects
/// which of the n scored observations enter the isotonic fit: the
/// calibration part (type 1), the proper part (type 2), or all (type 3).
struct SvapsConfig {
  SvapsType type = SvapsType::type1;
  RegressorSpec regressor;
  std::size_t proper_size = 0;  // m
};

/// Core evaluation on precomputed regressor scores s_1..s_n. Binarizes the
/// labels against y, fits the isotonic regression extended by (s, tau),
/// and returns the Venn-Abers fraction. tau must be 0 or 1. For type 2 the
/// fit covers only the proper part and queries are mapped through the
/// nearest scored proper object (ties to the smallest index).
double svaps_q_from_scores(std::span<const double> scores,
                           std::span<const double> labels, std::size_t m,
                           SvapsType type, double s, double y, int tau);

/// Convenience wrapper: trains config.regressor on the first m
/// observations, scores everything, and delegates to svaps_q_from_scores.
double svaps_q(const SvapsConfig& config, const Dataset& train,
               const Vector& x, double y, int tau);

struct SvapsBand {
  std::vector<double> lower;  // tau = 0
  std::vector<double> upper;  // tau = 1
};

/// Lower/upper predictive curves over a sorted label grid; both are
/// monotone in y and lower <= upper pointwise.
SvapsBand svaps_band(const SvapsConfig& config, const Dataset& train,
                     const Vector& x, std::span<const double> y_grid);

struct Example1Weights {
  std::array<double, 3> at_x0;  // masses on {-1, 0, 1} for test object 0
  std::array<double, 3> at_x1;  // masses on {-1, 0, 1} for test object 1
};

/// Samples the two-class mixture (x = 0 -> y = 0; x = 1 -> y = +-1) and
/// runs the type-1 system with the constant-per-class scorer A(., 0) = a0,
/// A(., 1) = a1, recovering the three atom masses of the asymptotic
/// predictive distribution at both test objects.
Example1Weights example1_asymptotics(std::size_t n_calibration, double a0,
                                     double a1, std::uint64_t seed);

}  // namespace confdist

#endif  // CONFDIST_SVAPS_HPP_
