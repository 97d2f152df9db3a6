#ifndef CONFDIST_METRICS_HPP_
#define CONFDIST_METRICS_HPP_

#include "confdist/core.hpp"

#include <functional>
#include <span>
#include <vector>

namespace confdist {

/// Proper piecewise-constant CDF: right-continuous, 0 at -inf, 1 at +inf.
/// `points` are the strictly increasing jump locations and `cum[i]` is the
/// value on [points[i], points[i+1]).
class StepCdf {
 public:
  StepCdf(std::vector<double> points, std::vector<double> cum);

  /// Builds from atom locations and masses; masses must sum to 1.
  static StepCdf from_atoms(std::span<const double> points,
                            std::span<const double> masses);

  double operator()(double u) const;
  std::span<const double> points() const { return points_; }
  std::span<const double> cum() const { return cum_; }

 private:
  std::vector<double> points_;
  std::vector<double> cum_;
};

/// Crisp modification of a fuzzy step distribution: equal masses 1/(D - 1)
/// on the jump points. Requires at least one jump.
StepCdf crisp_cdf(const StepDistribution& dist);

/// Exact continuous ranked probability score: the integral of
/// (F(y) - [y >= y_true])^2, summed in closed form over the segment
/// partition induced by the jumps and y_true. Zero iff F is the point
/// mass at y_true.
double crps_step(const StepCdf& cdf, double y_true);

/// Convenience wrapper that crisps the fuzzy distribution first.
double crps_step(const StepDistribution& dist, double y_true);

/// One predictive-system value Q((x_i, y_i), tau_i) per test observation.
std::vector<double> pit_values(
    const std::function<double(const Observation&, double)>& system,
    const Dataset& test, TauSource& taus);

struct CalibrationCurve {
  std::vector<double> alphas;         // grid in (0, 1), sorted
  std::vector<double> empirical_cdf;  // fraction of PIT values <= alpha
};

CalibrationCurve calibration_curve(std::span<const double> pit,
                                   std::vector<double> alphas);

/// Kolmogorov distance sup_u |F(u) - G(u)|, exact via the merged jump
/// lists.
double kolmogorov(const StepCdf& f, const StepCdf& g);

/// inf_c sup_u |F(u - c) - G(u)|. For step CDFs the optimal shift aligns
/// some jump of F with some jump of G, so the scan over that finite
/// candidate set is exact.
double kolmogorov_shift(const StepCdf& f, const StepCdf& g);

/// inf_{c, sigma > 0} sup_u |F((u - c) / sigma) - G(u)|. The shift is
/// optimized exactly per candidate scale; the scale search combines gap
/// ratios, a coarse grid, and golden-section refinement, so the result is
/// an upper bound within the documented 1e-6 refinement tolerance.
double kolmogorov_shift_scale(const StepCdf& f, const StepCdf& g);

}  // namespace confdist

#endif  // CONFDIST_METRICS_HPP_
