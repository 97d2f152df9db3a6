#include "confdist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace confdist {

StepCdf::StepCdf(std::vector<double> points, std::vector<double> cum)
    : points_(std::move(points)), cum_(std::move(cum)) {
  if (points_.empty() || points_.size() != cum_.size()) {
    throw std::invalid_argument("StepCdf needs matching nonempty arrays");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) {
      throw std::invalid_argument("StepCdf points must be finite");
    }
    if (i > 0 && points_[i] <= points_[i - 1]) {
      throw std::invalid_argument("StepCdf points must be strictly increasing");
    }
    if (cum_[i] < (i > 0 ? cum_[i - 1] : 0.0)) {
      throw std::invalid_argument("StepCdf values must be nondecreasing");
    }
  }
  if (std::abs(cum_.back() - 1.0) > 1e-9) {
    throw std::runtime_error("improper distribution");
  }
  cum_.back() = 1.0;
}

StepCdf StepCdf::from_atoms(std::span<const double> points,
                            std::span<const double> masses) {
  if (points.size() != masses.size() || points.empty()) {
    throw std::invalid_argument("atoms need matching nonempty arrays");
  }
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a] < points[b];
  });
  std::vector<double> sorted_points;
  std::vector<double> cum;
  double running = 0.0;
  for (std::size_t i : order) {
    if (masses[i] < 0.0) {
      throw std::invalid_argument("atom masses must be nonnegative");
    }
    running += masses[i];
    if (!sorted_points.empty() && sorted_points.back() == points[i]) {
      cum.back() = running;
    } else {
      sorted_points.push_back(points[i]);
      cum.push_back(running);
    }
  }
  return StepCdf(std::move(sorted_points), std::move(cum));
}

double StepCdf::operator()(double u) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), u);
  if (it == points_.begin()) {
    return 0.0;
  }
  return cum_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

StepCdf crisp_cdf(const StepDistribution& dist) {
  const auto jumps = dist.jumps();
  if (jumps.empty()) {
    throw std::runtime_error("no calibration points");
  }
  const auto total = static_cast<double>(jumps.size());
  std::vector<double> points;
  std::vector<double> cum;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (!points.empty() && points.back() == jumps[i]) {
      cum.back() = static_cast<double>(i + 1) / total;
    } else {
      points.push_back(jumps[i]);
      cum.push_back(static_cast<double>(i + 1) / total);
    }
  }
  return StepCdf(std::move(points), std::move(cum));
}

double crps_step(const StepCdf& cdf, double y_true) {
  if (!std::isfinite(y_true)) {
    throw std::invalid_argument("y_true must be finite");
  }
  // Integrate over the partition induced by the jump points and y_true;
  // both tails contribute zero.
  std::vector<double> cuts(cdf.points().begin(), cdf.points().end());
  cuts.insert(std::lower_bound(cuts.begin(), cuts.end(), y_true), y_true);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double width = cuts[i + 1] - cuts[i];
    if (width == 0.0) continue;
    const double level = cdf(cuts[i]);
    const double indicator = cuts[i] >= y_true ? 1.0 : 0.0;
    const double diff = level - indicator;
    total += diff * diff * width;
  }
  return total;
}

double crps_step(const StepDistribution& dist, double y_true) {
  return crps_step(crisp_cdf(dist), y_true);
}

std::vector<double> pit_values(
    const std::function<double(const Observation&, double)>& system,
    const Dataset& test, TauSource& taus) {
  std::vector<double> out;
  out.reserve(test.size());
  for (const auto& obs : test) {
    out.push_back(system(obs, taus.next()));
  }
  return out;
}

CalibrationCurve calibration_curve(std::span<const double> pit,
                                   std::vector<double> alphas) {
  if (pit.empty()) {
    throw std::invalid_argument("empty PIT sample");
  }
  if (!std::is_sorted(alphas.begin(), alphas.end())) {
    throw std::invalid_argument("alpha grid must be sorted");
  }
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("alpha grid must lie in (0, 1)");
    }
  }
  std::vector<double> sorted(pit.begin(), pit.end());
  std::sort(sorted.begin(), sorted.end());
  CalibrationCurve curve;
  curve.alphas = std::move(alphas);
  curve.empirical_cdf.reserve(curve.alphas.size());
  for (double a : curve.alphas) {
    const auto count =
        std::upper_bound(sorted.begin(), sorted.end(), a) - sorted.begin();
    curve.empirical_cdf.push_back(static_cast<double>(count) /
                                  static_cast<double>(sorted.size()));
  }
  return curve;
}

namespace {

// sup_u |F((u - c) / sigma) - G(u)| via a two-pointer walk over the merged
// jump coordinates. The transformed F jumps at c + sigma * f_j.
double sup_distance_transformed(const StepCdf& f, const StepCdf& g, double c,
                                double sigma) {
  const auto fp = f.points();
  const auto fc = f.cum();
  const auto gp = g.points();
  const auto gc = g.cum();
  std::size_t i = 0;
  std::size_t j = 0;
  double level_f = 0.0;
  double level_g = 0.0;
  double best = 0.0;
  while (i < fp.size() || j < gp.size()) {
    const double a = i < fp.size() ? c + sigma * fp[i]
                                   : std::numeric_limits<double>::infinity();
    const double b = j < gp.size() ? gp[j]
                                   : std::numeric_limits<double>::infinity();
    if (a <= b) {
      level_f = fc[i];
      ++i;
    }
    if (b <= a) {
      level_g = gc[j];
      ++j;
    }
    best = std::max(best, std::abs(level_f - level_g));
  }
  return best;
}

double best_shift_at_scale(const StepCdf& f, const StepCdf& g, double sigma) {
  // The optimal shift aligns a transformed jump of F with a jump of G;
  // between alignments the sup is constant and at least as large.
  double best = std::numeric_limits<double>::infinity();
  for (double fpoint : f.points()) {
    for (double gpoint : g.points()) {
      const double c = gpoint - sigma * fpoint;
      best = std::min(best, sup_distance_transformed(f, g, c, sigma));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

}  // namespace

double kolmogorov(const StepCdf& f, const StepCdf& g) {
  return sup_distance_transformed(f, g, 0.0, 1.0);
}

double kolmogorov_shift(const StepCdf& f, const StepCdf& g) {
  return best_shift_at_scale(f, g, 1.0);
}

double kolmogorov_shift_scale(const StepCdf& f, const StepCdf& g) {
  const auto fp = f.points();
  const auto gp = g.points();

  std::set<double> scales;
  scales.insert(1.0);
  // Index-matched consecutive-gap ratios recover an exact affine match
  // when one exists (both CDFs then have equally many jumps).
  if (fp.size() == gp.size()) {
    for (std::size_t i = 0; i + 1 < fp.size(); ++i) {
      const double gap_f = fp[i + 1] - fp[i];
      const double gap_g = gp[i + 1] - gp[i];
      if (gap_f > 0.0 && gap_g > 0.0) {
        scales.insert(gap_g / gap_f);
      }
    }
  }
  const double span_f = fp.back() - fp.front();
  const double span_g = gp.back() - gp.front();
  if (span_f > 0.0 && span_g > 0.0) {
    const double base = span_g / span_f;
    for (int t = -8; t <= 8; ++t) {
      scales.insert(base * std::pow(2.0, 0.5 * t));
    }
  }

  double best = std::numeric_limits<double>::infinity();
  double best_scale = 1.0;
  for (double sigma : scales) {
    const double value = best_shift_at_scale(f, g, sigma);
    if (value < best) {
      best = value;
      best_scale = sigma;
    }
    if (best == 0.0) return 0.0;
  }

  // Golden-section refinement around the best scale. The objective is
  // piecewise constant in sigma, so this only tightens plateaus.
  double lo = best_scale * 0.5;
  double hi = best_scale * 2.0;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = best_shift_at_scale(f, g, x1);
  double f2 = best_shift_at_scale(f, g, x2);
  for (int it = 0; it < 40 && (hi - lo) > 1e-6 * best_scale; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = best_shift_at_scale(f, g, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = best_shift_at_scale(f, g, x2);
    }
    best = std::min({best, f1, f2});
  }
  return best;
}

}  // namespace confdist
