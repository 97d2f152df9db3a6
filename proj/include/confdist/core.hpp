#ifndef CONFDIST_CORE_HPP_
#define CONFDIST_CORE_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace confdist {

using Vector = Eigen::VectorXd;

/// One regression observation: a feature vector and a real label.
struct Observation {
  Vector x;
  double y = 0.0;
};

/// Ordered sequence of observations sharing a single feature dimension.
/// All entries are validated to be finite on insertion.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Observation> observations);

  void push_back(Observation obs);

  Eigen::Index feature_dim() const { return feature_dim_; }
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  auto begin() const { return observations_.begin(); }
  auto end() const { return observations_.end(); }

  /// Contiguous subsequence [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;
  /// Subsequence given by explicit indices, in the given order.
  Dataset select(std::span<const std::size_t> indices) const;

  std::vector<double> labels() const;

 private:
  std::vector<Observation> observations_;
  Eigen::Index feature_dim_ = 0;
};

/// Piecewise-constant predictive distribution: sorted jump points
/// C_(1) <= ... <= C_(N) with denominator D = N + 1. The sentinels
/// C_(0) = -inf and C_(N+1) = +inf are implicit; they are never stored
/// as floating-point values.
class StepDistribution {
 public:
  /// `jumps` must be sorted and finite; ties are kept as repeated entries.
  explicit StepDistribution(std::vector<double> jumps);

  std::span<const double> jumps() const { return jumps_; }
  int denominator() const { return static_cast<int>(jumps_.size()) + 1; }

 private:
  std::vector<double> jumps_;
};

/// Fuzzy evaluation at (y, tau): (i + tau) / D strictly between jumps,
/// (i' - 1 + (i'' - i' + 2) tau) / D at a jump, where i'/i'' delimit the
/// tie block containing y. Monotone in y for fixed tau and in tau for
/// fixed y; result in [0, 1].
double eval_fuzzy(const StepDistribution& dist, double y, double tau);

/// Crisp evaluation: i / (D - 1) with i the number of jumps <= y.
/// Requires at least one jump (D >= 2); independent of tau.
double eval_crisp(const StepDistribution& dist, double y);

/// Smallest y with eval_fuzzy(dist, y, tau) >= level (infimum if not
/// attained). Returns -inf/+inf at extreme levels. level must be in (0,1).
double quantile(const StepDistribution& dist, double level, double tau);

/// Deterministic stream of tau ~ U[0,1) draws. Single-owner mutable
/// state; split seeds per task for parallel prediction.
class TauSource {
 public:
  explicit TauSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    // 53 random bits -> uniform double in [0, 1); identical on every
    // platform for a given seed.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace confdist

#endif  // CONFDIST_CORE_HPP_
