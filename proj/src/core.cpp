#include "confdist/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace confdist {

namespace {

void validate_observation(const Observation& obs, Eigen::Index expected_dim) {
  if (obs.x.size() == 0) {
    throw std::invalid_argument("observation has an empty feature vector");
  }
  if (expected_dim != 0 && obs.x.size() != expected_dim) {
    throw std::invalid_argument("observation feature dimension mismatch");
  }
  if (!obs.x.allFinite() || !std::isfinite(obs.y)) {
    throw std::invalid_argument("observation has non-finite entries");
  }
}

}  // namespace

Dataset::Dataset(std::vector<Observation> observations) {
  for (auto& obs : observations) {
    push_back(std::move(obs));
  }
  observations_.shrink_to_fit();
}

void Dataset::push_back(Observation obs) {
  validate_observation(obs, feature_dim_);
  if (observations_.empty()) {
    feature_dim_ = obs.x.size();
  }
  observations_.push_back(std::move(obs));
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > observations_.size()) {
    throw std::out_of_range("dataset slice out of range");
  }
  Dataset out;
  for (std::size_t i = first; i < first + count; ++i) {
    out.push_back(observations_[i]);
  }
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out;
  for (std::size_t i : indices) {
    out.push_back(observations_.at(i));
  }
  return out;
}

std::vector<double> Dataset::labels() const {
  std::vector<double> out;
  out.reserve(observations_.size());
  for (const auto& obs : observations_) {
    out.push_back(obs.y);
  }
  return out;
}

StepDistribution::StepDistribution(std::vector<double> jumps)
    : jumps_(std::move(jumps)) {
  if (!std::is_sorted(jumps_.begin(), jumps_.end())) {
    throw std::invalid_argument("jump points must be sorted");
  }
  for (double c : jumps_) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument("jump points must be finite");
    }
  }
}

double eval_fuzzy(const StepDistribution& dist, double y, double tau) {
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("tau must lie in [0, 1]");
  }
  const auto jumps = dist.jumps();
  const double denom = dist.denominator();
  const auto [first, last] = std::equal_range(jumps.begin(), jumps.end(), y);
  if (first == last) {
    // Strictly between C_(i) and C_(i+1): i jumps lie below y.
    const auto below = static_cast<double>(first - jumps.begin());
    return (below + tau) / denom;
  }
  // y coincides with a tie block C_(i') = ... = C_(i''), 1-based.
  const auto i_lo = static_cast<double>(first - jumps.begin()) + 1.0;
  const auto i_hi = static_cast<double>(last - jumps.begin());
  return (i_lo - 1.0 + (i_hi - i_lo + 2.0) * tau) / denom;
}

double eval_crisp(const StepDistribution& dist, double y) {
  const auto jumps = dist.jumps();
  if (jumps.empty()) {
    throw std::runtime_error("no calibration points");
  }
  const auto count =
      std::upper_bound(jumps.begin(), jumps.end(), y) - jumps.begin();
  return static_cast<double>(count) / static_cast<double>(jumps.size());
}

double quantile(const StepDistribution& dist, double level, double tau) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  }
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("tau must lie in [0, 1]");
  }
  const auto jumps = dist.jumps();
  const double denom = dist.denominator();
  // Smallest segment index i in {0..N} whose plateau (i + tau)/D reaches
  // the level; the segment (C_(i), C_(i+1)) starts at C_(i).
  const double needed = level * denom - tau;
  const auto i = static_cast<long>(std::ceil(needed));
  if (i <= 0) {
    return -std::numeric_limits<double>::infinity();
  }
  if (i > static_cast<long>(jumps.size())) {
    return std::numeric_limits<double>::infinity();
  }
  return jumps[static_cast<std::size_t>(i - 1)];
}

}  // namespace confdist
