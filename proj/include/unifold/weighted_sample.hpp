#ifndef UNIFOLD_WEIGHTED_SAMPLE_HPP
#define UNIFOLD_WEIGHTED_SAMPLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unifold/error.hpp"

namespace unifold {

struct PointMass {
  double location;
  double weight;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double third_central = 0.0;
  double third_raw = 0.0;

  double stddev() const { return std::sqrt(variance); }
};

/*
 * A finite distribution of point masses: sorted distinct locations with
 * positive weights summing to one. Empirical data enters as equal weights
 * 1/n; Dirac mixtures enter with their proportions. Exact duplicates are
 * merged at construction (no tolerance), which keeps the piecewise
 * structure of the folded variance exact.
 *
 * Prefix sums are cached for g = 1..k-1:
 *   prefix_first_moment(g) = sum_{i<=g} w_i x_i
 *   prefix_weight(g)       = sum_{i<=g} w_i
 */
class WeightedSample {
 public:
  static WeightedSample from_points(std::vector<PointMass> points) {
    if (points.empty()) {
      throw DegenerateSample("no points");
    }
    double total = 0.0;
    for (const auto& p : points) {
      if (!std::isfinite(p.location)) {
        throw InvalidParameter("non-finite location");
      }
      if (!(p.weight > 0.0) || !std::isfinite(p.weight)) {
        throw InvalidWeight("weights must be positive and finite, got " +
                            std::to_string(p.weight));
      }
      total += p.weight;
    }
    std::sort(points.begin(), points.end(),
              [](const PointMass& a, const PointMass& b) {
                return a.location < b.location;
              });
    for (auto& p : points) {
      p.weight /= total;
    }
    return from_sorted(points);
  }

  /// Equal-weight sample from raw observations.
  static WeightedSample from_data(std::span<const double> data) {
    std::vector<PointMass> points;
    points.reserve(data.size());
    for (double x : data) {
      points.push_back({x, 1.0});
    }
    return from_points(std::move(points));
  }

  std::size_t size() const noexcept { return locations_.size(); }
  std::span<const double> locations() const noexcept { return locations_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double location(std::size_t i) const { return locations_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// alpha_g for g in [1, k-1].
  double prefix_first_moment(std::size_t g) const { return alpha_[g - 1]; }
  /// eta_g for g in [1, k-1].
  double prefix_weight(std::size_t g) const { return eta_[g - 1]; }

  /// Affine image a*x + b (a != 0); order is reversed for a < 0.
  WeightedSample affine(double a, double b) const {
    if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
      throw InvalidParameter("affine map needs finite nonzero slope");
    }
    return transformed([a, b](double x) { return a * x + b; }, a < 0.0);
  }

  /// Image under a strictly monotone map f; `reverses` flags a decreasing f.
  /// Locations that collide after rounding are merged.
  template <typename Map>
  WeightedSample transformed(Map&& f, bool reverses) const {
    std::vector<PointMass> points(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const std::size_t j = reverses ? size() - 1 - i : i;
      points[i] = {f(locations_[j]), weights_[j]};
    }
    return from_sorted(points);
  }

 private:
  WeightedSample() = default;

  // `points` sorted ascending with valid weights already summing to ~1.
  static WeightedSample from_sorted(std::span<const PointMass> points) {
    WeightedSample s;
    s.locations_.reserve(points.size());
    s.weights_.reserve(points.size());
    double total = 0.0;
    for (const auto& p : points) {
      if (!s.locations_.empty() && s.locations_.back() == p.location) {
        s.weights_.back() += p.weight;
      } else {
        s.locations_.push_back(p.location);
        s.weights_.push_back(p.weight);
      }
      total += p.weight;
    }
    if (s.locations_.size() < 2) {
      throw DegenerateSample("all locations identical (zero variance)");
    }
    for (auto& w : s.weights_) {
      w /= total;
    }
    s.build_prefix();
    return s;
  }

  void build_prefix() {
    const std::size_t k = locations_.size();
    alpha_.assign(k - 1, 0.0);
    eta_.assign(k - 1, 0.0);
    double a = 0.0;
    double e = 0.0;
    for (std::size_t g = 0; g + 1 < k; ++g) {
      a += weights_[g] * locations_[g];
      e += weights_[g];
      alpha_[g] = a;
      eta_[g] = e;
    }
  }

  std::vector<double> locations_;
  std::vector<double> weights_;
  std::vector<double> alpha_;
  std::vector<double> eta_;
};

inline WeightedSample build_sample(std::vector<PointMass> points) {
  return WeightedSample::from_points(std::move(points));
}

/// Exact weighted moments (two-pass for the central ones).
inline Moments moments(const WeightedSample& s) {
  Moments m;
  const auto x = s.locations();
  const auto w = s.weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mean += w[i] * x[i];
    m.third_raw += w[i] * x[i] * x[i] * x[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - m.mean;
    m.variance += w[i] * d * d;
    m.third_central += w[i] * d * d * d;
  }
  return m;
}

/// Returns the sample rescaled to mean 0 and variance 1.
inline WeightedSample standardize(const WeightedSample& s) {
  const Moments m = moments(s);
  if (!(m.variance > 0.0)) {
    throw DegenerateSample("zero variance");
  }
  const double sd = m.stddev();
  const double mean = m.mean;
  return s.transformed([mean, sd](double x) { return (x - mean) / sd; }, false);
}

}  // namespace unifold

#endif  // UNIFOLD_WEIGHTED_SAMPLE_HPP
