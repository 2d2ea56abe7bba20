#ifndef UNIFOLD_GAUSSIAN_MIXTURE_HPP
#define UNIFOLD_GAUSSIAN_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "unifold/error.hpp"
#include "unifold/golden_section.hpp"
#include "unifold/normal.hpp"
#include "unifold/weighted_sample.hpp"

namespace unifold {

struct GaussianComponent {
  double weight;
  double mean;
  double variance;  // 0 is a Dirac component
};

/*
 * Finite mixture of univariate normals sum_i w_i N(mu_i, sigma_i^2).
 * Weights are normalized at construction. Total variance splits into the
 * between-variance of the means and the within-variance W = sum w_i sigma_i^2.
 */
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components)
      : components_(std::move(components)) {
    if (components_.empty()) {
      throw InvalidParameter("gaussian mixture needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components_) {
      if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
        throw InvalidWeight("component weight must be positive");
      }
      if (!(c.variance >= 0.0) || !std::isfinite(c.variance)) {
        throw InvalidParameter("component variance must be nonnegative");
      }
      if (!std::isfinite(c.mean)) {
        throw InvalidParameter("component mean must be finite");
      }
      total += c.weight;
    }
    for (auto& c : components_) {
      c.weight /= total;
    }
  }

  const std::vector<GaussianComponent>& components() const noexcept {
    return components_;
  }
  std::size_t size() const noexcept { return components_.size(); }

  double mean() const {
    double m = 0.0;
    for (const auto& c : components_) m += c.weight * c.mean;
    return m;
  }

  double within_variance() const {
    double w = 0.0;
    for (const auto& c : components_) w += c.weight * c.variance;
    return w;
  }

  double between_variance() const {
    const double m = mean();
    double b = 0.0;
    for (const auto& c : components_) b += c.weight * (c.mean - m) * (c.mean - m);
    return b;
  }

  double variance() const { return between_variance() + within_variance(); }

  /// 1 / W; empty when every component is a Dirac mass.
  std::optional<double> snr() const {
    const double w = within_variance();
    if (w == 0.0) return std::nullopt;
    return 1.0 / w;
  }

  /// E[X^3] from the component moments mu^3 + 3 mu sigma^2.
  double third_raw_moment() const {
    double t = 0.0;
    for (const auto& c : components_) {
      t += c.weight * (c.mean * c.mean * c.mean + 3.0 * c.mean * c.variance);
    }
    return t;
  }

  double second_raw_moment() const {
    double t = 0.0;
    for (const auto& c : components_) {
      t += c.weight * (c.mean * c.mean + c.variance);
    }
    return t;
  }

  /// Same means and weights, every component variance set to `variance`.
  GaussianMixture with_common_variance(double variance) const {
    auto comps = components_;
    for (auto& c : comps) c.variance = variance;
    return GaussianMixture(std::move(comps));
  }

  /// Dirac mixture at the component means (variances dropped).
  WeightedSample dirac_limit() const {
    std::vector<PointMass> points;
    for (const auto& c : components_) points.push_back({c.mean, c.weight});
    return WeightedSample::from_points(std::move(points));
  }

 private:
  std::vector<GaussianComponent> components_;
};

/*
 * Standardized folding ratio at pivot s:
 *   4 Var|X - s| / Var X,
 *   Var|X - s| = Var X + (E X - s)^2 - (sum_i w_i h(mu_i, sigma_i, s))^2
 * with h the folded-normal mean. On a standardized mixture this is the
 * usual 4 Var|X - s|.
 */
inline double gaussian_phi(const GaussianMixture& m, double s) {
  const double var = m.variance();
  if (!(var > 0.0)) {
    throw DegenerateSample("gaussian mixture has zero variance");
  }
  double mean_abs = 0.0;
  for (const auto& c : m.components()) {
    mean_abs += c.weight * folded_normal_mean(c.mean, std::sqrt(c.variance), s);
  }
  const double shift = m.mean() - s;
  const double folded = var + shift * shift - mean_abs * mean_abs;
  return 4.0 * std::clamp(folded, 0.0, var) / var;
}

struct GaussianSfr {
  double sfr;
  double pivot;
};

inline constexpr double kGaussianPivotTolerance = 1e-10;

/*
 * Exact SFR by multi-start bounded minimization of gaussian_phi: one
 * golden-section search per interval between consecutive distinct means plus
 * the outer brackets [mu_1 - 3 sigma_max, mu_1] and [mu_k, mu_k + 3 sigma_max].
 * Each bracket is pre-scanned on a coarse grid and the golden section runs
 * around the best grid node. Ties keep the smallest pivot.
 */
inline GaussianSfr gaussian_sfr_exact(const GaussianMixture& m) {
  if (!(m.variance() > 0.0)) {
    throw DegenerateSample("gaussian mixture has zero variance");
  }
  std::vector<double> means;
  double sd_max = 0.0;
  for (const auto& c : m.components()) {
    means.push_back(c.mean);
    sd_max = std::max(sd_max, std::sqrt(c.variance));
  }
  std::sort(means.begin(), means.end());
  means.erase(std::unique(means.begin(), means.end()), means.end());

  std::vector<std::pair<double, double>> brackets;
  if (sd_max > 0.0) {
    brackets.emplace_back(means.front() - 3.0 * sd_max, means.front());
  }
  for (std::size_t i = 0; i + 1 < means.size(); ++i) {
    brackets.emplace_back(means[i], means[i + 1]);
  }
  if (sd_max > 0.0) {
    brackets.emplace_back(means.back(), means.back() + 3.0 * sd_max);
  }

  const auto phi = [&m](double s) { return gaussian_phi(m, s); };
  constexpr int kScan = 16;
  std::optional<GaussianSfr> best;
  for (const auto& [lo, hi] : brackets) {
    const double h = (hi - lo) / kScan;
    int best_node = 0;
    double best_value = phi(lo);
    for (int i = 1; i <= kScan; ++i) {
      const double v = phi(lo + i * h);
      if (v < best_value) {
        best_value = v;
        best_node = i;
      }
    }
    const double a = std::max(lo, lo + (best_node - 1) * h);
    const double b = std::min(hi, lo + (best_node + 1) * h);
    const ScalarMinimum local =
        golden_section_minimize(phi, a, b, kGaussianPivotTolerance);
    if (!best || local.value < best->sfr - 1e-14) {
      best = GaussianSfr{local.value, local.x};
    }
  }
  return *best;
}

/// Approximate pivot Cov(X, X^2) / (2 Var X) from the analytic mixture
/// moments, with the SFR evaluated there.
inline GaussianSfr gaussian_sfr_approx(const GaussianMixture& m) {
  const double var = m.variance();
  if (!(var > 0.0)) {
    throw DegenerateSample("gaussian mixture has zero variance");
  }
  const double mean = m.mean();
  const double cov = m.third_raw_moment() - mean * m.second_raw_moment();
  const double pivot = cov / (2.0 * var);
  return {gaussian_phi(m, pivot), pivot};
}

inline constexpr double kCrossingTolerance = 1e-4;

/*
 * Bisection on the common variance v of `family` (all components set to
 * N(mu_i, v)) for gaussian_sfr_exact == 1. Requires SFR(lo) < 1 < SFR(hi).
 */
inline double find_sfr_crossing(const GaussianMixture& family, double lo, double hi,
                                double tolerance = kCrossingTolerance) {
  if (!(lo >= 0.0) || !(hi > lo)) {
    throw InvalidParameter("crossing bracket must satisfy 0 <= lo < hi");
  }
  const auto excess = [&family](double v) {
    return gaussian_sfr_exact(family.with_common_variance(v)).sfr - 1.0;
  };
  const double f_lo = excess(lo);
  const double f_hi = excess(hi);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    throw NoCrossing("SFR(" + std::to_string(lo) + ") - 1 = " + std::to_string(f_lo) +
                     ", SFR(" + std::to_string(hi) + ") - 1 = " + std::to_string(f_hi));
  }
  while (hi - lo >= tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace unifold

#endif  // UNIFOLD_GAUSSIAN_MIXTURE_HPP
