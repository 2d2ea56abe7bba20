#ifndef UNIFOLD_FOLDING_HPP
#define UNIFOLD_FOLDING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "unifold/error.hpp"
#include "unifold/weighted_sample.hpp"

namespace unifold {

enum class PivotKind { Exact, Approximate };

inline std::string_view to_string(PivotKind kind) {
  return kind == PivotKind::Exact ? "exact" : "approximate";
}

/*
 * Result of folding a sample X around a pivot s.
 *
 *   folded_variance = Var|X - s|      (original scale)
 *   phi             = Var|X - s| / Var X
 *   sfr             = 4 * phi         (uniform reference ratio is 1/4)
 *
 * `gap` is the number of locations at or left of the pivot: g* for the
 * exact pivot (always in [1, k-1]) and g** for the approximate one (in
 * [0, k]).
 */
struct FoldingOutcome {
  double pivot = 0.0;
  double folded_variance = 0.0;
  double phi = 0.0;
  double sfr = 0.0;
  PivotKind pivot_kind = PivotKind::Exact;
  std::size_t gap = 0;
};

/// Var|X - pivot| by direct two-pass summation, clamped to [0, Var X].
inline double var_fold(const WeightedSample& s, double pivot) {
  const auto x = s.locations();
  const auto w = s.weights();
  double mean_abs = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_abs += w[i] * std::abs(x[i] - pivot);
    mean += w[i] * x[i];
  }
  double folded = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - pivot) - mean_abs;
    folded += w[i] * d * d;
    const double c = x[i] - mean;
    total += w[i] * c * c;
  }
  return std::clamp(folded, 0.0, total);
}

namespace detail {

// Folded variance of a standardized sample at s inside gap g, i.e. for
// s in [z_g, z_{g+1}]: 4 eta (1 - eta) s^2 + 4 (2 eta - 1) alpha s + 1 - 4 alpha^2.
inline double gap_parabola(double alpha, double eta, double s) {
  return 4.0 * eta * (1.0 - eta) * s * s + 4.0 * (2.0 * eta - 1.0) * alpha * s +
         1.0 - 4.0 * alpha * alpha;
}

// Unconstrained vertex of the gap parabola.
inline double gap_vertex(double alpha, double eta) {
  return 0.5 * alpha * (1.0 / eta - 1.0 / (1.0 - eta));
}

inline constexpr double kGapTieTolerance = 1e-12;

struct ExactSearch {
  double pivot = 0.0;  // standardized coordinates
  double folded_variance = std::numeric_limits<double>::infinity();
  std::size_t gap = 0;
};

// Minimizes the folded variance of a standardized sample gap by gap. Ties
// within kGapTieTolerance keep the smaller gap, hence the smaller pivot.
inline ExactSearch exact_search(const WeightedSample& z) {
  ExactSearch best;
  for (std::size_t g = 1; g < z.size(); ++g) {
    const double alpha = z.prefix_first_moment(g);
    const double eta = z.prefix_weight(g);
    const double s = std::clamp(gap_vertex(alpha, eta), z.location(g - 1),
                                z.location(g));
    const double v = gap_parabola(alpha, eta, s);
    if (v < best.folded_variance - kGapTieTolerance) {
      best = {s, v, g};
    }
  }
  best.folded_variance = std::clamp(best.folded_variance, 0.0, 1.0);
  return best;
}

}  // namespace detail

/// Exact folding pivot s* = argmin Var|X - s|, smallest minimizer on ties.
/// Runs in O(k) on the standardized sample and reports the pivot in the
/// original coordinates.
inline FoldingOutcome exact_pivot(const WeightedSample& s) {
  const Moments m = moments(s);
  if (!(m.variance > 0.0)) {
    throw DegenerateSample("zero variance");
  }
  const WeightedSample z = standardize(s);
  const auto best = detail::exact_search(z);
  FoldingOutcome out;
  out.pivot = m.mean + m.stddev() * best.pivot;
  // The parabola picks the gap; the value comes from a direct two-pass sum,
  // which keeps full relative accuracy when the minimum is near zero.
  out.phi = std::clamp(var_fold(z, best.pivot) / moments(z).variance, 0.0, 1.0);
  out.folded_variance = out.phi * m.variance;
  out.sfr = 4.0 * out.phi;
  out.pivot_kind = PivotKind::Exact;
  out.gap = best.gap;
  return out;
}

/// Approximate pivot s** = Cov(X, X^2) / (2 Var X), the minimizer of
/// Var (X - s)^2.
inline FoldingOutcome approximate_pivot(const WeightedSample& s) {
  const Moments m = moments(s);
  if (!(m.variance > 0.0)) {
    throw DegenerateSample("zero variance");
  }
  const WeightedSample z = standardize(s);
  const Moments mz = moments(z);
  const double pivot_std = 0.5 * mz.third_raw;

  FoldingOutcome out;
  out.pivot = m.mean + m.stddev() * pivot_std;
  out.phi = var_fold(z, pivot_std) / mz.variance;
  out.folded_variance = out.phi * m.variance;
  out.sfr = 4.0 * out.phi;
  out.pivot_kind = PivotKind::Approximate;
  const auto loc = z.locations();
  out.gap = static_cast<std::size_t>(
      std::upper_bound(loc.begin(), loc.end(), pivot_std) - loc.begin());
  return out;
}

inline FoldingOutcome folding_outcome(const WeightedSample& s, PivotKind kind) {
  return kind == PivotKind::Exact ? exact_pivot(s) : approximate_pivot(s);
}

/// The distribution of |X - pivot|; coinciding images are merged.
inline WeightedSample fold(const WeightedSample& s, double pivot) {
  std::vector<PointMass> points;
  points.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    points.push_back({std::abs(s.location(i) - pivot), s.weight(i)});
  }
  return WeightedSample::from_points(std::move(points));
}

}  // namespace unifold

#endif  // UNIFOLD_FOLDING_HPP
