#ifndef UNIFOLD_DIRAC_MIXTURE_HPP
#define UNIFOLD_DIRAC_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "unifold/error.hpp"
#include "unifold/folding.hpp"
#include "unifold/weighted_sample.hpp"

namespace unifold {

/// Closed-form SFR of a Dirac mixture. `gap` is g* (exact) or g** (approx),
/// `pivot` is in the original coordinates of the mixture.
struct DiracSfr {
  double sfr = 0.0;
  std::size_t gap = 0;
  double pivot = 0.0;
  double alpha = 0.0;  // standardized alpha_gap (0 when gap is 0 or k)
  double eta = 0.0;    // eta_gap (0 or 1 when gap is 0 or k)
};

/*
 * Exact SFR through the closed form 4 (1 - alpha^2 / (eta (1 - eta))).
 *
 * The global minimizer of Var|X - s| always sits at an unclamped gap vertex
 * s_g, so g* is chosen among the gaps whose vertex lies inside
 * [mu_g, mu_{g+1}] as the one maximizing alpha_g^2 / (eta_g (1 - eta_g)).
 * This never evaluates the folded variance itself, which makes it an
 * independent route from exact_pivot().
 */
inline DiracSfr dirac_sfr_exact(const WeightedSample& mixture) {
  const Moments m = moments(mixture);
  const WeightedSample z = standardize(mixture);
  std::optional<DiracSfr> best;
  double best_score = 0.0;
  for (std::size_t g = 1; g < z.size(); ++g) {
    const double alpha = z.prefix_first_moment(g);
    const double eta = z.prefix_weight(g);
    const double s = detail::gap_vertex(alpha, eta);
    if (s < z.location(g - 1) || s > z.location(g)) {
      continue;
    }
    const double score = alpha * alpha / (eta * (1.0 - eta));
    if (!best || score > best_score + 0.25 * detail::kGapTieTolerance) {
      best_score = score;
      best = DiracSfr{4.0 * (1.0 - score), g, m.mean + m.stddev() * s, alpha, eta};
    }
  }
  if (!best) {
    // Unreachable for valid mixtures (vertices are strictly increasing and
    // bracket the minimizer); kept as an explicit failure.
    throw InvalidParameter("no interior gap vertex found");
  }
  best->sfr = std::max(best->sfr, 0.0);
  return *best;
}

/*
 * Approximate SFR through the closed form
 *   4 (1 - 4 alpha^2 - 2 alpha (1 - 2 eta) gamma + eta (1 - eta) gamma^2)
 * with g** = #{mu_i <= gamma / 2}. When s** falls outside [mu_1, mu_k] the
 * formula does not apply and the folded variance is evaluated directly.
 */
inline DiracSfr dirac_sfr_approx(const WeightedSample& mixture) {
  const Moments m = moments(mixture);
  const WeightedSample z = standardize(mixture);
  const double gamma = moments(z).third_raw;
  const double s = 0.5 * gamma;
  const auto loc = z.locations();
  const auto g = static_cast<std::size_t>(
      std::upper_bound(loc.begin(), loc.end(), s) - loc.begin());

  DiracSfr out;
  out.gap = g;
  out.pivot = m.mean + m.stddev() * s;
  if (g >= 1 && g <= z.size() - 1) {
    const double alpha = z.prefix_first_moment(g);
    const double eta = z.prefix_weight(g);
    out.alpha = alpha;
    out.eta = eta;
    out.sfr = 4.0 * (1.0 - 4.0 * alpha * alpha -
                     2.0 * alpha * (1.0 - 2.0 * eta) * gamma +
                     eta * (1.0 - eta) * gamma * gamma);
    out.sfr = std::max(out.sfr, 0.0);
  } else {
    out.eta = g == 0 ? 0.0 : 1.0;
    out.sfr = 4.0 * var_fold(z, s);
  }
  return out;
}

/// Exact-pivot failure (Phi* >= 1): alpha inside the ellipse band
/// [-(sqrt 3 / 2) sqrt(eta (1 - eta)), 0]. The boundary counts as failure.
inline bool exact_failure_predicate(double alpha_g, double eta_g) {
  if (!(eta_g > 0.0 && eta_g < 1.0)) {
    throw InvalidParameter("eta must lie in (0, 1)");
  }
  if (alpha_g > 0.0) {
    throw InvalidParameter("alpha must be nonpositive on a standardized mixture");
  }
  return alpha_g >= -(std::sqrt(3.0) / 2.0) * std::sqrt(eta_g * (1.0 - eta_g));
}

/// Signed distance-like expression whose sign decides approximate-pivot
/// failure; zero on the line Phi** = 1.
inline double approx_failure_margin(double alpha_g, double eta_g, double gamma) {
  return 4.0 * alpha_g - (2.0 * eta_g - 1.0) * gamma + std::sqrt(gamma * gamma + 3.0);
}

/// Approximate-pivot failure (Phi** >= 1).
inline bool approx_failure_predicate(double alpha_g, double eta_g, double gamma) {
  return approx_failure_margin(alpha_g, eta_g, gamma) >= 0.0;
}

struct FailureVerdict {
  bool exact_fails = false;
  bool approx_fails = false;
  std::size_t g_star = 0;
  std::size_t g_double_star = 0;
  double alpha_g = 0.0;          // standardized alpha at g*
  double eta_g = 0.0;            // eta at g*
  double alpha_g_approx = 0.0;   // standardized alpha at g**
  double eta_g_approx = 0.0;     // eta at g**
  double gamma = 0.0;
  double ellipse_residual = 0.0;  // alpha^2/(3/16) + (eta - 1/2)^2/(1/4) - 1
  double line_residual = 0.0;     // approx_failure_margin at g**
};

inline FailureVerdict failure_verdict(const WeightedSample& mixture) {
  const WeightedSample z = standardize(mixture);
  const DiracSfr exact = dirac_sfr_exact(mixture);
  const DiracSfr approx = dirac_sfr_approx(mixture);

  FailureVerdict v;
  v.g_star = exact.gap;
  v.g_double_star = approx.gap;
  v.alpha_g = std::min(exact.alpha, 0.0);
  v.eta_g = exact.eta;
  v.alpha_g_approx = approx.alpha;
  v.eta_g_approx = approx.eta;
  v.gamma = moments(z).third_raw;
  v.exact_fails = exact_failure_predicate(v.alpha_g, v.eta_g);
  v.ellipse_residual = v.alpha_g * v.alpha_g / (3.0 / 16.0) +
                       (v.eta_g - 0.5) * (v.eta_g - 0.5) / 0.25 - 1.0;
  if (approx.gap >= 1 && approx.gap < z.size()) {
    v.line_residual = approx_failure_margin(approx.alpha, approx.eta, v.gamma);
    v.approx_fails = v.line_residual >= 0.0;
  } else {
    // Pivot outside the support: |X - s| is an affine image of X, Phi** = 4.
    v.line_residual = 0.0;
    v.approx_fails = true;
  }
  return v;
}

}  // namespace unifold

#endif  // UNIFOLD_DIRAC_MIXTURE_HPP
