#ifndef UNIFOLD_PROP_VERIFY_HPP
#define UNIFOLD_PROP_VERIFY_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifold/dirac_mixture.hpp"
#include "unifold/error.hpp"
#include "unifold/folding.hpp"
#include "unifold/golden_section.hpp"
#include "unifold/random.hpp"
#include "unifold/unimodality_test.hpp"
#include "unifold/weighted_sample.hpp"

namespace unifold {

// Strict inequalities of the three-Dirac parameterization are enforced with
// this margin.
inline constexpr double kFeasibilityMargin = 1e-9;
// Slack on the boundary predicates mu1 <= U and mu1 >= F.
inline constexpr double kBoundarySlack = 1e-12;

/// Standardized three-point mixture with mu1 < mu2 < mu3.
struct ThreeDiracConfig {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;

  WeightedSample to_sample() const {
    return build_sample({{mu1, eps1}, {mu2, eps2}, {mu3, eps3}});
  }
};

/// Admissible range of mu1 for given (eps1, eps3).
struct Mu1Range {
  double lo;
  double hi;
};

inline Mu1Range admissible_mu1(double eps1, double eps3) {
  return {-std::sqrt((1.0 - eps1) / eps1), -std::sqrt(eps3 / (1.0 - eps3))};
}

/*
 * Rebuilds (eps2, mu2, mu3) from (mu1, eps1, eps3) so that the mixture has
 * mean 0, variance 1 and ordered locations:
 *   eps2 = 1 - eps1 - eps3
 *   mu2  = -eps1/(1-eps1) mu1 - 1/(1-eps1) sqrt(eps3/eps2) sqrt(1 - eps1 (1 + mu1^2))
 *   mu3  = -(eps1 mu1 + eps2 mu2) / eps3
 */
inline ThreeDiracConfig reconstruct(double mu1, double eps1, double eps3) {
  if (!(eps1 > 0.0 && eps1 < 1.0 && eps3 > 0.0 && eps3 < 1.0)) {
    throw Infeasible("eps1 and eps3 must lie in (0, 1)");
  }
  const double eps2 = 1.0 - eps1 - eps3;
  if (!(eps2 > kFeasibilityMargin)) {
    throw Infeasible("eps1 + eps3 must be below 1");
  }
  if (!(mu1 < 0.0)) {
    throw Infeasible("mu1 must be negative");
  }
  const double disc = 1.0 - eps1 * (1.0 + mu1 * mu1);
  if (!(disc > 0.0)) {
    throw Infeasible("1 - eps1 (1 + mu1^2) must be positive");
  }
  ThreeDiracConfig c;
  c.mu1 = mu1;
  c.eps1 = eps1;
  c.eps2 = eps2;
  c.eps3 = eps3;
  c.mu2 = -(eps1 / (1.0 - eps1)) * mu1 -
          (1.0 / (1.0 - eps1)) * std::sqrt(eps3 / eps2) * std::sqrt(disc);
  c.mu3 = -(eps1 * mu1 + eps2 * c.mu2) / eps3;
  if (!(c.mu1 < c.mu2 && c.mu2 < c.mu3)) {
    throw Infeasible("reconstructed locations are not ordered");
  }
  return c;
}

struct Prop3Bounds {
  double u1;
  double u2;
  double u;  // max(u1, u2)
  double f;
};

/*
 * U1 = -(sqrt 2 / 2) sqrt(r1 + sqrt(r1) sqrt(r3))
 * U2 = -(2 eps2 + 4 eps1 eps3) / sqrt(4 eps1 eps3 (eps2 + 4 eps1 eps3)) sqrt(r3)
 * F  = -(sqrt 3 / 2) sqrt(r1)
 * with r1 = (1 - eps1) / eps1 and r3 = eps3 / (1 - eps3).
 */
inline Prop3Bounds bounds(double eps1, double eps3) {
  const double eps2 = 1.0 - eps1 - eps3;
  const double r1 = (1.0 - eps1) / eps1;
  const double r3 = eps3 / (1.0 - eps3);
  Prop3Bounds b;
  b.u1 = -(std::sqrt(2.0) / 2.0) * std::sqrt(r1 + std::sqrt(r1) * std::sqrt(r3));
  const double c = 4.0 * eps1 * eps3;
  b.u2 = -(2.0 * eps2 + c) / std::sqrt(c * (eps2 + c)) * std::sqrt(r3);
  b.u = std::max(b.u1, b.u2);
  b.f = -(std::sqrt(3.0) / 2.0) * std::sqrt(r1);
  return b;
}

/// Exact pivot lies in the first gap (smallest-minimizer rule).
inline bool predicts_first_gap(const ThreeDiracConfig& c) {
  return c.mu1 <= bounds(c.eps1, c.eps3).u + kBoundarySlack;
}

/// Within the first-gap branch, the exact SFR is >= 1.
inline bool predicts_failure(const ThreeDiracConfig& c) {
  return c.mu1 >= bounds(c.eps1, c.eps3).f - kBoundarySlack;
}

struct BruteForcePivot {
  double pivot;
  double folded_variance;
  std::size_t gap;  // 1 or 2
};

/*
 * Locates the smallest exact pivot without the closed forms: a dense grid of
 * direct Var|X - s| evaluations over [mu1, mu3], then a golden-section
 * refinement inside each gap. Gap minima within `tie` are resolved toward
 * the first gap.
 */
inline BruteForcePivot brute_force_pivot(const WeightedSample& s, std::size_t grid = 4001,
                                         double tie = 1e-12) {
  const auto loc = s.locations();
  const auto f = [&s](double p) { return var_fold(s, p); };
  std::optional<BruteForcePivot> best;
  for (std::size_t g = 1; g < loc.size(); ++g) {
    const double lo = loc[g - 1];
    const double hi = loc[g];
    const std::size_t nodes = std::max<std::size_t>(
        8, static_cast<std::size_t>(grid * (hi - lo) / (loc.back() - loc.front())));
    const double h = (hi - lo) / static_cast<double>(nodes);
    std::size_t best_node = 0;
    double best_value = f(lo);
    for (std::size_t i = 1; i <= nodes; ++i) {
      const double v = f(lo + static_cast<double>(i) * h);
      if (v < best_value) {
        best_value = v;
        best_node = i;
      }
    }
    const double a = best_node == 0 ? lo : lo + static_cast<double>(best_node - 1) * h;
    const double b = std::min(hi, lo + static_cast<double>(best_node + 1) * h);
    const ScalarMinimum m = golden_section_minimize(f, a, b, 1e-13);
    if (!best || m.value < best->folded_variance - tie) {
      best = BruteForcePivot{m.x, m.value, g};
    }
  }
  return *best;
}

struct Prop3Check {
  bool predicted_first_gap = false;
  bool oracle_first_gap = false;
  bool pivot_agrees = false;
  bool predicted_fails = false;
  bool oracle_fails = false;
  bool failure_agrees = true;  // vacuous outside the first-gap branch
  double oracle_pivot = 0.0;
  double oracle_sfr = 0.0;
  Prop3Bounds bounds{};
};

/// Compares both closed-form predicates against the brute-force oracle.
inline Prop3Check check_prop3(const ThreeDiracConfig& c) {
  Prop3Check r;
  r.bounds = bounds(c.eps1, c.eps3);
  const BruteForcePivot oracle = brute_force_pivot(c.to_sample());
  r.oracle_pivot = oracle.pivot;
  r.oracle_sfr = 4.0 * oracle.folded_variance;
  r.predicted_first_gap = predicts_first_gap(c);
  r.oracle_first_gap = oracle.gap == 1;
  r.pivot_agrees = r.predicted_first_gap == r.oracle_first_gap;
  if (r.oracle_first_gap) {
    r.predicted_fails = predicts_failure(c);
    r.oracle_fails = r.oracle_sfr >= 1.0 - 1e-9;
    r.failure_agrees = r.predicted_fails == r.oracle_fails;
  }
  return r;
}

/// Population-level two-step procedure with threshold 1 on both steps.
struct PopulationDoubleFolding {
  double sfr1 = 0.0;
  bool stopped_at_step1 = false;
  std::optional<double> sfr2;
  std::optional<double> pivot1_approx;
};

inline PopulationDoubleFolding population_double_folding(const WeightedSample& s) {
  PopulationDoubleFolding r;
  r.sfr1 = exact_pivot(s).sfr;
  r.stopped_at_step1 = r.sfr1 < 1.0;
  if (!r.stopped_at_step1) {
    const SecondStep step = second_step(s);
    r.sfr2 = step.sfr2;
    r.pivot1_approx = step.pivot1_approx;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Second-step positivity search over the first-step failure region.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kObjectiveCount = 4;

inline const std::array<const char*, kObjectiveCount>& objective_names() {
  static const std::array<const char*, kObjectiveCount> names{
      "gamma - mu1 - mu2", "mu2 + mu3 - gamma", "U(eps2_1, eps2_3) - mu2_1",
      "F(eps2_1) - mu2_1"};
  return names;
}

struct SearchBox {
  double mu1_lo = -10.0;
  double mu1_hi = 0.0;
  double eps_lo = 0.01;
  double eps_hi = 0.99;
};

/// Objectives at one point, empty when the point is outside the region or
/// the fold at s** collapses to fewer than three locations.
inline std::optional<std::array<double, kObjectiveCount>> second_step_objectives(
    double mu1, double eps1, double eps3, const SearchBox& box = {}) {
  if (mu1 < box.mu1_lo || mu1 > box.mu1_hi || eps1 < box.eps_lo || eps1 > box.eps_hi ||
      eps3 < box.eps_lo || eps3 > box.eps_hi) {
    return std::nullopt;
  }
  if (!(1.0 - eps1 - eps3 > kFeasibilityMargin)) return std::nullopt;
  if (!(1.0 - eps1 * (1.0 + mu1 * mu1) > kFeasibilityMargin)) return std::nullopt;
  const Prop3Bounds b1 = bounds(eps1, eps3);
  if (mu1 < b1.f || mu1 > b1.u) return std::nullopt;
  ThreeDiracConfig c;
  try {
    c = reconstruct(mu1, eps1, eps3);
  } catch (const Infeasible&) {
    return std::nullopt;
  }
  const double gamma = c.eps1 * c.mu1 * c.mu1 * c.mu1 + c.eps2 * c.mu2 * c.mu2 * c.mu2 +
                       c.eps3 * c.mu3 * c.mu3 * c.mu3;
  std::array<double, kObjectiveCount> o{};
  o[0] = gamma - c.mu1 - c.mu2;
  o[1] = c.mu2 + c.mu3 - gamma;

  // Fold at s** = gamma / 2, sort, standardize.
  std::array<PointMass, 3> folded{PointMass{std::abs(c.mu1 - 0.5 * gamma), c.eps1},
                                  PointMass{std::abs(c.mu2 - 0.5 * gamma), c.eps2},
                                  PointMass{std::abs(c.mu3 - 0.5 * gamma), c.eps3}};
  std::sort(folded.begin(), folded.end(),
            [](const PointMass& a, const PointMass& b) { return a.location < b.location; });
  if (!(folded[0].location < folded[1].location && folded[1].location < folded[2].location)) {
    return std::nullopt;
  }
  double mean = 0.0;
  for (const auto& p : folded) mean += p.weight * p.location;
  double var = 0.0;
  for (const auto& p : folded) var += p.weight * (p.location - mean) * (p.location - mean);
  const double mu2_1 = (folded[0].location - mean) / std::sqrt(var);
  const Prop3Bounds b2 = bounds(folded[0].weight, folded[2].weight);
  o[2] = b2.u - mu2_1;
  o[3] = b2.f - mu2_1;
  return o;
}

struct ObjectiveMinimum {
  std::string name;
  double minimum = std::numeric_limits<double>::infinity();
  double grid_minimum = std::numeric_limits<double>::infinity();
  double mu1 = 0.0;
  double eps1 = 0.0;
  double eps3 = 0.0;
};

struct SecondStepReport {
  std::size_t resolution = 0;
  std::size_t restarts = 0;
  std::size_t feasible_cells = 0;
  std::size_t collapsed_cells = 0;
  std::array<ObjectiveMinimum, kObjectiveCount> objectives;
  bool all_positive = false;
  double wall_time_seconds = 0.0;
};

namespace detail {

struct GridPoint {
  double mu1;
  double eps1;
  double eps3;
  std::array<double, kObjectiveCount> values;
};

// Compass search restricted to the feasible region.
inline ObjectiveMinimum refine_objective(std::size_t k, const GridPoint& start,
                                         std::array<double, 3> step, const SearchBox& box) {
  std::array<double, 3> x{start.mu1, start.eps1, start.eps3};
  double fx = start.values[k];
  for (int it = 0; it < 20000; ++it) {
    bool improved = false;
    for (std::size_t d = 0; d < 3 && !improved; ++d) {
      for (double sign : {-1.0, 1.0}) {
        auto y = x;
        y[d] += sign * step[d];
        const auto o = second_step_objectives(y[0], y[1], y[2], box);
        if (o && (*o)[k] < fx) {
          x = y;
          fx = (*o)[k];
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      for (auto& s : step) s *= 0.5;
      if (step[0] < 1e-12 && step[1] < 1e-12 && step[2] < 1e-12) break;
    }
  }
  ObjectiveMinimum m;
  m.minimum = fx;
  m.mu1 = x[0];
  m.eps1 = x[1];
  m.eps3 = x[2];
  return m;
}

}  // namespace detail

/*
 * Minimizes the four second-step objectives over the first-step failure
 * region F(eps1) <= mu1 <= U(eps1, eps3) inside the box
 * mu1 in [-10, 0], eps1, eps3 in [0.01, 0.99]: a resolution^3 grid, then a
 * compass search from the `restarts` best grid points of each objective.
 * All four minima must be positive for the second step never to fail.
 */
inline SecondStepReport verify_second_step(std::size_t resolution = 200,
                                           std::size_t restarts = 100,
                                           const SearchBox& box = {}) {
  if (resolution < 2) {
    throw InvalidParameter("grid resolution must be at least 2");
  }
  if (restarts == 0) {
    throw InvalidParameter("need at least one local-search restart");
  }
  const auto started = std::chrono::steady_clock::now();
  SecondStepReport report;
  report.resolution = resolution;
  report.restarts = restarts;

  const double denom = static_cast<double>(resolution - 1);
  const auto node = [denom](double lo, double hi, std::size_t i) {
    return lo + (hi - lo) * static_cast<double>(i) / denom;
  };

  std::vector<detail::GridPoint> feasible;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double mu1 = node(box.mu1_lo, box.mu1_hi, i);
    for (std::size_t j = 0; j < resolution; ++j) {
      const double eps1 = node(box.eps_lo, box.eps_hi, j);
      for (std::size_t l = 0; l < resolution; ++l) {
        const double eps3 = node(box.eps_lo, box.eps_hi, l);
        if (!(1.0 - eps1 - eps3 > kFeasibilityMargin)) continue;
        const Prop3Bounds b = bounds(eps1, eps3);
        if (mu1 < b.f || mu1 > b.u) continue;
        const auto o = second_step_objectives(mu1, eps1, eps3, box);
        if (!o) {
          ++report.collapsed_cells;
          continue;
        }
        feasible.push_back({mu1, eps1, eps3, *o});
      }
    }
  }
  report.feasible_cells = feasible.size();
  if (feasible.empty()) {
    throw InvalidParameter("no feasible grid cell in the failure region");
  }

  const std::array<double, 3> step{(box.mu1_hi - box.mu1_lo) / denom,
                                   (box.eps_hi - box.eps_lo) / denom,
                                   (box.eps_hi - box.eps_lo) / denom};
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    // Grid order (mu1, eps1, eps3 lexicographic) breaks ties.
    std::vector<std::size_t> order(feasible.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t take = std::min(restarts, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        const double va = feasible[a].values[k];
                        const double vb = feasible[b].values[k];
                        return va < vb || (va == vb && a < b);
                      });
    ObjectiveMinimum best;
    best.grid_minimum = feasible[order[0]].values[k];
    for (std::size_t r = 0; r < take; ++r) {
      const ObjectiveMinimum m = detail::refine_objective(k, feasible[order[r]], step, box);
      if (m.minimum < best.minimum) {
        best.minimum = m.minimum;
        best.mu1 = m.mu1;
        best.eps1 = m.eps1;
        best.eps3 = m.eps3;
      }
    }
    best.name = objective_names()[k];
    report.objectives[k] = best;
  }
  report.all_positive = std::all_of(report.objectives.begin(), report.objectives.end(),
                                    [](const ObjectiveMinimum& m) { return m.minimum > 0.0; });
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

struct NeverFailsReport {
  std::size_t trials = 0;
  std::size_t counterexamples = 0;
  std::size_t outside_failure_region = 0;  // Phi*_1 < 1 despite the bounds
  double max_sfr2 = 0.0;
  double min_sfr1 = std::numeric_limits<double>::infinity();
};

/*
 * Draws feasible configurations inside the first-step failure region
 * (Phi*_1 >= 1 with s* in the first gap) and runs the population two-step
 * procedure. A counterexample is a configuration with Phi*_2 >= 1.
 */
inline NeverFailsReport dftu_never_fails_3dirac(std::size_t trials, Rng& rng,
                                                const SearchBox& box = {}) {
  if (trials == 0) {
    throw InvalidParameter("trials must be positive");
  }
  NeverFailsReport report;
  std::uniform_real_distribution<double> eps(box.eps_lo, box.eps_hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (report.trials < trials) {
    const double e1 = eps(rng);
    const double e3 = eps(rng);
    if (!(1.0 - e1 - e3 > kFeasibilityMargin)) continue;
    const Prop3Bounds b = bounds(e1, e3);
    const Mu1Range adm = admissible_mu1(e1, e3);
    const double lo = std::max({b.f, adm.lo, box.mu1_lo});
    const double hi = std::min({b.u, adm.hi, box.mu1_hi});
    if (!(hi > lo)) continue;
    const double mu1 = lo + (hi - lo) * unit(rng);
    ThreeDiracConfig c;
    try {
      c = reconstruct(mu1, e1, e3);
    } catch (const Infeasible&) {
      continue;
    }
    ++report.trials;
    const WeightedSample x = c.to_sample();
    const double sfr1 = exact_pivot(x).sfr;
    report.min_sfr1 = std::min(report.min_sfr1, sfr1);
    if (sfr1 < 1.0 - 1e-9) {
      ++report.outside_failure_region;
      continue;
    }
    const double s2 = approximate_pivot(x).pivot;
    double sfr2 = 0.0;
    try {
      sfr2 = dirac_sfr_exact(fold(x, s2)).sfr;
    } catch (const DegenerateSample&) {
      sfr2 = 0.0;
    }
    report.max_sfr2 = std::max(report.max_sfr2, sfr2);
    if (sfr2 >= 1.0) ++report.counterexamples;
  }
  return report;
}

inline void to_json(nlohmann::json& j, const ObjectiveMinimum& m) {
  j = nlohmann::json{{"objective", m.name},
                     {"minimum", m.minimum},
                     {"grid_minimum", m.grid_minimum},
                     {"argmin", {{"mu1", m.mu1}, {"eps1", m.eps1}, {"eps3", m.eps3}}}};
}

inline void to_json(nlohmann::json& j, const SecondStepReport& r) {
  j = nlohmann::json{{"resolution", r.resolution},
                     {"restarts", r.restarts},
                     {"feasible_cells", r.feasible_cells},
                     {"collapsed_cells", r.collapsed_cells},
                     {"objectives", r.objectives},
                     {"all_positive", r.all_positive},
                     {"wall_time_seconds", r.wall_time_seconds}};
}

inline void to_json(nlohmann::json& j, const NeverFailsReport& r) {
  j = nlohmann::json{{"trials", r.trials},
                     {"counterexamples", r.counterexamples},
                     {"outside_failure_region", r.outside_failure_region},
                     {"max_sfr2", r.max_sfr2},
                     {"min_sfr1", r.min_sfr1}};
}

}  // namespace unifold

#endif  // UNIFOLD_PROP_VERIFY_HPP
