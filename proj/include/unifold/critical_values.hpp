#ifndef UNIFOLD_CRITICAL_VALUES_HPP
#define UNIFOLD_CRITICAL_VALUES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifold/error.hpp"

namespace unifold {

/*
 * Lower empirical quantile: the order statistic of rank ceil(p * m) in the
 * sorted values (1-based). For a left-tail critical value this is the
 * conservative choice.
 */
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw InvalidParameter("quantile of an empty list");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidParameter("quantile order must lie in (0, 1)");
  }
  const auto m = static_cast<double>(values.size());
  // The small offset keeps p * m that should be an integer from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil(p * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

/// alpha = alpha1 + (1 - alpha1) alpha2, solved for alpha2.
inline double second_step_level(double alpha, double alpha1) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
  if (!(alpha1 > 0.0 && alpha1 < alpha)) {
    throw InvalidParameter("alpha1 must lie in (0, alpha)");
  }
  return (alpha - alpha1) / (1.0 - alpha1);
}

/// Critical values of the two-step test, calibrated on uniform data.
struct CriticalValues {
  double alpha = 0.05;
  double alpha1 = 0.03;
  double alpha2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::string pivot_policy;

  bool operator==(const CriticalValues&) const = default;
};

/// Critical value of a single-step test at level alpha.
struct FtuCriticalValue {
  double alpha = 0.05;
  double q = 0.0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::string pivot_policy;

  bool operator==(const FtuCriticalValue&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CriticalValues, alpha, alpha1, alpha2, q1, q2, n,
                                   replicates, seed, pivot_policy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FtuCriticalValue, alpha, q, n, replicates, seed,
                                   pivot_policy)

}  // namespace unifold

#endif  // UNIFOLD_CRITICAL_VALUES_HPP
