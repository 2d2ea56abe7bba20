#ifndef UNIFOLD_NORMAL_HPP
#define UNIFOLD_NORMAL_HPP

#include <cmath>
#include <numbers>

namespace unifold {

inline double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// erfc keeps full relative accuracy in the lower tail, where 1 + erf would not.
inline double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// E|Y - s| for Y ~ N(mean, sd^2), the folded normal mean. Reduces to
/// |s - mean| when sd == 0.
inline double folded_normal_mean(double mean, double sd, double s) {
  const double d = s - mean;
  if (sd == 0.0) {
    return std::abs(d);
  }
  const double z = d / sd;
  return d * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * sd * std_normal_pdf(z);
}

}  // namespace unifold

#endif  // UNIFOLD_NORMAL_HPP
