#ifndef UNIFOLD_GOLDEN_SECTION_HPP
#define UNIFOLD_GOLDEN_SECTION_HPP

#include <cmath>
#include <utility>

namespace unifold {

struct ScalarMinimum {
  double x;
  double value;
};

/*
 * Golden-section search for a minimum of f on [lo, hi]. Stops when the
 * bracket is narrower than `tolerance`. The bracket end points are also
 * compared against the interior estimate, so a minimum sitting on the
 * boundary is returned exactly.
 */
template <typename Function>
ScalarMinimum golden_section_minimize(Function&& f, double lo, double hi,
                                      double tolerance = 1e-10,
                                      int max_iterations = 500) {
  if (hi < lo) {
    std::swap(lo, hi);
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double f_lo = f(lo);
  const double f_hi = f(hi);

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iterations && (b - a) > tolerance; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }

  ScalarMinimum best{0.5 * (a + b), f(0.5 * (a + b))};
  if (f_lo <= best.value) {
    best = {lo, f_lo};
  }
  if (f_hi < best.value) {
    best = {hi, f_hi};
  }
  return best;
}

}  // namespace unifold

#endif  // UNIFOLD_GOLDEN_SECTION_HPP
