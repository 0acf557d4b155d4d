#ifndef PDC_TESTS_APPROX_HPP
#define PDC_TESTS_APPROX_HPP

#include <doctest.h>

// |a - b| < eps * max(|a|, |b|); doctest's default adds 1 to the scale,
// which turns the check absolute for values below one. Not for zero targets.
inline doctest::Approx rel(double value, double eps = 1e-12) {
  return doctest::Approx(value).epsilon(eps).scale(0.0);
}

#endif  // PDC_TESTS_APPROX_HPP
