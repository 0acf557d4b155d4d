#include <doctest.h>

#include <random>

#include "approx.hpp"
#include "oracles.hpp"
#include "pdc/errors.hpp"
#include "pdc/grating.hpp"

using namespace pdc;

TEST_CASE("grating endpoints and span") {
  const GratingProfile g;
  CHECK(g.k_profile(0.0) == rel(855.0625, 1e-15));
  CHECK(g.k_profile(5.0) == rel(717.25, 1e-15));
  CHECK(g.k_span() == rel(137.8125, 1e-15));
  CHECK(g.phase_integral(0.0) == 0.0);
  CHECK(g.phase_integral(5.0) == rel(4045.625, 1e-15));

  const auto c = GratingProfile::constant(774.0, 5.0);
  CHECK(c.k_profile(0.0) == 774.0);
  CHECK(c.k_profile(3.3) == 774.0);
  CHECK(c.k_span() == 0.0);
  CHECK(c.phase_integral(2.0) == rel(1548.0));

  auto doubled = g;
  doubled.alpha *= 2;
  CHECK(doubled.k_span() == rel(2 * g.k_span(), 1e-15));
}

TEST_CASE("depth outside the crystal is a domain error") {
  const GratingProfile g;
  CHECK_THROWS_AS(g.k_profile(-1e-9), DomainError);
  CHECK_THROWS_AS(g.k_profile(5.0001), DomainError);
  CHECK_THROWS_AS(g.phase_integral(6.0), DomainError);
  CHECK_THROWS_AS(GratingProfile::hyperbolic(735, 901, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(grating_kind_from_string("chirped"), DomainError);
  CHECK(grating_kind_from_string(to_string(GratingKind::constant)) == GratingKind::constant);
}

TEST_CASE("phase integral matches adaptive quadrature") {
  const GratingProfile g;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, g.length);
  for (int k = 0; k < 100; ++k) {
    const double z = u(rng);
    const double q = oracle::adaptive_simpson([&](double x) { return g.k_profile(x); }, 0.0, z, 1e-12);
    REQUIRE(std::abs(g.phase_integral(z) - q) / q < 1e-9);
  }
  const double h = 1e-4, z = 2.5;
  const double slope = (g.phase_integral(z + h) - g.phase_integral(z - h)) / (2 * h);
  CHECK(slope == rel(g.k_profile(z), 1e-6));
}

TEST_CASE("hyperbolic profile decreases strictly") {
  const GratingProfile g;
  double prev = g.k_profile(0.0);
  for (int k = 1; k <= 10000; ++k) {
    const double cur = g.k_profile(g.length * k / 10000.0);
    REQUIRE(cur < prev);
    prev = cur;
  }
  CHECK(g.max_detuning_from(800.0) == rel(82.75));
}
