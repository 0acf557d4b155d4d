#include <doctest.h>

#include <random>

#include "approx.hpp"
#include "oracles.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/errors.hpp"
#include "pdc/units.hpp"

using namespace pdc;

TEST_CASE("index at 1064 nm matches an independent Sellmeier evaluation") {
  const auto m = DispersionModel::mgo_congruent_lithium_niobate();
  // value frozen from a separate evaluation of the published formula at 25 C
  CHECK(m.refractive_index(1.064) == rel(2.148288130425947, 1e-12));
  CHECK(m.refractive_index(1.064) == rel(oracle::n_e(1.064), 1e-14));
  CHECK(m.refractive_index(0.79) > m.refractive_index(1.60));
}

TEST_CASE("out-of-range wavelength names the valid interval") {
  const auto m = DispersionModel::mgo_congruent_lithium_niobate();
  CHECK_THROWS_AS(m.refractive_index(0.2), RangeError);
  try {
    m.refractive_index(0.2);
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
    CHECK(std::string(e.what()).find("4") != std::string::npos);
  }
  CHECK_THROWS_AS(m.refractive_index(5.0), RangeError);
}

TEST_CASE("constructor rejects malformed models") {
  CHECK_THROWS_AS(DispersionModel("nope", DispersionModel::gayer_coefficients(), 300, 0.5, 4), DomainError);
  CHECK_THROWS_AS(DispersionModel(DispersionModel::kGayerMgoCln, {1, 2, 3}, 300, 0.5, 4), DomainError);
  CHECK_THROWS_AS(DispersionModel(DispersionModel::kGayerMgoCln, DispersionModel::gayer_coefficients(), -1, 0.5, 4),
                  DomainError);
}

TEST_CASE("wavenumber is n omega / c and increases over the signal band") {
  const auto m = DispersionModel::mgo_congruent_lithium_niobate();
  const double w = omega_from_wavelength_um(0.8);
  CHECK(m.wavenumber(w) / (w / (kSpeedOfLight * 1e3)) == rel(m.refractive_index(0.8), 1e-14));
  double prev = 0.0;
  for (double nm = 900.0; nm >= 700.0; nm -= 0.5) {
    const double k = m.wavenumber(omega_from_wavelength_um(nm * 1e-3));
    CHECK(k > prev);
    prev = k;
  }
}

TEST_CASE("mismatch: consistency, evenness, oracle agreement") {
  const auto m = DispersionModel::mgo_congruent_lithium_niobate();
  const auto f = InteractionFrequencies::from_pump_wavelength(532.0);
  CHECK(f.omega0 == rel(kPi * kSpeedOfLight / 532e-9, 1e-15));
  CHECK(mismatch(0.0, m, f) == m.wavenumber(f.pump_omega()) - 2.0 * m.wavenumber(f.omega0));
  CHECK(mismatch(0.0, m, f) == rel(901.0613, 1e-6));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-thz_to_omega(160), thz_to_omega(160));
  for (int k = 0; k < 1000; ++k) {
    const double d = u(rng);
    REQUIRE(mismatch(d, m, f) == mismatch(-d, m, f));
  }
  for (double thz : {20.0, 75.0, 115.0, 150.0}) {
    CHECK(mismatch(thz_to_omega(thz), m, f) == rel(oracle::delta(thz_to_omega(thz)), 1e-12));
  }
  CHECK_THROWS_AS(mismatch(thz_to_omega(300), m, f), RangeError);
}

TEST_CASE("774 rad/mm phase matching falls in the 700-900 nm signal band") {
  const auto m = DispersionModel::mgo_congruent_lithium_niobate();
  const auto f = InteractionFrequencies::from_pump_wavelength(532.0);
  // bisection on the oracle, Delta decreasing in |Omega| here
  double lo = thz_to_omega(60), hi = thz_to_omega(160);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (oracle::delta(mid) > 774.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  CHECK(mismatch(root, m, f) == rel(774.0, 1e-9));
  const double signal_nm = wavelength_nm_from_omega(f.omega0 + root);
  CHECK(signal_nm > 700.0);
  CHECK(signal_nm < 900.0);
  CHECK(omega_to_thz(root) == rel(117.692, 1e-5));  // regression

  // band covered by the chirped grating spans tens of THz
  double first = 0, last = 0;
  for (double thz = 0.0; thz < 200.0; thz += 0.01) {
    const double d = mismatch(thz_to_omega(thz), m, f);
    if (d <= 855.0625 && d >= 717.25) {
      if (first == 0) first = thz;
      last = thz;
    }
  }
  CHECK(last - first > 30.0);
  CHECK(last - first < 100.0);
}

TEST_CASE("second derivative of the mismatch at zero detuning is step-stable") {
  const auto m = DispersionModel::mgo_congruent_lithium_niobate();
  const auto f = InteractionFrequencies::from_pump_wavelength(532.0);
  auto d2 = [&](double h) { return (mismatch(h, m, f) - 2 * mismatch(0, m, f) + mismatch(-h, m, f)) / (h * h); };
  const double h = thz_to_omega(2.0);
  const double a = d2(h), b = d2(h / 2);
  CHECK(std::isfinite(a));
  CHECK(std::abs(a - b) / std::abs(b) < 1e-3);
}
