#include <doctest.h>

#include <random>

#include "approx.hpp"
#include "oracles.hpp"
#include "pdc/config.hpp"
#include "pdc/errors.hpp"
#include "pdc/gainfit.hpp"
#include "pdc/units.hpp"

using namespace pdc;

namespace {
GainCurve synthetic(FitModel model, double a, double b, std::size_t n, double p0, double p1, double noise = 0.0,
                    std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  GainCurve c;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = p0 + (p1 - p0) * static_cast<double>(k) / static_cast<double>(n - 1);
    c.powers_mw.push_back(p);
    c.flux.push_back(model_flux(model, a, b, p) * (noise > 0 ? std::exp(noise * z(rng)) : 1.0));
  }
  return c;
}

double ssr(const GainCurve& c, FitModel m, double a, double b) {
  double s = 0;
  for (std::size_t k = 0; k < c.flux.size(); ++k) {
    const double r = std::log(model_flux(m, a, b, c.powers_mw[k])) - std::log(c.flux[k]);
    s += r * r;
  }
  return s;
}
}  // namespace

TEST_CASE("noiseless rosenbluth data are recovered") {
  const auto c = synthetic(FitModel::rosenbluth, 1.0, 1.2, 10, 1.5, 15.0);
  const auto f = fit_model(c, FitModel::rosenbluth);
  CHECK(f.a == rel(1.0, 0.01));
  CHECK(f.b == rel(1.2, 0.01));
  CHECK(f.residual_norm < 1e-6);
  CHECK(f.physical);
  CHECK(std::isfinite(f.covariance(0, 0)));
}

TEST_CASE("homogeneous law loses on rosenbluth data with an unphysical amplitude") {
  const auto c = synthetic(FitModel::rosenbluth, 0.76, 1.2, 10, 1.5, 15.0);
  const auto ros = fit_model(c, FitModel::rosenbluth);
  const auto hom = fit_model(c, FitModel::homogeneous);
  CHECK(hom.residual_norm > ros.residual_norm);
  CHECK(hom.a < 0.01);
  CHECK_FALSE(hom.physical);

  // brute-force grids confirm both minima and the ordering
  const auto gr = oracle::grid_search([&](double a, double b) { return ssr(c, FitModel::rosenbluth, a, b); }, 0.1, 10,
                                      0.5, 3, 300);
  const auto gh = oracle::grid_search([&](double a, double b) { return ssr(c, FitModel::homogeneous, a, b); }, 1e-6,
                                      1, 0.5, 20, 300);
  CHECK(ssr(c, FitModel::rosenbluth, ros.a, ros.b) <= gr.ssr + 1e-12);
  CHECK(ssr(c, FitModel::homogeneous, hom.a, hom.b) <= gh.ssr + 1e-12);
  CHECK(gh.ssr > gr.ssr);
}

TEST_CASE("operating point arithmetic") {
  FitResult f;
  f.a = 1.0;
  f.b = 1.2;
  CHECK(gain_exponent(f, 15.0) == rel(18.0));
  CHECK(gain_exponent(f, 0.0) == 0.0);
  CHECK(gain_exponent(f, 30.0) == rel(2 * gain_exponent(f, 15.0)));
  const double n = model_flux(FitModel::rosenbluth, f.a, f.b, 15.0);
  CHECK(n == rel(6.566e7, 1e-3));
  CHECK(n > 2.5e7);
  CHECK(n < 1.0e8);
  f.model = FitModel::homogeneous;
  CHECK_THROWS_AS(gain_exponent(f, 15.0), DomainError);
  CHECK(model_log_flux(FitModel::rosenbluth, 1.0, 1.0, 2000.0) == rel(2000.0));
  CHECK(model_log_flux(FitModel::homogeneous, 1.0, 1.0, 1e6) == rel(2000.0 - 2 * std::log(2.0)));
}

TEST_CASE("refitting from the optimum does not raise the residual") {
  const auto c = synthetic(FitModel::rosenbluth, 0.76, 1.2, 10, 1.5, 15.0, 0.05, 4);
  for (FitModel m : {FitModel::rosenbluth, FitModel::homogeneous}) {
    const auto f = fit_model(c, m);
    CHECK(refine_fit(c, f).residual_norm <= f.residual_norm * (1 + 1e-12));
  }
}

TEST_CASE("rosenbluth wins on noisy rosenbluth data") {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = synthetic(FitModel::rosenbluth, 0.76, 1.2, 10, 1.5, 15.0, 0.05, seed);
    wins += fit_model(c, FitModel::rosenbluth).residual_norm < fit_model(c, FitModel::homogeneous).residual_norm;
  }
  CHECK(wins >= 95);
}

TEST_CASE("fit input checks") {
  GainCurve c = synthetic(FitModel::rosenbluth, 1.0, 1.0, 3, 1, 3);
  CHECK_THROWS_AS(fit_model(c, FitModel::rosenbluth), DomainError);
  c = synthetic(FitModel::rosenbluth, 1.0, 1.0, 6, 1, 6);
  c.powers_mw[3] = c.powers_mw[2];
  CHECK_THROWS_AS(fit_model(c, FitModel::rosenbluth), DomainError);
  c = synthetic(FitModel::rosenbluth, 1.0, 1.0, 6, 1, 6);
  FitOptions short_run;
  short_run.max_iterations = 3;
  try {
    fit_model(c, FitModel::rosenbluth, short_run);
    FAIL("expected a FitError");
  } catch (const FitError& e) {
    CHECK(e.best().a > 0.0);
    CHECK(std::isfinite(e.best().residual_norm));
  }
  CHECK(fit_model_from_string("homogeneous") == FitModel::homogeneous);
  CHECK_THROWS_AS(fit_model_from_string("cubic"), DomainError);
}

TEST_CASE("simulated gain curves") {
  const RunConfig cfg = RunConfig::defaults_with({});
  const GainSetup setup = cfg.gain_setup();

  const auto zero = simulate_gain_curve({0.0, 0.01}, cfg.gain.band_nm, setup);
  CHECK(zero.flux[0] == 0.0);
  CHECK(zero.flux[1] > 0.0);

  // perturbative limit: flux proportional to |g|^2. The first correction is
  // about (3/8) 2 pi nu0, so nu0 = 1e-3 keeps it well under 2%.
  const double p_max = 0.001 * cfg.grating.k_span() / (cfg.grating.length * setup.calibration);
  const auto low = simulate_gain_curve({p_max / 4, p_max / 2, p_max}, cfg.gain.band_nm, setup);
  CHECK(low.flux[1] / low.flux[0] == rel(2.0, 0.02));
  CHECK(low.flux[2] / low.flux[0] == rel(4.0, 0.02));

  CHECK_THROWS_AS(simulate_gain_curve({1.0}, {3000.0, 3100.0}, setup), DomainError);
  CHECK(band_detunings(cfg.grid(), cfg.frequencies(), cfg.gain.band_nm).size() >= 10);
}

TEST_CASE("peak search matches a dense scan") {
  RunConfig cfg = RunConfig::defaults_with({});
  GainSetup setup = cfg.gain_setup();
  const double power = 4.0;
  const auto peak = peak_occupation(setup, power);
  SolverConfig s = setup.solver;
  s.coupling_g = setup.coupling(power);
  s.grid = SpectralGrid::from_thz(70, 90, 2000, false);
  const auto f = solve_grid(s, setup.profile, setup.dispersion, setup.freqs);
  double best = 0.0;
  for (const auto& b : f.B) best = std::max(best, std::norm(b));
  CHECK(peak.photons >= best * (1 - 1e-3));
  CHECK(peak.exponent() == rel(std::log1p(peak.photons)));

  const auto mode = mode_gain_curve(setup, peak.detuning, {power});
  CHECK(mode.flux[0] == rel(peak.photons, 1e-9));
}
