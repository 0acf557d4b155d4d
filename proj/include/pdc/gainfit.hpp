#ifndef PDC_GAINFIT_HPP
#define PDC_GAINFIT_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "pdc/bogoliubov.hpp"
#include "pdc/errors.hpp"

namespace pdc {

struct GainCurve {
  std::vector<double> powers_mw;  // strictly increasing
  std::vector<double> flux;       // sum of |B|^2 dnu over the band (photons per pulse up to a constant)
  std::pair<double, double> band_nm{0.0, 0.0};

  void validate() const;
};

enum class FitModel {
  rosenbluth,   // N = A (exp(B P) - 1),    B per mW
  homogeneous,  // N = A sinh^2(B sqrt(P)), B per sqrt(mW)
};

std::string_view to_string(FitModel model);
FitModel fit_model_from_string(std::string_view name);

struct FitResult {
  FitModel model = FitModel::rosenbluth;
  double a = 0.0;
  double b = 0.0;
  double residual_norm = 0.0;  // RMS of ln(model) - ln(flux)
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // of (A, B)
  bool physical = false;  // A inside [0.01, 100]
  std::size_t iterations = 0;
};

class FitError : public NumericalError {
 public:
  FitError(const std::string& what, FitResult best) : NumericalError(what), best_(best) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

// Model value, and its logarithm evaluated without overflow.
double model_flux(FitModel model, double a, double b, double power);
double model_log_flux(FitModel model, double a, double b, double power);

struct FitOptions {
  std::size_t max_iterations = 4000;
  double tolerance = 1e-7;  // simplex size in (ln A, ln B); location is resolvable to ~sqrt(eps)
};

// Least squares on log residuals by Nelder-Mead in (ln A, ln B), started
// from a fixed grid of initial guesses; the best start wins. Points with
// zero flux are skipped.
FitResult fit_model(const GainCurve& curve, FitModel model, const FitOptions& options = {});

// Refit starting from the given parameters only.
FitResult refine_fit(const GainCurve& curve, const FitResult& start, const FitOptions& options = {});

// G = B P for a rosenbluth fit.
double gain_exponent(const FitResult& fit, double power_mw);

// Everything needed to turn a pump power into a solved field: |g|^2 = c P.
struct GainSetup {
  SolverConfig solver;  // grid and integration; its coupling fields are ignored
  GratingProfile profile;
  DispersionModel dispersion = DispersionModel::mgo_congruent_lithium_niobate();
  InteractionFrequencies freqs = InteractionFrequencies::from_pump_wavelength(532.0);
  double calibration = 0.0;     // c in mm^-2 per mW
  double coupling_phase = 0.0;  // rad

  Complex coupling(double power_mw) const;
};

// Grid detunings whose wave omega0 + Omega has a vacuum wavelength inside band_nm.
std::vector<double> band_detunings(const SpectralGrid& grid, const InteractionFrequencies& freqs,
                                   std::pair<double, double> band_nm);

GainCurve simulate_gain_curve(const std::vector<double>& powers_mw, std::pair<double, double> band_nm,
                              const GainSetup& setup);

struct PeakOccupation {
  double detuning = 0.0;  // rad/s
  double photons = 0.0;   // |B|^2 at the maximum
  double exponent() const;  // ln(1 + photons)
};

// Maximum of |B(Omega)|^2 over Omega in the grid's positive range: a coarse
// scan followed by Brent refinement around the best sample.
PeakOccupation peak_occupation(const GainSetup& setup, double power_mw, std::size_t coarse_points = 400);

struct Calibration {
  double calibration = 0.0;
  double fitted_exponent = 0.0;  // B * target power from the rosenbluth fit of the mode's N(P)
  double mode_detuning = 0.0;    // rad/s; brightest mode at the target power
  FitResult fit;
  GainCurve mode_curve;  // occupation of that mode vs power
  std::size_t iterations = 0;
};

// Occupation |B|^2 of one mode (fixed detuning) at each power.
GainCurve mode_gain_curve(const GainSetup& setup, double detuning, const std::vector<double>& powers_mw);

// Adjusts c until the mode that is brightest at target_power obeys
// N = A (exp(B P) - 1) over `powers_mw` with B * target_power = target_exponent.
// The gain law is fitted per mode: the envelope of the moving spectral
// maximum is not a single mode's law.
Calibration calibrate_power_scale(GainSetup setup, double target_exponent, double target_power_mw,
                                  const std::vector<double>& powers_mw, double tolerance = 1e-3,
                                  std::size_t max_iterations = 20);

}  // namespace pdc

#endif  // PDC_GAINFIT_HPP
