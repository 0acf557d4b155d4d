#ifndef PDC_SPECTRUM_HPP
#define PDC_SPECTRUM_HPP

#include <span>
#include <vector>

#include "pdc/bogoliubov.hpp"

namespace pdc {

// Photons per mode S(Omega) = |B(Omega, L)|^2 on the field's detuning grid.
struct Spectrum {
  std::vector<double> detunings;  // rad/s, ascending
  std::vector<double> values;     // photons per mode
  double omega0 = 0.0;

  std::size_t size() const { return detunings.size(); }
  std::vector<double> detunings_thz() const;
  // Vacuum wavelength of the wave at omega0 + Omega, in nm.
  std::vector<double> wavelengths_nm() const;
  // The Omega > 0 (signal) part.
  Spectrum signal_half() const;
};

Spectrum spectrum(const BogoliubovField& field);

enum class BandwidthMethod {
  fwhm_outer,  // distance between the outermost half-maximum crossings
  rms,         // 2 sqrt(2 ln 2) times the standard deviation of the normalized spectrum
};

// Bandwidth in THz. Throws NumericalError for a spectrum without a positive maximum.
double bandwidth(const Spectrum& spec, BandwidthMethod method);

// Outermost half-maximum width of y(x), crossings interpolated linearly.
// x must be ascending. Throws NumericalError when max(y) <= 0.
double outer_half_max_width(std::span<const double> x, std::span<const double> y);

}  // namespace pdc

#endif  // PDC_SPECTRUM_HPP
