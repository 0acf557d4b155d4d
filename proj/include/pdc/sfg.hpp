#ifndef PDC_SFG_HPP
#define PDC_SFG_HPP

#include <cstddef>
#include <vector>

#include "pdc/bogoliubov.hpp"

namespace pdc {

// Sum-frequency cross-correlation vs idler delay. Frequencies enter the
// integrals as ordinary frequency (THz), so the intensity is in THz^2 and
// only its shape is meaningful.
struct SfgTrace {
  std::vector<double> delays_fs;
  std::vector<double> intensity;   // background + coherent
  std::vector<double> background;  // envelope(tau) * 8 (sum |B|^2 dnu)^2
  std::vector<double> coherent;    // 4 |C(tau)|^2
  double background_level = 0.0;   // the CW pedestal 8 (sum |B|^2 dnu)^2
  double pulse_fwhm_ps = 0.0;      // 0: CW pump, flat pedestal

  std::size_t size() const { return delays_fs.size(); }
};

// Gaussian pedestal of FWHM sqrt(2) * pulse_fwhm, unity at tau = 0.
double pedestal_envelope(double tau_fs, double pulse_fwhm_ps);

// 8 [sum |B|^2 dnu]^2 over the Omega > 0 half of the field.
double sfg_background_level(const BogoliubovField& field);

// C(tau) = sum_{Omega > 0} A B exp(i(Omega tau - Delta L)) dnu by direct summation.
std::vector<Complex> coherent_amplitude(const BogoliubovField& field, const std::vector<double>& delays_fs,
                                        std::size_t workers = 0);

struct FftCoherent {
  std::vector<double> delays_fs;  // ascending, centred on 0
  std::vector<Complex> amplitude;
};

// The same sum evaluated on the FFT delay grid tau_k = 2 pi k / (M dOmega),
// with the signal half zero-padded to M >= padding * points.
FftCoherent coherent_amplitude_fft(const BogoliubovField& field, std::size_t padding = 4);

SfgTrace sfg_trace(const BogoliubovField& field, const std::vector<double>& delays_fs, double pulse_fwhm_ps,
                   std::size_t workers = 0);

struct PeakMetrics {
  double fwhm_fs = 0.0;
  double asymmetry = 0.0;  // (right - left) / (right + left) half-widths
  double peak_delay_fs = 0.0;
  double peak_value = 0.0;
  double peak_to_background = 0.0;  // coherent peak over the pedestal at tau = 0
  double left_half_width_fs = 0.0;
  double right_half_width_fs = 0.0;
};

// Metrics of an isolated peak y(tau). Throws NumericalError when the peak
// does not fall to half maximum on both sides.
PeakMetrics peak_metrics(const std::vector<double>& delays_fs, const std::vector<double>& values);
PeakMetrics peak_metrics(const SfgTrace& trace);

}  // namespace pdc

#endif  // PDC_SFG_HPP
