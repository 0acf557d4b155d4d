#ifndef PDC_DISPERSION_HPP
#define PDC_DISPERSION_HPP

#include <string>
#include <vector>

namespace pdc {

// Extraordinary refractive index of the nonlinear crystal as a function of
// wavelength and temperature. All three interacting waves are
// extraordinary-polarized (type-0), so this is the only branch modelled.
//
// The formula is selected by identifier; currently supported:
//  - "gayer2008_mgo_cln_e": temperature-dependent Sellmeier equation of
//    Gayer et al., Appl. Phys. B 91, 343 (2008) for 5 mol% MgO-doped
//    congruent LiNbO3, extraordinary wave:
//      n^2 = a1 + b1 f + (a2 + b2 f)/(l^2 - (a3 + b3 f)^2)
//               + (a4 + b4 f)/(l^2 - a5^2) - a6 l^2,
//      f = (T - 24.5 C)(T + 570.82),  l in um, T in Celsius.
//    Coefficients are ordered {a1, a2, a3, a4, a5, a6, b1, b2, b3, b4}.
class DispersionModel {
 public:
  static constexpr const char* kGayerMgoCln = "gayer2008_mgo_cln_e";

  DispersionModel(std::string formula, std::vector<double> coefficients, double temperature_k,
                  double min_wavelength_um, double max_wavelength_um);

  // Published 5 mol% MgO:CLN coefficients at the given temperature.
  static DispersionModel mgo_congruent_lithium_niobate(double temperature_k = 298.15);
  static std::vector<double> gayer_coefficients();

  // n_e at a wavelength in um. Throws RangeError outside the validity window.
  double refractive_index(double wavelength_um) const;

  // k = n_e(lambda) omega / c in rad/mm.
  double wavenumber(double omega) const;

  bool in_range(double wavelength_um) const {
    return wavelength_um >= min_wavelength_um_ && wavelength_um <= max_wavelength_um_;
  }

  const std::string& formula() const { return formula_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double temperature_k() const { return temperature_k_; }
  double min_wavelength_um() const { return min_wavelength_um_; }
  double max_wavelength_um() const { return max_wavelength_um_; }

 private:
  std::string formula_;
  std::vector<double> coefficients_;
  double temperature_k_;
  double min_wavelength_um_;
  double max_wavelength_um_;
};

// Degenerate frequency of the interaction: omega0 = omega_p / 2.
struct InteractionFrequencies {
  double pump_wavelength_nm = 532.0;
  double omega0 = 0.0;  // rad/s

  static InteractionFrequencies from_pump_wavelength(double pump_wavelength_nm);
  double pump_omega() const { return 2.0 * omega0; }
};

// Collinear wavevector mismatch Delta(Omega) = k_p - k(w0 + Omega) - k(w0 - Omega),
// in rad/mm. Even in the detuning bit-for-bit.
double mismatch(double detuning, const DispersionModel& model, const InteractionFrequencies& freqs);

}  // namespace pdc

#endif  // PDC_DISPERSION_HPP
