#include "pdc/dispersion.hpp"

#include <cmath>
#include <sstream>

#include "pdc/errors.hpp"
#include "pdc/units.hpp"

namespace pdc {

DispersionModel::DispersionModel(std::string formula, std::vector<double> coefficients,
                                 double temperature_k, double min_wavelength_um,
                                 double max_wavelength_um)
    : formula_(std::move(formula)),
      coefficients_(std::move(coefficients)),
      temperature_k_(temperature_k),
      min_wavelength_um_(min_wavelength_um),
      max_wavelength_um_(max_wavelength_um) {
  if (formula_ != kGayerMgoCln) {
    throw DomainError("unknown dispersion formula '" + formula_ + "'");
  }
  if (coefficients_.size() != 10) {
    throw DomainError("formula " + formula_ + " expects 10 coefficients");
  }
  if (!(temperature_k_ > 0.0)) {
    throw DomainError("temperature must be positive (kelvin)");
  }
  if (!(min_wavelength_um_ > 0.0 && max_wavelength_um_ > min_wavelength_um_)) {
    throw DomainError("invalid wavelength validity range");
  }
}

std::vector<double> DispersionModel::gayer_coefficients() {
  return {5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2, 2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4};
}

DispersionModel DispersionModel::mgo_congruent_lithium_niobate(double temperature_k) {
  return DispersionModel(kGayerMgoCln, gayer_coefficients(), temperature_k, 0.5, 4.0);
}

double DispersionModel::refractive_index(double wavelength_um) const {
  if (!in_range(wavelength_um)) {
    std::ostringstream msg;
    msg << "wavelength " << wavelength_um << " um outside the valid interval [" << min_wavelength_um_
        << ", " << max_wavelength_um_ << "] um";
    throw RangeError(msg.str());
  }
  const auto& c = coefficients_;
  const double t = temperature_k_ - 273.15;
  const double f = (t - 24.5) * (t + 570.82);
  const double l2 = wavelength_um * wavelength_um;
  const double uv = c[2] + c[8] * f;
  const double n2 = c[0] + c[6] * f + (c[1] + c[7] * f) / (l2 - uv * uv) +
                    (c[3] + c[9] * f) / (l2 - c[4] * c[4]) - c[5] * l2;
  return std::sqrt(n2);
}

double DispersionModel::wavenumber(double omega) const {
  const double n = refractive_index(wavelength_um_from_omega(omega));
  return n * omega / kSpeedOfLight * 1e-3;
}

InteractionFrequencies InteractionFrequencies::from_pump_wavelength(double pump_wavelength_nm) {
  if (!(pump_wavelength_nm > 0.0)) throw DomainError("pump wavelength must be positive");
  return {pump_wavelength_nm, kPi * kSpeedOfLight / (pump_wavelength_nm * 1e-9)};
}

double mismatch(double detuning, const DispersionModel& model, const InteractionFrequencies& freqs) {
  const double w0 = freqs.omega0;
  const double d = std::abs(detuning);
  if (d >= w0) throw RangeError("detuning reaches or exceeds the degenerate frequency");
  const double kp = model.wavenumber(freqs.pump_omega());
  return kp - (model.wavenumber(w0 + d) + model.wavenumber(w0 - d));
}

}  // namespace pdc
