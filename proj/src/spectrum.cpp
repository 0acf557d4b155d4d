#include "pdc/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "pdc/errors.hpp"
#include "pdc/units.hpp"

namespace pdc {

std::vector<double> Spectrum::detunings_thz() const {
  std::vector<double> out(size());
  std::transform(detunings.begin(), detunings.end(), out.begin(), omega_to_thz);
  return out;
}

std::vector<double> Spectrum::wavelengths_nm() const {
  std::vector<double> out(size());
  std::transform(detunings.begin(), detunings.end(), out.begin(),
                 [&](double d) { return wavelength_nm_from_omega(omega0 + d); });
  return out;
}

Spectrum Spectrum::signal_half() const {
  Spectrum half;
  half.omega0 = omega0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (detunings[j] > 0.0) {
      half.detunings.push_back(detunings[j]);
      half.values.push_back(values[j]);
    }
  }
  return half;
}

Spectrum spectrum(const BogoliubovField& field) {
  Spectrum s;
  s.omega0 = field.freqs.omega0;
  s.detunings = field.detunings;
  s.values.resize(field.size());
  std::transform(field.B.begin(), field.B.end(), s.values.begin(),
                 [](const Complex& b) { return std::norm(b); });
  return s;
}

double outer_half_max_width(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("width: mismatched or empty arrays");
  const double peak = *std::max_element(y.begin(), y.end());
  if (!(peak > 0.0)) throw NumericalError("undefined bandwidth: spectrum has no positive maximum");
  const double half = 0.5 * peak;
  const std::size_t n = y.size();

  std::size_t lo = 0;
  while (y[lo] < half) ++lo;
  std::size_t hi = n - 1;
  while (y[hi] < half) --hi;

  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (y[inside] - half) / (y[inside] - y[outside]);
    return x[inside] + t * (x[outside] - x[inside]);
  };
  const double left = lo == 0 ? x[0] : crossing(lo, lo - 1);
  const double right = hi == n - 1 ? x[n - 1] : crossing(hi, hi + 1);
  return right - left;
}

double bandwidth(const Spectrum& spec, BandwidthMethod method) {
  const std::vector<double> x = spec.detunings_thz();
  if (method == BandwidthMethod::fwhm_outer) return outer_half_max_width(x, spec.values);

  double total = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    total += spec.values[j];
    mean += spec.values[j] * x[j];
  }
  const double peak = spec.values.empty() ? 0.0 : *std::max_element(spec.values.begin(), spec.values.end());
  if (!(peak > 0.0) || !(total > 0.0)) {
    throw NumericalError("undefined bandwidth: spectrum has no positive maximum");
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) var += spec.values[j] * (x[j] - mean) * (x[j] - mean);
  var /= total;
  return 2.0 * std::sqrt(2.0 * std::log(2.0)) * std::sqrt(var);
}

}  // namespace pdc
