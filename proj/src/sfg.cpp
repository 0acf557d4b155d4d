#include "pdc/sfg.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "pdc/errors.hpp"
#include "pdc/parallel.hpp"
#include "pdc/units.hpp"

namespace pdc {

namespace {

constexpr double kFs = 1e-15;

struct SignalHalf {
  std::vector<double> omega;  // rad/s, ascending
  std::vector<Complex> weight;  // A B exp(-i Delta L) dnu
  std::vector<double> occupation;
  double spacing = 0.0;
  double dnu = 0.0;
};

SignalHalf signal_half(const BogoliubovField& field) {
  if (field.empty()) throw DomainError("empty field");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < field.size(); ++j) {
    if (field.detunings[j] > 0.0) idx.push_back(j);
  }
  if (idx.empty()) throw DomainError("SFG needs detunings with Omega > 0");
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return field.detunings[a] < field.detunings[b]; });

  SignalHalf h;
  if (idx.size() > 1) {
    h.spacing = field.detunings[idx[1]] - field.detunings[idx[0]];
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const double d = field.detunings[idx[k]] - field.detunings[idx[k - 1]];
      if (std::abs(d - h.spacing) > 1e-6 * h.spacing) throw DomainError("SFG needs a uniform grid");
    }
  } else {
    h.spacing = 2.0 * field.detunings[idx[0]];
  }
  h.dnu = omega_to_thz(h.spacing);
  const double length = field.profile.length;
  for (std::size_t j : idx) {
    h.omega.push_back(field.detunings[j]);
    h.occupation.push_back(std::norm(field.B[j]));
    h.weight.push_back(field.A[j] * field.B[j] * std::polar(h.dnu, -field.mismatch[j] * length));
  }

  const double peak = *std::max_element(h.occupation.begin(), h.occupation.end());
  if (!(peak > 0.0)) throw NumericalError("SFG needs a field with nonzero gain");
  if (h.occupation.size() > 2 && std::max(h.occupation.front(), h.occupation.back()) > 0.01 * peak) {
    throw DomainError("grid does not cover the support of |B|^2: edge value exceeds 1% of the peak");
  }
  return h;
}

void check_aliasing(const SignalHalf& h, const std::vector<double>& delays_fs) {
  const double limit_fs = kPi / h.spacing / kFs;
  for (double t : delays_fs) {
    if (std::abs(t) > limit_fs * (1.0 + 1e-12)) {  // slack for the THz to rad/fs round trip
      throw DomainError("delay " + std::to_string(t) + " fs exceeds the grid alias limit pi/dOmega = " +
                        std::to_string(limit_fs) + " fs");
    }
  }
}

}  // namespace

double pedestal_envelope(double tau_fs, double pulse_fwhm_ps) {
  if (pulse_fwhm_ps <= 0.0) return 1.0;
  const double w = std::sqrt(2.0) * pulse_fwhm_ps * 1e3;
  return std::exp(-4.0 * std::log(2.0) * tau_fs * tau_fs / (w * w));
}

double sfg_background_level(const BogoliubovField& field) {
  const SignalHalf h = signal_half(field);
  double total = 0.0;
  for (double n : h.occupation) total += n * h.dnu;
  return 8.0 * total * total;
}

std::vector<Complex> coherent_amplitude(const BogoliubovField& field, const std::vector<double>& delays_fs,
                                        std::size_t workers) {
  const SignalHalf h = signal_half(field);
  check_aliasing(h, delays_fs);
  std::vector<Complex> out(delays_fs.size());
  parallel_for(delays_fs.size(), workers, [&](std::size_t k) {
    const double tau = delays_fs[k] * kFs;
    Complex acc = 0.0;
    for (std::size_t j = 0; j < h.omega.size(); ++j) acc += h.weight[j] * std::polar(1.0, h.omega[j] * tau);
    out[k] = acc;
  });
  return out;
}

FftCoherent coherent_amplitude_fft(const BogoliubovField& field, std::size_t padding) {
  const SignalHalf h = signal_half(field);
  const std::size_t n = h.omega.size();
  std::size_t m = 1;
  while (m < std::max<std::size_t>(padding, 1) * n) m <<= 1;

  using Buffer = std::unique_ptr<fftw_complex, decltype(&fftw_free)>;
  Buffer buf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m)), &fftw_free);
  if (!buf) throw NumericalError("FFT buffer allocation failed");
  for (std::size_t j = 0; j < m; ++j) {
    buf.get()[j][0] = j < n ? h.weight[j].real() : 0.0;
    buf.get()[j][1] = j < n ? h.weight[j].imag() : 0.0;
  }
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan) throw NumericalError("FFT plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  // sum_j w_j e^{i (omega_0 + j dOmega) tau_k} with tau_k = 2 pi k / (m dOmega)
  FftCoherent out;
  out.delays_fs.resize(m);
  out.amplitude.resize(m);
  const auto half = static_cast<std::ptrdiff_t>(m / 2);
  for (std::size_t r = 0; r < m; ++r) {
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(r) - half;
    const std::size_t src = static_cast<std::size_t>((k + static_cast<std::ptrdiff_t>(m)) % static_cast<std::ptrdiff_t>(m));
    const double tau = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(m) * h.spacing);
    out.delays_fs[r] = tau / kFs;
    out.amplitude[r] = Complex(buf.get()[src][0], buf.get()[src][1]) * std::polar(1.0, h.omega.front() * tau);
  }
  return out;
}

SfgTrace sfg_trace(const BogoliubovField& field, const std::vector<double>& delays_fs, double pulse_fwhm_ps,
                   std::size_t workers) {
  if (delays_fs.empty()) throw DomainError("empty delay list");
  if (pulse_fwhm_ps < 0.0) throw DomainError("pulse FWHM must be >= 0");
  SfgTrace trace;
  trace.delays_fs = delays_fs;
  trace.pulse_fwhm_ps = pulse_fwhm_ps;
  trace.background_level = sfg_background_level(field);
  const auto amp = coherent_amplitude(field, delays_fs, workers);
  for (std::size_t k = 0; k < delays_fs.size(); ++k) {
    const double bg = pedestal_envelope(delays_fs[k], pulse_fwhm_ps) * trace.background_level;
    const double coh = 4.0 * std::norm(amp[k]);
    trace.background.push_back(bg);
    trace.coherent.push_back(coh);
    trace.intensity.push_back(bg + coh);
  }
  return trace;
}

PeakMetrics peak_metrics(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw DomainError("peak_metrics needs matching arrays of >= 3 points");
  const auto it = std::max_element(y.begin(), y.end());
  const auto p = static_cast<std::size_t>(it - y.begin());
  if (!(*it > 0.0)) throw NumericalError("no resolvable peak: trace is not positive");
  if (p == 0 || p + 1 == y.size()) throw NumericalError("no resolvable peak: maximum sits on the trace edge");

  PeakMetrics m;
  // parabola through the top three samples
  const double y0 = y[p - 1], y1 = y[p], y2 = y[p + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  const double shift = denom < 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
  const double h = 0.5 * (x[p + 1] - x[p - 1]);
  m.peak_delay_fs = x[p] + shift * h;
  m.peak_value = denom < 0.0 ? y1 - 0.25 * (y0 - y2) * shift : y1;

  const double half = 0.5 * m.peak_value;
  std::size_t l = p;
  while (l > 0 && y[l] > half) --l;
  std::size_t r = p;
  while (r + 1 < y.size() && y[r] > half) ++r;
  if (y[l] > half || y[r] > half) throw NumericalError("no resolvable peak: half maximum not reached inside the trace");
  const double xl = x[l] + (half - y[l]) * (x[l + 1] - x[l]) / (y[l + 1] - y[l]);
  const double xr = x[r - 1] + (half - y[r - 1]) * (x[r] - x[r - 1]) / (y[r] - y[r - 1]);

  m.left_half_width_fs = m.peak_delay_fs - xl;
  m.right_half_width_fs = xr - m.peak_delay_fs;
  m.fwhm_fs = xr - xl;
  m.asymmetry = (m.right_half_width_fs - m.left_half_width_fs) / m.fwhm_fs;
  return m;
}

PeakMetrics peak_metrics(const SfgTrace& trace) {
  PeakMetrics m = peak_metrics(trace.delays_fs, trace.coherent);
  if (trace.background_level > 0.0) m.peak_to_background = m.peak_value / trace.background_level;
  return m;
}

}  // namespace pdc
