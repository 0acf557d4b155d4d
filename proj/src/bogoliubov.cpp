#include "pdc/bogoliubov.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "pdc/errors.hpp"
#include "pdc/parallel.hpp"
#include "pdc/units.hpp"

namespace pdc {

SpectralGrid SpectralGrid::from_thz(double min_thz, double max_thz, std::size_t count, bool mirrored) {
  SpectralGrid g{thz_to_omega(min_thz), thz_to_omega(max_thz), count, mirrored};
  g.validate();
  return g;
}

void SpectralGrid::validate() const {
  if (count == 0) throw DomainError("grid needs at least one point");
  if (!(max_omega > min_omega)) throw DomainError("grid max must exceed grid min");
  if (mirrored && min_omega < 0.0) throw DomainError("mirrored grid needs min >= 0");
}

std::vector<double> SpectralGrid::detunings() const {
  validate();
  const double step = spacing();
  std::vector<double> cells(count);
  for (std::size_t j = 0; j < count; ++j) cells[j] = min_omega + (static_cast<double>(j) + 0.5) * step;
  if (!mirrored) return cells;
  std::vector<double> out;
  out.reserve(2 * count);
  for (std::size_t j = count; j-- > 0;) out.push_back(-cells[j]);
  out.insert(out.end(), cells.begin(), cells.end());
  return out;
}

Complex SolverConfig::coupling(const GratingProfile& profile) const {
  if (nu0.has_value() == coupling_g.has_value()) {
    throw DomainError("exactly one of nu0 and coupling_g must be set");
  }
  if (coupling_g) return *coupling_g;
  return {coupling_from_nu0(*nu0, profile), 0.0};
}

double BogoliubovField::max_invariant_deviation() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    worst = std::max(worst, std::abs(std::norm(A[j]) - std::norm(B[j]) - 1.0));
  }
  return worst;
}

double coupling_from_nu0(double nu0, const GratingProfile& profile) {
  if (!(nu0 >= 0.0) || !std::isfinite(nu0)) throw DomainError("nu0 must be finite and non-negative");
  const double span = profile.k_span();
  if (span <= 0.0) {
    throw DomainError("nu0 is undefined for a constant grating (K(0) = K(L)); set coupling_g directly");
  }
  return std::sqrt(nu0 * span / profile.length);
}

BogoliubovCoefficients solve_one(double detuning, const SolverConfig& config,
                                 const GratingProfile& profile, const DispersionModel& dispersion,
                                 const InteractionFrequencies& freqs,
                                 const TrajectoryObserver* observer) {
  const double delta = mismatch(detuning, dispersion, freqs);
  return propagate(delta, config.coupling(profile), profile, config.integration, observer);
}

BogoliubovField solve_detunings(const std::vector<double>& detunings, const SolverConfig& config,
                                const GratingProfile& profile, const DispersionModel& dispersion,
                                const InteractionFrequencies& freqs) {
  profile.validate();
  const Complex g = config.coupling(profile);
  const std::size_t n = detunings.size();

  BogoliubovField field;
  field.detunings = detunings;
  field.mismatch.assign(n, 0.0);
  field.A.assign(n, Complex{1.0, 0.0});
  field.B.assign(n, Complex{});
  field.profile = profile;
  field.coupling = g;
  field.freqs = freqs;
  field.integrator = config.integration.method;
  field.tolerances = config.integration.tol;

  std::vector<std::string> failures(n);
  std::vector<char> range_failure(n, 0);
  parallel_for(n, config.workers, [&](std::size_t j) {
    try {
      field.mismatch[j] = mismatch(detunings[j], dispersion, freqs);
      const auto c = propagate(field.mismatch[j], g, profile, config.integration);
      field.A[j] = c.A;
      field.B[j] = c.B;
    } catch (const RangeError& e) {
      failures[j] = e.what();
      range_failure[j] = 1;
    } catch (const std::exception& e) {
      failures[j] = e.what();
    }
  });

  std::ostringstream msg;
  std::size_t failed = 0;
  bool all_range = true;
  for (std::size_t j = 0; j < n; ++j) {
    if (failures[j].empty()) continue;
    if (failed < 8) {
      msg << (failed ? "; " : "") << "Omega/2pi = " << omega_to_thz(detunings[j]) << " THz: " << failures[j];
    }
    all_range = all_range && range_failure[j];
    ++failed;
  }
  if (failed > 0) {
    std::ostringstream full;
    full << failed << " of " << n << " grid points failed: " << msg.str() << (failed > 8 ? "; ..." : "");
    if (all_range) throw RangeError(full.str());
    throw NumericalError(full.str());
  }
  return field;
}

BogoliubovField solve_grid(const SolverConfig& config, const GratingProfile& profile,
                           const DispersionModel& dispersion, const InteractionFrequencies& freqs) {
  return solve_detunings(config.grid.detunings(), config, profile, dispersion, freqs);
}

}  // namespace pdc
