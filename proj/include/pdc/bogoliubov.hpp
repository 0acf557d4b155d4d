#ifndef PDC_BOGOLIUBOV_HPP
#define PDC_BOGOLIUBOV_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "pdc/dispersion.hpp"
#include "pdc/grating.hpp"
#include "pdc/integrators.hpp"

namespace pdc {

// Uniform, cell-centred detuning grid. With `mirrored` set, the cells cover
// [min, max] (0 <= min < max) and every detuning also appears negated, so the
// grid holds 2*count points ordered from -max to +max and each Omega has its
// conjugate -Omega.
struct SpectralGrid {
  double min_omega = 0.0;  // rad/s
  double max_omega = 0.0;  // rad/s
  std::size_t count = 0;
  bool mirrored = false;

  static SpectralGrid from_thz(double min_thz, double max_thz, std::size_t count, bool mirrored);

  void validate() const;
  double spacing() const { return (max_omega - min_omega) / static_cast<double>(count); }
  std::size_t size() const { return mirrored ? 2 * count : count; }
  std::vector<double> detunings() const;
};

struct SolverConfig {
  // Exactly one of these is the source of truth for the coupling strength.
  std::optional<double> nu0;
  std::optional<Complex> coupling_g;  // mm^-1

  SpectralGrid grid;
  IntegrationOptions integration;
  std::size_t workers = 0;  // 0: all hardware threads

  // Resolves the coupling for a profile; throws DomainError unless exactly
  // one source is set.
  Complex coupling(const GratingProfile& profile) const;
};

// Bogoliubov coefficients A(Omega, L), B(Omega, L) over a detuning grid,
// with the run's provenance.
struct BogoliubovField {
  std::vector<double> detunings;  // rad/s
  std::vector<double> mismatch;   // Delta(Omega), rad/mm
  std::vector<Complex> A;
  std::vector<Complex> B;

  GratingProfile profile;
  Complex coupling{};
  InteractionFrequencies freqs;
  Integrator integrator = Integrator::magnus6;
  Tolerances tolerances;

  std::size_t size() const { return detunings.size(); }
  bool empty() const { return detunings.empty(); }
  // max over the grid of ||A|^2 - |B|^2 - 1|.
  double max_invariant_deviation() const;
};

// |g| = sqrt(nu0 |K(0) - K(L)| / L), phase zero.
double coupling_from_nu0(double nu0, const GratingProfile& profile);

BogoliubovCoefficients solve_one(double detuning, const SolverConfig& config,
                                 const GratingProfile& profile, const DispersionModel& dispersion,
                                 const InteractionFrequencies& freqs,
                                 const TrajectoryObserver* observer = nullptr);

// Element-wise solve over config.grid. Output is indexed by grid position and
// does not depend on the worker count. Per-point failures are collected and
// reported together with the offending detunings.
BogoliubovField solve_grid(const SolverConfig& config, const GratingProfile& profile,
                           const DispersionModel& dispersion, const InteractionFrequencies& freqs);

// Same as solve_grid on an explicit list of detunings.
BogoliubovField solve_detunings(const std::vector<double>& detunings, const SolverConfig& config,
                                const GratingProfile& profile, const DispersionModel& dispersion,
                                const InteractionFrequencies& freqs);

}  // namespace pdc

#endif  // PDC_BOGOLIUBOV_HPP
