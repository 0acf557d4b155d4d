#ifndef PDC_INTEGRATORS_HPP
#define PDC_INTEGRATORS_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>

#include "pdc/grating.hpp"

namespace pdc {

using Complex = std::complex<double>;

enum class Integrator {
  dormand_prince,  // adaptive embedded Runge-Kutta 5(4)
  magnus4,         // adaptive fourth-order Magnus, exact SU(1,1) steps
  magnus6,         // adaptive sixth-order Magnus, exact SU(1,1) steps
  rk4,             // classical fixed-step Runge-Kutta (cross-check)
};

std::string_view to_string(Integrator method);
Integrator integrator_from_string(std::string_view name);

struct Tolerances {
  double rtol = 1e-7;
  double atol = 1e-9;
};

struct IntegrationOptions {
  Integrator method = Integrator::magnus6;
  Tolerances tol;
  std::optional<double> max_step;  // mm; default derived from the oscillation rate
  std::size_t rk4_steps = 20000;
  std::size_t max_steps = 20'000'000;
};

struct BogoliubovCoefficients {
  Complex A{1.0, 0.0};
  Complex B{0.0, 0.0};
};

// Called on every accepted step with (z, A, B).
using TrajectoryObserver = std::function<void(double, Complex, Complex)>;

// Default maximal step: 2 pi / (10 max|delta - K|), floored at L / 1e6 and
// capped at L.
double default_max_step(double delta, const GratingProfile& profile);

// Integrates the coupled-mode system
//   dA/dz  =  i g  B* exp(+i theta(z)),
//   dB*/dz = -i g* A  exp(-i theta(z)),   theta(z) = delta z - phi(z),
// from A = 1, B = 0 at z = 0 to z = L, where delta is the wavevector mismatch
// (rad/mm) and phi the accumulated grating phase.
BogoliubovCoefficients propagate(double delta, Complex coupling, const GratingProfile& profile,
                                 const IntegrationOptions& options,
                                 const TrajectoryObserver* observer = nullptr);

}  // namespace pdc

#endif  // PDC_INTEGRATORS_HPP
