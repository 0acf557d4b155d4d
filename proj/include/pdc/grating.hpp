#ifndef PDC_GRATING_HPP
#define PDC_GRATING_HPP

#include <string_view>

namespace pdc {

enum class GratingKind { hyperbolic, constant };

std::string_view to_string(GratingKind kind);
GratingKind grating_kind_from_string(std::string_view name);

// Effective grating vector K(z) of the poled crystal, treated as a
// continuous function of depth (no domain-wall discretization).
//
// hyperbolic: K(z) = -alpha / [4 (2 - z/L)^2] + beta, decreasing from
//             beta - alpha/16 at the entrance to beta - alpha/4 at the exit.
// constant:   K(z) = constant_k (periodically poled reference sample).
struct GratingProfile {
  GratingKind kind = GratingKind::hyperbolic;
  double alpha = 735.0;       // rad/mm
  double beta = 901.0;        // rad/mm
  double constant_k = 774.0;  // rad/mm
  double length = 5.0;        // mm

  static GratingProfile hyperbolic(double alpha, double beta, double length);
  static GratingProfile constant(double k, double length);

  // Throws DomainError when the profile is not usable.
  void validate() const;

  // K(z) in rad/mm for 0 <= z <= L.
  double k_profile(double z) const;

  // Closed-form accumulated phase phi(z) = int_0^z K(z') dz' in rad.
  double phase_integral(double z) const;

  // |K(0) - K(L)|; zero for constant profiles.
  double k_span() const;

  // Largest |delta - K(z)| over the crystal. K is monotone, so the endpoints suffice.
  double max_detuning_from(double delta) const;
};

}  // namespace pdc

#endif  // PDC_GRATING_HPP
