#include "pdc/grating.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdc/errors.hpp"

namespace pdc {

std::string_view to_string(GratingKind kind) {
  return kind == GratingKind::hyperbolic ? "hyperbolic" : "constant";
}

GratingKind grating_kind_from_string(std::string_view name) {
  if (name == "hyperbolic") return GratingKind::hyperbolic;
  if (name == "constant") return GratingKind::constant;
  throw DomainError("unknown grating kind '" + std::string(name) + "'");
}

GratingProfile GratingProfile::hyperbolic(double alpha, double beta, double length) {
  GratingProfile p;
  p.kind = GratingKind::hyperbolic;
  p.alpha = alpha;
  p.beta = beta;
  p.length = length;
  p.validate();
  return p;
}

GratingProfile GratingProfile::constant(double k, double length) {
  GratingProfile p;
  p.kind = GratingKind::constant;
  p.constant_k = k;
  p.length = length;
  p.validate();
  return p;
}

void GratingProfile::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("grating length must be positive");
  if (kind == GratingKind::hyperbolic) {
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
      throw DomainError("hyperbolic grating needs finite alpha > 0 and finite beta");
    }
  } else if (!std::isfinite(constant_k)) {
    throw DomainError("constant grating vector must be finite");
  }
}

namespace {
void check_depth(double z, double length) {
  if (!(z >= 0.0 && z <= length)) {
    throw DomainError("depth z = " + std::to_string(z) + " mm outside [0, " + std::to_string(length) + "] mm");
  }
}
}  // namespace

double GratingProfile::k_profile(double z) const {
  check_depth(z, length);
  if (kind == GratingKind::constant) return constant_k;
  const double u = 2.0 - z / length;
  return -alpha / (4.0 * u * u) + beta;
}

double GratingProfile::phase_integral(double z) const {
  check_depth(z, length);
  if (kind == GratingKind::constant) return constant_k * z;
  return beta * z - 0.25 * alpha * length * (1.0 / (2.0 - z / length) - 0.5);
}

double GratingProfile::k_span() const {
  if (kind == GratingKind::constant) return 0.0;
  return std::abs(k_profile(0.0) - k_profile(length));
}

double GratingProfile::max_detuning_from(double delta) const {
  return std::max(std::abs(delta - k_profile(0.0)), std::abs(delta - k_profile(length)));
}

}  // namespace pdc
