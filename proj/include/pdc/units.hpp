#ifndef PDC_UNITS_HPP
#define PDC_UNITS_HPP

#include <numbers>

// Internal conventions: angular frequencies in rad/s, lengths in mm,
// wavevectors in rad/mm. Ordinary frequencies (THz) and wavelengths (nm, um)
// appear only at the I/O boundary.
namespace pdc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

constexpr double thz_to_omega(double thz) { return 2.0 * kPi * 1e12 * thz; }
constexpr double omega_to_thz(double omega) { return omega / (2.0 * kPi * 1e12); }

constexpr double omega_from_wavelength_um(double um) { return 2.0 * kPi * kSpeedOfLight / (um * 1e-6); }
constexpr double wavelength_um_from_omega(double omega) { return 2.0 * kPi * kSpeedOfLight / omega * 1e6; }
constexpr double wavelength_nm_from_omega(double omega) { return wavelength_um_from_omega(omega) * 1e3; }

}  // namespace pdc

#endif  // PDC_UNITS_HPP
