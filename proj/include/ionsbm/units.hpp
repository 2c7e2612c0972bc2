#pragma once

#include <cmath>
#include <numbers>

// Unit conventions used throughout the library:
//   angular frequency  rad/ms
//   time               ms
//   length             um
//   mass               amu
// Config files quote ordinary frequencies in kHz (or MHz); 1 kHz = 1 cycle/ms,
// so the conversion to internal units is a bare factor of 2*pi (times 1000 for MHz).

namespace ionsbm::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double khz_to_rad_per_ms(double f_khz) { return two_pi * f_khz; }
inline constexpr double mhz_to_rad_per_ms(double f_mhz) { return two_pi * 1.0e3 * f_mhz; }
inline constexpr double rad_per_ms_to_khz(double w) { return w / two_pi; }

// CODATA-2018 values, SI.
inline constexpr double elementary_charge = 1.602176634e-19;   // C (exact)
inline constexpr double coulomb_constant = 8.9875517923e9;     // N m^2 / C^2
inline constexpr double atomic_mass_kg = 1.66053906660e-27;    // kg

// Characteristic Coulomb length l = (ke (Ze)^2 / (m wz^2))^(1/3) for a chain in a
// harmonic axial well; equilibrium positions are l times the dimensionless ones.
inline double length_scale_um(double mass_amu, int charge, double omega_z_rad_per_ms) {
    const double w_si = omega_z_rad_per_ms * 1.0e3;  // rad/s
    const double q = charge * elementary_charge;
    const double m = mass_amu * atomic_mass_kg;
    const double l_m = std::cbrt(coulomb_constant * q * q / (m * w_si * w_si));
    return l_m * 1.0e6;
}

// Inverse of length_scale_um.
inline double axial_freq_for_length_scale(double mass_amu, int charge, double l_um) {
    const double l_m = l_um * 1.0e-6;
    const double q = charge * elementary_charge;
    const double m = mass_amu * atomic_mass_kg;
    const double w_si = std::sqrt(coulomb_constant * q * q / (m * l_m * l_m * l_m));
    return w_si * 1.0e-3;
}

}  // namespace ionsbm::units
