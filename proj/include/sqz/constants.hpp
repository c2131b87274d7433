#pragma once

#include <cmath>

// Physical constants (CODATA 2018) and the unit conventions used throughout.
//
// Internal units: hbar = 1, Hamiltonians in angular frequency (rad/us),
// time in us, length in nm, number density in nm^-3, magnetic field in Tesla.
// Frequencies entering from config files (kHz, MHz, ...) are converted to
// angular units with an explicit 2*pi at the parsing boundary, nowhere else.

namespace sqz::constants {

inline constexpr double pi = 3.14159265358979323846;

// SI values
inline constexpr double hbar_SI = 1.054571817e-34;     // J s
inline constexpr double mu_bohr_SI = 9.2740100783e-24; // J/T
inline constexpr double mu0_over_4pi_SI = 1.0e-7;      // T m / A
inline constexpr double g_electron = 2.0023;           // NV electronic g-factor

// Dipolar coupling prefactor (mu0/4pi) (g mu_B)^2 / hbar.
// In rad/s * m^3; the nm^3/us version is what the coupling code uses:
// d(r) = dipolar_prefactor() * (3 cos^2(theta) - 1) / r^3  [rad/us, r in nm].
inline constexpr double dipolar_prefactor_SI() {
  const double gm = g_electron * mu_bohr_SI;
  return mu0_over_4pi_SI * gm * gm / hbar_SI; // rad/s m^3
}

inline constexpr double dipolar_prefactor() {
  // rad/s m^3 -> rad/us nm^3: 1e-6 (s->us) * 1e27 (m^3->nm^3)
  return dipolar_prefactor_SI() * 1.0e21;
}

// hbar / (g mu_B) in Tesla * us: converts a phase-accumulation rate into
// the magnetic field that would produce it.
inline constexpr double field_per_rate() {
  return hbar_SI / (g_electron * mu_bohr_SI) * 1.0e6;
}

// eta reported in T/sqrt(Hz): 1 T sqrt(us) = 1e-3 T/sqrt(Hz)
inline constexpr double tesla_sqrt_us_to_tesla_per_sqrt_hz = 1.0e-3;

} // namespace sqz::constants
